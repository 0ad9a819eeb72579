#include "lambert/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace lambert {

namespace {

void check_dims(const ToyClassifier& clf, const Image& image) {
  if (image.width != clf.width || image.height != clf.height)
    throw std::invalid_argument("classifier: image dims " + std::to_string(image.width) + "x" +
                                std::to_string(image.height) + " do not match classifier " +
                                std::to_string(clf.width) + "x" + std::to_string(clf.height));
}

void check_label(const ToyClassifier& clf, int label) {
  if (label < 0 || label >= clf.classes)
    throw std::invalid_argument("classifier: label out of range");
}

std::vector<double> hidden_activations(const ToyClassifier& clf, const Image& image) {
  const int d = clf.input_dim();
  std::vector<double> h(clf.hidden);
  for (int i = 0; i < clf.hidden; ++i) {
    double z = clf.b1[i];
    const double* row = clf.w1.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) z += row[j] * image.data[j];
    h[i] = std::tanh(z);
  }
  return h;
}

std::vector<double> logits_of(const ToyClassifier& clf, const std::vector<double>& h) {
  std::vector<double> z(clf.classes);
  for (int k = 0; k < clf.classes; ++k) {
    double acc = clf.b2[k];
    const double* row = clf.w2.data() + static_cast<std::size_t>(k) * clf.hidden;
    for (int i = 0; i < clf.hidden; ++i) acc += row[i] * h[i];
    z[k] = acc;
  }
  return z;
}

constexpr char kMagic[5] = {'P', 'C', 'L', 'F', '1'};

}  // namespace

ToyClassifier ToyClassifier::random_init(int width, int height, int classes, int hidden,
                                         std::uint64_t seed) {
  if (width < 1 || height < 1 || classes < 2 || hidden < 1)
    throw std::invalid_argument("classifier: bad shape");
  ToyClassifier clf;
  clf.width = width;
  clf.height = height;
  clf.classes = classes;
  clf.hidden = hidden;
  const int d = clf.input_dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  clf.w1.resize(static_cast<std::size_t>(hidden) * d);
  clf.b1.assign(hidden, 0.0);
  clf.w2.resize(static_cast<std::size_t>(classes) * hidden);
  clf.b2.assign(classes, 0.0);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden));
  for (double& w : clf.w1) w = s1 * gauss(rng);
  for (double& w : clf.w2) w = s2 * gauss(rng);
  return clf;
}

void save_classifier(const ToyClassifier& clf, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(kMagic, 5);
  const std::int32_t dims[4] = {clf.width, clf.height, clf.classes, clf.hidden};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  auto dump = [&](const std::vector<double>& v) {
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
  };
  dump(clf.w1);
  dump(clf.b1);
  dump(clf.w2);
  dump(clf.b2);
}

ToyClassifier load_classifier(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, kMagic, 5) != 0)
    throw std::runtime_error(path + ": not a PCLF1 classifier file");
  std::int32_t dims[4];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] < 1 || dims[1] < 1 || dims[2] < 2 || dims[3] < 1 || dims[0] > 4096 ||
      dims[1] > 4096 || dims[2] > 100000 || dims[3] > 1000000)
    throw std::runtime_error(path + ": malformed classifier header");
  ToyClassifier clf;
  clf.width = dims[0];
  clf.height = dims[1];
  clf.classes = dims[2];
  clf.hidden = dims[3];
  auto slurp = [&](std::vector<double>& v, std::size_t n) {
    v.resize(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw std::runtime_error(path + ": truncated classifier file");
  };
  slurp(clf.w1, static_cast<std::size_t>(clf.hidden) * clf.input_dim());
  slurp(clf.b1, clf.hidden);
  slurp(clf.w2, static_cast<std::size_t>(clf.classes) * clf.hidden);
  slurp(clf.b2, clf.classes);
  return clf;
}

std::vector<double> softmax(std::vector<double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& z : logits) {
    z = std::exp(z - top);
    sum += z;
  }
  for (double& z : logits) z /= sum;
  return logits;
}

std::vector<double> forward(const ToyClassifier& clf, const Image& image) {
  check_dims(clf, image);
  return softmax(logits_of(clf, hidden_activations(clf, image)));
}

Image input_grad(const ToyClassifier& clf, const Image& image, int label_decrease,
                 std::optional<int> label_increase) {
  check_dims(clf, image);
  check_label(clf, label_decrease);
  if (label_increase) check_label(clf, *label_increase);

  const std::vector<double> h = hidden_activations(clf, image);
  const std::vector<double> probs = softmax(logits_of(clf, h));

  // C = log p_{L_d} - log p_{L_i}; d C / d logits:
  std::vector<double> dz(clf.classes);
  if (label_increase) {
    for (int k = 0; k < clf.classes; ++k)
      dz[k] = (k == label_decrease ? 1.0 : 0.0) - (k == *label_increase ? 1.0 : 0.0);
  } else {
    for (int k = 0; k < clf.classes; ++k) dz[k] = (k == label_decrease ? 1.0 : 0.0) - probs[k];
  }

  std::vector<double> dh(clf.hidden, 0.0);
  for (int k = 0; k < clf.classes; ++k) {
    const double* row = clf.w2.data() + static_cast<std::size_t>(k) * clf.hidden;
    for (int i = 0; i < clf.hidden; ++i) dh[i] += dz[k] * row[i];
  }
  const int d = clf.input_dim();
  Image grad(clf.width, clf.height);
  for (int i = 0; i < clf.hidden; ++i) {
    const double di = dh[i] * (1.0 - h[i] * h[i]);
    if (di == 0.0) continue;
    const double* row = clf.w1.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) grad.data[j] += di * row[j];
  }
  return grad;
}

namespace {

// One SGD step on a batch; returns the number of correct argmax predictions.
int sgd_batch(ToyClassifier& clf, const std::vector<const Sample*>& batch, double lr) {
  const int d = clf.input_dim();
  std::vector<double> gw1(clf.w1.size(), 0.0), gb1(clf.b1.size(), 0.0);
  std::vector<double> gw2(clf.w2.size(), 0.0), gb2(clf.b2.size(), 0.0);
  int correct = 0;
  for (const Sample* s : batch) {
    const std::vector<double> h = hidden_activations(clf, s->image);
    const std::vector<double> probs = softmax(logits_of(clf, h));
    const int pred = static_cast<int>(
        std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (pred == s->label) ++correct;
    // d CE / d logits = p - onehot
    for (int k = 0; k < clf.classes; ++k) {
      const double dzk = probs[k] - (k == s->label ? 1.0 : 0.0);
      gb2[k] += dzk;
      double* g2 = gw2.data() + static_cast<std::size_t>(k) * clf.hidden;
      for (int i = 0; i < clf.hidden; ++i) g2[i] += dzk * h[i];
    }
    for (int i = 0; i < clf.hidden; ++i) {
      double dhi = 0.0;
      for (int k = 0; k < clf.classes; ++k)
        dhi += (probs[k] - (k == s->label ? 1.0 : 0.0)) *
               clf.w2[static_cast<std::size_t>(k) * clf.hidden + i];
      const double di = dhi * (1.0 - h[i] * h[i]);
      if (di == 0.0) continue;
      gb1[i] += di;
      double* g1 = gw1.data() + static_cast<std::size_t>(i) * d;
      for (int j = 0; j < d; ++j) g1[j] += di * s->image.data[j];
    }
  }
  const double scale = lr / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < clf.w1.size(); ++i) clf.w1[i] -= scale * gw1[i];
  for (std::size_t i = 0; i < clf.b1.size(); ++i) clf.b1[i] -= scale * gb1[i];
  for (std::size_t i = 0; i < clf.w2.size(); ++i) clf.w2[i] -= scale * gw2[i];
  for (std::size_t i = 0; i < clf.b2.size(); ++i) clf.b2[i] -= scale * gb2[i];
  return correct;
}

}  // namespace

TrainHistory train_toy(ToyClassifier& clf, const std::vector<Sample>& data,
                       const TrainOptions& options, const AugmentFn& augment) {
  if (data.empty()) throw std::invalid_argument("train_toy: empty dataset");
  TrainHistory history;
  std::mt19937_64 rng(options.seed);
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::vector<Sample> injected;
    if (augment) injected = augment(clf, epoch, options.inject_per_epoch, rng);

    std::vector<const Sample*> order;
    order.reserve(data.size() + injected.size());
    for (const Sample& s : data) order.push_back(&s);
    for (const Sample& s : injected) order.push_back(&s);
    std::shuffle(order.begin(), order.end(), rng);

    int correct = 0;
    for (std::size_t start = 0; start < order.size(); start += options.batch_size) {
      const std::size_t stop = std::min(order.size(), start + options.batch_size);
      std::vector<const Sample*> batch(order.begin() + start, order.begin() + stop);
      correct += sgd_batch(clf, batch, options.learning_rate);
    }
    history.train_accuracy.push_back(static_cast<double>(correct) /
                                     static_cast<double>(order.size()));
  }
  return history;
}

double accuracy(const ToyClassifier& clf, const std::vector<Sample>& data) {
  if (data.empty()) return 0.0;
  int correct = 0;
  for (const Sample& s : data) {
    const std::vector<double> probs = forward(clf, s.image);
    const int pred =
        static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
    if (pred == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

}  // namespace lambert
