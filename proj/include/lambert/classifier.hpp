#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lambert/image.hpp"

namespace lambert {

// One hidden layer with tanh (smooth, so analytic input gradients agree with
// finite differences everywhere), softmax output. Stands in for the network
// f whose pixel gradients drive the attacks; real networks plug in through
// the gradient-provider protocol instead.
struct ToyClassifier {
  int width = 0;
  int height = 0;
  int classes = 0;
  int hidden = 0;
  std::vector<double> w1, b1;  // hidden x D, hidden
  std::vector<double> w2, b2;  // K x hidden, K

  int input_dim() const { return width * height * 3; }
  static ToyClassifier random_init(int width, int height, int classes, int hidden,
                                   std::uint64_t seed);
};

// Binary serialization (magic "PCLF1").
void save_classifier(const ToyClassifier& clf, const std::string& path);
ToyClassifier load_classifier(const std::string& path);

std::vector<double> softmax(std::vector<double> logits);

// Class distribution for an image; throws on dimension mismatch.
std::vector<double> forward(const ToyClassifier& clf, const Image& image);

// Analytic d cost / d pixels for the mixed cross-entropy cost
//   C = -CE(f, label_decrease) + CE(f, label_increase)
// (the increase term is dropped when absent).
Image input_grad(const ToyClassifier& clf, const Image& image, int label_decrease,
                 std::optional<int> label_increase);

// Anything that can score an image and hand back d cost / d pixels. The
// in-process toy classifier and external providers both satisfy it.
class GradientSource {
 public:
  struct Eval {
    std::vector<double> probabilities;
    Image gradient;
  };
  virtual ~GradientSource() = default;
  virtual int num_classes() const = 0;
  virtual Eval evaluate(const Image& image, int label_decrease,
                        std::optional<int> label_increase) = 0;
};

class ToyGradientSource final : public GradientSource {
 public:
  explicit ToyGradientSource(ToyClassifier clf) : clf_(std::move(clf)) {}
  int num_classes() const override { return clf_.classes; }
  Eval evaluate(const Image& image, int label_decrease,
                std::optional<int> label_increase) override {
    return {forward(clf_, image), input_grad(clf_, image, label_decrease, label_increase)};
  }
  const ToyClassifier& classifier() const { return clf_; }

 private:
  ToyClassifier clf_;
};

struct Sample {
  Image image;
  int label = 0;
};

struct TrainOptions {
  int epochs = 20;
  double learning_rate = 0.05;
  int batch_size = 16;
  std::uint64_t seed = 1;
  int inject_per_epoch = 100;  // images added by the augmenter each epoch
};

struct TrainHistory {
  std::vector<double> train_accuracy;  // per epoch
};

// Regenerates the injected samples at the start of each epoch from the
// current model; null means no augmentation.
using AugmentFn =
    std::function<std::vector<Sample>(const ToyClassifier& current, int epoch, int count,
                                      std::mt19937_64& rng)>;

// Minibatch gradient descent on cross-entropy.
TrainHistory train_toy(ToyClassifier& clf, const std::vector<Sample>& data,
                       const TrainOptions& options, const AugmentFn& augment = nullptr);

double accuracy(const ToyClassifier& clf, const std::vector<Sample>& data);

}  // namespace lambert
