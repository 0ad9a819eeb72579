// Gradient provider speaking the framed protocol over standard I/O.
// Wraps the built-in toy classifier (--classifier) or echoes zero gradients
// (--echo-zeros), and stands in for any external network that wants to
// supply dC/dI to the attack loop.

#include <unistd.h>

#include <cstdio>
#include <cstring>
#include <optional>
#include <string>

#include "lambert/classifier.hpp"
#include "lambert/protocol.hpp"

using namespace lambert;

namespace {

GradientReply zeros_reply(const GradientRequest& req) {
  GradientReply reply;
  reply.status = 0;
  reply.probabilities.assign(req.num_classes, 1.0f / static_cast<float>(req.num_classes));
  reply.gradient.assign(req.pixels.size(), 0.0f);
  return reply;
}

GradientReply classifier_reply(const ToyClassifier& clf, const GradientRequest& req) {
  if (static_cast<int>(req.num_classes) != clf.classes ||
      static_cast<int>(req.width) != clf.width || static_cast<int>(req.height) != clf.height)
    throw std::runtime_error("request does not match classifier shape");
  Image img(static_cast<int>(req.width), static_cast<int>(req.height));
  for (std::size_t i = 0; i < req.pixels.size(); ++i) img.data[i] = req.pixels[i];
  const std::optional<int> li =
      req.label_increase ? std::optional<int>(static_cast<int>(*req.label_increase))
                         : std::nullopt;
  const std::vector<double> probs = forward(clf, img);
  const Image grad = input_grad(clf, img, static_cast<int>(req.label_decrease), li);

  GradientReply reply;
  reply.status = 0;
  reply.probabilities.resize(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    reply.probabilities[i] = static_cast<float>(probs[i]);
  reply.gradient.resize(grad.data.size());
  for (std::size_t i = 0; i < grad.data.size(); ++i)
    reply.gradient[i] = static_cast<float>(grad.data[i]);
  return reply;
}

}  // namespace

int main(int argc, char** argv) {
  std::string classifier_path;
  bool echo_zeros = false;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--classifier" && i + 1 < argc) {
      classifier_path = argv[++i];
    } else if (arg == "--echo-zeros") {
      echo_zeros = true;
    } else {
      std::fprintf(stderr, "usage: %s --classifier model.pclf | --echo-zeros\n", argv[0]);
      return 3;
    }
  }
  if (echo_zeros == classifier_path.empty()) {  // need exactly one mode
    std::fprintf(stderr, "usage: %s --classifier model.pclf | --echo-zeros\n", argv[0]);
    return 3;
  }

  try {
    if (echo_zeros) {
      serve_gradient_stream(STDIN_FILENO, STDOUT_FILENO, zeros_reply);
    } else {
      const ToyClassifier clf = load_classifier(classifier_path);
      serve_gradient_stream(STDIN_FILENO, STDOUT_FILENO, [&](const GradientRequest& req) {
        return classifier_reply(clf, req);
      });
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "provider: %s\n", e.what());
    return 4;
  }
  return 0;
}
