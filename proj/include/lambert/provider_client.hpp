#pragma once

#include <string>
#include <vector>

#include "lambert/classifier.hpp"
#include "lambert/protocol.hpp"

namespace lambert {

// Runs a gradient provider as a child process and speaks the framed protocol
// over its standard I/O. One connection serves one attack at a time.
class ExternalGradientSource final : public GradientSource {
 public:
  ExternalGradientSource(std::vector<std::string> argv, int num_classes,
                         int timeout_ms = 30000);
  ~ExternalGradientSource() override;

  ExternalGradientSource(const ExternalGradientSource&) = delete;
  ExternalGradientSource& operator=(const ExternalGradientSource&) = delete;

  int num_classes() const override { return num_classes_; }
  Eval evaluate(const Image& image, int label_decrease,
                std::optional<int> label_increase) override;

 private:
  void spawn(const std::vector<std::string>& argv);

  int num_classes_;
  int timeout_ms_;
  int child_pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
};

}  // namespace lambert
