#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace lambert {

// Gradient-provider wire protocol. Request frame:
//   magic "PGRD", version 0x01, operation 0x01 (forward+grad),
//   little-endian u32 W, H, K, L_d, L_i (0xFFFFFFFF when absent),
//   then W*H*3 little-endian float32 pixels.
// Reply frame:
//   magic "PGRR", status byte (0 = ok),
//   K float32 probabilities, W*H*3 float32 gradient values.

inline constexpr std::uint8_t kProtocolVersion = 0x01;
inline constexpr std::uint8_t kOpForwardGrad = 0x01;
inline constexpr std::uint32_t kNoIncreaseLabel = 0xFFFFFFFFu;
inline constexpr std::size_t kRequestHeaderSize = 4 + 1 + 1 + 5 * 4;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GradientRequest {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t num_classes = 0;
  std::uint32_t label_decrease = 0;
  std::optional<std::uint32_t> label_increase;
  std::vector<float> pixels;  // W*H*3
};

struct GradientReply {
  std::uint8_t status = 0;
  std::vector<float> probabilities;  // K
  std::vector<float> gradient;       // W*H*3
};

std::vector<std::uint8_t> encode_request(const GradientRequest& request);
std::vector<std::uint8_t> encode_reply(const GradientReply& reply);

// Both decoders throw ProtocolError on any malformed or truncated frame and
// never accept a partial payload.
GradientRequest decode_request(std::span<const std::uint8_t> frame);
GradientReply decode_reply(std::span<const std::uint8_t> frame, std::uint32_t num_classes,
                           std::uint32_t width, std::uint32_t height);

// Serves forward+grad requests from a byte stream (file descriptors, so the
// loop works over pipes and sockets alike). Returns after end-of-stream.
// The handler maps a request to a reply; handler exceptions become status-1
// replies with zero payloads.
void serve_gradient_stream(int in_fd, int out_fd,
                           const std::function<GradientReply(const GradientRequest&)>& handler);

}  // namespace lambert
