#include "lambert/protocol.hpp"

#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace lambert {

namespace {

constexpr std::uint8_t kRequestMagic[4] = {'P', 'G', 'R', 'D'};
constexpr std::uint8_t kReplyMagic[4] = {'P', 'G', 'R', 'R'};
// Guards fuzzed frames from requesting absurd allocations.
constexpr std::uint32_t kMaxSide = 16384;
constexpr std::uint32_t kMaxClasses = 1u << 20;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return static_cast<std::uint32_t>(bytes[offset]) |
         (static_cast<std::uint32_t>(bytes[offset + 1]) << 8) |
         (static_cast<std::uint32_t>(bytes[offset + 2]) << 16) |
         (static_cast<std::uint32_t>(bytes[offset + 3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

float get_f32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  const std::uint32_t bits = get_u32(bytes, offset);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

bool read_exact(int fd, void* buf, std::size_t n) {
  auto* p = static_cast<std::uint8_t*>(buf);
  std::size_t done = 0;
  while (done < n) {
    const ssize_t got = ::read(fd, p + done, n - done);
    if (got == 0) return false;  // eof
    if (got < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(got);
  }
  return true;
}

bool write_exact(int fd, const void* buf, std::size_t n) {
  const auto* p = static_cast<const std::uint8_t*>(buf);
  std::size_t done = 0;
  while (done < n) {
    const ssize_t put = ::write(fd, p + done, n - done);
    if (put < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(put);
  }
  return true;
}

}  // namespace

std::vector<std::uint8_t> encode_request(const GradientRequest& request) {
  const std::size_t expected =
      static_cast<std::size_t>(request.width) * request.height * 3;
  if (request.pixels.size() != expected)
    throw ProtocolError("encode_request: pixel payload does not match dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(kRequestHeaderSize + expected * 4);
  out.insert(out.end(), kRequestMagic, kRequestMagic + 4);
  out.push_back(kProtocolVersion);
  out.push_back(kOpForwardGrad);
  put_u32(out, request.width);
  put_u32(out, request.height);
  put_u32(out, request.num_classes);
  put_u32(out, request.label_decrease);
  put_u32(out, request.label_increase.value_or(kNoIncreaseLabel));
  for (float v : request.pixels) put_f32(out, v);
  return out;
}

GradientRequest decode_request(std::span<const std::uint8_t> frame) {
  if (frame.size() < kRequestHeaderSize) throw ProtocolError("request frame too short");
  if (std::memcmp(frame.data(), kRequestMagic, 4) != 0)
    throw ProtocolError("bad request magic");
  if (frame[4] != kProtocolVersion) throw ProtocolError("unsupported protocol version");
  if (frame[5] != kOpForwardGrad) throw ProtocolError("unsupported operation");
  GradientRequest req;
  req.width = get_u32(frame, 6);
  req.height = get_u32(frame, 10);
  req.num_classes = get_u32(frame, 14);
  req.label_decrease = get_u32(frame, 18);
  const std::uint32_t li = get_u32(frame, 22);
  if (li != kNoIncreaseLabel) req.label_increase = li;

  if (req.width == 0 || req.height == 0 || req.width > kMaxSide || req.height > kMaxSide)
    throw ProtocolError("request dimensions out of range");
  if (req.num_classes == 0 || req.num_classes > kMaxClasses)
    throw ProtocolError("request class count out of range");
  if (req.label_decrease >= req.num_classes ||
      (req.label_increase && *req.label_increase >= req.num_classes))
    throw ProtocolError("request label out of range");

  const std::size_t count = static_cast<std::size_t>(req.width) * req.height * 3;
  if (frame.size() != kRequestHeaderSize + count * 4)
    throw ProtocolError("request payload size mismatch");
  req.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    req.pixels[i] = get_f32(frame, kRequestHeaderSize + i * 4);
  return req;
}

std::vector<std::uint8_t> encode_reply(const GradientReply& reply) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + (reply.probabilities.size() + reply.gradient.size()) * 4);
  out.insert(out.end(), kReplyMagic, kReplyMagic + 4);
  out.push_back(reply.status);
  for (float v : reply.probabilities) put_f32(out, v);
  for (float v : reply.gradient) put_f32(out, v);
  return out;
}

GradientReply decode_reply(std::span<const std::uint8_t> frame, std::uint32_t num_classes,
                           std::uint32_t width, std::uint32_t height) {
  if (frame.size() < 5) throw ProtocolError("reply frame too short");
  if (std::memcmp(frame.data(), kReplyMagic, 4) != 0) throw ProtocolError("bad reply magic");
  GradientReply reply;
  reply.status = frame[4];
  if (reply.status != 0) {
    if (frame.size() != 5) throw ProtocolError("failure reply must carry no payload");
    return reply;
  }
  const std::size_t grads = static_cast<std::size_t>(width) * height * 3;
  if (frame.size() != 5 + (num_classes + grads) * 4)
    throw ProtocolError("reply payload size mismatch");
  reply.probabilities.resize(num_classes);
  for (std::uint32_t i = 0; i < num_classes; ++i)
    reply.probabilities[i] = get_f32(frame, 5 + static_cast<std::size_t>(i) * 4);
  reply.gradient.resize(grads);
  const std::size_t base = 5 + static_cast<std::size_t>(num_classes) * 4;
  for (std::size_t i = 0; i < grads; ++i) reply.gradient[i] = get_f32(frame, base + i * 4);
  return reply;
}

void serve_gradient_stream(int in_fd, int out_fd,
                           const std::function<GradientReply(const GradientRequest&)>& handler) {
  for (;;) {
    std::vector<std::uint8_t> frame(kRequestHeaderSize);
    if (!read_exact(in_fd, frame.data(), frame.size())) return;  // clean eof
    GradientRequest req;
    std::vector<std::uint8_t> reply_bytes;
    try {
      // Validate the header alone first so we know how much payload to read.
      const std::uint32_t w = get_u32(frame, 6);
      const std::uint32_t h = get_u32(frame, 10);
      if (std::memcmp(frame.data(), kRequestMagic, 4) != 0 || frame[4] != kProtocolVersion ||
          frame[5] != kOpForwardGrad || w == 0 || h == 0 || w > kMaxSide || h > kMaxSide)
        throw ProtocolError("bad request header");
      const std::size_t payload = static_cast<std::size_t>(w) * h * 3 * 4;
      frame.resize(kRequestHeaderSize + payload);
      if (!read_exact(in_fd, frame.data() + kRequestHeaderSize, payload))
        throw ProtocolError("truncated request payload");
      req = decode_request(frame);
      reply_bytes = encode_reply(handler(req));
    } catch (const std::exception&) {
      reply_bytes = encode_reply(GradientReply{1, {}, {}});
    }
    if (!write_exact(out_fd, reply_bytes.data(), reply_bytes.size())) return;
  }
}

}  // namespace lambert
