#include <unistd.h>

#include <cstring>
#include <random>
#include <thread>

#include "doctest.h"
#include "lambert/protocol.hpp"

using namespace lambert;

namespace {

GradientRequest sample_request(std::mt19937_64& rng, int w = 3, int h = 2) {
  std::uniform_real_distribution<float> v(-2.0f, 2.0f);
  GradientRequest req;
  req.width = w;
  req.height = h;
  req.num_classes = 4;
  req.label_decrease = 1;
  if (rng() % 2) req.label_increase = 3;
  req.pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (float& p : req.pixels) p = v(rng);
  return req;
}

}  // namespace

TEST_CASE("request frames round trip") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const GradientRequest req = sample_request(rng);
    const auto frame = encode_request(req);
    const GradientRequest back = decode_request(frame);
    CHECK(back.width == req.width);
    CHECK(back.height == req.height);
    CHECK(back.num_classes == req.num_classes);
    CHECK(back.label_decrease == req.label_decrease);
    CHECK(back.label_increase == req.label_increase);
    CHECK(back.pixels == req.pixels);
  }
}

TEST_CASE("reply frames round trip, including failures") {
  GradientReply reply;
  reply.status = 0;
  reply.probabilities = {0.1f, 0.2f, 0.7f};
  reply.gradient.assign(2 * 2 * 3, 0.25f);
  const auto frame = encode_reply(reply);
  const GradientReply back = decode_reply(frame, 3, 2, 2);
  CHECK(back.probabilities == reply.probabilities);
  CHECK(back.gradient == reply.gradient);

  const auto failure = encode_reply(GradientReply{1, {}, {}});
  const GradientReply fail_back = decode_reply(failure, 3, 2, 2);
  CHECK(fail_back.status == 1);
  CHECK(fail_back.probabilities.empty());
}

TEST_CASE("truncated frames are rejected whole") {
  std::mt19937_64 rng(5);
  const auto frame = encode_request(sample_request(rng));
  for (std::size_t keep : {std::size_t{0}, std::size_t{3}, std::size_t{10},
                           kRequestHeaderSize, frame.size() - 1}) {
    std::vector<std::uint8_t> cut(frame.begin(), frame.begin() + keep);
    CHECK_THROWS_AS(decode_request(cut), ProtocolError);
  }
  const auto reply = encode_reply(GradientReply{0, {0.5f, 0.5f}, std::vector<float>(12, 0.0f)});
  std::vector<std::uint8_t> cut(reply.begin(), reply.end() - 4);
  CHECK_THROWS_AS(decode_reply(cut, 2, 2, 1), ProtocolError);
}

TEST_CASE("fuzzed frames never crash the parser") {
  std::mt19937_64 rng(7);
  const auto valid = encode_request(sample_request(rng));
  int accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint8_t> frame;
    if (trial % 3 == 0) {
      // pure noise of random length
      frame.resize(rng() % 200);
      for (auto& b : frame) b = static_cast<std::uint8_t>(rng());
    } else {
      // corrupted valid frame: mutate bytes and maybe resize
      frame = valid;
      const int flips = 1 + static_cast<int>(rng() % 8);
      for (int k = 0; k < flips; ++k)
        frame[rng() % frame.size()] ^= static_cast<std::uint8_t>(1 + rng() % 255);
      if (rng() % 4 == 0) frame.resize(rng() % (frame.size() + 1));
    }
    try {
      (void)decode_request(frame);
      ++accepted;  // a mutation may leave a well-formed frame; that's fine
    } catch (const ProtocolError&) {
    }
  }
  CHECK(accepted < 1000);  // the vast majority must be rejected
}

TEST_CASE("serve_gradient_stream echoes zeros and survives handler failure") {
  int to_server[2], from_server[2];
  REQUIRE(pipe(to_server) == 0);
  REQUIRE(pipe(from_server) == 0);

  std::thread server([&] {
    int calls = 0;
    serve_gradient_stream(to_server[0], from_server[1],
                          [&](const GradientRequest& req) -> GradientReply {
                            if (++calls == 2) throw std::runtime_error("boom");
                            GradientReply reply;
                            reply.status = 0;
                            reply.probabilities.assign(req.num_classes,
                                                       1.0f / req.num_classes);
                            reply.gradient.assign(req.pixels.size(), 0.0f);
                            return reply;
                          });
    close(to_server[0]);
    close(from_server[1]);
  });

  std::mt19937_64 rng(11);
  const GradientRequest req = sample_request(rng);
  const auto frame = encode_request(req);
  const std::size_t reply_size = 5 + (req.num_classes + req.pixels.size()) * 4;

  // First call: zero gradients.
  REQUIRE(write(to_server[1], frame.data(), frame.size()) ==
          static_cast<ssize_t>(frame.size()));
  std::vector<std::uint8_t> reply_bytes(reply_size);
  std::size_t got = 0;
  while (got < reply_bytes.size()) {
    const ssize_t n = read(from_server[0], reply_bytes.data() + got, reply_bytes.size() - got);
    REQUIRE(n > 0);
    got += static_cast<std::size_t>(n);
  }
  const GradientReply ok = decode_reply(reply_bytes, req.num_classes, req.width, req.height);
  CHECK(ok.status == 0);
  for (float g : ok.gradient) CHECK(g == 0.0f);

  // Second call: handler throws, client sees a status-1 frame.
  REQUIRE(write(to_server[1], frame.data(), frame.size()) ==
          static_cast<ssize_t>(frame.size()));
  std::vector<std::uint8_t> fail_bytes(5);
  got = 0;
  while (got < fail_bytes.size()) {
    const ssize_t n = read(from_server[0], fail_bytes.data() + got, fail_bytes.size() - got);
    REQUIRE(n > 0);
    got += static_cast<std::size_t>(n);
  }
  CHECK(fail_bytes[4] == 1);

  close(to_server[1]);
  server.join();
  close(from_server[0]);
}
