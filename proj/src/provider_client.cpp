#include "lambert/provider_client.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <stdexcept>

namespace lambert {

namespace {

[[noreturn]] void die_child(const char* what) {
  ::perror(what);
  ::_exit(127);
}

bool read_with_timeout(int fd, void* buf, std::size_t n, int timeout_ms) {
  auto* p = static_cast<std::uint8_t*>(buf);
  std::size_t done = 0;
  while (done < n) {
    struct pollfd pfd{fd, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, timeout_ms);
    if (ready <= 0) return false;  // timeout or poll failure
    const ssize_t got = ::read(fd, p + done, n - done);
    if (got <= 0) {
      if (got < 0 && errno == EINTR) continue;
      return false;
    }
    done += static_cast<std::size_t>(got);
  }
  return true;
}

bool write_all(int fd, const void* buf, std::size_t n) {
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

ExternalGradientSource::ExternalGradientSource(std::vector<std::string> argv, int num_classes,
                                               int timeout_ms)
    : num_classes_(num_classes), timeout_ms_(timeout_ms) {
  if (argv.empty()) throw std::invalid_argument("provider: empty command line");
  if (num_classes < 2) throw std::invalid_argument("provider: need at least two classes");
  spawn(argv);
}

void ExternalGradientSource::spawn(const std::vector<std::string>& argv) {
  int to_child[2], from_child[2];
  if (::pipe(to_child) != 0 || ::pipe(from_child) != 0)
    throw std::runtime_error("provider: pipe() failed");
  const pid_t pid = ::fork();
  if (pid < 0) throw std::runtime_error("provider: fork() failed");
  if (pid == 0) {
    if (::dup2(to_child[0], STDIN_FILENO) < 0) die_child("dup2 stdin");
    if (::dup2(from_child[1], STDOUT_FILENO) < 0) die_child("dup2 stdout");
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    die_child("execvp");
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  child_pid_ = pid;
  to_child_ = to_child[1];
  from_child_ = from_child[0];
  ::signal(SIGPIPE, SIG_IGN);
}

ExternalGradientSource::~ExternalGradientSource() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  if (child_pid_ > 0) {
    int status = 0;
    ::waitpid(child_pid_, &status, 0);
  }
}

GradientSource::Eval ExternalGradientSource::evaluate(const Image& image, int label_decrease,
                                                      std::optional<int> label_increase) {
  GradientRequest req;
  req.width = static_cast<std::uint32_t>(image.width);
  req.height = static_cast<std::uint32_t>(image.height);
  req.num_classes = static_cast<std::uint32_t>(num_classes_);
  req.label_decrease = static_cast<std::uint32_t>(label_decrease);
  if (label_increase) req.label_increase = static_cast<std::uint32_t>(*label_increase);
  req.pixels.resize(image.data.size());
  for (std::size_t i = 0; i < image.data.size(); ++i)
    req.pixels[i] = static_cast<float>(image.data[i]);

  const std::vector<std::uint8_t> frame = encode_request(req);
  if (!write_all(to_child_, frame.data(), frame.size()))
    throw std::runtime_error("provider: failed to send request (provider gone?)");

  const std::size_t grads = image.data.size();
  std::vector<std::uint8_t> reply_bytes(5);
  if (!read_with_timeout(from_child_, reply_bytes.data(), 5, timeout_ms_))
    throw std::runtime_error("provider: timeout waiting for reply header");
  if (reply_bytes[4] == 0) {
    reply_bytes.resize(5 + (static_cast<std::size_t>(num_classes_) + grads) * 4);
    if (!read_with_timeout(from_child_, reply_bytes.data() + 5, reply_bytes.size() - 5,
                           timeout_ms_))
      throw std::runtime_error("provider: timeout waiting for reply payload");
  }
  const GradientReply reply =
      decode_reply(reply_bytes, static_cast<std::uint32_t>(num_classes_), req.width, req.height);
  if (reply.status != 0)
    throw std::runtime_error("provider: reported failure (status " +
                             std::to_string(reply.status) + ")");

  Eval eval;
  eval.probabilities.assign(reply.probabilities.begin(), reply.probabilities.end());
  eval.gradient = Image(image.width, image.height);
  for (std::size_t i = 0; i < grads; ++i) eval.gradient.data[i] = reply.gradient[i];
  return eval;
}

}  // namespace lambert
