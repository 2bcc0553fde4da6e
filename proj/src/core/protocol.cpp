#include "core/protocol.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <json.hpp>

#include "core/error.hpp"

namespace authdrift {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

json ParseLine(std::string_view line, const char* what) {
  try {
    json j = json::parse(line);
    if (!j.is_object()) Fail(ErrorKind::kProtocol, std::string(what) + " is not a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed ") + what + ": " + e.what());
  }
}

void CheckedClose(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

// Child process with its stdin/stdout wired to Unix sockets. The destructor
// terminates and reaps it.
class ChildProcess {
 public:
  explicit ChildProcess(const std::string& command) {
    int in_pair[2];
    int out_pair[2];
    if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, in_pair) != 0 ||
        ::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, out_pair) != 0) {
      Fail(ErrorKind::kIo, std::string("socketpair failed: ") + std::strerror(errno));
    }
    pid_ = ::fork();
    if (pid_ < 0) Fail(ErrorKind::kIo, std::string("fork failed: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(in_pair[1], STDIN_FILENO);
      ::dup2(out_pair[1], STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(in_pair[1]);
    ::close(out_pair[1]);
    write_fd_ = in_pair[0];
    read_fd_ = out_pair[0];
    ::fcntl(write_fd_, F_SETFL, ::fcntl(write_fd_, F_GETFL) | O_NONBLOCK);
    ::fcntl(read_fd_, F_SETFL, ::fcntl(read_fd_, F_GETFL) | O_NONBLOCK);
  }

  ChildProcess(const ChildProcess&) = delete;
  ChildProcess& operator=(const ChildProcess&) = delete;

  ~ChildProcess() {
    CheckedClose(write_fd_);
    CheckedClose(read_fd_);
    if (pid_ > 0) {
      if (!WaitFor(std::chrono::milliseconds(2000))) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
      }
    }
  }

  int write_fd() const { return write_fd_; }
  int read_fd() const { return read_fd_; }
  void CloseWrite() { CheckedClose(write_fd_); }
  void Terminate() {
    if (pid_ > 0) ::kill(pid_, SIGTERM);
  }

 private:
  bool WaitFor(std::chrono::milliseconds budget) {
    const auto deadline = Clock::now() + budget;
    for (;;) {
      const pid_t r = ::waitpid(pid_, nullptr, WNOHANG);
      if (r == pid_ || r < 0) {
        pid_ = -1;
        return true;
      }
      if (Clock::now() >= deadline) return false;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }

  pid_t pid_ = -1;
  int write_fd_ = -1;
  int read_fd_ = -1;
};

// Collects responses and enforces the one-response-per-request contract.
class ResponseBook {
 public:
  explicit ResponseBook(std::span<const VerifyRequest> requests) : requests_(requests) {
    for (std::size_t i = 0; i < requests.size(); ++i) {
      if (!index_.emplace(requests[i].sample_id, i).second) {
        Fail(ErrorKind::kInvalidArgument, "duplicate sample_id '" + requests[i].sample_id + "' in session");
      }
    }
    responses_.resize(requests.size());
    seen_.assign(requests.size(), false);
  }

  void Accept(VerifyResponse r, std::size_t sent) {
    auto it = index_.find(r.sample_id);
    if (it == index_.end() || it->second >= sent) {
      Fail(ErrorKind::kProtocol, "response for unknown sample_id '" + r.sample_id + "'");
    }
    if (seen_[it->second]) {
      Fail(ErrorKind::kProtocol, "duplicate response for sample_id '" + r.sample_id + "'");
    }
    seen_[it->second] = true;
    responses_[it->second] = std::move(r);
    ++received_;
  }

  std::size_t received() const { return received_; }
  bool complete() const { return received_ == requests_.size(); }

  std::string FirstMissing() const {
    for (std::size_t i = 0; i < seen_.size(); ++i) {
      if (!seen_[i]) return requests_[i].sample_id;
    }
    return "";
  }

  std::vector<VerifyResponse> Take() { return std::move(responses_); }

 private:
  std::span<const VerifyRequest> requests_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<VerifyResponse> responses_;
  std::vector<bool> seen_;
  std::size_t received_ = 0;
};

std::vector<VerifyResponse> RunSubprocessSession(std::span<const VerifyRequest> requests,
                                                 const EndpointOptions& options) {
  ResponseBook book(requests);
  ChildProcess child(options.command);
  const auto timeout = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(options.timeout_seconds));
  const std::size_t window = std::max<std::size_t>(1, options.window);

  std::string inbox;
  std::string outbox;
  std::size_t sent = 0;
  bool handshake_done = false;
  auto deadline = Clock::now() + timeout;

  auto fail_with_missing = [&](ErrorKind kind, const std::string& what) {
    child.Terminate();
    const std::string missing = book.FirstMissing();
    Fail(kind, what + (missing.empty() ? "" : "; missing response for sample_id '" + missing + "'"));
  };

  auto handle_line = [&](std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) return;
    if (!handshake_done) {
      const json j = ParseLine(line, "handshake");
      if (j.value("protocol", "") != kProtocolVersion) {
        Fail(ErrorKind::kProtocol, "endpoint handshake did not announce " + std::string(kProtocolVersion));
      }
      handshake_done = true;
      return;
    }
    book.Accept(DecodeResponse(line), sent);
    deadline = Clock::now() + timeout;
  };

  while (!book.complete()) {
    // Refill the outgoing buffer while the window allows.
    if (handshake_done) {
      while (outbox.size() < (1u << 16) && sent < requests.size() &&
             sent - book.received() < window) {
        outbox += EncodeRequest(requests[sent]);
        outbox += '\n';
        ++sent;
      }
      if (outbox.empty() && sent == requests.size() && child.write_fd() >= 0) child.CloseWrite();
    }

    pollfd fds[2];
    nfds_t nfds = 0;
    fds[nfds++] = {child.read_fd(), POLLIN, 0};
    const bool want_write = !outbox.empty() && child.write_fd() >= 0;
    if (want_write) fds[nfds++] = {child.write_fd(), POLLOUT, 0};

    const auto now = Clock::now();
    if (now >= deadline) {
      fail_with_missing(ErrorKind::kTimeout,
                        handshake_done ? "endpoint timed out" : "endpoint sent no handshake before timeout");
    }
    const auto wait_ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
    const int rc = ::poll(fds, nfds, static_cast<int>(std::min<long long>(wait_ms + 1, 1000)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      Fail(ErrorKind::kIo, std::string("poll failed: ") + std::strerror(errno));
    }

    if (want_write && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
      const ssize_t n = ::send(child.write_fd(), outbox.data(), outbox.size(), MSG_NOSIGNAL);
      if (n > 0) {
        outbox.erase(0, static_cast<std::size_t>(n));
      } else if (n < 0 && errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        fail_with_missing(ErrorKind::kProtocol, "endpoint stopped reading requests");
      }
    }

    if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
      char buf[65536];
      const ssize_t n = ::read(child.read_fd(), buf, sizeof(buf));
      if (n > 0) {
        inbox.append(buf, static_cast<std::size_t>(n));
        std::size_t start = 0;
        for (std::size_t nl; (nl = inbox.find('\n', start)) != std::string::npos; start = nl + 1) {
          handle_line(std::string_view(inbox).substr(start, nl - start));
        }
        inbox.erase(0, start);
      } else if (n == 0) {
        if (!inbox.empty()) {
          handle_line(inbox);
          inbox.clear();
          if (book.complete()) break;
        }
        fail_with_missing(ErrorKind::kProtocol,
                          handshake_done ? "endpoint exited before answering every request"
                                         : "endpoint exited before the handshake");
      } else if (errno != EAGAIN && errno != EWOULDBLOCK && errno != EINTR) {
        Fail(ErrorKind::kIo, std::string("read from endpoint failed: ") + std::strerror(errno));
      }
    }
  }
  return book.Take();
}

std::vector<VerifyResponse> RunHttpSession(std::span<const VerifyRequest> requests,
                                           const EndpointOptions& options) {
  std::string base = options.url;
  std::string path = "/verify";
  const auto scheme_end = base.find("://");
  const auto path_start = base.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  if (path_start != std::string::npos) {
    std::string suffix = base.substr(path_start);
    base.resize(path_start);
    while (!suffix.empty() && suffix.back() == '/') suffix.pop_back();
    if (!suffix.empty()) {
      path = suffix.ends_with("/verify") ? suffix : suffix + "/verify";
    }
  }
  httplib::Client client(base);
  const auto secs = static_cast<time_t>(options.timeout_seconds);
  const auto usecs = static_cast<time_t>((options.timeout_seconds - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  ResponseBook book(requests);
  for (std::size_t i = 0; i < requests.size(); ++i) {
    auto res = client.Post(path, EncodeRequest(requests[i]), "application/json");
    if (!res) {
      const auto err = res.error();
      Fail(err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout ? ErrorKind::kTimeout
                                                                                 : ErrorKind::kIo,
           "HTTP endpoint " + options.url + " failed on sample_id '" + requests[i].sample_id +
               "': " + httplib::to_string(err));
    }
    if (res->status != 200) {
      Fail(ErrorKind::kProtocol, "HTTP endpoint answered status " + std::to_string(res->status) +
                                     " for sample_id '" + requests[i].sample_id + "'");
    }
    book.Accept(DecodeResponse(res->body), i + 1);
  }
  if (!book.complete()) {
    Fail(ErrorKind::kProtocol, "missing response for sample_id '" + book.FirstMissing() + "'");
  }
  return book.Take();
}

}  // namespace

std::string EncodeRequest(const VerifyRequest& request) {
  nlohmann::ordered_json j;
  j["sample_id"] = request.sample_id;
  j["text1"] = request.text1;
  j["text2"] = request.text2;
  return j.dump();
}

VerifyRequest DecodeRequest(std::string_view line) {
  const json j = ParseLine(line, "request");
  try {
    return {j.at("sample_id").get<std::string>(), j.at("text1").get<std::string>(),
            j.at("text2").get<std::string>()};
  } catch (const json::exception& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed request: ") + e.what());
  }
}

std::string EncodeResponse(const VerifyResponse& response) {
  nlohmann::ordered_json j;
  j["sample_id"] = response.sample_id;
  j["label"] = response.label;
  j["confidence"] = response.confidence;
  return j.dump();
}

VerifyResponse DecodeResponse(std::string_view line) {
  const json j = ParseLine(line, "response");
  VerifyResponse r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    const json& label = j.at("label");
    if (!label.is_number_integer()) Fail(ErrorKind::kProtocol, "response label must be 0 or 1");
    r.label = label.get<int>();
    const json& confidence = j.at("confidence");
    if (!confidence.is_number()) Fail(ErrorKind::kProtocol, "response confidence must be a number");
    r.confidence = confidence.get<double>();
  } catch (const json::exception& e) {
    Fail(ErrorKind::kProtocol, std::string("malformed response: ") + e.what());
  }
  if (r.label != 0 && r.label != 1) {
    Fail(ErrorKind::kProtocol, "response for '" + r.sample_id + "' has label " + std::to_string(r.label));
  }
  if (!(r.confidence >= 0.0 && r.confidence <= 1.0)) {
    Fail(ErrorKind::kProtocol, "response for '" + r.sample_id + "' has confidence outside [0, 1]");
  }
  return r;
}

std::string HandshakeLine() {
  return json{{"protocol", kProtocolVersion}}.dump();
}

std::vector<VerifyResponse> RunSession(std::span<const VerifyRequest> requests,
                                       const EndpointOptions& options) {
  if (options.command.empty() == options.url.empty()) {
    Fail(ErrorKind::kInvalidArgument, "endpoint needs exactly one of a command or a URL");
  }
  if (!(options.timeout_seconds > 0.0)) Fail(ErrorKind::kInvalidArgument, "timeout must be > 0");
  if (!options.command.empty()) return RunSubprocessSession(requests, options);
  return RunHttpSession(requests, options);
}

std::vector<VerifyRequest> MakeRequests(const PairDataset& dataset) {
  std::vector<VerifyRequest> requests;
  requests.reserve(dataset.samples.size());
  for (const auto& s : dataset.samples) requests.push_back({s.sample_id, s.para1, s.para2});
  return requests;
}

std::vector<VerificationResult> RunExternal(const PairDataset& dataset, const EndpointOptions& options) {
  const auto requests = MakeRequests(dataset);
  const auto responses = RunSession(requests, options);
  std::vector<VerificationResult> results;
  results.reserve(responses.size());
  for (std::size_t i = 0; i < responses.size(); ++i) {
    const auto& r = responses[i];
    VerificationResult v;
    v.sample_id = r.sample_id;
    v.truth = dataset.samples[i].label;
    v.label = r.label;
    v.confidence = r.confidence;
    v.score = r.label == 1 ? r.confidence : 1.0 - r.confidence;
    results.push_back(std::move(v));
  }
  return results;
}

}  // namespace authdrift
