#include "core/protocol.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "core/error.hpp"
#include "test_support.hpp"

namespace authdrift {
namespace {

using testing::StubCommand;

std::vector<VerifyRequest> Requests(std::size_t n) {
  std::vector<VerifyRequest> out;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "test-%06zu", i);
    out.push_back({id, "一つ目の段落 " + std::to_string(i), "二つ目\t\"引用\" " + std::to_string(i * 7)});
  }
  return out;
}

// Mirrors the stub's answer so results can be checked request by request.
VerifyResponse Expected(const VerifyRequest& r) {
  const std::size_t h = std::hash<std::string>{}(r.text1 + '\x1f' + r.text2);
  return {r.sample_id, static_cast<int>(h & 1), 0.5 + static_cast<double>((h >> 1) % 501) / 1000.0};
}

void ExpectAnswers(const std::vector<VerifyRequest>& requests, const std::vector<VerifyResponse>& got) {
  ASSERT_EQ(got.size(), requests.size());
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const auto want = Expected(requests[i]);
    EXPECT_EQ(got[i].sample_id, want.sample_id);
    EXPECT_EQ(got[i].label, want.label);
    EXPECT_DOUBLE_EQ(got[i].confidence, want.confidence);
  }
}

ErrorKind KindOf(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kInvalidArgument;
}

EndpointOptions Command(const std::string& mode, long arg = 0) {
  EndpointOptions o;
  o.command = StubCommand(mode, arg);
  o.timeout_seconds = 20;
  return o;
}

TEST(WireFormatTest, RoundTrips) {
  const VerifyRequest req{"a-1", "line\nbreak", "タブ\t"};
  const auto line = EncodeRequest(req);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto back = DecodeRequest(line);
  EXPECT_EQ(back.text1, req.text1);
  EXPECT_EQ(back.text2, req.text2);
  const VerifyResponse resp{"a-1", 1, 0.75};
  const auto decoded = DecodeResponse(EncodeResponse(resp));
  EXPECT_EQ(decoded.label, 1);
  EXPECT_EQ(decoded.confidence, 0.75);
  EXPECT_EQ(HandshakeLine(), "{\"protocol\":\"verify/1\"}");
}

TEST(WireFormatTest, RejectsBadResponses) {
  for (const char* bad : {"", "nope", "[]", "{\"sample_id\":\"x\",\"label\":2,\"confidence\":0.5}",
                          "{\"sample_id\":\"x\",\"label\":1,\"confidence\":-0.1}",
                          "{\"sample_id\":\"x\",\"label\":1,\"confidence\":1.01}",
                          "{\"sample_id\":\"x\",\"label\":\"1\",\"confidence\":0.5}",
                          "{\"label\":1,\"confidence\":0.5}"}) {
    EXPECT_EQ(KindOf([&] { DecodeResponse(bad); }), ErrorKind::kProtocol) << bad;
  }
}

TEST(SessionTest, ThousandRequestsInOrder) {
  const auto requests = Requests(1000);
  ExpectAnswers(requests, RunSession(requests, Command("echo")));
}

TEST(SessionTest, OutOfOrderResponsesAreReordered) {
  const auto requests = Requests(200);
  ExpectAnswers(requests, RunSession(requests, Command("reverse", 16)));
}

TEST(SessionTest, WindowOfOne) {
  const auto requests = Requests(30);
  auto o = Command("echo");
  o.window = 1;
  ExpectAnswers(requests, RunSession(requests, o));
}

TEST(SessionTest, EmptySession) {
  EXPECT_TRUE(RunSession({}, Command("echo")).empty());
}

TEST(SessionTest, MissingResponseNamesSample) {
  const auto requests = Requests(50);
  std::string msg;
  EXPECT_EQ(KindOf([&] { RunSession(requests, Command("drop", 7)); }, &msg), ErrorKind::kProtocol);
  EXPECT_NE(msg.find("test-000007"), std::string::npos) << msg;
}

TEST(SessionTest, DuplicateResponse) {
  std::string msg;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(20), Command("duplicate", 3)); }, &msg), ErrorKind::kProtocol);
  EXPECT_NE(msg.find("duplicate"), std::string::npos) << msg;
}

TEST(SessionTest, UnknownSampleId) {
  std::string msg;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(20), Command("unknown", 2)); }, &msg), ErrorKind::kProtocol);
  EXPECT_NE(msg.find("no-such-sample"), std::string::npos) << msg;
}

TEST(SessionTest, ConfidenceOutOfRange) {
  EXPECT_EQ(KindOf([&] { RunSession(Requests(5), Command("bad-confidence", 1)); }), ErrorKind::kProtocol);
}

TEST(SessionTest, WrongHandshake) {
  EXPECT_EQ(KindOf([&] { RunSession(Requests(5), Command("bad-handshake")); }), ErrorKind::kProtocol);
}

TEST(SessionTest, EarlyExit) {
  std::string msg;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(20), Command("exit-after", 5)); }, &msg), ErrorKind::kProtocol);
  EXPECT_NE(msg.find("test-000005"), std::string::npos) << msg;
}

TEST(SessionTest, SilentEndpointTimesOut) {
  auto o = Command("silent");
  o.timeout_seconds = 0.5;
  const auto start = std::chrono::steady_clock::now();
  std::string msg;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(3), o); }, &msg), ErrorKind::kTimeout);
  EXPECT_NE(msg.find("test-000000"), std::string::npos) << msg;
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(10));
}

TEST(SessionTest, MissingHandshakeTimesOut) {
  auto o = Command("hang");
  o.timeout_seconds = 0.5;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(3), o); }), ErrorKind::kTimeout);
}

TEST(SessionTest, NeedsExactlyOneEndpoint) {
  EndpointOptions o;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(1), o); }), ErrorKind::kInvalidArgument);
  o.command = "true";
  o.url = "http://127.0.0.1:1";
  EXPECT_EQ(KindOf([&] { RunSession(Requests(1), o); }), ErrorKind::kInvalidArgument);
}

class HttpEndpoint {
 public:
  explicit HttpEndpoint(std::function<std::string(const VerifyRequest&)> answer) {
    server_.Post("/api/verify", [answer](const httplib::Request& req, httplib::Response& res) {
      res.set_content(answer(DecodeRequest(req.body)), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpSessionTest, AnswersInOrder) {
  HttpEndpoint endpoint([](const VerifyRequest& r) { return EncodeResponse(Expected(r)); });
  EndpointOptions o;
  o.url = endpoint.url();
  o.timeout_seconds = 20;
  const auto requests = Requests(40);
  ExpectAnswers(requests, RunSession(requests, o));
}

TEST(HttpSessionTest, WrongSampleIdIsRejected) {
  HttpEndpoint endpoint([](const VerifyRequest& r) {
    auto resp = Expected(r);
    resp.sample_id = "other";
    return EncodeResponse(resp);
  });
  EndpointOptions o;
  o.url = endpoint.url();
  o.timeout_seconds = 20;
  EXPECT_EQ(KindOf([&] { RunSession(Requests(3), o); }), ErrorKind::kProtocol);
}

TEST(RunExternalTest, ScoreIsProbabilityOfSameAuthor) {
  PairDataset d;
  d.header.set_name = "test";
  for (int i = 0; i < 12; ++i) {
    PairSample s;
    s.sample_id = "test-" + std::to_string(i);
    s.para1 = "あ" + std::to_string(i);
    s.para2 = "い";
    s.label = i % 2;
    d.samples.push_back(s);
  }
  const auto results = RunExternal(d, Command("echo"));
  ASSERT_EQ(results.size(), 12u);
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto want = Expected({d.samples[i].sample_id, d.samples[i].para1, d.samples[i].para2});
    EXPECT_EQ(results[i].truth, d.samples[i].label);
    EXPECT_EQ(results[i].label, want.label);
    EXPECT_DOUBLE_EQ(results[i].score, want.label == 1 ? want.confidence : 1 - want.confidence);
  }
}

}  // namespace
}  // namespace authdrift
