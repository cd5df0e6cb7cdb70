#include "echoreason/remote.h"

#include <atomic>
#include <chrono>
#include <thread>

#include <gtest/gtest.h>

#include "echoreason/errors.h"
#include "echoreason/protocol.h"
#include "echoreason/rewards.h"
#include "echoreason/study.h"
#include "echoreason/text.h"
#include "echoreason/transcript.h"
#include "test_support.h"

namespace echoreason {
namespace {

using testing::FakeVerifierServer;

RemoteOptions Options(const std::string& endpoint, ErrorPolicy policy = ErrorPolicy::kFail) {
  RemoteOptions o;
  o.endpoint = endpoint;
  o.on_error = policy;
  o.initial_backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::milliseconds(2000);
  return o;
}

FakeVerifierServer::Handler Fixed(int status, std::string body) {
  return [status, body](const std::string&) { return std::pair{status, body}; };
}

double CallJudge(const StepJudge& judge) {
  const std::vector<std::string> q = {"Is the LV dilated?"};
  const std::vector<std::string> views = {"A4C"};
  return judge.Judge("Step 1: A4C dilated.", q, views);
}

TEST(RemoteTest, PassesScoreThrough) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(200, R"({"score":0.7})"));
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  EXPECT_DOUBLE_EQ(CallJudge(*remote.verifiers.judge), 0.7);
  EXPECT_EQ(server.requests(), 1);
}

TEST(RemoteTest, SendsTheWireRequest) {
  FakeVerifierServer server;
  std::string seen;
  server.OnJudge([&](const std::string& body) {
    seen = body;
    return std::pair{200, std::string(R"({"score":0.1})")};
  });
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  CallJudge(*remote.verifiers.judge);
  EXPECT_EQ(seen,
            R"({"available_views":["A4C"],"questions":["Is the LV dilated?"],"step_text":"Step 1: A4C dilated."})");
}

TEST(RemoteTest, OutOfRangeScoreIsARangeError) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(200, R"({"score":1.4})"));
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  EXPECT_THROW(CallJudge(*remote.verifiers.judge), RangeError);
}

TEST(RemoteTest, MissingFieldIsAProtocolError) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(200, R"({"value":0.4})"));
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  EXPECT_THROW(CallJudge(*remote.verifiers.judge), ProtocolError);
}

TEST(RemoteTest, ServerDownWithZeroPolicyScoresZeroAndWarns) {
  auto opts = Options("http://127.0.0.1:" + std::to_string(testing::UnusedPort()),
                      ErrorPolicy::kZero);
  const auto remote = MakeRemoteVerifiers(opts);
  EXPECT_EQ(CallJudge(*remote.verifiers.judge), 0.0);
  ASSERT_EQ(remote.channel->warnings().size(), 1u);
}

TEST(RemoteTest, ServerDownWithFailPolicyIsATransportError) {
  const auto remote = MakeRemoteVerifiers(
      Options("http://127.0.0.1:" + std::to_string(testing::UnusedPort())));
  EXPECT_THROW(CallJudge(*remote.verifiers.judge), TransportError);
  EXPECT_TRUE(remote.channel->warnings().empty());
}

TEST(RemoteTest, RetriesServerErrorsThenSucceeds) {
  FakeVerifierServer server;
  std::atomic<int> calls{0};
  server.OnJudge([&](const std::string&) {
    return ++calls < 3 ? std::pair{503, std::string("{}")}
                       : std::pair{200, std::string(R"({"score":0.3})")};
  });
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  EXPECT_DOUBLE_EQ(CallJudge(*remote.verifiers.judge), 0.3);
  EXPECT_EQ(calls.load(), 3);
}

TEST(RemoteTest, GivesUpAfterConfiguredRetries) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(500, "{}"));
  auto opts = Options(server.endpoint());
  opts.max_retries = 2;
  const auto remote = MakeRemoteVerifiers(opts);
  EXPECT_THROW(CallJudge(*remote.verifiers.judge), ProtocolError);
  EXPECT_EQ(server.requests(), 3);
}

TEST(RemoteTest, ClientErrorsAreNotRetried) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(400, "{}"));
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  EXPECT_THROW(CallJudge(*remote.verifiers.judge), ProtocolError);
  EXPECT_EQ(server.requests(), 1);
}

TEST(RemoteTest, ForwardsBearerToken) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(200, R"({"score":0.5})"));
  auto opts = Options(server.endpoint());
  opts.bearer_token = "s3cret";
  CallJudge(*MakeRemoteVerifiers(opts).verifiers.judge);
  EXPECT_EQ(server.last_authorization(), "Bearer s3cret");
}

TEST(RemoteTest, BoundsRequestsInFlight) {
  FakeVerifierServer server;
  server.OnJudge([](const std::string&) {
    std::this_thread::sleep_for(std::chrono::milliseconds(30));
    return std::pair{200, std::string(R"({"score":0.5})")};
  });
  auto opts = Options(server.endpoint());
  opts.max_in_flight = 2;
  const auto remote = MakeRemoteVerifiers(opts);
  std::vector<std::thread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&] { CallJudge(*remote.verifiers.judge); });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(server.requests(), 8);
  EXPECT_LE(server.peak_in_flight(), 2);
}

TEST(RemoteTest, EmbedderValidatesVectorCount) {
  FakeVerifierServer server;
  server.OnEmbed(Fixed(200, R"({"vectors":[[1.0]]})"));
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  const std::vector<std::string> texts = {"a", "b"};
  EXPECT_THROW(remote.verifiers.embedder->Embed(texts), ProtocolError);
}

TEST(RemoteTest, EmbedderZeroPolicyYieldsEmptyVectors) {
  const auto remote = MakeRemoteVerifiers(
      Options("http://127.0.0.1:" + std::to_string(testing::UnusedPort()), ErrorPolicy::kZero));
  const std::vector<std::string> texts = {"a", "b"};
  const auto v = remote.verifiers.embedder->Embed(texts);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_TRUE(v[0].empty());
}

TEST(RemoteTest, PathPrefixIsHonoured) {
  FakeVerifierServer server;
  server.OnJudge(Fixed(200, R"({"score":0.5})"));
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint() + "/prefix/"));
  EXPECT_THROW(CallJudge(*remote.verifiers.judge), ProtocolError);  // 404 under the prefix
}

TEST(RemoteTest, EndpointWithoutHostIsRejected) {
  EXPECT_THROW(RemoteChannel(Options("http://")), ValidationError);
}

TEST(RemoteTest, ErrorPolicyNames) {
  EXPECT_EQ(ErrorPolicyFromName("zero"), ErrorPolicy::kZero);
  EXPECT_EQ(ErrorPolicyFromName("fail"), ErrorPolicy::kFail);
  EXPECT_FALSE(ErrorPolicyFromName("ignore").has_value());
  EXPECT_EQ(ErrorPolicyName(ErrorPolicy::kZero), "zero");
}

TEST(RemoteTest, RemoteScoringMatchesLocalMocks) {
  const auto& vocab = testing::Vocab();
  const auto study = StudyFromJson(
      nlohmann::json::parse(ReadFile(testing::TestDataDir() / "hcm_perfect_study.json")), vocab);
  const auto transcript = ParseTranscript(
      ReadFile(testing::TestDataDir() / "hcm_perfect_transcript.txt"), vocab);
  const auto mocks = VerifierSet::Mock(vocab);
  std::map<std::string, Video> by_uri;
  for (const auto& v : study.videos) by_uri[v.uri] = v;

  FakeVerifierServer server;
  server.ServeFrom(mocks, by_uri);
  const auto remote = MakeRemoteVerifiers(Options(server.endpoint()));
  const auto& tmpl = testing::BundledTemplate("crt-hcm");
  const RewardConfig config;
  const auto local = ScoreTranscript(transcript, study, tmpl, mocks, config);
  const auto over_wire = ScoreTranscript(transcript, study, tmpl, remote.verifiers, config);
  EXPECT_EQ(BreakdownToJson(local), BreakdownToJson(over_wire));
  EXPECT_DOUBLE_EQ(over_wire.total, 4.3);
}

}  // namespace
}  // namespace echoreason
