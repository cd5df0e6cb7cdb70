#include "echoreason/remote.h"

#include <algorithm>
#include <thread>

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "echoreason/errors.h"
#include "echoreason/protocol.h"

namespace echoreason {

namespace {

class SlotGuard {
 public:
  explicit SlotGuard(std::counting_semaphore<RemoteChannel::kMaxInFlightLimit>& sem)
      : sem_(sem) {
    sem_.acquire();
  }
  ~SlotGuard() { sem_.release(); }
  SlotGuard(const SlotGuard&) = delete;
  SlotGuard& operator=(const SlotGuard&) = delete;

 private:
  std::counting_semaphore<RemoteChannel::kMaxInFlightLimit>& sem_;
};

double CheckedScore(std::string_view endpoint, const std::string& body) {
  const auto resp = protocol::DecodeScoreResponse(body);
  if (!(resp.score >= 0.0 && resp.score <= 1.0)) {
    throw RangeError(std::string(endpoint) + ": score " + std::to_string(resp.score) +
                     " outside [0, 1]");
  }
  return resp.score;
}

}  // namespace

std::string_view ErrorPolicyName(ErrorPolicy policy) {
  return policy == ErrorPolicy::kZero ? "zero" : "fail";
}

std::optional<ErrorPolicy> ErrorPolicyFromName(std::string_view name) {
  if (name == "fail") return ErrorPolicy::kFail;
  if (name == "zero") return ErrorPolicy::kZero;
  return std::nullopt;
}

RemoteChannel::RemoteChannel(RemoteOptions options)
    : options_(std::move(options)),
      slots_(std::clamp(options_.max_in_flight, 1, kMaxInFlightLimit)) {
  const std::string& ep = options_.endpoint;
  const auto scheme = ep.find("://");
  const auto host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const auto slash = ep.find('/', host_start);
  if (slash == std::string::npos) {
    host_ = ep;
  } else {
    host_ = ep.substr(0, slash);
    path_prefix_ = ep.substr(slash);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
  }
  if (host_.size() <= host_start) {
    throw ValidationError("remote verifier endpoint has no host: '" + ep + "'");
  }
}

std::string RemoteChannel::Post(std::string_view path, const std::string& body) const {
  SlotGuard guard(slots_);
  const std::string full_path = path_prefix_ + std::string(path);

  httplib::Client client(host_);
  const auto timeout_s = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto timeout_us = std::chrono::duration_cast<std::chrono::microseconds>(
      options_.timeout - timeout_s);
  client.set_connection_timeout(timeout_s.count(), timeout_us.count());
  client.set_read_timeout(timeout_s.count(), timeout_us.count());
  client.set_write_timeout(timeout_s.count(), timeout_us.count());
  if (!options_.bearer_token.empty()) {
    client.set_bearer_token_auth(options_.bearer_token);
  }

  std::string last_error;
  bool transport_failure = false;
  const int attempts = 1 + std::max(options_.max_retries, 0);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(options_.initial_backoff * (1 << (attempt - 1)));
    }
    auto res = client.Post(full_path, body, "application/json");
    if (!res) {
      transport_failure = true;
      last_error = host_ + full_path + ": " + httplib::to_string(res.error());
      continue;
    }
    transport_failure = false;
    if (res->status >= 200 && res->status < 300) return res->body;
    last_error = host_ + full_path + ": HTTP " + std::to_string(res->status);
    if (res->status < 500) break;  // client errors are not retried
  }
  if (transport_failure) throw TransportError(last_error);
  throw ProtocolError(last_error);
}

void RemoteChannel::RecordWarning(std::string warning) const {
  spdlog::warn("{}", warning);
  std::lock_guard lock(mu_);
  warnings_.push_back(std::move(warning));
}

std::vector<std::string> RemoteChannel::warnings() const {
  std::lock_guard lock(mu_);
  return warnings_;
}

double RemoteJudge::Judge(std::string_view step_text,
                          std::span<const std::string> questions,
                          std::span<const std::string> available_views) const {
  protocol::JudgeRequest req{std::string(step_text),
                             {questions.begin(), questions.end()},
                             {available_views.begin(), available_views.end()}};
  try {
    return CheckedScore(protocol::kJudgePath,
                        channel_->Post(protocol::kJudgePath, protocol::Encode(req)));
  } catch (const VerifierError& e) {
    if (channel_->options().on_error == ErrorPolicy::kFail) throw;
    channel_->RecordWarning(std::string("judge failed, scoring 0: ") + e.what());
    return 0.0;
  }
}

double RemoteScorer::Similarity(std::string_view sentence, const Video& video) const {
  protocol::SimilarityRequest req{std::string(sentence), video.view_label, video.uri};
  try {
    return CheckedScore(protocol::kSimilarityPath,
                        channel_->Post(protocol::kSimilarityPath, protocol::Encode(req)));
  } catch (const VerifierError& e) {
    if (channel_->options().on_error == ErrorPolicy::kFail) throw;
    channel_->RecordWarning(std::string("similarity failed, scoring 0: ") + e.what());
    return 0.0;
  }
}

std::vector<std::vector<double>> RemoteEmbedder::Embed(
    std::span<const std::string> texts) const {
  protocol::EmbedRequest req{{texts.begin(), texts.end()}};
  try {
    auto resp = protocol::DecodeEmbedResponse(
        channel_->Post(protocol::kEmbedPath, protocol::Encode(req)));
    if (resp.vectors.size() != texts.size()) {
      throw ProtocolError("embed response: expected " + std::to_string(texts.size()) +
                          " vectors, got " + std::to_string(resp.vectors.size()));
    }
    return std::move(resp.vectors);
  } catch (const VerifierError& e) {
    if (channel_->options().on_error == ErrorPolicy::kFail) throw;
    channel_->RecordWarning(std::string("embed failed, using zero vectors: ") + e.what());
    return std::vector<std::vector<double>>(texts.size());
  }
}

RemoteVerifiers MakeRemoteVerifiers(const RemoteOptions& options) {
  auto channel = std::make_shared<const RemoteChannel>(options);
  return {{std::make_shared<RemoteJudge>(channel), std::make_shared<RemoteScorer>(channel),
           std::make_shared<RemoteEmbedder>(channel)},
          channel};
}

}  // namespace echoreason
