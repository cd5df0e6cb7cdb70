#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "echoreason/verifiers.h"

namespace echoreason {

// What a remote verifier does once retries are exhausted.
enum class ErrorPolicy {
  kFail,  // propagate the error
  kZero,  // return a zero score and record a warning
};

std::string_view ErrorPolicyName(ErrorPolicy policy);
std::optional<ErrorPolicy> ErrorPolicyFromName(std::string_view name);

struct RemoteOptions {
  std::string endpoint;      // "http://host:port[/prefix]"
  std::string bearer_token;  // sent as "Authorization: Bearer ..." when set
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{100};
  std::chrono::milliseconds timeout{30000};
  ErrorPolicy on_error = ErrorPolicy::kFail;
  int max_in_flight = 8;
};

// HTTP transport shared by the three remote verifier roles. Requests are
// retried on connection failures and 5xx responses with exponential
// backoff; at most `max_in_flight` requests are outstanding at once.
class RemoteChannel {
 public:
  static constexpr int kMaxInFlightLimit = 1024;

  explicit RemoteChannel(RemoteOptions options);

  // Returns the 2xx response body. Throws TransportError when the server
  // is unreachable and ProtocolError on non-2xx statuses.
  std::string Post(std::string_view path, const std::string& body) const;

  const RemoteOptions& options() const { return options_; }

  void RecordWarning(std::string warning) const;
  std::vector<std::string> warnings() const;

 private:
  RemoteOptions options_;
  std::string host_;
  std::string path_prefix_;
  mutable std::counting_semaphore<kMaxInFlightLimit> slots_;
  mutable std::mutex mu_;
  mutable std::vector<std::string> warnings_;
};

class RemoteJudge final : public StepJudge {
 public:
  explicit RemoteJudge(std::shared_ptr<const RemoteChannel> channel)
      : channel_(std::move(channel)) {}

  double Judge(std::string_view step_text, std::span<const std::string> questions,
               std::span<const std::string> available_views) const override;

 private:
  std::shared_ptr<const RemoteChannel> channel_;
};

class RemoteScorer final : public VideoTextScorer {
 public:
  explicit RemoteScorer(std::shared_ptr<const RemoteChannel> channel)
      : channel_(std::move(channel)) {}

  double Similarity(std::string_view sentence, const Video& video) const override;

 private:
  std::shared_ptr<const RemoteChannel> channel_;
};

// Under ErrorPolicy::kZero a failed call yields empty vectors, which have
// cosine 0 against anything.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(std::shared_ptr<const RemoteChannel> channel)
      : channel_(std::move(channel)) {}

  std::vector<std::vector<double>> Embed(
      std::span<const std::string> texts) const override;

 private:
  std::shared_ptr<const RemoteChannel> channel_;
};

struct RemoteVerifiers {
  VerifierSet verifiers;
  std::shared_ptr<const RemoteChannel> channel;
};

RemoteVerifiers MakeRemoteVerifiers(const RemoteOptions& options);

}  // namespace echoreason
