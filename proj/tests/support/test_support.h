#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "echoreason/study.h"
#include "echoreason/templates.h"
#include "echoreason/trr.h"
#include "echoreason/verifiers.h"
#include "echoreason/views.h"

namespace echoreason::testing {

std::filesystem::path TestDataDir();
std::filesystem::path GoldenDir();
std::filesystem::path BundledTemplateDir();

const ViewVocabulary& Vocab();
const std::vector<ReasoningTemplate>& BundledTemplates();
const ReasoningTemplate& BundledTemplate(const std::string& id);

// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path Write(const std::string& name, const std::string& contents) const;

 private:
  std::filesystem::path path_;
};

// Returns canned transcripts and counts calls.
class CannedPolicy : public PolicyClient {
 public:
  CannedPolicy(std::string first, std::string second)
      : first_(std::move(first)), second_(std::move(second)) {}

  std::string Generate(const EchoStudy&, const ReasoningTemplate&,
                       const RectificationContext* ctx) override {
    ++calls;
    if (ctx) last_context = *ctx;
    return ctx ? second_ : first_;
  }

  int calls = 0;
  RectificationContext last_context;

 private:
  std::string first_;
  std::string second_;
};

// Wraps another policy and counts calls.
class CountingPolicy : public PolicyClient {
 public:
  explicit CountingPolicy(PolicyClient& inner) : inner_(inner) {}

  std::string Generate(const EchoStudy& s, const ReasoningTemplate& t,
                       const RectificationContext* ctx) override {
    ++calls;
    return inner_.Generate(s, t, ctx);
  }

  int calls = 0;

 private:
  PolicyClient& inner_;
};

// Judge that returns scripted scores in call order (cycling).
class ScriptedJudge : public StepJudge {
 public:
  explicit ScriptedJudge(std::vector<double> scores) : scores_(std::move(scores)) {}

  double Judge(std::string_view, std::span<const std::string>,
               std::span<const std::string>) const override {
    const auto i = next_.fetch_add(1);
    return scores_[i % scores_.size()];
  }

  std::size_t calls() const { return next_.load(); }

 private:
  std::vector<double> scores_;
  mutable std::atomic<std::size_t> next_{0};
};

// Scorer keyed by video id.
class TableScorer : public VideoTextScorer {
 public:
  explicit TableScorer(std::map<std::string, double> by_video)
      : by_video_(std::move(by_video)) {}
  double Similarity(std::string_view, const Video& video) const override {
    return by_video_.at(video.id);
  }

 private:
  std::map<std::string, double> by_video_;
};

// A raw transcript with `n` steps, each a single sentence of `body`.
std::string MakeTranscript(int n, const std::string& body = "observation noted",
                           const std::string& answer = "Yes");

// In-process HTTP server speaking the verifier protocol. Each handler maps
// a request body to (status, response body).
class FakeVerifierServer {
 public:
  using Handler = std::function<std::pair<int, std::string>(const std::string& body)>;

  FakeVerifierServer();
  ~FakeVerifierServer();

  void OnJudge(Handler h);
  void OnSimilarity(Handler h);
  void OnEmbed(Handler h);

  // Serves the protocol from local verifiers. Similarity requests resolve
  // captions through `videos_by_uri`.
  void ServeFrom(const VerifierSet& verifiers, std::map<std::string, Video> videos_by_uri);

  std::string endpoint() const;
  int requests() const { return requests_.load(); }
  int peak_in_flight() const { return peak_.load(); }
  std::string last_authorization() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  std::atomic<int> requests_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
};

// A localhost port with nothing listening.
int UnusedPort();

}  // namespace echoreason::testing
