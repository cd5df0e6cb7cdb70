#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/rewards.h"
#include "echoreason/study.h"
#include "echoreason/templates.h"
#include "echoreason/trr.h"
#include "echoreason/verifiers.h"

namespace echoreason {

// Synthetic studies: one per case, cycling through `templates`. Videos
// cover each template's required views with seeded dropouts; ground truth
// alternates Yes/No. Deterministic in (seed, n_cases, templates).
std::vector<EchoStudy> GenerateStudies(std::uint64_t seed, std::size_t n_cases,
                                       std::span<const ReasoningTemplate> templates);

enum class PolicyKind {
  kFaithful,           // one step per template step, grounded, mostly correct
  kDegenerate,         // a single vague step
  kVerbose,            // |T| + epsilon + 1 steps
  kUngrounded,         // |T| steps that never name a view
  kWeakThenCorrected,  // vague and wrong first, faithful and right on rectification
};

std::string_view PolicyKindName(PolicyKind kind);
std::optional<PolicyKind> PolicyKindFromName(std::string_view name);

// Deterministic scripted policy: output depends only on (kind, seed, study,
// template, whether a rectification context was given). Stateless, so one
// instance can serve concurrent cases.
class ScriptedPolicy final : public PolicyClient {
 public:
  ScriptedPolicy(PolicyKind kind, std::uint64_t seed, ViewVocabulary vocab,
                 int epsilon = kDefaultVerbosityTolerance)
      : kind_(kind), seed_(seed), vocab_(std::move(vocab)), epsilon_(epsilon) {}

  std::string Generate(const EchoStudy& study, const ReasoningTemplate& tmpl,
                       const RectificationContext* rectification) override;

  PolicyKind kind() const { return kind_; }

 private:
  PolicyKind kind_;
  std::uint64_t seed_;
  ViewVocabulary vocab_;
  int epsilon_;
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  PolicyKind policy = PolicyKind::kFaithful;
  Stage stage = Stage::kStage2;
  int epsilon = kDefaultVerbosityTolerance;
  double threshold = kDefaultTrrThreshold;
  bool trr = false;
  // Worker threads; 0 uses the hardware concurrency. Does not affect output.
  unsigned threads = 1;
};

struct CaseResult {
  std::string patient_id;
  std::string query;
  std::string template_id;
  double retrieval_similarity = 0.0;
  Answer ground_truth = Answer::kUnparsable;
  Answer prediction = Answer::kUnparsable;
  std::size_t step_count = 0;
  RewardBreakdown reward;
  std::optional<TrrTrace> trr;
};

struct CaseOutcome {
  std::string query;
  Answer prediction = Answer::kUnparsable;
  Answer truth = Answer::kUnparsable;
  std::size_t step_count = 0;
};

struct QueryMetrics {
  std::string query;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double f1 = 0.0;
};

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double mean_step_count = 0.0;
  std::vector<QueryMetrics> per_query;  // sorted by query
};

// Accuracy, per-query F1 with "Yes" as the positive class (0 when
// undefined), their macro average, and mean reasoning step count.
Metrics ComputeMetrics(std::span<const CaseOutcome> cases);

struct EvalReport {
  ExperimentConfig config;
  std::size_t n_cases = 0;
  std::vector<CaseResult> cases;  // sorted by patient_id
  Metrics metrics;
};

// Retrieves a template per study, generates (optionally through TRR),
// scores the round-1 transcript and aggregates. Studies need ground truth.
EvalReport RunExperiment(std::span<const EchoStudy> studies,
                         std::span<const ReasoningTemplate> templates,
                         const ViewVocabulary& vocab, const VerifierSet& verifiers,
                         PolicyClient& policy, const ExperimentConfig& config);

nlohmann::json ExperimentConfigToJson(const ExperimentConfig& config, std::size_t n_cases);
nlohmann::json MetricsToJson(const Metrics& metrics);
nlohmann::json ReportToJson(const EvalReport& report);

}  // namespace echoreason
