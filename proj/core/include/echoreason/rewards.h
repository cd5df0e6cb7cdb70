#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/study.h"
#include "echoreason/templates.h"
#include "echoreason/transcript.h"
#include "echoreason/verifiers.h"

namespace echoreason {

enum class Stage { kStage1, kStage2 };

std::string_view StageName(Stage stage);
// Accepts "1"/"2", "stage1"/"stage2" (case-insensitive).
std::optional<Stage> StageFromName(std::string_view name);

inline constexpr int kDefaultVerbosityTolerance = 5;

struct RewardWeights {
  double format = 0.0;
  double acc = 0.0;
  double pqtr = 0.0;
  double pqlr = 0.0;
  double esr = 0.0;

  double Sum() const { return format + acc + pqtr + pqlr + esr; }
  bool operator==(const RewardWeights&) const = default;
};

// Stage 1 trains format, accuracy and step quantity only; stage 2 adds the
// procedural-quality and semantic rewards.
struct WeightSchedule {
  RewardWeights stage1{1.0, 1.0, 1.0, 0.0, 0.0};
  RewardWeights stage2{1.0, 1.5, 0.5, 0.8, 0.5};

  const RewardWeights& For(Stage stage) const {
    return stage == Stage::kStage1 ? stage1 : stage2;
  }
  bool operator==(const WeightSchedule&) const = default;
};

struct RewardConfig {
  int epsilon = kDefaultVerbosityTolerance;  // verbosity tolerance
  WeightSchedule weights;
  Stage stage = Stage::kStage2;
};

// Judge score for one template position; nullopt when the position was not
// scored (no questions survived filtering, or no matching model step).
struct StepScore {
  int index = 0;
  std::optional<double> score;

  bool operator==(const StepScore&) const = default;
};

struct PqlrResult {
  double score = 0.0;
  std::vector<StepScore> per_step;
};

struct EsrPair {
  int step_index = 0;
  std::string sentence;
  std::string view;
  std::string video_id;
  double score = 0.0;
};

struct EsrResult {
  double score = 0.0;
  std::vector<EsrPair> pairs;
};

struct RewardComponents {
  double format = 0.0;
  double acc = 0.0;
  double pqtr = 0.0;
  double pqlr = 0.0;
  double esr = 0.0;
};

struct RewardBreakdown {
  double format = 0.0;
  double acc = 0.0;
  double pqtr = 0.0;
  double pqlr = 0.0;
  double esr = 0.0;
  double gate = 0.0;  // 1 iff acc == 1
  double total = 0.0;
  Stage stage = Stage::kStage2;
  RewardWeights weights;
  std::vector<StepScore> step_scores;
  std::vector<EsrPair> pairs;
};

// True iff |T| <= |R| <= |T| + epsilon.
bool WithinStepBand(std::size_t n_steps, std::size_t n_template_steps, int epsilon);

double ComputeFormat(const Transcript& transcript);
double ComputeAccuracy(const Transcript& transcript, Answer ground_truth);

// min(1, |R|/|T|) while |R| <= |T| + epsilon, else 0.
double ComputePqtr(std::size_t n_steps, std::size_t n_template_steps, int epsilon);

// Mean judge score over template positions, aligning model step i with
// template step i. Positions whose filtered question list is empty drop out
// of numerator and denominator. Zero outside the step band.
PqlrResult ComputePqlr(const Transcript& transcript, const FilteredTemplate& filtered,
                       const StepJudge& judge, int epsilon);

// Mean scorer value over (video, sentence) pairs built from view mentions.
// A sentence pairs with the best-scoring video of each view it mentions.
// Zero outside the step band or when no pair exists.
EsrResult ComputeEsr(const Transcript& transcript, const EchoStudy& study,
                     const VideoTextScorer& scorer, std::size_t n_template_steps,
                     int epsilon);

RewardBreakdown Combine(const RewardComponents& components, const RewardConfig& config);

// Full pipeline for one transcript. The study must carry a ground truth.
RewardBreakdown ScoreTranscript(const Transcript& transcript, const EchoStudy& study,
                                const ReasoningTemplate& tmpl, const VerifierSet& verifiers,
                                const RewardConfig& config);

nlohmann::json WeightsToJson(const RewardWeights& weights);
RewardWeights WeightsFromJson(const nlohmann::json& doc);
nlohmann::json StepScoresToJson(const std::vector<StepScore>& scores);
nlohmann::json BreakdownToJson(const RewardBreakdown& breakdown);

}  // namespace echoreason
