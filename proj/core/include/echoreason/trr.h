#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/rewards.h"
#include "echoreason/study.h"
#include "echoreason/templates.h"
#include "echoreason/transcript.h"
#include "echoreason/verifiers.h"

namespace echoreason {

inline constexpr double kDefaultTrrThreshold = 0.4;

struct FlaggedStep {
  int index = 0;
  std::string text;
};

// What the policy sees on the second pass.
struct RectificationContext {
  std::string previous_transcript;
  std::vector<FlaggedStep> flagged;
  std::string instruction;

  // The full prompt text sent to the policy; its FNV-1a digest is recorded
  // in the trace.
  std::string Render() const;
};

// Fixed reprompt instruction shipped with the library.
std::string_view RectificationInstruction();

// Generates a raw transcript. `rectification` is null on the first pass.
// Implementations used with a parallel experiment must be thread-safe.
class PolicyClient {
 public:
  virtual ~PolicyClient() = default;
  virtual std::string Generate(const EchoStudy& study, const ReasoningTemplate& tmpl,
                               const RectificationContext* rectification) = 0;
};

// Judge scores for every model step and template position, aligned by
// position. Unlike the procedural-quality reward there is no step-count
// band: whatever was generated gets scored. Positions without a model step,
// without questions, or beyond the template are unscored. Result length is
// max(|R|, |T|).
std::vector<StepScore> ScoreSteps(const Transcript& transcript,
                                  const FilteredTemplate& filtered,
                                  const StepJudge& judge);

struct FlagResult {
  double mean = 0.0;
  double median = 0.0;
  double mad = 0.0;  // median absolute deviation about the median
  // 1-based positions into the input, ascending.
  std::vector<int> flagged;
};

// Flags scores strictly below mean - MAD. When nothing qualifies, the
// earliest minimum is flagged instead so a rectification always has a
// target.
FlagResult FlagLowSteps(std::span<const double> scores);

enum class TrrDecision { kAccepted, kRectified };
std::string_view TrrDecisionName(TrrDecision decision);

struct TrrRound1 {
  Transcript transcript;
  std::vector<StepScore> per_step_scores;
  double mean_score = 0.0;
  double mad = 0.0;
  std::vector<int> flagged_step_indices;
};

struct TrrRound2 {
  std::string prompt_digest;
  Transcript transcript;
};

struct TrrTrace {
  TrrRound1 round1;
  TrrDecision decision = TrrDecision::kAccepted;
  std::optional<TrrRound2> round2;
  Answer final_answer = Answer::kUnparsable;
  double threshold = kDefaultTrrThreshold;
};

// One generation, step scoring, then at most one rectification pass when
// the mean step score is below `threshold`. The round-2 answer is final.
TrrTrace RunTrr(const EchoStudy& study, const ReasoningTemplate& tmpl,
                const StepJudge& judge, PolicyClient& policy,
                const ViewVocabulary& vocab,
                double threshold = kDefaultTrrThreshold);

nlohmann::json TraceToJson(const TrrTrace& trace);

}  // namespace echoreason
