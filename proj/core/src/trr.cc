#include "echoreason/trr.h"

#include <algorithm>
#include <cmath>

#include "echoreason/errors.h"
#include "echoreason/text.h"

namespace echoreason {

using nlohmann::json;

namespace {

constexpr std::string_view kInstruction =
    "Your previous reasoning did not follow the diagnostic template closely "
    "enough at the flagged steps listed below. Revisit each flagged step: "
    "answer the template questions for that step explicitly, cite the "
    "available echocardiographic views and measurements you rely on, and "
    "state an affirmative or negative finding. Then update the final answer "
    "if the revised evidence requires it. Keep the output format "
    "<think> Step 1: ...; Step 2: ... </think><answer> Yes or No </answer>.";

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string GenerateOrThrow(PolicyClient& policy, const EchoStudy& study,
                            const ReasoningTemplate& tmpl,
                            const RectificationContext* ctx) {
  try {
    return policy.Generate(study, tmpl, ctx);
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw PolicyError(std::string("policy generation failed: ") + e.what());
  }
}

}  // namespace

std::string_view RectificationInstruction() { return kInstruction; }

std::string RectificationContext::Render() const {
  std::string out = instruction;
  out += "\n\nPrevious reasoning:\n";
  out += previous_transcript;
  out += "\n\nFlagged steps:\n";
  for (const auto& f : flagged) {
    out += "- Step " + std::to_string(f.index) + ": " + f.text + "\n";
  }
  return out;
}

std::vector<StepScore> ScoreSteps(const Transcript& transcript,
                                  const FilteredTemplate& filtered,
                                  const StepJudge& judge) {
  const std::size_t n_model = transcript.steps.size();
  const std::size_t n_template = filtered.steps.size();
  std::vector<StepScore> out;
  out.reserve(std::max(n_model, n_template));
  for (std::size_t i = 0; i < std::max(n_model, n_template); ++i) {
    StepScore entry{static_cast<int>(i) + 1, std::nullopt};
    if (i < n_model && i < n_template && !filtered.steps[i].questions.empty()) {
      std::vector<std::string> questions;
      for (const auto& q : filtered.steps[i].questions) questions.push_back(q.text);
      double s = judge.Judge(transcript.steps[i].text, questions, filtered.available_views);
      entry.score = std::isnan(s) ? 0.0 : std::clamp(s, 0.0, 1.0);
    }
    out.push_back(entry);
  }
  return out;
}

FlagResult FlagLowSteps(std::span<const double> scores) {
  if (scores.empty()) throw NoScoredSteps("no scored steps to flag");
  FlagResult r;
  double sum = 0.0;
  for (double s : scores) sum += s;
  r.mean = sum / static_cast<double>(scores.size());
  r.median = Median({scores.begin(), scores.end()});
  std::vector<double> dev;
  dev.reserve(scores.size());
  for (double s : scores) dev.push_back(std::abs(s - r.median));
  r.mad = Median(std::move(dev));

  const double cut = r.mean - r.mad;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] < cut) r.flagged.push_back(static_cast<int>(i) + 1);
  }
  if (r.flagged.empty()) {
    const auto it = std::min_element(scores.begin(), scores.end());
    r.flagged.push_back(static_cast<int>(it - scores.begin()) + 1);
  }
  return r;
}

std::string_view TrrDecisionName(TrrDecision decision) {
  return decision == TrrDecision::kAccepted ? "Accepted" : "Rectified";
}

TrrTrace RunTrr(const EchoStudy& study, const ReasoningTemplate& tmpl,
                const StepJudge& judge, PolicyClient& policy,
                const ViewVocabulary& vocab, double threshold) {
  TrrTrace trace;
  trace.threshold = threshold;
  const auto filtered = FilterQuestions(tmpl, study.AvailableViews());

  auto& r1 = trace.round1;
  r1.transcript = ParseTranscript(GenerateOrThrow(policy, study, tmpl, nullptr), vocab);
  r1.per_step_scores = ScoreSteps(r1.transcript, filtered, judge);

  std::vector<double> values;
  std::vector<int> positions;
  for (const auto& s : r1.per_step_scores) {
    if (s.score) {
      values.push_back(*s.score);
      positions.push_back(s.index);
    }
  }
  std::optional<FlagResult> flags;
  if (!values.empty()) {
    flags = FlagLowSteps(values);
    r1.mean_score = flags->mean;
    r1.mad = flags->mad;
  }

  if (flags && r1.mean_score >= threshold) {
    trace.decision = TrrDecision::kAccepted;
    trace.final_answer = r1.transcript.answer;
    return trace;
  }

  // Below threshold, or nothing could be scored: one rectification pass.
  trace.decision = TrrDecision::kRectified;
  RectificationContext ctx;
  ctx.previous_transcript = r1.transcript.raw;
  ctx.instruction = std::string(kInstruction);
  if (flags) {
    for (int pos : flags->flagged) {
      const int step_index = positions[pos - 1];
      r1.flagged_step_indices.push_back(step_index);
      ctx.flagged.push_back({step_index, r1.transcript.steps[step_index - 1].text});
    }
  }
  TrrRound2 r2;
  r2.prompt_digest = "fnv1a64:" + Fnv1a64Hex(ctx.Render());
  r2.transcript = ParseTranscript(GenerateOrThrow(policy, study, tmpl, &ctx), vocab);
  trace.final_answer = r2.transcript.answer;
  trace.round2 = std::move(r2);
  return trace;
}

json TraceToJson(const TrrTrace& t) {
  json round1 = {{"transcript", t.round1.transcript.raw},
                 {"answer", AnswerName(t.round1.transcript.answer)},
                 {"step_count", t.round1.transcript.steps.size()},
                 {"per_step_scores", StepScoresToJson(t.round1.per_step_scores)},
                 {"mean_score", t.round1.mean_score},
                 {"mad", t.round1.mad},
                 {"flagged_step_indices", t.round1.flagged_step_indices}};
  json out = {{"round1", std::move(round1)},
              {"decision", TrrDecisionName(t.decision)},
              {"final_answer", AnswerName(t.final_answer)},
              {"threshold", t.threshold}};
  if (t.round2) {
    out["round2"] = {{"prompt_digest", t.round2->prompt_digest},
                     {"transcript", t.round2->transcript.raw},
                     {"answer", AnswerName(t.round2->transcript.answer)},
                     {"step_count", t.round2->transcript.steps.size()}};
  } else {
    out["round2"] = nullptr;
  }
  return out;
}

}  // namespace echoreason
