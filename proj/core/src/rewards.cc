#include "echoreason/rewards.h"

#include <algorithm>
#include <cmath>

#include "echoreason/errors.h"
#include "echoreason/text.h"

namespace echoreason {

using nlohmann::json;

namespace {

double Clamp01(double x) {
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, 0.0, 1.0);
}

}  // namespace

std::string_view StageName(Stage stage) {
  return stage == Stage::kStage1 ? "stage1" : "stage2";
}

std::optional<Stage> StageFromName(std::string_view name) {
  const std::string lowered = ToLowerAscii(TrimWhitespace(name));
  if (lowered == "1" || lowered == "stage1") return Stage::kStage1;
  if (lowered == "2" || lowered == "stage2") return Stage::kStage2;
  return std::nullopt;
}

bool WithinStepBand(std::size_t n_steps, std::size_t n_template_steps, int epsilon) {
  return n_steps >= n_template_steps &&
         n_steps <= n_template_steps + static_cast<std::size_t>(std::max(epsilon, 0));
}

double ComputeFormat(const Transcript& transcript) {
  return transcript.format_ok ? 1.0 : 0.0;
}

double ComputeAccuracy(const Transcript& transcript, Answer ground_truth) {
  if (transcript.answer == Answer::kUnparsable) return 0.0;
  return transcript.answer == ground_truth ? 1.0 : 0.0;
}

double ComputePqtr(std::size_t n_steps, std::size_t n_template_steps, int epsilon) {
  if (n_template_steps == 0) throw InvalidTemplate("template has no steps");
  if (epsilon < 0) throw ValidationError("verbosity tolerance must be >= 0");
  if (n_steps > n_template_steps + static_cast<std::size_t>(epsilon)) return 0.0;
  return std::min(1.0, static_cast<double>(n_steps) /
                           static_cast<double>(n_template_steps));
}

PqlrResult ComputePqlr(const Transcript& transcript, const FilteredTemplate& filtered,
                       const StepJudge& judge, int epsilon) {
  PqlrResult result;
  const std::size_t n_template = filtered.steps.size();
  if (n_template == 0) throw InvalidTemplate("template has no steps");
  if (!WithinStepBand(transcript.steps.size(), n_template, epsilon)) return result;

  double sum = 0.0;
  std::size_t scored = 0;
  for (std::size_t i = 0; i < n_template; ++i) {
    const auto& tstep = filtered.steps[i];
    StepScore entry{tstep.index, std::nullopt};
    if (!tstep.questions.empty()) {
      std::vector<std::string> questions;
      questions.reserve(tstep.questions.size());
      for (const auto& q : tstep.questions) questions.push_back(q.text);
      const double s =
          Clamp01(judge.Judge(transcript.steps[i].text, questions, filtered.available_views));
      entry.score = s;
      sum += s;
      ++scored;
    }
    result.per_step.push_back(entry);
  }
  result.score = scored == 0 ? 0.0 : sum / static_cast<double>(scored);
  return result;
}

EsrResult ComputeEsr(const Transcript& transcript, const EchoStudy& study,
                     const VideoTextScorer& scorer, std::size_t n_template_steps,
                     int epsilon) {
  EsrResult result;
  if (n_template_steps == 0) throw InvalidTemplate("template has no steps");
  if (!WithinStepBand(transcript.steps.size(), n_template_steps, epsilon)) return result;

  double sum = 0.0;
  for (const auto& step : transcript.steps) {
    for (const auto& sentence : step.sentences) {
      for (const auto& view : sentence.view_mentions) {
        const Video* best_video = nullptr;
        double best = 0.0;
        for (const auto& video : study.videos) {
          if (video.view_label != view) continue;
          const double s = Clamp01(scorer.Similarity(sentence.text, video));
          if (best_video == nullptr || s > best) {
            best_video = &video;
            best = s;
          }
        }
        if (best_video == nullptr) continue;
        result.pairs.push_back({step.index, sentence.text, view, best_video->id, best});
        sum += best;
      }
    }
  }
  if (!result.pairs.empty()) result.score = sum / static_cast<double>(result.pairs.size());
  return result;
}

RewardBreakdown Combine(const RewardComponents& c, const RewardConfig& config) {
  RewardBreakdown b;
  b.format = Clamp01(c.format);
  b.acc = Clamp01(c.acc);
  b.pqtr = Clamp01(c.pqtr);
  b.pqlr = Clamp01(c.pqlr);
  b.esr = Clamp01(c.esr);
  b.gate = b.acc == 1.0 ? 1.0 : 0.0;
  b.stage = config.stage;
  b.weights = config.weights.For(config.stage);
  const RewardWeights& w = b.weights;
  b.total = w.format * b.format + w.acc * b.acc +
            b.gate * (w.pqlr * b.pqlr + w.pqtr * b.pqtr + w.esr * b.esr);
  return b;
}

RewardBreakdown ScoreTranscript(const Transcript& transcript, const EchoStudy& study,
                                const ReasoningTemplate& tmpl, const VerifierSet& verifiers,
                                const RewardConfig& config) {
  if (!study.ground_truth) {
    throw ValidationError("study '" + study.patient_id + "' has no ground truth");
  }
  const auto filtered = FilterQuestions(tmpl, study.AvailableViews());

  RewardComponents c;
  c.format = ComputeFormat(transcript);
  c.acc = ComputeAccuracy(transcript, *study.ground_truth);
  c.pqtr = ComputePqtr(transcript.steps.size(), tmpl.steps.size(), config.epsilon);
  auto pqlr = ComputePqlr(transcript, filtered, *verifiers.judge, config.epsilon);
  auto esr = ComputeEsr(transcript, study, *verifiers.scorer, tmpl.steps.size(),
                        config.epsilon);
  c.pqlr = pqlr.score;
  c.esr = esr.score;

  RewardBreakdown b = Combine(c, config);
  b.step_scores = std::move(pqlr.per_step);
  b.pairs = std::move(esr.pairs);
  return b;
}

json WeightsToJson(const RewardWeights& w) {
  return {{"format", w.format}, {"acc", w.acc}, {"pqtr", w.pqtr},
          {"pqlr", w.pqlr},     {"esr", w.esr}};
}

RewardWeights WeightsFromJson(const json& doc) {
  if (!doc.is_object()) throw ValidationError("weights must be a JSON object");
  auto get = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end() || !it->is_number()) {
      throw ValidationError(std::string("weights: missing numeric field '") + key + "'");
    }
    const double v = it->get<double>();
    if (v < 0.0) throw ValidationError(std::string("weights: '") + key + "' < 0");
    return v;
  };
  return {get("format"), get("acc"), get("pqtr"), get("pqlr"), get("esr")};
}

json StepScoresToJson(const std::vector<StepScore>& scores) {
  json out = json::array();
  for (const auto& s : scores) {
    out.push_back({{"index", s.index},
                   {"score", s.score ? json(*s.score) : json(nullptr)}});
  }
  return out;
}

json BreakdownToJson(const RewardBreakdown& b) {
  json pairs = json::array();
  for (const auto& p : b.pairs) {
    pairs.push_back({{"step_index", p.step_index},
                     {"sentence", p.sentence},
                     {"view", p.view},
                     {"video_id", p.video_id},
                     {"score", p.score}});
  }
  return {{"format", b.format},
          {"acc", b.acc},
          {"pqtr", b.pqtr},
          {"pqlr", b.pqlr},
          {"esr", b.esr},
          {"gate", b.gate},
          {"total", b.total},
          {"stage", StageName(b.stage)},
          {"weights", WeightsToJson(b.weights)},
          {"details", {{"step_scores", StepScoresToJson(b.step_scores)},
                       {"pairs", std::move(pairs)}}}};
}

}  // namespace echoreason
