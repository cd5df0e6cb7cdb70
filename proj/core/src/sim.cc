#include "echoreason/sim.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "echoreason/errors.h"
#include "echoreason/json_util.h"
#include "echoreason/text.h"

namespace echoreason {

using nlohmann::json;

namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// std::mt19937_64's output sequence is fixed by the standard, unlike the
// distribution classes, so draws are built from raw engine output.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr double kViewDropoutRate = 0.25;
constexpr double kFullCoverageRate = 0.5;
constexpr double kFaithfulAccuracy = 0.85;
constexpr double kDegenerateAccuracy = 0.6;

std::string Statement(std::string_view question) {
  std::string s(TrimWhitespace(question));
  while (!s.empty() && (s.back() == '?' || s.back() == '.')) s.pop_back();
  return s;
}

Answer Flip(Answer a) { return a == Answer::kYes ? Answer::kNo : Answer::kYes; }

std::string_view FindingWord(Answer a) {
  return a == Answer::kYes ? "present" : "absent";
}

std::string Caption(const ReasoningTemplate& tmpl, const std::string& view,
                    std::optional<Answer> truth) {
  std::string caption = view + " view.";
  for (const auto& step : tmpl.steps) {
    for (const auto& q : step.questions) {
      if (std::find(q.required_views.begin(), q.required_views.end(), view) ==
          q.required_views.end()) {
        continue;
      }
      caption += " " + Statement(q.text) + ".";
    }
  }
  if (truth) {
    caption += *truth == Answer::kYes ? " Appearance abnormal." : " Appearance normal.";
  }
  return caption;
}

std::string Wrap(const std::vector<std::string>& steps, Answer answer) {
  std::string out = "<think>\n";
  for (const auto& s : steps) out += s + "\n";
  out += "</think>\n<answer>";
  out += AnswerName(answer);
  out += "</answer>";
  return out;
}

// One grounded step per template step, addressing every question whose
// views the study has.
std::vector<std::string> FaithfulSteps(const EchoStudy& study,
                                       const ReasoningTemplate& tmpl, Answer answer,
                                       const ViewVocabulary& vocab) {
  const auto available = study.AvailableViews();
  const auto filtered = FilterQuestions(tmpl, available);
  std::vector<std::string> steps;
  for (const auto& step : filtered.steps) {
    std::string text = "Step " + std::to_string(step.index) + ": " + step.instruction;
    if (step.questions.empty()) {
      text += " The views needed for this step are not available in this study.";
    }
    for (const auto& q : step.questions) {
      text += " ";
      const std::string statement = Statement(q.text);
      const auto mentioned = vocab.FindMentions(statement);
      std::string prefix;
      for (const auto& v : q.required_views) {
        if (std::find(mentioned.begin(), mentioned.end(), v) == mentioned.end()) {
          prefix = "In the " + v + " view: ";
          break;
        }
      }
      text += prefix + statement + " -> finding ";
      text += FindingWord(answer);
      text += ".";
    }
    steps.push_back(std::move(text));
  }
  if (!steps.empty()) {
    steps.back() += std::string(" Overall the evidence is ") +
                    (answer == Answer::kYes ? "consistent with" : "not consistent with") +
                    " the queried disease.";
  }
  return steps;
}

}  // namespace

std::vector<EchoStudy> GenerateStudies(std::uint64_t seed, std::size_t n_cases,
                                       std::span<const ReasoningTemplate> templates) {
  std::vector<EchoStudy> studies;
  if (n_cases == 0) return studies;
  if (templates.empty()) throw ValidationError("study generation needs templates");

  std::mt19937_64 rng(SplitMix64(seed));
  studies.reserve(n_cases);
  for (std::size_t k = 0; k < n_cases; ++k) {
    const ReasoningTemplate& tmpl = templates[k % templates.size()];
    EchoStudy study;
    char id[64];
    std::snprintf(id, sizeof(id), "syn-%llu-%05zu",
                  static_cast<unsigned long long>(seed), k);
    study.patient_id = id;
    study.query = tmpl.name;
    study.ground_truth = k % 2 == 0 ? Answer::kYes : Answer::kNo;

    const bool full_coverage = Uniform01(rng) < kFullCoverageRate;
    std::vector<std::string> views;
    for (const auto& v : tmpl.meta.views_required) {
      const bool dropped = Uniform01(rng) < kViewDropoutRate;
      if (full_coverage || !dropped) views.push_back(v);
    }
    if (views.empty()) views.push_back(tmpl.meta.views_required.front());

    for (const auto& v : views) {
      Video video;
      video.id = study.patient_id + "-" + v;
      video.view_label = v;
      video.uri = "synthetic://" + study.patient_id + "/" + v + ".mp4";
      video.caption = Caption(tmpl, v, study.ground_truth);
      study.videos.push_back(std::move(video));
    }
    for (const auto& m : tmpl.meta.measurements_required) {
      const double value = std::round((1.0 + 99.0 * Uniform01(rng)) * 10.0) / 10.0;
      study.measurements.push_back({m, value, ""});
    }
    studies.push_back(std::move(study));
  }
  return studies;
}

std::string_view PolicyKindName(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFaithful:
      return "faithful";
    case PolicyKind::kDegenerate:
      return "degenerate";
    case PolicyKind::kVerbose:
      return "verbose";
    case PolicyKind::kUngrounded:
      return "ungrounded";
    case PolicyKind::kWeakThenCorrected:
      break;
  }
  return "weak-then-corrected";
}

std::optional<PolicyKind> PolicyKindFromName(std::string_view name) {
  const std::string lowered = ToLowerAscii(TrimWhitespace(name));
  for (auto kind : {PolicyKind::kFaithful, PolicyKind::kDegenerate, PolicyKind::kVerbose,
                    PolicyKind::kUngrounded, PolicyKind::kWeakThenCorrected}) {
    if (lowered == PolicyKindName(kind)) return kind;
  }
  return std::nullopt;
}

std::string ScriptedPolicy::Generate(const EchoStudy& study, const ReasoningTemplate& tmpl,
                                     const RectificationContext* rectification) {
  const std::string key = std::string(PolicyKindName(kind_)) + "|" + study.patient_id +
                          "|" + tmpl.id + "|" + (rectification ? "2" : "1");
  std::mt19937_64 rng(SplitMix64(seed_ ^ Fnv1a64(key)));

  const Answer truth = study.ground_truth.value_or(
      Uniform01(rng) < 0.5 ? Answer::kYes : Answer::kNo);
  auto noisy = [&](double accuracy) {
    return Uniform01(rng) < accuracy ? truth : Flip(truth);
  };

  switch (kind_) {
    case PolicyKind::kFaithful: {
      const Answer a = noisy(kFaithfulAccuracy);
      return Wrap(FaithfulSteps(study, tmpl, a, vocab_), a);
    }
    case PolicyKind::kDegenerate: {
      const Answer a = noisy(kDegenerateAccuracy);
      return Wrap({"Step 1: The study looks abnormal overall."}, a);
    }
    case PolicyKind::kVerbose: {
      const Answer a = noisy(kFaithfulAccuracy);
      auto steps = FaithfulSteps(study, tmpl, a, vocab_);
      const std::size_t target = tmpl.steps.size() + std::max(epsilon_, 0) + 1;
      while (steps.size() < target) {
        steps.push_back("Step " + std::to_string(steps.size() + 1) +
                        ": Recap of the evidence reviewed so far.");
      }
      return Wrap(steps, a);
    }
    case PolicyKind::kUngrounded: {
      const Answer a = noisy(kFaithfulAccuracy);
      std::vector<std::string> steps;
      for (const auto& step : tmpl.steps) {
        steps.push_back("Step " + std::to_string(step.index) + ": " + step.instruction +
                        " The finding is " + std::string(FindingWord(a)) + ".");
      }
      return Wrap(steps, a);
    }
    case PolicyKind::kWeakThenCorrected: {
      if (rectification != nullptr) return Wrap(FaithfulSteps(study, tmpl, truth, vocab_), truth);
      std::vector<std::string> steps;
      for (const auto& step : tmpl.steps) {
        steps.push_back("Step " + std::to_string(step.index) +
                        ": Overall appearance abnormal.");
      }
      return Wrap(steps, Flip(truth));
    }
  }
  throw PolicyError("unknown scripted policy kind");
}

Metrics ComputeMetrics(std::span<const CaseOutcome> cases) {
  Metrics m;
  if (cases.empty()) return m;
  std::map<std::string, QueryMetrics> per_query;
  std::size_t correct = 0;
  double steps = 0.0;
  for (const auto& c : cases) {
    if (c.prediction == c.truth && c.truth != Answer::kUnparsable) ++correct;
    steps += static_cast<double>(c.step_count);
    auto& q = per_query[c.query];
    q.query = c.query;
    const bool predicted_pos = c.prediction == Answer::kYes;
    const bool actual_pos = c.truth == Answer::kYes;
    if (predicted_pos && actual_pos) ++q.tp;
    else if (predicted_pos) ++q.fp;
    else if (actual_pos) ++q.fn;
    else ++q.tn;
  }
  double f1_sum = 0.0;
  for (auto& [name, q] : per_query) {
    const std::size_t denom = 2 * q.tp + q.fp + q.fn;
    q.f1 = (q.tp == 0 || denom == 0)
               ? 0.0
               : 2.0 * static_cast<double>(q.tp) / static_cast<double>(denom);
    f1_sum += q.f1;
    m.per_query.push_back(q);
  }
  const double n = static_cast<double>(cases.size());
  m.accuracy = static_cast<double>(correct) / n;
  m.macro_f1 = f1_sum / static_cast<double>(per_query.size());
  m.mean_step_count = steps / n;
  return m;
}

EvalReport RunExperiment(std::span<const EchoStudy> studies,
                         std::span<const ReasoningTemplate> templates,
                         const ViewVocabulary& vocab, const VerifierSet& verifiers,
                         PolicyClient& policy, const ExperimentConfig& config) {
  EvalReport report;
  report.config = config;
  report.n_cases = studies.size();
  report.cases.resize(studies.size());

  RewardConfig reward_config;
  reward_config.epsilon = config.epsilon;
  reward_config.stage = config.stage;

  auto run_case = [&](std::size_t i) {
    const EchoStudy& study = studies[i];
    if (!study.ground_truth) {
      throw ValidationError("study '" + study.patient_id + "' has no ground truth");
    }
    CaseResult& out = report.cases[i];
    const auto retrieval = Retrieve(study.query, templates, *verifiers.embedder);
    const ReasoningTemplate& tmpl = *FindTemplate(templates, retrieval.template_id);
    out.patient_id = study.patient_id;
    out.query = study.query;
    out.template_id = tmpl.id;
    out.retrieval_similarity = retrieval.similarity;
    out.ground_truth = *study.ground_truth;

    Transcript transcript;
    if (config.trr) {
      out.trr = RunTrr(study, tmpl, *verifiers.judge, policy, vocab, config.threshold);
      transcript = out.trr->round1.transcript;
      out.prediction = out.trr->final_answer;
    } else {
      transcript = ParseTranscript(policy.Generate(study, tmpl, nullptr), vocab);
      out.prediction = transcript.answer;
    }
    out.step_count = transcript.steps.size();
    out.reward = ScoreTranscript(transcript, study, tmpl, verifiers, reward_config);
  };

  unsigned threads = config.threads == 0 ? std::thread::hardware_concurrency() : config.threads;
  threads = std::clamp<unsigned>(threads, 1, static_cast<unsigned>(std::max<std::size_t>(studies.size(), 1)));
  if (threads == 1) {
    for (std::size_t i = 0; i < studies.size(); ++i) run_case(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < studies.size(); i = next++) {
          try {
            run_case(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!first_error) first_error = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  std::sort(report.cases.begin(), report.cases.end(),
            [](const CaseResult& a, const CaseResult& b) { return a.patient_id < b.patient_id; });

  std::vector<CaseOutcome> outcomes;
  outcomes.reserve(report.cases.size());
  for (const auto& c : report.cases) {
    outcomes.push_back({c.query, c.prediction, c.ground_truth, c.step_count});
  }
  report.metrics = ComputeMetrics(outcomes);
  return report;
}

json ExperimentConfigToJson(const ExperimentConfig& c, std::size_t n_cases) {
  return {{"seed", c.seed},
          {"cases", n_cases},
          {"policy", PolicyKindName(c.policy)},
          {"stage", StageName(c.stage)},
          {"epsilon", c.epsilon},
          {"threshold", c.threshold},
          {"trr", c.trr}};
}

json MetricsToJson(const Metrics& m) {
  json per_query = json::array();
  for (const auto& q : m.per_query) {
    per_query.push_back({{"query", q.query}, {"tp", q.tp}, {"fp", q.fp},
                         {"fn", q.fn},       {"tn", q.tn}, {"f1", q.f1}});
  }
  return {{"accuracy", m.accuracy},
          {"macro_f1", m.macro_f1},
          {"mean_step_count", m.mean_step_count},
          {"per_query", std::move(per_query)}};
}

json ReportToJson(const EvalReport& report) {
  const json config = ExperimentConfigToJson(report.config, report.n_cases);
  json cases = json::array();
  for (const auto& c : report.cases) {
    cases.push_back({{"patient_id", c.patient_id},
                     {"query", c.query},
                     {"template_id", c.template_id},
                     {"retrieval_similarity", c.retrieval_similarity},
                     {"ground_truth", AnswerName(c.ground_truth)},
                     {"prediction", AnswerName(c.prediction)},
                     {"step_count", c.step_count},
                     {"reward", BreakdownToJson(c.reward)},
                     {"trr", c.trr ? TraceToJson(*c.trr) : json(nullptr)}});
  }
  return {{"config", config},
          {"config_digest", "fnv1a64:" + Fnv1a64Hex(config.dump())},
          {"metrics", MetricsToJson(report.metrics)},
          {"cases", std::move(cases)}};
}

}  // namespace echoreason
