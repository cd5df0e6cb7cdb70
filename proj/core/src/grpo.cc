#include "echoreason/grpo.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "echoreason/errors.h"

namespace echoreason {

using nlohmann::json;

StageSettings StageConfig(Stage stage) {
  const WeightSchedule schedule;
  return {schedule.For(stage), stage == Stage::kStage1 ? 5e-3 : 1e-2};
}

json StageSettingsToJson(const StageSettings& s) {
  return {{"weights", WeightsToJson(s.weights)}, {"beta", s.beta}};
}

StageSettings StageSettingsFromJson(const json& doc) {
  if (!doc.is_object() || !doc.contains("weights") || !doc.contains("beta") ||
      !doc["beta"].is_number()) {
    throw ValidationError("stage settings need 'weights' and numeric 'beta'");
  }
  return {WeightsFromJson(doc["weights"]), doc["beta"].get<double>()};
}

std::vector<double> ComputeAdvantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw GroupTooSmall("advantage estimation needs at least 2 rollouts, got " +
                        std::to_string(rewards.size()));
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double std_dev = std::sqrt(var / n);

  std::vector<double> adv(rewards.size(), 0.0);
  if (!(std_dev >= kZeroVarianceThreshold)) return adv;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / std_dev;
  return adv;
}

ObjectiveResult EvaluateObjective(const RolloutGroup& group) {
  if (group.rollouts.empty()) throw GroupTooSmall("rollout group is empty");
  for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
    const auto& r = group.rollouts[i];
    const std::size_t n = r.logprobs_current.size();
    if (n == 0 || r.logprobs_old.size() != n || r.logprobs_ref.size() != n) {
      throw LengthMismatch("rollout " + std::to_string(i) +
                           ": log-prob sequences must share a non-zero length (current=" +
                           std::to_string(n) + ", old=" +
                           std::to_string(r.logprobs_old.size()) +
                           ", ref=" + std::to_string(r.logprobs_ref.size()) + ")");
    }
  }

  ObjectiveResult out;
  if (group.advantages) {
    if (group.advantages->size() != group.rollouts.size()) {
      throw LengthMismatch("advantages: expected " + std::to_string(group.rollouts.size()) +
                           " entries, got " + std::to_string(group.advantages->size()));
    }
    out.advantages = *group.advantages;
  } else {
    std::vector<double> rewards;
    rewards.reserve(group.rollouts.size());
    for (const auto& r : group.rollouts) rewards.push_back(r.reward);
    out.advantages = ComputeAdvantages(rewards);
  }

  const double lo = 1.0 - group.clip_epsilon;
  const double hi = 1.0 + group.clip_epsilon;
  double surrogate_sum = 0.0;
  double kl_sum = 0.0;
  for (std::size_t i = 0; i < group.rollouts.size(); ++i) {
    const auto& r = group.rollouts[i];
    const double adv = out.advantages[i];
    double s = 0.0;
    double k = 0.0;
    for (std::size_t t = 0; t < r.logprobs_current.size(); ++t) {
      const double ratio = std::exp(r.logprobs_current[t] - r.logprobs_old[t]);
      const double clipped = std::clamp(ratio, lo, hi);
      s += std::min(ratio * adv, clipped * adv);
      const double log_ratio = r.logprobs_ref[t] - r.logprobs_current[t];
      k += std::exp(log_ratio) - log_ratio - 1.0;
    }
    const double len = static_cast<double>(r.logprobs_current.size());
    out.per_rollout_surrogate.push_back(s / len);
    out.per_rollout_kl.push_back(k / len);
    surrogate_sum += s / len;
    kl_sum += k / len;
  }
  const double g = static_cast<double>(group.rollouts.size());
  out.surrogate = surrogate_sum / g;
  out.kl = kl_sum / g;
  out.objective = out.surrogate - group.beta * out.kl;
  return out;
}

namespace {

std::vector<double> Numbers(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw SchemaError("rollout group", where + "." + key, "expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(it->size());
  for (const auto& x : *it) {
    if (!x.is_number()) {
      throw SchemaError("rollout group", where + "." + key, "expected an array of numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

double Number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number()) {
    throw SchemaError("rollout group", where.empty() ? key : where + "." + key,
                      "expected a number");
  }
  return it->get<double>();
}

}  // namespace

RolloutGroup GroupFromJson(const json& doc, double default_beta) {
  if (!doc.is_object()) throw SchemaError("rollout group", "", "expected an object");
  RolloutGroup g;
  g.clip_epsilon = doc.contains("clip_epsilon") ? Number(doc, "clip_epsilon", "")
                                                : kDefaultClipEpsilon;
  g.beta = doc.contains("beta") ? Number(doc, "beta", "") : default_beta;
  if (g.clip_epsilon < 0.0) throw SchemaError("rollout group", "clip_epsilon", "must be >= 0");
  if (g.beta < 0.0) throw SchemaError("rollout group", "beta", "must be >= 0");

  auto rollouts = doc.find("rollouts");
  if (rollouts == doc.end() || !rollouts->is_array()) {
    throw SchemaError("rollout group", "rollouts", "expected an array");
  }
  for (std::size_t i = 0; i < rollouts->size(); ++i) {
    const std::string where = "rollouts[" + std::to_string(i) + "]";
    const json& jr = (*rollouts)[i];
    if (!jr.is_object()) throw SchemaError("rollout group", where, "expected an object");
    Rollout r;
    r.reward = Number(jr, "reward", where);
    r.logprobs_current = Numbers(jr, "logprobs_current", where);
    r.logprobs_old = Numbers(jr, "logprobs_old", where);
    r.logprobs_ref = Numbers(jr, "logprobs_ref", where);
    g.rollouts.push_back(std::move(r));
  }
  if (doc.contains("advantages")) g.advantages = Numbers(doc, "advantages", "");
  return g;
}

json ObjectiveToJson(const ObjectiveResult& r, const RolloutGroup& group) {
  return {{"advantages", r.advantages},
          {"objective", r.objective},
          {"surrogate", r.surrogate},
          {"kl", r.kl},
          {"beta", group.beta},
          {"clip_epsilon", group.clip_epsilon},
          {"per_rollout_surrogate", r.per_rollout_surrogate},
          {"per_rollout_kl", r.per_rollout_kl}};
}

}  // namespace echoreason
