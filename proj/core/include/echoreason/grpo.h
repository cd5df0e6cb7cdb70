#pragma once

#include <optional>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/rewards.h"

namespace echoreason {

inline constexpr double kDefaultClipEpsilon = 0.2;
// Groups whose population std falls below this get all-zero advantages.
inline constexpr double kZeroVarianceThreshold = 1e-8;

struct Rollout {
  double reward = 0.0;
  std::vector<double> logprobs_current;
  std::vector<double> logprobs_old;
  std::vector<double> logprobs_ref;
};

struct RolloutGroup {
  std::vector<Rollout> rollouts;
  // When absent, advantages are computed from the rewards.
  std::optional<std::vector<double>> advantages;
  double clip_epsilon = kDefaultClipEpsilon;
  double beta = 5e-3;
};

// Per-stage training constants: reward weights and KL coefficient.
struct StageSettings {
  RewardWeights weights;
  double beta = 0.0;

  bool operator==(const StageSettings&) const = default;
};

StageSettings StageConfig(Stage stage);
nlohmann::json StageSettingsToJson(const StageSettings& settings);
StageSettings StageSettingsFromJson(const nlohmann::json& doc);

// Standard score of the group rewards with population std.
std::vector<double> ComputeAdvantages(std::span<const double> rewards);

struct ObjectiveResult {
  double objective = 0.0;
  double surrogate = 0.0;
  double kl = 0.0;
  std::vector<double> advantages;
  std::vector<double> per_rollout_surrogate;  // token mean per rollout
  std::vector<double> per_rollout_kl;         // token mean per rollout
};

// Clipped surrogate minus beta * KL, where both terms are token means per
// rollout averaged over the group. KL uses the k3 estimator
// exp(ref - cur) - (ref - cur) - 1. Summation is rollout-major, token-minor.
ObjectiveResult EvaluateObjective(const RolloutGroup& group);

// {"clip_epsilon", "beta", "rollouts": [{"reward", "logprobs_current",
// "logprobs_old", "logprobs_ref"}], optional "advantages"}.
RolloutGroup GroupFromJson(const nlohmann::json& doc, double default_beta);
nlohmann::json ObjectiveToJson(const ObjectiveResult& result, const RolloutGroup& group);

}  // namespace echoreason
