#include "echoreason/grpo.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "echoreason/errors.h"
#include "echoreason/text.h"
#include "test_support.h"

namespace echoreason {
namespace {

std::vector<double> OracleAdvantages(const std::vector<double>& r) {
  double mean = 0;
  for (double x : r) mean += x;
  mean /= r.size();
  double var = 0;
  for (double x : r) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / r.size());
  std::vector<double> out;
  for (double x : r) out.push_back(sd < 1e-8 ? 0.0 : (x - mean) / sd);
  return out;
}

// Token-by-token evaluation of the clipped objective, no shared code with
// the library.
double OracleObjective(const RolloutGroup& g, const std::vector<double>& adv) {
  double surrogate = 0, kl = 0;
  for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
    const auto& r = g.rollouts[i];
    double s = 0, k = 0;
    for (std::size_t t = 0; t < r.logprobs_current.size(); ++t) {
      const double ratio = std::exp(r.logprobs_current[t] - r.logprobs_old[t]);
      const double clipped = std::min(std::max(ratio, 1 - g.clip_epsilon), 1 + g.clip_epsilon);
      s += std::min(ratio * adv[i], clipped * adv[i]);
      const double d = r.logprobs_ref[t] - r.logprobs_current[t];
      k += std::exp(d) - d - 1;
    }
    surrogate += s / r.logprobs_current.size();
    kl += k / r.logprobs_current.size();
  }
  surrogate /= g.rollouts.size();
  kl /= g.rollouts.size();
  return surrogate - g.beta * kl;
}

RolloutGroup RandomGroup(std::mt19937_64& rng, std::size_t g, std::size_t len) {
  std::normal_distribution<double> n(-1.0, 0.4);
  RolloutGroup group;
  for (std::size_t i = 0; i < g; ++i) {
    Rollout r;
    r.reward = std::uniform_real_distribution<double>(0, 4.3)(rng);
    for (std::size_t t = 0; t < len; ++t) {
      r.logprobs_current.push_back(n(rng));
      r.logprobs_old.push_back(n(rng));
      r.logprobs_ref.push_back(n(rng));
    }
    group.rollouts.push_back(std::move(r));
  }
  return group;
}

TEST(AdvantagesTest, Examples) {
  const auto a = ComputeAdvantages(std::vector<double>{1, 0, 1, 0});
  const std::vector<double> expected = {1, -1, 1, -1};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(a[i], expected[i], 1e-12);
  EXPECT_EQ(ComputeAdvantages(std::vector<double>{0.7, 0.7, 0.7}),
            (std::vector<double>{0, 0, 0}));
}

TEST(AdvantagesTest, MatchesOracle) {
  const std::vector<double> r = {4.3, 1.0, 0.0};
  const auto a = ComputeAdvantages(r);
  const auto o = OracleAdvantages(r);
  const std::vector<double> rounded = {1.3789, -0.4173, -0.9616};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(a[i], o[i], 1e-12);
    EXPECT_NEAR(a[i], rounded[i], 5e-5);
  }
}

TEST(AdvantagesTest, GroupTooSmall) {
  EXPECT_THROW(ComputeAdvantages(std::vector<double>{1.0}), GroupTooSmall);
  EXPECT_THROW(ComputeAdvantages(std::vector<double>{}), GroupTooSmall);
}

TEST(AdvantagesTest, ShiftAndScaleInvariantWithUnitStd) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> r(2 + rng() % 8);
    for (auto& x : r) x = u(rng);
    const double c = u(rng) * 10, k = 0.1 + std::abs(u(rng)) * 5;
    std::vector<double> shifted, scaled;
    for (double x : r) {
      shifted.push_back(x + c);
      scaled.push_back(x * k);
    }
    const auto a = ComputeAdvantages(r);
    const auto as = ComputeAdvantages(shifted);
    const auto ak = ComputeAdvantages(scaled);
    double mean = 0, sq = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      EXPECT_NEAR(a[i], as[i], 1e-9);
      EXPECT_NEAR(a[i], ak[i], 1e-9);
      mean += a[i];
      sq += a[i] * a[i];
    }
    EXPECT_NEAR(mean / r.size(), 0.0, 1e-12);
    EXPECT_NEAR(sq / r.size(), 1.0, 1e-9);
  }
}

TEST(ObjectiveTest, IdenticalLogprobsGiveMeanAdvantage) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = RandomGroup(rng, 4, 5);
    for (auto& r : g.rollouts) r.logprobs_old = r.logprobs_ref = r.logprobs_current;
    const std::vector<double> adv = {0.3, -1.2, 2.0, 0.1};
    g.advantages = adv;
    const auto res = EvaluateObjective(g);
    EXPECT_NEAR(res.objective, (0.3 - 1.2 + 2.0 + 0.1) / 4, 1e-12);
    EXPECT_EQ(res.kl, 0.0);
  }
}

TEST(ObjectiveTest, ZeroAdvantagesAndNoDriftIsZero) {
  std::mt19937_64 rng(8);
  auto g = RandomGroup(rng, 3, 4);
  for (auto& r : g.rollouts) r.logprobs_ref = r.logprobs_current;
  g.advantages = std::vector<double>{0, 0, 0};
  EXPECT_EQ(EvaluateObjective(g).objective, 0.0);
}

TEST(ObjectiveTest, ClipExample) {
  RolloutGroup g;
  g.clip_epsilon = 0.2;
  const double ln2 = std::log(2.0);
  g.rollouts.push_back({1.0, {ln2, ln2}, {0.0, 0.0}, {ln2, ln2}});
  g.advantages = std::vector<double>{1.0};
  const auto res = EvaluateObjective(g);
  EXPECT_NEAR(res.surrogate, 1.2, 1e-12);
  EXPECT_NEAR(res.objective, 1.2, 1e-12);
  EXPECT_NEAR(res.objective, OracleObjective(g, {1.0}), 1e-12);
}

TEST(ObjectiveTest, MatchesScalarOracleOnRandomGroups) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    auto g = RandomGroup(rng, 2 + rng() % 6, 1 + rng() % 10);
    g.beta = 0.01;
    std::vector<double> rewards;
    for (const auto& r : g.rollouts) rewards.push_back(r.reward);
    const auto res = EvaluateObjective(g);
    EXPECT_NEAR(res.objective, OracleObjective(g, OracleAdvantages(rewards)), 1e-12);
    EXPECT_TRUE(std::isfinite(res.objective));
  }
}

TEST(ObjectiveTest, UnboundedClipWithoutKlIsUnclippedMean) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = RandomGroup(rng, 3, 4);
    g.clip_epsilon = 1e300;
    g.beta = 0.0;
    std::vector<double> rewards;
    for (const auto& r : g.rollouts) rewards.push_back(r.reward);
    const auto adv = OracleAdvantages(rewards);
    double expected = 0;
    for (std::size_t i = 0; i < g.rollouts.size(); ++i) {
      double s = 0;
      const auto& r = g.rollouts[i];
      for (std::size_t t = 0; t < 4; ++t) {
        s += std::exp(r.logprobs_current[t] - r.logprobs_old[t]) * adv[i];
      }
      expected += s / 4;
    }
    expected /= g.rollouts.size();
    EXPECT_NEAR(EvaluateObjective(g).objective, expected, 1e-12);
  }
}

TEST(ObjectiveTest, KlTermIsNonNegativePerRollout) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = RandomGroup(rng, 2 + rng() % 4, 1 + rng() % 6);
    const auto res = EvaluateObjective(g);
    for (double k : res.per_rollout_kl) EXPECT_GE(k, 0.0);
    // Per-token check on a single token rollout.
    RolloutGroup one;
    const auto& r = g.rollouts[0];
    one.rollouts.push_back({0, {r.logprobs_current[0]}, {r.logprobs_old[0]}, {r.logprobs_ref[0]}});
    one.advantages = std::vector<double>{0};
    EXPECT_GE(EvaluateObjective(one).kl, 0.0);
  }
}

TEST(ObjectiveTest, LengthMismatchIsRejected) {
  RolloutGroup g;
  g.rollouts.push_back({1.0, {-1, -1}, {-1}, {-1, -1}});
  g.rollouts.push_back({0.0, {-1}, {-1}, {-1}});
  EXPECT_THROW(EvaluateObjective(g), LengthMismatch);
  g.rollouts[0] = {1.0, {}, {}, {}};
  EXPECT_THROW(EvaluateObjective(g), LengthMismatch);
}

TEST(ObjectiveTest, SingleRolloutWithoutAdvantagesIsTooSmall) {
  RolloutGroup g;
  g.rollouts.push_back({1.0, {-1}, {-1}, {-1}});
  EXPECT_THROW(EvaluateObjective(g), GroupTooSmall);
}

TEST(ObjectiveTest, Deterministic) {
  std::mt19937_64 rng(13);
  const auto g = RandomGroup(rng, 5, 7);
  EXPECT_EQ(EvaluateObjective(g).objective, EvaluateObjective(g).objective);
}

TEST(StageConfigTest, PaperConstants) {
  const auto s1 = StageConfig(Stage::kStage1);
  EXPECT_EQ(s1.weights, (RewardWeights{1, 1, 1, 0, 0}));
  EXPECT_EQ(s1.beta, 5e-3);
  const auto s2 = StageConfig(Stage::kStage2);
  EXPECT_EQ(s2.weights, (RewardWeights{1, 1.5, 0.5, 0.8, 0.5}));
  EXPECT_EQ(s2.beta, 1e-2);
}

TEST(StageConfigTest, JsonRoundTrip) {
  for (Stage s : {Stage::kStage1, Stage::kStage2}) {
    const auto cfg = StageConfig(s);
    EXPECT_EQ(StageSettingsFromJson(nlohmann::json::parse(StageSettingsToJson(cfg).dump())), cfg);
  }
}

TEST(GroupJsonTest, FixtureParses) {
  const auto doc =
      nlohmann::json::parse(ReadFile(testing::TestDataDir() / "grpo_group_1010.json"));
  const auto g = GroupFromJson(doc, 5e-3);
  EXPECT_EQ(g.rollouts.size(), 4u);
  EXPECT_EQ(g.beta, 0.01);
  const auto res = EvaluateObjective(g);
  const std::vector<double> expected = {1, -1, 1, -1};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(res.advantages[i], expected[i], 1e-12);
  EXPECT_NEAR(res.objective, 0.0, 1e-12);
}

TEST(GroupJsonTest, DefaultsAndErrors) {
  auto doc = nlohmann::json::parse(R"({"rollouts":[
      {"reward":1,"logprobs_current":[-1],"logprobs_old":[-1],"logprobs_ref":[-1]},
      {"reward":0,"logprobs_current":[-1],"logprobs_old":[-1],"logprobs_ref":[-1]}]})");
  const auto g = GroupFromJson(doc, 5e-3);
  EXPECT_EQ(g.beta, 5e-3);
  EXPECT_EQ(g.clip_epsilon, kDefaultClipEpsilon);
  doc["rollouts"][0].erase("logprobs_ref");
  EXPECT_THROW(GroupFromJson(doc, 5e-3), ValidationError);
}

}  // namespace
}  // namespace echoreason
