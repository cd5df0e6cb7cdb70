#include <random>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "echoreason/grpo.h"
#include "echoreason/rewards.h"
#include "echoreason/sim.h"
#include "echoreason/text.h"
#include "echoreason/templates.h"
#include "echoreason/transcript.h"
#include "echoreason/verifiers.h"
#include "echoreason/views.h"

namespace echoreason {
namespace {

struct Fixture {
  ViewVocabulary vocab = ViewVocabulary::LoadDefault();
  std::vector<ReasoningTemplate> templates = LoadTemplates(DefaultDataDir() / "templates", vocab);
  std::vector<EchoStudy> studies = GenerateStudies(1, 64, templates);

  static const Fixture& Get() {
    static const Fixture f;
    return f;
  }
};

std::string FaithfulTranscript(const Fixture& f, std::size_t i) {
  const auto& study = f.studies[i % f.studies.size()];
  const auto& tmpl = f.templates[i % f.templates.size()];
  ScriptedPolicy policy(PolicyKind::kFaithful, 1, f.vocab);
  return policy.Generate(study, tmpl, nullptr);
}

void BM_ParseTranscript(benchmark::State& state) {
  const auto& f = Fixture::Get();
  const std::string raw = FaithfulTranscript(f, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ParseTranscript(raw, f.vocab));
  }
  state.SetBytesProcessed(state.iterations() * static_cast<int64_t>(raw.size()));
}
BENCHMARK(BM_ParseTranscript);

void BM_ScoreTranscript(benchmark::State& state) {
  const auto& f = Fixture::Get();
  const auto verifiers = VerifierSet::Mock(f.vocab);
  const auto& study = f.studies[0];
  const auto& tmpl = f.templates[0];
  const auto transcript = ParseTranscript(FaithfulTranscript(f, 0), f.vocab);
  const RewardConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ScoreTranscript(transcript, study, tmpl, verifiers, config));
  }
}
BENCHMARK(BM_ScoreTranscript);

void BM_EvaluateObjective(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(-1.0, 0.3);
  RolloutGroup group;
  for (int i = 0; i < 8; ++i) {
    Rollout r;
    r.reward = static_cast<double>(i % 3);
    for (int64_t t = 0; t < state.range(0); ++t) {
      r.logprobs_current.push_back(n(rng));
      r.logprobs_old.push_back(n(rng));
      r.logprobs_ref.push_back(n(rng));
    }
    group.rollouts.push_back(std::move(r));
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(EvaluateObjective(group));
  }
  state.SetItemsProcessed(state.iterations() * 8 * state.range(0));
}
BENCHMARK(BM_EvaluateObjective)->Arg(128)->Arg(1024)->Arg(8192);

void BM_Retrieve(benchmark::State& state) {
  const auto& f = Fixture::Get();
  const HashedBowEmbedder embedder;
  for (auto _ : state) {
    benchmark::DoNotOptimize(Retrieve("Dilated Cardiomyopathy Diagnosis", f.templates, embedder));
  }
}
BENCHMARK(BM_Retrieve);

void BM_SimRun(benchmark::State& state) {
  const auto& f = Fixture::Get();
  const auto verifiers = VerifierSet::Mock(f.vocab);
  ScriptedPolicy policy(PolicyKind::kFaithful, 1, f.vocab);
  ExperimentConfig config;
  config.trr = true;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        RunExperiment(f.studies, f.templates, f.vocab, verifiers, policy, config));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(f.studies.size()));
}
BENCHMARK(BM_SimRun)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace echoreason

BENCHMARK_MAIN();
