#include "cli.h"

#include <cstdlib>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "echoreason/errors.h"
#include "echoreason/grpo.h"
#include "echoreason/json_util.h"
#include "echoreason/remote.h"
#include "echoreason/rewards.h"
#include "echoreason/sim.h"
#include "echoreason/study.h"
#include "echoreason/templates.h"
#include "echoreason/text.h"
#include "echoreason/transcript.h"
#include "echoreason/trr.h"
#include "echoreason/verifiers.h"

namespace echoreason::cli {

using nlohmann::json;

namespace {

constexpr const char* kTokenEnvVar = "CRT_VERIFIER_TOKEN";

struct GlobalOptions {
  std::string templates_dir = (DefaultDataDir() / "templates").string();
  std::string views_file = (DefaultDataDir() / "views.txt").string();
  std::string verifier = "mock";
  std::string stage = "2";
  double threshold = kDefaultTrrThreshold;
  int epsilon = kDefaultVerbosityTolerance;
  std::string on_verifier_error = "fail";
  std::uint64_t seed = 1;
  std::string out_path;
  bool pretty = false;
};

// Everything a command needs once the flags are parsed.
class Session {
 public:
  explicit Session(const GlobalOptions& opts)
      : opts_(opts), vocab_(ViewVocabulary::Load(opts.views_file)) {}

  const ViewVocabulary& vocab() const { return vocab_; }
  Stage stage() const { return *StageFromName(opts_.stage); }

  const std::vector<ReasoningTemplate>& templates() {
    if (!templates_) templates_ = LoadTemplates(opts_.templates_dir, vocab_);
    return *templates_;
  }

  const VerifierSet& verifiers() {
    if (verifiers_) return *verifiers_;
    if (opts_.verifier == "mock") {
      verifiers_ = VerifierSet::Mock(vocab_);
    } else {
      RemoteOptions remote;
      remote.endpoint = opts_.verifier;
      if (const char* token = std::getenv(kTokenEnvVar)) remote.bearer_token = token;
      remote.on_error = *ErrorPolicyFromName(opts_.on_verifier_error);
      auto made = MakeRemoteVerifiers(remote);
      channel_ = made.channel;
      verifiers_ = made.verifiers;
    }
    return *verifiers_;
  }

  json WithWarnings(json doc) const {
    if (channel_) {
      auto warnings = channel_->warnings();
      if (!warnings.empty()) doc["verifier_warnings"] = warnings;
    }
    return doc;
  }

  const ReasoningTemplate& ResolveTemplate(const std::string& template_id,
                                           const std::string& query) {
    const auto& all = templates();
    if (!template_id.empty()) {
      const auto* t = FindTemplate(all, template_id);
      if (t == nullptr) throw ValidationError("unknown template id '" + template_id + "'");
      return *t;
    }
    return *FindTemplate(all, Retrieve(query, all, *verifiers().embedder).template_id);
  }

  void Emit(const json& doc, std::ostream& out) const {
    const std::string text = DumpJson(WithWarnings(doc), opts_.pretty);
    if (opts_.out_path.empty()) {
      out << text;
      return;
    }
    std::ofstream file(opts_.out_path, std::ios::binary | std::ios::trunc);
    if (!file) throw ValidationError("cannot write " + opts_.out_path);
    file << text;
  }

 private:
  const GlobalOptions& opts_;
  ViewVocabulary vocab_;
  std::optional<std::vector<ReasoningTemplate>> templates_;
  std::optional<VerifierSet> verifiers_;
  std::shared_ptr<const RemoteChannel> channel_;
};

json ReadJsonFile(const std::string& path) {
  json doc = json::parse(ReadFile(path), nullptr, false);
  if (doc.is_discarded()) throw SchemaError(path, "", "invalid JSON");
  return doc;
}

EchoStudy ReadStudy(const std::string& path, const ViewVocabulary& vocab) {
  auto studies = StudiesFromJson(ReadJsonFile(path), vocab, path);
  if (studies.size() != 1) {
    throw ValidationError(path + ": expected exactly one study, found " +
                          std::to_string(studies.size()));
  }
  return std::move(studies.front());
}

// "kind" or "kind:seed".
ScriptedPolicy MakePolicy(const std::string& spec, std::uint64_t default_seed,
                          const ViewVocabulary& vocab, int epsilon) {
  const auto colon = spec.find(':');
  const std::string name = spec.substr(0, colon);
  auto kind = PolicyKindFromName(name);
  if (!kind) throw ValidationError("unknown policy '" + name + "'");
  std::uint64_t seed = default_seed;
  if (colon != std::string::npos) {
    try {
      seed = std::stoull(spec.substr(colon + 1));
    } catch (const std::exception&) {
      throw ValidationError("bad policy seed in '" + spec + "'");
    }
  }
  return ScriptedPolicy(*kind, seed, vocab, epsilon);
}

// CLI11 check for "kind[:seed]" so malformed specs are usage errors.
const CLI::Validator kPolicySpec(
    [](std::string& spec) -> std::string {
      const auto colon = spec.find(':');
      if (!PolicyKindFromName(spec.substr(0, colon))) {
        return "unknown policy kind in '" + spec + "'";
      }
      if (colon != std::string::npos) {
        const std::string seed = spec.substr(colon + 1);
        if (seed.empty() || seed.find_first_not_of("0123456789") != std::string::npos) {
          return "bad policy seed in '" + spec + "'";
        }
      }
      return {};
    },
    "kind[:seed]");

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Template-anchored reasoning rewards, GRPO evaluation and rectification"};
  app.name(args.empty() ? "echoreason" : args.front());
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--templates", g.templates_dir, "Template directory")->capture_default_str();
  app.add_option("--views", g.views_file, "View vocabulary file")->capture_default_str();
  app.add_option("--verifier", g.verifier, "'mock' or the base URL of a verifier service")
      ->capture_default_str();
  app.add_option("--stage", g.stage, "Training stage for reward weights (1 or 2)")
      ->check(CLI::IsMember({"1", "2", "stage1", "stage2"}))
      ->capture_default_str();
  app.add_option("--threshold", g.threshold, "Rectification threshold on mean step score")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--epsilon", g.epsilon, "Verbosity tolerance (extra steps allowed)")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--on-verifier-error", g.on_verifier_error,
                 "Remote verifier failure policy")
      ->check(CLI::IsMember({"fail", "zero"}))
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for synthetic data and scripted policies")
      ->capture_default_str();
  app.add_option("--out", g.out_path, "Write JSON here instead of stdout");
  app.add_flag("--pretty", g.pretty, "Indent JSON output");

  auto* crt = app.add_subcommand("crt", "Template store commands");
  crt->require_subcommand(1);
  std::string validate_dir;
  auto* validate = crt->add_subcommand("validate", "Validate a template directory");
  validate->add_option("dir", validate_dir, "Directory (defaults to --templates)");
  std::string query;
  auto* retrieve = crt->add_subcommand("retrieve", "Rank templates for a disease query");
  retrieve->add_option("query", query, "Disease query")->required();

  std::string study_file, transcript_file, template_id;
  auto* score = app.add_subcommand("score", "Score one transcript");
  score->add_option("--study", study_file, "Study JSON")->required();
  score->add_option("--transcript", transcript_file, "Raw transcript text")->required();
  score->add_option("--template-id", template_id,
                    "Template to score against (default: retrieve by query)");

  std::string group_file;
  auto* grpo = app.add_subcommand("grpo-eval", "Advantages and GRPO objective for a group");
  grpo->add_option("group_file", group_file, "Rollout group JSON")->required();

  std::string policy_spec = "faithful";
  auto* trr = app.add_subcommand("trr", "Run template-guided rectification on one study");
  trr->add_option("--study", study_file, "Study JSON")->required();
  trr->add_option("--policy", policy_spec, "Scripted policy: kind[:seed]")
      ->check(kPolicySpec)
      ->capture_default_str();
  trr->add_option("--template-id", template_id, "Template (default: retrieve by query)");

  auto* sim = app.add_subcommand("sim", "Synthetic experiments");
  sim->require_subcommand(1);
  std::size_t n_cases = 50;
  unsigned threads = 1;
  bool use_trr = false;
  auto* sim_run = sim->add_subcommand("run", "Generate studies, run a policy, write a report");
  sim_run->add_option("--cases", n_cases, "Number of synthetic cases")->capture_default_str();
  sim_run->add_option("--policy", policy_spec, "Scripted policy: kind[:seed]")
      ->check(kPolicySpec)
      ->capture_default_str();
  sim_run->add_flag("--trr", use_trr, "Route generation through rectification");
  sim_run->add_option("--threads", threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
  auto* sim_gen = sim->add_subcommand("generate", "Write synthetic studies as JSON");
  sim_gen->add_option("--cases", n_cases, "Number of synthetic cases")->capture_default_str();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  if (argv.empty()) argv.push_back("echoreason");
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  if (g.verifier != "mock" && g.verifier.find("://") == std::string::npos) {
    err << "--verifier must be 'mock' or a URL such as http://host:port\n";
    return kExitUsage;
  }

  try {
    Session session(g);

    if (*validate) {
      const std::string dir = validate_dir.empty() ? g.templates_dir : validate_dir;
      const auto templates = LoadTemplates(dir, session.vocab());
      json ids = json::array();
      for (const auto& t : templates) ids.push_back(t.id);
      session.Emit({{"valid", true}, {"count", templates.size()}, {"templates", ids}}, out);
    } else if (*retrieve) {
      const auto result =
          Retrieve(query, session.templates(), *session.verifiers().embedder);
      json doc = RetrievalToJson(result);
      doc["query"] = query;
      session.Emit(doc, out);
    } else if (*score) {
      const EchoStudy study = ReadStudy(study_file, session.vocab());
      const Transcript transcript = ParseTranscript(ReadFile(transcript_file), session.vocab());
      const auto& tmpl = session.ResolveTemplate(template_id, study.query);
      RewardConfig config;
      config.epsilon = g.epsilon;
      config.stage = session.stage();
      const auto breakdown =
          ScoreTranscript(transcript, study, tmpl, session.verifiers(), config);
      session.Emit({{"patient_id", study.patient_id},
                    {"template_id", tmpl.id},
                    {"reward", BreakdownToJson(breakdown)},
                    {"transcript", TranscriptToJson(transcript)}},
                   out);
    } else if (*grpo) {
      const auto group =
          GroupFromJson(ReadJsonFile(group_file), StageConfig(session.stage()).beta);
      session.Emit(ObjectiveToJson(EvaluateObjective(group), group), out);
    } else if (*trr) {
      const EchoStudy study = ReadStudy(study_file, session.vocab());
      const auto& tmpl = session.ResolveTemplate(template_id, study.query);
      ScriptedPolicy policy = MakePolicy(policy_spec, g.seed, session.vocab(), g.epsilon);
      const auto trace = RunTrr(study, tmpl, *session.verifiers().judge, policy,
                                session.vocab(), g.threshold);
      json doc = TraceToJson(trace);
      doc["patient_id"] = study.patient_id;
      doc["template_id"] = tmpl.id;
      session.Emit(doc, out);
    } else if (*sim_run) {
      ScriptedPolicy policy = MakePolicy(policy_spec, g.seed, session.vocab(), g.epsilon);
      ExperimentConfig config;
      config.seed = g.seed;
      config.policy = policy.kind();
      config.stage = session.stage();
      config.epsilon = g.epsilon;
      config.threshold = g.threshold;
      config.trr = use_trr;
      config.threads = threads;
      const auto studies = GenerateStudies(g.seed, n_cases, session.templates());
      const auto report = RunExperiment(studies, session.templates(), session.vocab(),
                                        session.verifiers(), policy, config);
      session.Emit(ReportToJson(report), out);
    } else if (*sim_gen) {
      session.Emit(StudiesToJson(GenerateStudies(g.seed, n_cases, session.templates())), out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.category() == ErrorCategory::kVerifier ? kExitVerifier : kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}

}  // namespace echoreason::cli
