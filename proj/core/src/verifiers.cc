#include "echoreason/verifiers.h"

#include <algorithm>
#include <cmath>

#include "echoreason/errors.h"
#include "echoreason/text.h"

namespace echoreason {

double Cosine(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || a.size() != b.size()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

const std::vector<std::string>& ConclusionLexicon() {
  static const std::vector<std::string> kWords = {
      "yes",    "no",         "present",   "absent",  "normal",
      "abnormal", "consistent", "confirmed", "excluded",
  };
  return kWords;
}

double MockJudge::Judge(std::string_view step_text,
                        std::span<const std::string> questions,
                        std::span<const std::string> /*available_views*/) const {
  if (questions.empty()) {
    throw EmptyQuestionSet("mock judge called with an empty question list");
  }
  std::set<std::string> question_tokens;
  for (const auto& q : questions) {
    auto tokens = TokenSet(q);
    question_tokens.insert(tokens.begin(), tokens.end());
  }
  const auto step_tokens = TokenSet(step_text);

  double coverage = 0.0;
  if (!question_tokens.empty()) {
    std::size_t hit = 0;
    for (const auto& tok : question_tokens) hit += step_tokens.count(tok);
    coverage = static_cast<double>(hit) / static_cast<double>(question_tokens.size());
  }
  const double has_view = vocab_.MentionsAny(step_text) ? 1.0 : 0.0;

  const auto words = WordSet(step_text);
  const auto& lexicon = ConclusionLexicon();
  const double has_conclusion =
      std::any_of(lexicon.begin(), lexicon.end(),
                  [&](const std::string& w) { return words.count(w) > 0; })
          ? 1.0
          : 0.0;

  const double score = 0.5 * std::clamp(coverage, 0.0, 1.0) + 0.25 * has_view +
                       0.25 * has_conclusion;
  return std::clamp(score, 0.0, 1.0);
}

double MockScorer::Similarity(std::string_view sentence, const Video& video) const {
  if (!video.caption) {
    throw MissingCaption("video '" + video.id + "' has no caption");
  }
  const auto a = TokenSet(sentence);
  const auto b = TokenSet(*video.caption);
  std::size_t inter = 0;
  for (const auto& tok : a) inter += b.count(tok);
  const std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::vector<double>> HashedBowEmbedder::Embed(
    std::span<const std::string> texts) const {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> v(kDimension, 0.0);
    for (const auto& tok : Tokenize(text)) {
      v[Fnv1a64(tok) % kDimension] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (double& x : v) x /= norm;
    }
    out.push_back(std::move(v));
  }
  return out;
}

VerifierSet VerifierSet::Mock(const ViewVocabulary& vocab) {
  return {std::make_shared<MockJudge>(vocab), std::make_shared<MockScorer>(),
          std::make_shared<HashedBowEmbedder>()};
}

}  // namespace echoreason
