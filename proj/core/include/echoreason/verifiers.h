#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "echoreason/study.h"
#include "echoreason/views.h"

namespace echoreason {

// Step judge g(h, q): scores one reasoning step against its question list.
// Implementations must be safe to call concurrently.
class StepJudge {
 public:
  virtual ~StepJudge() = default;
  virtual double Judge(std::string_view step_text,
                       std::span<const std::string> questions,
                       std::span<const std::string> available_views) const = 0;
};

// Video-text scorer f(v, s), normalised to [0, 1].
class VideoTextScorer {
 public:
  virtual ~VideoTextScorer() = default;
  virtual double Similarity(std::string_view sentence,
                            const Video& video) const = 0;
};

// Text embedder producing fixed-dimension unit vectors.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::vector<std::vector<double>> Embed(
      std::span<const std::string> texts) const = 0;
};

// Cosine similarity; 0 when either vector has zero norm or the dimensions
// differ.
double Cosine(std::span<const double> a, std::span<const double> b);

// Words the mock judge treats as an explicit affirmative/negative finding.
const std::vector<std::string>& ConclusionLexicon();

// Deterministic surrogate for the LLM judge:
//   0.5 * coverage + 0.25 * has_view + 0.25 * has_conclusion
// where coverage is the fraction of question tokens that appear in the step.
class MockJudge final : public StepJudge {
 public:
  explicit MockJudge(ViewVocabulary vocab) : vocab_(std::move(vocab)) {}

  double Judge(std::string_view step_text, std::span<const std::string> questions,
               std::span<const std::string> available_views) const override;

 private:
  ViewVocabulary vocab_;
};

// Jaccard similarity between the sentence tokens and the video caption.
class MockScorer final : public VideoTextScorer {
 public:
  double Similarity(std::string_view sentence, const Video& video) const override;
};

// Hashed bag-of-words: FNV-1a 64 of each token, bucket = hash mod 256,
// count accumulation, L2 normalisation. Empty text gives the zero vector.
class HashedBowEmbedder final : public Embedder {
 public:
  static constexpr std::size_t kDimension = 256;

  std::vector<std::vector<double>> Embed(
      std::span<const std::string> texts) const override;
};

// The three verifier roles bundled together.
struct VerifierSet {
  std::shared_ptr<const StepJudge> judge;
  std::shared_ptr<const VideoTextScorer> scorer;
  std::shared_ptr<const Embedder> embedder;

  static VerifierSet Mock(const ViewVocabulary& vocab);
};

}  // namespace echoreason
