#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "echoreason/views.h"

namespace echoreason {

enum class Answer { kYes, kNo, kUnparsable };

std::string_view AnswerName(Answer answer);
// Accepts "Yes" / "No" / "Unparsable" (case-insensitive).
std::optional<Answer> AnswerFromName(std::string_view name);

struct Sentence {
  std::string text;
  std::vector<std::string> view_mentions;

  bool operator==(const Sentence&) const = default;
};

struct ReasoningStep {
  int index = 0;  // 1-based, textual order
  std::string text;
  std::vector<Sentence> sentences;

  bool operator==(const ReasoningStep&) const = default;
};

// Raw policy output and its parsed structure.
struct Transcript {
  std::string raw;
  std::optional<std::string> think_block;
  std::optional<std::string> answer_block;
  // Think-block text before the first "Step N:" marker (trimmed).
  std::string preamble;
  std::vector<ReasoningStep> steps;
  Answer answer = Answer::kUnparsable;
  // Exactly one <think> block followed by exactly one <answer> block with
  // only whitespace around them.
  bool format_ok = false;

  bool operator==(const Transcript&) const = default;
};

// Total and deterministic; malformed input never throws.
Transcript ParseTranscript(std::string_view raw, const ViewVocabulary& vocab);

// Lowercases and drops punctuation and whitespace, then requires an exact
// "yes" or "no".
Answer NormalizeAnswer(std::string_view answer_block);

// Splits on '.', ';', '?' or '!' followed by whitespace or end of text.
std::vector<std::string> SplitSentences(std::string_view text);

nlohmann::json TranscriptToJson(const Transcript& transcript);

}  // namespace echoreason
