#include "echoreason/transcript.h"

#include "echoreason/text.h"

namespace echoreason {

using nlohmann::json;

namespace {

constexpr std::string_view kThinkOpen = "<think>";
constexpr std::string_view kThinkClose = "</think>";
constexpr std::string_view kAnswerOpen = "<answer>";
constexpr std::string_view kAnswerClose = "</answer>";

struct TagScan {
  std::size_t count = 0;
  std::size_t first = std::string_view::npos;
};

TagScan ScanTag(std::string_view text, std::string_view tag) {
  TagScan scan;
  for (std::size_t pos = text.find(tag); pos != std::string_view::npos;
       pos = text.find(tag, pos + tag.size())) {
    if (scan.count == 0) scan.first = pos;
    ++scan.count;
  }
  return scan;
}

// Span of the content between a unique open/close tag pair.
struct Block {
  std::size_t open = 0;         // offset of the opening tag
  std::size_t content_begin = 0;
  std::size_t content_end = 0;  // offset of the closing tag
  std::size_t close_end = 0;    // offset just past the closing tag
};

std::optional<Block> FindBlock(std::string_view text, std::string_view open,
                               std::string_view close) {
  const TagScan o = ScanTag(text, open);
  const TagScan c = ScanTag(text, close);
  if (o.count != 1 || c.count != 1 || c.first < o.first + open.size()) {
    return std::nullopt;
  }
  return Block{o.first, o.first + open.size(), c.first, c.first + close.size()};
}

bool AllWhitespace(std::string_view text) {
  return TrimWhitespace(text).empty();
}

bool IsMarkup(char c) { return c == '*' || c == '_' || c == '#'; }
bool IsInlineSpace(char c) { return c == ' ' || c == '\t'; }
bool IsDigit(char c) { return c >= '0' && c <= '9'; }

bool MatchesStepWord(std::string_view text, std::size_t at) {
  static constexpr std::string_view kWord = "step";
  if (at + kWord.size() > text.size()) return false;
  for (std::size_t i = 0; i < kWord.size(); ++i) {
    char c = text[at + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != kWord[i]) return false;
  }
  return true;
}

// Offsets where a "Step <N>:" marker begins, including any leading markup
// such as "**" or "### ".
std::vector<std::size_t> FindStepMarkers(std::string_view text) {
  std::vector<std::size_t> starts;
  for (std::size_t k = 0; k < text.size(); ++k) {
    if (k > 0 && IsAsciiAlnum(text[k - 1])) continue;
    if (!MatchesStepWord(text, k)) continue;
    std::size_t j = k + 4;
    while (j < text.size() && IsInlineSpace(text[j])) ++j;
    const std::size_t digits = j;
    while (j < text.size() && IsDigit(text[j])) ++j;
    if (j == digits) continue;
    while (j < text.size() && (IsMarkup(text[j]) || IsInlineSpace(text[j]))) ++j;
    if (j >= text.size() || text[j] != ':') continue;

    std::size_t start = k;
    while (start > 0 && (IsMarkup(text[start - 1]) || IsInlineSpace(text[start - 1]))) {
      --start;
    }
    if (!starts.empty() && start < starts.back()) start = starts.back();
    starts.push_back(start);
    k = j;
  }
  return starts;
}

ReasoningStep MakeStep(int index, std::string_view text,
                       const ViewVocabulary& vocab) {
  ReasoningStep step;
  step.index = index;
  step.text = std::string(TrimWhitespace(text));
  for (auto& sentence : SplitSentences(step.text)) {
    auto mentions = vocab.FindMentions(sentence);
    step.sentences.push_back({std::move(sentence), std::move(mentions)});
  }
  return step;
}

}  // namespace

std::string_view AnswerName(Answer answer) {
  switch (answer) {
    case Answer::kYes:
      return "Yes";
    case Answer::kNo:
      return "No";
    case Answer::kUnparsable:
      break;
  }
  return "Unparsable";
}

std::optional<Answer> AnswerFromName(std::string_view name) {
  const std::string lowered = ToLowerAscii(TrimWhitespace(name));
  if (lowered == "yes") return Answer::kYes;
  if (lowered == "no") return Answer::kNo;
  if (lowered == "unparsable") return Answer::kUnparsable;
  return std::nullopt;
}

Answer NormalizeAnswer(std::string_view answer_block) {
  std::string compact;
  for (char c : answer_block) {
    if (IsAsciiAlnum(c)) compact.push_back(c);
    else if (static_cast<unsigned char>(c) >= 0x80) compact.push_back(c);
  }
  compact = ToLowerAscii(compact);
  if (compact == "yes") return Answer::kYes;
  if (compact == "no") return Answer::kNo;
  return Answer::kUnparsable;
}

std::vector<std::string> SplitSentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  auto flush = [&](std::size_t end) {
    auto piece = TrimWhitespace(text.substr(begin, end - begin));
    if (!piece.empty()) out.emplace_back(piece);
    begin = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c != '.' && c != ';' && c != '?' && c != '!') continue;
    if (i + 1 == text.size() || IsAsciiSpace(text[i + 1])) flush(i + 1);
  }
  flush(text.size());
  return out;
}

Transcript ParseTranscript(std::string_view raw, const ViewVocabulary& vocab) {
  Transcript t;
  t.raw = std::string(raw);

  const auto think = FindBlock(raw, kThinkOpen, kThinkClose);
  const auto answer = FindBlock(raw, kAnswerOpen, kAnswerClose);

  if (think) {
    t.think_block = std::string(
        raw.substr(think->content_begin, think->content_end - think->content_begin));
  }
  if (answer) {
    t.answer_block = std::string(raw.substr(
        answer->content_begin, answer->content_end - answer->content_begin));
    t.answer = NormalizeAnswer(*t.answer_block);
  }

  t.format_ok = think && answer && think->close_end <= answer->open &&
                AllWhitespace(raw.substr(0, think->open)) &&
                AllWhitespace(raw.substr(think->close_end,
                                         answer->open - think->close_end)) &&
                AllWhitespace(raw.substr(answer->close_end));

  if (!t.think_block) return t;

  const std::string_view body = *t.think_block;
  const auto starts = FindStepMarkers(body);
  if (starts.empty()) {
    if (!AllWhitespace(body)) t.steps.push_back(MakeStep(1, body, vocab));
    return t;
  }
  t.preamble = std::string(TrimWhitespace(body.substr(0, starts.front())));
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const std::size_t end = i + 1 < starts.size() ? starts[i + 1] : body.size();
    t.steps.push_back(MakeStep(static_cast<int>(i) + 1,
                               body.substr(starts[i], end - starts[i]), vocab));
  }
  return t;
}

json TranscriptToJson(const Transcript& t) {
  json steps = json::array();
  for (const auto& step : t.steps) {
    json sentences = json::array();
    for (const auto& s : step.sentences) {
      sentences.push_back({{"text", s.text}, {"view_mentions", s.view_mentions}});
    }
    steps.push_back({{"index", step.index},
                     {"text", step.text},
                     {"sentences", std::move(sentences)}});
  }
  json out = {{"format_ok", t.format_ok},
              {"answer", AnswerName(t.answer)},
              {"step_count", t.steps.size()},
              {"steps", std::move(steps)}};
  out["think_block"] = t.think_block ? json(*t.think_block) : json(nullptr);
  out["answer_block"] = t.answer_block ? json(*t.answer_block) : json(nullptr);
  return out;
}

}  // namespace echoreason
