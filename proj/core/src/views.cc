#include "echoreason/views.h"

#include <algorithm>

#include "echoreason/errors.h"
#include "echoreason/text.h"

namespace echoreason {

namespace {

std::vector<std::string_view> SplitCommas(std::string_view line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) comma = line.size();
    parts.push_back(TrimWhitespace(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return parts;
}

bool EqualsIgnoreCase(std::string_view text, std::string_view lowered) {
  if (text.size() != lowered.size()) return false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != lowered[i]) return false;
  }
  return true;
}

}  // namespace

ViewVocabulary ViewVocabulary::Parse(std::string_view text) {
  ViewVocabulary vocab;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = TrimWhitespace(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    auto parts = SplitCommas(line);
    const std::string canonical(parts.front());
    if (canonical.empty()) {
      throw VocabularyError("view vocabulary line " + std::to_string(line_no) +
                            ": empty canonical name");
    }
    const std::size_t index = vocab.canonical_.size();
    vocab.canonical_.push_back(canonical);
    for (std::string_view part : parts) {
      if (part.empty()) continue;
      std::string lowered = ToLowerAscii(part);
      if (vocab.Resolve(lowered)) {
        throw VocabularyError("view vocabulary line " + std::to_string(line_no) +
                              ": '" + std::string(part) + "' defined twice");
      }
      vocab.forms_.push_back({std::move(lowered), index});
    }
  }
  std::stable_sort(vocab.forms_.begin(), vocab.forms_.end(),
                   [](const SurfaceForm& a, const SurfaceForm& b) {
                     return a.lowered.size() > b.lowered.size();
                   });
  return vocab;
}

ViewVocabulary ViewVocabulary::Load(const std::filesystem::path& path) {
  return Parse(ReadFile(path));
}

ViewVocabulary ViewVocabulary::LoadDefault() {
  return Load(DefaultDataDir() / "views.txt");
}

std::optional<std::string> ViewVocabulary::Resolve(std::string_view name) const {
  name = TrimWhitespace(name);
  for (const auto& form : forms_) {
    if (EqualsIgnoreCase(name, form.lowered)) {
      return canonical_[form.canonical_index];
    }
  }
  return std::nullopt;
}

bool ViewVocabulary::IsCanonical(std::string_view name) const {
  return std::find(canonical_.begin(), canonical_.end(), name) !=
         canonical_.end();
}

std::vector<std::string> ViewVocabulary::FindMentions(std::string_view text) const {
  std::vector<std::string> mentions;
  std::vector<bool> seen(canonical_.size(), false);
  std::size_t i = 0;
  while (i < text.size()) {
    if (i > 0 && IsAsciiAlnum(text[i - 1])) {
      ++i;
      continue;
    }
    std::size_t matched = 0;
    for (const auto& form : forms_) {
      const std::size_t n = form.lowered.size();
      if (i + n > text.size()) continue;
      if (!EqualsIgnoreCase(text.substr(i, n), form.lowered)) continue;
      if (i + n < text.size() && IsAsciiAlnum(text[i + n])) continue;
      if (!seen[form.canonical_index]) {
        seen[form.canonical_index] = true;
        mentions.push_back(canonical_[form.canonical_index]);
      }
      matched = n;
      break;
    }
    i += matched > 0 ? matched : 1;
  }
  return mentions;
}

bool ViewVocabulary::MentionsAny(std::string_view text) const {
  return !FindMentions(text).empty();
}

}  // namespace echoreason
