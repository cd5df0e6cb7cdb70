#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace echoreason {

// Canonical echocardiographic view names plus their aliases.
//
// File format: one canonical name per line followed by comma-separated
// aliases. Blank lines and lines starting with '#' are ignored.
class ViewVocabulary {
 public:
  ViewVocabulary() = default;

  static ViewVocabulary Parse(std::string_view text);
  static ViewVocabulary Load(const std::filesystem::path& path);
  // The vocabulary bundled under DefaultDataDir()/views.txt.
  static ViewVocabulary LoadDefault();

  // Case-insensitive lookup of a canonical name or alias.
  std::optional<std::string> Resolve(std::string_view name) const;
  bool IsCanonical(std::string_view name) const;

  // Canonical views mentioned in `text`, deduplicated, in order of first
  // occurrence. Surface forms match case-insensitively on word boundaries;
  // at each position the longest surface form wins.
  std::vector<std::string> FindMentions(std::string_view text) const;
  bool MentionsAny(std::string_view text) const;

  const std::vector<std::string>& canonical_names() const { return canonical_; }

 private:
  struct SurfaceForm {
    std::string lowered;
    std::size_t canonical_index;
  };

  std::vector<std::string> canonical_;
  // Sorted by descending length so the first hit is the longest.
  std::vector<SurfaceForm> forms_;
};

}  // namespace echoreason
