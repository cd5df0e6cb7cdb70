#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace echoreason {

// Shared token rule for the mock judge, mock scorer and hashed embedder:
// lowercase ASCII alphanumeric runs of length >= 3. Every other byte
// separates tokens.
inline constexpr std::size_t kMinTokenLength = 3;

std::vector<std::string> Tokenize(std::string_view text);
std::set<std::string> TokenSet(std::string_view text);

// Lowercase alphanumeric runs of any length ("no" survives here).
std::set<std::string> WordSet(std::string_view text);

std::string ToLowerAscii(std::string_view text);
std::string_view TrimWhitespace(std::string_view text);

bool IsAsciiAlnum(char c);
bool IsAsciiSpace(char c);

// FNV-1a, 64-bit.
std::uint64_t Fnv1a64(std::string_view bytes);
std::string Fnv1a64Hex(std::string_view bytes);

std::string ReadFile(const std::filesystem::path& path);

// Bundled data directory. $ECHOREASON_DATA_DIR overrides the build-time path.
std::filesystem::path DefaultDataDir();

}  // namespace echoreason
