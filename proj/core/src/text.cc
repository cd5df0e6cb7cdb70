#include "echoreason/text.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "echoreason/errors.h"

namespace echoreason {

bool IsAsciiAlnum(char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') ||
         (c >= 'A' && c <= 'Z');
}

bool IsAsciiSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

namespace {

char LowerAscii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

template <typename Fn>
void ForEachAlnumRun(std::string_view text, Fn&& fn) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!IsAsciiAlnum(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && IsAsciiAlnum(text[j])) ++j;
    fn(ToLowerAscii(text.substr(i, j - i)));
    i = j;
  }
}

}  // namespace

std::vector<std::string> Tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  ForEachAlnumRun(text, [&](std::string run) {
    if (run.size() >= kMinTokenLength) tokens.push_back(std::move(run));
  });
  return tokens;
}

std::set<std::string> TokenSet(std::string_view text) {
  auto tokens = Tokenize(text);
  return {tokens.begin(), tokens.end()};
}

std::set<std::string> WordSet(std::string_view text) {
  std::set<std::string> words;
  ForEachAlnumRun(text, [&](std::string run) { words.insert(std::move(run)); });
  return words;
}

std::string ToLowerAscii(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = LowerAscii(c);
  return out;
}

std::string_view TrimWhitespace(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && IsAsciiSpace(text[begin])) ++begin;
  while (end > begin && IsAsciiSpace(text[end - 1])) --end;
  return text.substr(begin, end - begin);
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string Fnv1a64Hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(Fnv1a64(bytes)));
  return buf;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path DefaultDataDir() {
  if (const char* env = std::getenv("ECHOREASON_DATA_DIR"); env && *env) {
    return env;
  }
  return ECHOREASON_DATA_DIR;
}

}  // namespace echoreason
