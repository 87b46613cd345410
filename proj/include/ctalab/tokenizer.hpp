#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctalab {

// Whitespace/punctuation word-level tokenizer with per-character fallback.
// A unit is either a maximal run of alphanumeric (or non-ASCII) bytes or a
// single punctuation byte. Unknown units fall back to their characters;
// only characters never seen in the build corpus map to <unk>.
class Tokenizer {
 public:
  static constexpr int kPadId = 0;
  static constexpr int kBosId = 1;
  static constexpr int kEosId = 2;
  static constexpr int kUnkId = 3;

  // Vocabulary covers every unit of the corpus plus every single character
  // (fallback alphabet) plus the four specials. Units are ordered by
  // frequency (desc), then lexicographically.
  static Tokenizer build(const std::vector<std::string>& corpus_texts);
  static Tokenizer from_vocabulary(std::vector<std::string> vocabulary);

  static std::vector<std::string> split_units(std::string_view text);

  std::vector<int> encode(std::string_view text) const;
  // Joins non-special tokens with single spaces.
  std::string decode(std::span<const int> ids) const;

  int vocab_size() const { return static_cast<int>(vocabulary_.size()); }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  int id_of(std::string_view token) const;  // -1 when absent

 private:
  Tokenizer() = default;
  std::vector<std::string> vocabulary_;
  std::map<std::string, int, std::less<>> ids_;
};

}  // namespace ctalab
