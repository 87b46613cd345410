#include "ctalab/tokenizer.hpp"

#include <algorithm>
#include <set>

#include "ctalab/error.hpp"

namespace ctalab {

namespace {

bool is_space_byte(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
}

bool is_word_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         c >= 0x80;  // keep multi-byte UTF-8 sequences inside one unit
}

const std::vector<std::string>& specials() {
  static const std::vector<std::string> s = {"<pad>", "<bos>", "<eos>", "<unk>"};
  return s;
}

}  // namespace

std::vector<std::string> Tokenizer::split_units(std::string_view text) {
  std::vector<std::string> units;
  std::string word;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      word.push_back(static_cast<char>(c));
      continue;
    }
    if (!word.empty()) {
      units.push_back(std::move(word));
      word.clear();
    }
    if (!is_space_byte(c)) units.emplace_back(1, static_cast<char>(c));
  }
  if (!word.empty()) units.push_back(std::move(word));
  return units;
}

Tokenizer Tokenizer::build(const std::vector<std::string>& corpus_texts) {
  if (corpus_texts.empty()) {
    throw Error(ErrorCode::EmptyCorpus, "tokenizer needs a non-empty corpus");
  }
  std::map<std::string, long long> freq;
  std::set<std::string> chars;
  bool any_unit = false;
  for (const auto& text : corpus_texts) {
    for (auto& unit : split_units(text)) {
      for (char c : unit) chars.insert(std::string(1, c));
      ++freq[unit];
      any_unit = true;
    }
  }
  if (!any_unit) {
    throw Error(ErrorCode::EmptyCorpus, "tokenizer corpus contains no tokens");
  }
  // Fallback alphabet: every character of the corpus is itself a token.
  for (const auto& c : chars) freq.emplace(c, 0);

  std::vector<std::pair<std::string, long long>> entries(freq.begin(), freq.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  std::vector<std::string> vocab = specials();
  vocab.reserve(vocab.size() + entries.size());
  for (auto& [token, count] : entries) vocab.push_back(token);
  return from_vocabulary(std::move(vocab));
}

Tokenizer Tokenizer::from_vocabulary(std::vector<std::string> vocabulary) {
  if (vocabulary.size() < specials().size()) {
    throw Error(ErrorCode::FormatError, "vocabulary too small to hold special tokens");
  }
  for (std::size_t i = 0; i < specials().size(); ++i) {
    if (vocabulary[i] != specials()[i]) {
      throw Error(ErrorCode::FormatError, "vocabulary is missing special tokens");
    }
  }
  Tokenizer t;
  t.vocabulary_ = std::move(vocabulary);
  for (std::size_t i = 0; i < t.vocabulary_.size(); ++i) {
    if (!t.ids_.emplace(t.vocabulary_[i], static_cast<int>(i)).second) {
      throw Error(ErrorCode::FormatError, "duplicate vocabulary token '" + t.vocabulary_[i] + "'");
    }
  }
  return t;
}

int Tokenizer::id_of(std::string_view token) const {
  const auto it = ids_.find(token);
  return it == ids_.end() ? -1 : it->second;
}

std::vector<int> Tokenizer::encode(std::string_view text) const {
  std::vector<int> out;
  for (const auto& unit : split_units(text)) {
    const int id = id_of(unit);
    if (id >= 0) {
      out.push_back(id);
      continue;
    }
    // Character fallback; <unk> only for characters outside the alphabet.
    for (char c : unit) {
      const int cid = id_of(std::string_view(&c, 1));
      out.push_back(cid >= 0 ? cid : kUnkId);
    }
  }
  return out;
}

std::string Tokenizer::decode(std::span<const int> ids) const {
  std::string out;
  for (int id : ids) {
    if (id < 0 || id >= vocab_size()) {
      throw Error(ErrorCode::InvalidArgument, "token id " + std::to_string(id) + " out of range");
    }
    if (id <= kUnkId) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocabulary_[static_cast<std::size_t>(id)];
  }
  return out;
}

}  // namespace ctalab
