#include "percept/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <fstream>

#include "percept/errors.hpp"

namespace percept {

namespace {

constexpr const char* kSot = "<|startoftext|>";
constexpr const char* kEot = "<|endoftext|>";
constexpr const char* kEow = "</w>";

std::string codepoint_to_utf8(std::uint32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
  return out;
}

// Visible-byte remapping: printable byte values keep their codepoint, the
// rest are shifted past 255 in file order. Iteration order defines vocab
// ids, so it must not be reordered.
const std::vector<std::pair<int, std::uint32_t>>& byte_unicode_table() {
  static const std::vector<std::pair<int, std::uint32_t>> table = [] {
    std::vector<std::pair<int, std::uint32_t>> t;
    std::vector<bool> covered(256, false);
    auto push_range = [&](int lo, int hi) {
      for (int b = lo; b <= hi; ++b) {
        t.emplace_back(b, static_cast<std::uint32_t>(b));
        covered[b] = true;
      }
    };
    push_range(33, 126);
    push_range(161, 172);
    push_range(174, 255);
    std::uint32_t next = 256;
    for (int b = 0; b < 256; ++b) {
      if (!covered[b]) t.emplace_back(b, next++);
    }
    return t;
  }();
  return table;
}

const std::array<std::string, 256>& byte_to_symbol() {
  static const std::array<std::string, 256> table = [] {
    std::array<std::string, 256> t;
    for (const auto& [b, cp] : byte_unicode_table()) {
      t[static_cast<std::size_t>(b)] = codepoint_to_utf8(cp);
    }
    return t;
  }();
  return table;
}

bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_ascii_letter(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

bool is_ascii_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Lowercase + collapse whitespace runs to single spaces + strip.
std::string clean_text(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char raw : text) {
    char c = raw;
    if (is_ascii_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (pending_space) {
      out += ' ';
      pending_space = false;
    }
    out += c;
  }
  return out;
}

// Word splitting per the published pattern: special markers, contractions
// ('s 't 're 've 'm 'll 'd), letter runs, single digits, punctuation runs.
// Letter/digit classes are exact for ASCII; bytes >= 0x80 are treated as
// letters, which matches the published behavior for ordinary Latin text.
std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  const std::size_t n = text.size();
  std::size_t i = 0;
  auto starts_with = [&](std::size_t pos, const char* s) {
    const std::size_t len = std::strlen(s);
    return pos + len <= n && text.compare(pos, len, s) == 0;
  };
  auto is_letter_byte = [&](std::size_t pos) {
    const unsigned char c = static_cast<unsigned char>(text[pos]);
    return is_ascii_letter(c) || c >= 0x80;
  };
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (is_ascii_space(static_cast<char>(c))) {
      ++i;
      continue;
    }
    if (starts_with(i, kSot)) {
      words.emplace_back(kSot);
      i += std::strlen(kSot);
      continue;
    }
    if (starts_with(i, kEot)) {
      words.emplace_back(kEot);
      i += std::strlen(kEot);
      continue;
    }
    if (c == '\'') {
      static const char* suffixes[] = {"'s", "'t", "'re", "'ve", "'m", "'ll", "'d"};
      bool matched = false;
      for (const char* s : suffixes) {
        if (starts_with(i, s)) {
          words.emplace_back(s);
          i += std::strlen(s);
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    if (is_letter_byte(i)) {
      std::size_t j = i;
      while (j < n && is_letter_byte(j)) ++j;
      words.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }
    if (is_ascii_digit(c)) {
      words.emplace_back(text.substr(i, 1));
      ++i;
      continue;
    }
    // Punctuation run: everything that is not space/letter/digit.
    std::size_t j = i;
    while (j < n) {
      const unsigned char cj = static_cast<unsigned char>(text[j]);
      if (is_ascii_space(static_cast<char>(cj)) || is_letter_byte(j) ||
          is_ascii_digit(cj)) {
        break;
      }
      ++j;
    }
    words.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return words;
}

// Splits a concatenated symbol string back into mapped-codepoint units.
std::vector<std::string> utf8_units(const std::string& s) {
  std::vector<std::string> units;
  std::size_t i = 0;
  while (i < s.size()) {
    const unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    if ((c & 0x80) == 0) len = 1;
    else if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else len = 4;
    units.push_back(s.substr(i, len));
    i += len;
  }
  return units;
}

}  // namespace

BpeTokenizer BpeTokenizer::load(const std::string& vocab_path) {
  std::ifstream in(vocab_path);
  if (!in) throw AssetError("cannot open vocabulary file: " + vocab_path);
  std::vector<std::pair<std::string, std::string>> merges;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const bool header = first && (line.empty() || line[0] == '#' ||
                                  line.find(' ') == std::string::npos ||
                                  line.find("version") != std::string::npos);
    first = false;
    if (header) continue;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos || line.find(' ', space + 1) != std::string::npos) {
      throw AssetError("malformed merge line in " + vocab_path + ": '" + line + "'");
    }
    merges.emplace_back(line.substr(0, space), line.substr(space + 1));
  }
  if (merges.empty()) {
    throw AssetError("vocabulary file has no merges: " + vocab_path);
  }
  // The published vocabulary uses the first 48894 merges; the raw merge file
  // ships with more lines than the models consume.
  constexpr std::size_t kMaxMerges = 48894;
  if (merges.size() > kMaxMerges) merges.resize(kMaxMerges);
  return from_merges(merges);
}

BpeTokenizer BpeTokenizer::from_merges(
    const std::vector<std::pair<std::string, std::string>>& merges) {
  BpeTokenizer t;
  t.build(merges);
  return t;
}

void BpeTokenizer::build(
    const std::vector<std::pair<std::string, std::string>>& merges) {
  id_to_token_.clear();
  // Base symbols in table order, then their end-of-word forms, then one
  // token per merge, then the specials. This ordering defines the ids.
  for (const auto& [b, cp] : byte_unicode_table()) {
    (void)b;
    id_to_token_.push_back(codepoint_to_utf8(cp));
  }
  const std::size_t base = id_to_token_.size();
  for (std::size_t i = 0; i < base; ++i) {
    id_to_token_.push_back(id_to_token_[i] + kEow);
  }
  int rank = 0;
  for (const auto& [left, right] : merges) {
    merge_ranks_[{left, right}] = rank++;
    id_to_token_.push_back(left + right);
  }
  id_to_token_.push_back(kSot);
  id_to_token_.push_back(kEot);
  token_to_id_.clear();
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    token_to_id_[id_to_token_[i]] = static_cast<std::int32_t>(i);
  }
  sot_id_ = token_to_id_.at(kSot);
  eot_id_ = token_to_id_.at(kEot);
}

std::vector<std::string> BpeTokenizer::bpe(const std::string& word_symbols) const {
  std::vector<std::string> word = utf8_units(word_symbols);
  if (word.empty()) return {};
  word.back() += kEow;
  if (word.size() == 1) return word;

  while (true) {
    // Lowest-rank adjacent pair.
    int best_rank = -1;
    std::pair<std::string, std::string> bigram;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      const auto it = merge_ranks_.find({word[i], word[i + 1]});
      if (it != merge_ranks_.end() && (best_rank < 0 || it->second < best_rank)) {
        best_rank = it->second;
        bigram = it->first;
      }
    }
    if (best_rank < 0) break;

    std::vector<std::string> merged;
    merged.reserve(word.size());
    std::size_t i = 0;
    while (i < word.size()) {
      if (word[i] == bigram.first && i + 1 < word.size() &&
          word[i + 1] == bigram.second) {
        merged.push_back(bigram.first + bigram.second);
        i += 2;
      } else {
        merged.push_back(word[i]);
        ++i;
      }
    }
    word = std::move(merged);
    if (word.size() == 1) break;
  }
  return word;
}

std::vector<std::int32_t> BpeTokenizer::encode_words(const std::string& text) const {
  const std::string cleaned = clean_text(text);
  std::vector<std::int32_t> ids;
  for (const std::string& w : split_words(cleaned)) {
    if (w == kSot || w == kEot) {
      ids.push_back(token_to_id_.at(w));
      continue;
    }
    std::string symbols;
    for (const char b : w) {
      symbols += byte_to_symbol()[static_cast<unsigned char>(b)];
    }
    for (const std::string& piece : bpe(symbols)) {
      const auto it = token_to_id_.find(piece);
      if (it == token_to_id_.end()) {
        throw InputError("token piece not in vocabulary: '" + piece + "'");
      }
      ids.push_back(it->second);
    }
  }
  return ids;
}

TokenSequence BpeTokenizer::encode(const std::string& text,
                                   int context_length) const {
  const std::vector<std::int32_t> words = encode_words(text);
  TokenSequence seq;
  seq.length = static_cast<int>(words.size()) + 2;
  if (seq.length > context_length) {
    throw InputError("text tokenizes to " + std::to_string(seq.length) +
                     " tokens, over the context limit of " +
                     std::to_string(context_length));
  }
  seq.ids.assign(static_cast<std::size_t>(context_length), kPadId);
  seq.ids[0] = sot_id_;
  std::copy(words.begin(), words.end(), seq.ids.begin() + 1);
  seq.ids[static_cast<std::size_t>(words.size()) + 1] = eot_id_;
  return seq;
}

const std::string& BpeTokenizer::token_text(std::int32_t id) const {
  if (id < 0 || id >= vocab_size()) {
    throw InputError("token id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

}  // namespace percept
