#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

namespace percept {

// Tokenized prompt, padded to the context limit.
struct TokenSequence {
  std::vector<std::int32_t> ids;  // size == context_length, pad id 0
  int length = 0;                 // real tokens including start/end markers
  int eot_pos() const { return length - 1; }
};

// Byte-pair tokenizer for the text encoder, matching the published
// vocabulary's conventions: byte-to-unicode symbol mapping, end-of-word
// markers, lowercasing and whitespace collapsing. The vocabulary is built
// from the merge list alone: 256 byte symbols, the same 256 with the
// end-of-word marker, one token per merge, then the start/end specials.
class BpeTokenizer {
 public:
  static constexpr int kDefaultContextLength = 77;
  static constexpr std::int32_t kPadId = 0;

  // Loads a merges file: optional header line, then one "left right" pair
  // per line. Accepts the ungzipped published file as-is.
  static BpeTokenizer load(const std::string& vocab_path);

  // Builds from in-memory merge pairs (fixture vocabularies in tests).
  static BpeTokenizer from_merges(
      const std::vector<std::pair<std::string, std::string>>& merges);

  // BPE ids of the text, without start/end markers or padding.
  std::vector<std::int32_t> encode_words(const std::string& text) const;

  // [start] + encode_words + [end], padded to context_length.
  // Throws InputError if the bracketed sequence exceeds context_length.
  TokenSequence encode(const std::string& text,
                       int context_length = kDefaultContextLength) const;

  int vocab_size() const { return static_cast<int>(id_to_token_.size()); }
  std::int32_t sot_id() const { return sot_id_; }
  std::int32_t eot_id() const { return eot_id_; }
  const std::string& token_text(std::int32_t id) const;

 private:
  BpeTokenizer() = default;
  void build(const std::vector<std::pair<std::string, std::string>>& merges);
  std::vector<std::string> bpe(const std::string& word_symbols) const;

  std::unordered_map<std::string, std::int32_t> token_to_id_;
  std::vector<std::string> id_to_token_;
  std::map<std::pair<std::string, std::string>, int> merge_ranks_;
  std::int32_t sot_id_ = 0;
  std::int32_t eot_id_ = 0;
};

}  // namespace percept
