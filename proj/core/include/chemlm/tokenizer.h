//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_TOKENIZER_H_
#define CHEMLM_TOKENIZER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace chemlm {

inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kSepToken = "<sep>";
inline constexpr std::string_view kValueToken = "<val>";
inline constexpr std::string_view kScaffoldName = "scaffold";

// "<name>" for a property name, "<C3>" for class index 3.
std::string property_token(std::string_view name);
std::string class_token(int index);

class TokenizeError: public std::runtime_error {
public:
  TokenizeError(std::size_t offset, const std::string &msg);
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

class Vocabulary {
public:
  Vocabulary() = default;

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string &token(int id) const { return tokens_.at(id); }
  std::span<const std::string> tokens() const { return tokens_; }
  std::optional<int> find(std::string_view token) const;
  // Throws std::out_of_range for unknown tokens.
  int id_of(std::string_view token) const;

  int eos_id() const { return eos_; }
  // Padding reuses the end token.
  int pad_id() const { return eos_; }

  // Task-time tokens by string, in insertion order of their ids.
  const std::map<std::string, int> &special() const { return special_; }
  bool is_special(int id) const { return id >= base_size_; }
  int base_size() const { return base_size_; }

  // FNV-1a over the token list and end id.
  std::uint64_t hash() const;

  std::string to_json() const;
  // Throws std::invalid_argument on malformed input.
  static Vocabulary from_json(std::string_view json);

  friend bool operator==(const Vocabulary &a, const Vocabulary &b) {
    return a.tokens_ == b.tokens_ && a.eos_ == b.eos_
           && a.special_ == b.special_;
  }

private:
  friend Vocabulary build_base_vocab();
  friend Vocabulary extend_with_task_tokens(const Vocabulary &,
                                            const std::vector<std::string> &);

  void add(std::string token);

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  std::map<std::string, int> special_;
  int eos_ = -1;
  int base_size_ = 0;
};

// Upper- and lowercase forms of the 118 element symbols, digits 0-9, the
// SMILES symbol set and the end token.
Vocabulary build_base_vocab();

// The 19 SMILES symbols of the base inventory.
std::span<const std::string_view> smiles_symbols();

// Appends new tokens; existing ids are unchanged. Throws
// std::invalid_argument if a name is already present (or repeated).
Vocabulary extend_with_task_tokens(const Vocabulary &v,
                                   const std::vector<std::string> &names);

struct TokenSeq {
  std::vector<int> ids;
  // Index of the first target token for prompt/target sequences.
  std::optional<int> boundary;
};

// Token strings of `text` (no end token). Outside brackets only the organic
// subset, digits, symbols and registered "<...>" tokens match; bracket
// interiors follow the bracket-atom grammar.
std::vector<std::string> split_tokens(std::string_view text,
                                      const Vocabulary &v);

TokenSeq tokenize(std::string_view text, const Vocabulary &v,
                  bool append_eos = true);

// Concatenates tokens, stopping at the first end token.
std::string detokenize(std::span<const int> ids, const Vocabulary &v);

}  // namespace chemlm

#endif  // CHEMLM_TOKENIZER_H_
