//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <array>
#include <cctype>

#include <nlohmann/json.hpp>

#include "chemlm/elements.h"
#include "chemlm/tokenizer.h"

namespace chemlm {
namespace {

constexpr std::array<std::string_view, 19> kSymbols = {
  "(", ")", "[", "]", ".", "=", "#", "$", ":", "/",
  "\\", "+", "-", "@", "@@", "%", "*", "~", ">",
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char &c: out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_element_spelling(std::string_view s) {
  if (s.empty())
    return false;
  if (find_element(s))
    return true;
  // Lowercase (aromatic) spelling of any element.
  std::string title(s);
  title[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(title[0])));
  return lowercase(s) == s && find_element(title).has_value();
}

class Splitter {
public:
  Splitter(std::string_view text, const Vocabulary &v) : text_(text), v_(v) { }

  std::vector<std::string> run() {
    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '[') {
        bracket();
      } else if (c == '<') {
        special();
      } else if (starts_with("Cl") || starts_with("Br")) {
        emit(2);
      } else if (std::string_view("BCNOPSFIbcnops").find(c) != std::string_view::npos
                 || std::isdigit(static_cast<unsigned char>(c))) {
        emit(1);
      } else if (starts_with("@@")) {
        emit(2);
      } else if (c != ']' && v_.find(text_.substr(pos_, 1))
                 && !std::isalpha(static_cast<unsigned char>(c))) {
        emit(1);
      } else {
        throw TokenizeError(pos_, std::string("unexpected character '") + c + "'");
      }
    }
    return std::move(out_);
  }

private:
  bool starts_with(std::string_view s) const {
    return text_.substr(pos_, s.size()) == s;
  }

  void emit(std::size_t len) {
    out_.emplace_back(text_.substr(pos_, len));
    pos_ += len;
  }

  void bracket() {
    const std::size_t open = pos_;
    emit(1);
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
      emit(1);
    if (pos_ + 1 < text_.size() && is_element_spelling(text_.substr(pos_, 2)))
      emit(2);
    else if (pos_ < text_.size() && is_element_spelling(text_.substr(pos_, 1)))
      emit(1);
    else
      throw TokenizeError(pos_, "missing element in bracket atom");
    while (pos_ < text_.size() && text_[pos_] != ']') {
      if (starts_with("@@")) {
        emit(2);
        continue;
      }
      const char c = text_[pos_];
      if (std::string_view("@H+-:").find(c) == std::string_view::npos
          && !std::isdigit(static_cast<unsigned char>(c)))
        throw TokenizeError(pos_, std::string("unexpected character '") + c
                                      + "' in bracket atom");
      emit(1);
    }
    if (pos_ == text_.size())
      throw TokenizeError(open, "unterminated bracket atom");
    emit(1);
  }

  void special() {
    std::size_t best = 0;
    for (const auto &[token, id]: v_.special()) {
      if (token.size() > best && starts_with(token))
        best = token.size();
    }
    if (best == 0)
      throw TokenizeError(pos_, "unknown special token");
    emit(best);
  }

  std::string_view text_;
  const Vocabulary &v_;
  std::size_t pos_ = 0;
  std::vector<std::string> out_;
};

}  // namespace

std::string property_token(std::string_view name) {
  return "<" + std::string(name) + ">";
}

std::string class_token(int index) {
  return "<C" + std::to_string(index) + ">";
}

TokenizeError::TokenizeError(std::size_t offset, const std::string &msg)
    : std::runtime_error(msg + " at offset " + std::to_string(offset)),
      offset_(offset) { }

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

int Vocabulary::id_of(std::string_view token) const {
  if (auto id = find(token))
    return *id;
  throw std::out_of_range("unknown token " + std::string(token));
}

void Vocabulary::add(std::string token) {
  const int id = size();
  if (!index_.emplace(token, id).second)
    throw std::invalid_argument("duplicate token " + token);
  tokens_.push_back(std::move(token));
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char byte) {
    h ^= byte;
    h *= 0x100000001b3ULL;
  };
  for (const std::string &t: tokens_) {
    for (char c: t)
      mix(static_cast<unsigned char>(c));
    mix(0);
  }
  for (int shift = 0; shift < 32; shift += 8)
    mix(static_cast<unsigned char>((eos_ >> shift) & 0xff));
  return h;
}

std::string Vocabulary::to_json() const {
  nlohmann::ordered_json j;
  j["tokens"] = tokens_;
  j["eos"] = eos_;
  nlohmann::ordered_json special = nlohmann::ordered_json::object();
  for (const auto &[token, id]: special_)
    special[token] = id;
  j["special"] = special;
  return j.dump();
}

Vocabulary Vocabulary::from_json(std::string_view json) {
  Vocabulary v;
  try {
    const auto j = nlohmann::json::parse(json);
    for (const auto &t: j.at("tokens"))
      v.add(t.get<std::string>());
    v.eos_ = j.at("eos").get<int>();
    v.base_size_ = v.size();
    for (const auto &[token, id]: j.at("special").items()) {
      const int value = id.get<int>();
      if (v.find(token) != value)
        throw std::invalid_argument("special token id mismatch: " + token);
      v.special_[token] = value;
      v.base_size_ = std::min(v.base_size_, value);
    }
  } catch (const nlohmann::json::exception &e) {
    throw std::invalid_argument(std::string("malformed vocabulary: ") + e.what());
  }
  if (v.eos_ < 0 || v.eos_ >= v.size())
    throw std::invalid_argument("vocabulary end id out of range");
  return v;
}

std::span<const std::string_view> smiles_symbols() {
  return kSymbols;
}

Vocabulary build_base_vocab() {
  Vocabulary v;
  for (int z = 1; z <= kNumElements; ++z)
    v.add(std::string(element_symbol(z)));
  for (int z = 1; z <= kNumElements; ++z)
    v.add(lowercase(element_symbol(z)));
  for (char d = '0'; d <= '9'; ++d)
    v.add(std::string(1, d));
  for (std::string_view s: kSymbols)
    v.add(std::string(s));
  v.add(std::string(kEosToken));
  v.eos_ = v.size() - 1;
  v.base_size_ = v.size();
  return v;
}

Vocabulary extend_with_task_tokens(const Vocabulary &v,
                                   const std::vector<std::string> &names) {
  Vocabulary out = v;
  for (const std::string &name: names) {
    if (name.empty())
      throw std::invalid_argument("empty task token");
    out.add(name);
    out.special_[name] = out.size() - 1;
  }
  return out;
}

std::vector<std::string> split_tokens(std::string_view text,
                                      const Vocabulary &v) {
  return Splitter(text, v).run();
}

TokenSeq tokenize(std::string_view text, const Vocabulary &v, bool append_eos) {
  TokenSeq seq;
  for (const std::string &t: split_tokens(text, v))
    seq.ids.push_back(v.id_of(t));
  if (append_eos)
    seq.ids.push_back(v.eos_id());
  return seq;
}

std::string detokenize(std::span<const int> ids, const Vocabulary &v) {
  std::string out;
  for (int id: ids) {
    if (id == v.eos_id())
      break;
    out += v.token(id);
  }
  return out;
}

}  // namespace chemlm
