//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <cctype>
#include <map>
#include <string>
#include <utility>

#include "chemlm/elements.h"
#include "chemlm/rings.h"
#include "chemlm/smiles.h"

namespace chemlm {

std::string_view to_string(ParseErrorKind kind) {
  switch (kind) {
  case ParseErrorKind::kUnexpectedChar:
    return "UnexpectedChar";
  case ParseErrorKind::kUnclosedRingBond:
    return "UnclosedRingBond";
  case ParseErrorKind::kUnclosedBranch:
    return "UnclosedBranch";
  case ParseErrorKind::kBadBracketAtom:
    return "BadBracketAtom";
  case ParseErrorKind::kEmptyInput:
    return "EmptyInput";
  }
  return "Unknown";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset,
                       const std::string &msg)
    : std::runtime_error(std::string(to_string(kind)) + " at offset "
                         + std::to_string(offset) + ": " + msg),
      kind_(kind), offset_(offset) { }

namespace {

struct PendingBond {
  BondOrder order;
  std::size_t offset;
  bool aromatic_symbol;
};

struct OpenRing {
  int atom;
  std::optional<PendingBond> bond;
  std::size_t offset;
};

class Parser {
public:
  explicit Parser(std::string_view text): text_(text) { }

  MolGraph run() {
    if (text_.empty())
      throw ParseError(ParseErrorKind::kEmptyInput, 0, "empty SMILES");

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      switch (c) {
      case '(':
        open_branch();
        break;
      case ')':
        close_branch();
        break;
      case '-':
      case '=':
      case '#':
      case ':':
      case '/':
      case '\\':
        read_bond(c);
        break;
      case '.':
        if (prev_ < 0 || pending_ || !branches_.empty())
          fail_unexpected("misplaced '.'");
        prev_ = -1;
        ++pos_;
        break;
      case '%':
        ring_closure(read_percent_ring());
        break;
      case '[':
        add_atom(read_bracket_atom());
        break;
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) {
          const std::size_t at = pos_++;
          ring_closure({ c - '0', at });
        } else {
          add_atom(read_organic_atom());
        }
      }
    }

    if (pending_)
      throw ParseError(ParseErrorKind::kUnexpectedChar, pending_->offset,
                       "bond without a following atom");
    if (!branches_.empty())
      throw ParseError(ParseErrorKind::kUnclosedBranch, branches_.back().second,
                       "unclosed branch");
    if (!rings_.empty()) {
      std::size_t first = text_.size();
      for (const auto &[num, ring]: rings_)
        first = std::min(first, ring.offset);
      throw ParseError(ParseErrorKind::kUnclosedRingBond, first,
                       "unmatched ring-closure digit");
    }
    if (graph_.empty())
      throw ParseError(ParseErrorKind::kUnexpectedChar, 0, "no atoms");

    demote_acyclic_aromatic_bonds();
    return std::move(graph_);
  }

private:
  [[noreturn]] void fail_unexpected(const std::string &msg) const {
    throw ParseError(ParseErrorKind::kUnexpectedChar, pos_, msg);
  }

  void open_branch() {
    if (prev_ < 0 || pending_)
      fail_unexpected("branch without a preceding atom");
    if (pos_ + 1 < text_.size() && text_[pos_ + 1] == ')')
      fail_unexpected("empty branch");
    branches_.emplace_back(prev_, pos_);
    ++pos_;
  }

  void close_branch() {
    if (branches_.empty() || pending_)
      fail_unexpected("unbalanced ')'");
    prev_ = branches_.back().first;
    branches_.pop_back();
    ++pos_;
  }

  void read_bond(char c) {
    if (prev_ < 0 || pending_)
      fail_unexpected("misplaced bond symbol");
    BondOrder order = BondOrder::kSingle;
    if (c == '=')
      order = BondOrder::kDouble;
    else if (c == '#')
      order = BondOrder::kTriple;
    else if (c == ':')
      order = BondOrder::kAromatic;
    pending_ = PendingBond { order, pos_, c == ':' };
    ++pos_;
  }

  std::pair<int, std::size_t> read_percent_ring() {
    const std::size_t at = pos_;
    if (pos_ + 2 >= text_.size()
        || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))
        || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 2])))
      throw ParseError(ParseErrorKind::kUnexpectedChar, at,
                       "'%' needs two digits");
    const int num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
    pos_ += 3;
    return { num, at };
  }

  BondOrder implicit_order(int a, int b) const {
    return graph_.atom(a).aromatic && graph_.atom(b).aromatic
               ? BondOrder::kAromatic
               : BondOrder::kSingle;
  }

  void check_aromatic_bond(const PendingBond &bond, int a, int b) const {
    if (bond.aromatic_symbol
        && !(graph_.atom(a).aromatic && graph_.atom(b).aromatic))
      throw ParseError(ParseErrorKind::kUnexpectedChar, bond.offset,
                       "':' bond between non-aromatic atoms");
  }

  void ring_closure(std::pair<int, std::size_t> ring) {
    const auto [num, at] = ring;
    if (prev_ < 0)
      throw ParseError(ParseErrorKind::kUnexpectedChar, at,
                       "ring closure without an atom");
    auto it = rings_.find(num);
    if (it == rings_.end()) {
      rings_.emplace(num, OpenRing { prev_, pending_, at });
      pending_.reset();
      return;
    }

    const OpenRing open = it->second;
    rings_.erase(it);
    if (open.atom == prev_ || graph_.find_bond(open.atom, prev_))
      throw ParseError(ParseErrorKind::kUnexpectedChar, at,
                       "ring closure duplicates an existing bond");

    std::optional<PendingBond> bond = open.bond;
    if (pending_) {
      if (bond && bond->order != pending_->order)
        throw ParseError(ParseErrorKind::kUnexpectedChar, at,
                         "conflicting ring-closure bond symbols");
      bond = pending_;
    }
    BondOrder order = implicit_order(open.atom, prev_);
    if (bond) {
      check_aromatic_bond(*bond, open.atom, prev_);
      order = bond->order;
    }
    graph_.add_bond(open.atom, prev_, order);
    pending_.reset();
  }

  void add_atom(const Atom &atom) {
    const int idx = graph_.add_atom(atom);
    if (prev_ >= 0) {
      BondOrder order = implicit_order(prev_, idx);
      if (pending_) {
        check_aromatic_bond(*pending_, prev_, idx);
        order = pending_->order;
      }
      graph_.add_bond(prev_, idx, order);
    }
    pending_.reset();
    prev_ = idx;
  }

  Atom read_organic_atom() {
    const char c = text_[pos_];
    Atom atom;
    auto two = [&](char next) {
      return pos_ + 1 < text_.size() && text_[pos_ + 1] == next;
    };
    switch (c) {
    case 'C':
      atom.element = two('l') ? element::kCl : element::kC;
      break;
    case 'B':
      atom.element = two('r') ? element::kBr : element::kB;
      break;
    case 'N':
      atom.element = element::kN;
      break;
    case 'O':
      atom.element = element::kO;
      break;
    case 'P':
      atom.element = element::kP;
      break;
    case 'S':
      atom.element = element::kS;
      break;
    case 'F':
      atom.element = element::kF;
      break;
    case 'I':
      atom.element = element::kI;
      break;
    case 'b':
    case 'c':
    case 'n':
    case 'o':
    case 'p':
    case 's':
      atom.element = *find_element(std::string(1, static_cast<char>(
          std::toupper(static_cast<unsigned char>(c)))));
      atom.aromatic = true;
      break;
    default:
      fail_unexpected(std::string("unexpected character '") + c + "'");
    }
    pos_ += (atom.element == element::kCl || atom.element == element::kBr) ? 2 : 1;
    return atom;
  }

  Atom read_bracket_atom() {
    const std::size_t open = pos_;
    const std::size_t close = text_.find(']', open);
    if (close == std::string_view::npos)
      throw ParseError(ParseErrorKind::kBadBracketAtom, open, "missing ']'");
    const std::string_view body = text_.substr(open + 1, close - open - 1);
    auto bad = [&](const std::string &msg) -> ParseError {
      return ParseError(ParseErrorKind::kBadBracketAtom, open, msg);
    };

    std::size_t i = 0;
    auto read_number = [&]() -> std::optional<int> {
      const std::size_t start = i;
      int value = 0;
      while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
        value = value * 10 + (body[i] - '0');
        if (value > 100000)
          throw bad("number too large");
        ++i;
      }
      if (i == start)
        return std::nullopt;
      return value;
    };

    Atom atom;
    if (auto iso = read_number()) {
      if (*iso == 0)
        throw bad("isotope must be positive");
      atom.isotope = *iso;
    }

    // Element symbol: aromatic forms first, then longest title-case match.
    if (i >= body.size())
      throw bad("missing element symbol");
    bool found = false;
    for (std::string_view arom: { "se", "as" }) {
      if (body.substr(i, 2) == arom) {
        atom.element = *find_element(arom == "se" ? "Se" : "As");
        atom.aromatic = true;
        i += 2;
        found = true;
        break;
      }
    }
    if (!found && std::islower(static_cast<unsigned char>(body[i]))) {
      const char c = body[i];
      if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's') {
        atom.element = *find_element(std::string(1, static_cast<char>(
            std::toupper(static_cast<unsigned char>(c)))));
        atom.aromatic = true;
        ++i;
        found = true;
      }
    }
    if (!found && std::isupper(static_cast<unsigned char>(body[i]))) {
      if (i + 1 < body.size() && std::islower(static_cast<unsigned char>(body[i + 1]))) {
        if (auto z = find_element(body.substr(i, 2))) {
          atom.element = *z;
          i += 2;
          found = true;
        }
      }
      if (!found) {
        if (auto z = find_element(body.substr(i, 1))) {
          atom.element = *z;
          i += 1;
          found = true;
        }
      }
    }
    if (!found)
      throw bad("unknown element in bracket atom");

    if (i < body.size() && body[i] == '@') {
      if (i + 1 < body.size() && body[i + 1] == '@') {
        atom.chirality = Chirality::kClockwise;
        i += 2;
      } else {
        atom.chirality = Chirality::kAnticlockwise;
        i += 1;
      }
      if (i < body.size() && std::isupper(static_cast<unsigned char>(body[i]))
          && body[i] != 'H')
        throw bad("extended chirality classes are not supported");
    }

    int hcount = 0;
    if (i < body.size() && body[i] == 'H') {
      ++i;
      hcount = read_number().value_or(1);
    }
    atom.explicit_h = hcount;

    if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
      const char sign = body[i++];
      int magnitude = 1;
      if (auto n = read_number()) {
        magnitude = *n;
      } else {
        while (i < body.size() && body[i] == sign) {
          ++magnitude;
          ++i;
        }
      }
      if (magnitude > 15)
        throw bad("charge out of range");
      atom.formal_charge = sign == '+' ? magnitude : -magnitude;
    }

    if (i < body.size() && body[i] == ':') {
      ++i;
      auto map = read_number();
      if (!map)
        throw bad("atom map needs digits");
      if (*map > 0)
        atom.atom_map = *map;
    }

    if (i != body.size())
      throw bad("trailing characters in bracket atom");
    pos_ = close + 1;
    return atom;
  }

  void demote_acyclic_aromatic_bonds() {
    bool any = false;
    for (const Bond &b: graph_.bonds())
      any = any || b.order == BondOrder::kAromatic;
    if (!any)
      return;
    const std::vector<bool> cyclic = cyclic_bonds(graph_);
    for (int e = 0; e < graph_.num_bonds(); ++e) {
      if (graph_.bond(e).order == BondOrder::kAromatic && !cyclic[e])
        graph_.set_bond_order(e, BondOrder::kSingle);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph graph_;
  int prev_ = -1;
  std::optional<PendingBond> pending_;
  std::vector<std::pair<int, std::size_t>> branches_;
  std::map<int, OpenRing> rings_;
};

}  // namespace

MolGraph parse_smiles(std::string_view text) {
  return Parser(text).run();
}

std::optional<MolGraph> try_parse_smiles(std::string_view text) {
  try {
    return parse_smiles(text);
  } catch (const ParseError &) {
    return std::nullopt;
  }
}

}  // namespace chemlm
