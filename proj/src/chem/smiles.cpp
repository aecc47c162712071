#include "molpool/chem.hpp"

#include <cctype>
#include <map>
#include <set>

namespace molpool::chem {

const char* bond_order_name(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return "single";
    case BondOrder::Double: return "double";
    case BondOrder::Triple: return "triple";
    case BondOrder::Aromatic: return "aromatic";
  }
  return "?";
}

SmilesError::SmilesError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " (at position " + std::to_string(position) +
                         ")"),
      position_(position) {}

namespace {

struct PendingBond {
  BondOrder order = BondOrder::Single;
  bool present = false;
  std::size_t position = 0;
};

struct RingOpen {
  int atom;
  PendingBond bond;
  std::size_t position;
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Molecule run() {
    if (s_.empty()) throw SmilesError("empty SMILES", 0);
    while (pos_ < s_.size()) step();
    if (pending_.present)
      throw SmilesError("dangling bond symbol", pending_.position);
    if (!branch_stack_.empty())
      throw SmilesError("unbalanced parentheses: unclosed '('",
                        branch_stack_.back().second);
    if (!open_rings_.empty())
      throw SmilesError(
          "unmatched ring closure " + std::to_string(open_rings_.begin()->first),
          open_rings_.begin()->second.position);
    for (auto& a : mol_.atoms) a.degree = 0;
    for (const Bond& b : mol_.bonds) {
      ++mol_.atoms[b.i].degree;
      ++mol_.atoms[b.j].degree;
    }
    return std::move(mol_);
  }

 private:
  void step() {
    const char c = s_[pos_];
    switch (c) {
      case '(':
        if (prev_ < 0)
          throw SmilesError("branch opened before any atom", pos_);
        branch_stack_.emplace_back(prev_, pos_);
        ++pos_;
        return;
      case ')':
        if (branch_stack_.empty())
          throw SmilesError("unbalanced parentheses: stray ')'", pos_);
        if (pending_.present)
          throw SmilesError("bond symbol before ')'", pending_.position);
        prev_ = branch_stack_.back().first;
        branch_stack_.pop_back();
        ++pos_;
        return;
      case '-': set_pending(BondOrder::Single); return;
      case '=': set_pending(BondOrder::Double); return;
      case '#': set_pending(BondOrder::Triple); return;
      case ':': set_pending(BondOrder::Aromatic); return;
      // stereo bond marks carry no weight here; they degrade to single
      case '/':
      case '\\': set_pending(BondOrder::Single); return;
      case '.':
        throw SmilesError("multi-fragment SMILES (dot) not supported", pos_);
      case '%': ring_closure_percent(); return;
      case '[': bracket_atom(); return;
      default:
        if (std::isdigit(static_cast<unsigned char>(c))) {
          ring_closure(c - '0', pos_);
          ++pos_;
          return;
        }
        organic_atom();
        return;
    }
  }

  void set_pending(BondOrder order) {
    if (pending_.present)
      throw SmilesError("two bond symbols in a row", pos_);
    if (prev_ < 0) throw SmilesError("bond symbol before any atom", pos_);
    pending_ = {order, true, pos_};
    ++pos_;
  }

  void ring_closure_percent() {
    const std::size_t at = pos_;
    if (pos_ + 2 >= s_.size() ||
        !std::isdigit(static_cast<unsigned char>(s_[pos_ + 1])) ||
        !std::isdigit(static_cast<unsigned char>(s_[pos_ + 2])))
      throw SmilesError("'%' must be followed by two digits", at);
    const int num = (s_[pos_ + 1] - '0') * 10 + (s_[pos_ + 2] - '0');
    pos_ += 3;
    ring_closure(num, at);
  }

  void ring_closure(int num, std::size_t at) {
    if (prev_ < 0) throw SmilesError("ring closure before any atom", at);
    auto it = open_rings_.find(num);
    if (it == open_rings_.end()) {
      open_rings_[num] = {prev_, pending_, at};
      pending_ = {};
      return;
    }
    RingOpen open = it->second;
    open_rings_.erase(it);
    if (open.atom == prev_)
      throw SmilesError("ring closure bonds an atom to itself", at);
    PendingBond chosen;
    if (pending_.present && open.bond.present &&
        pending_.order != open.bond.order)
      throw SmilesError("conflicting bond orders on ring closure " +
                            std::to_string(num),
                        at);
    chosen = pending_.present ? pending_ : open.bond;
    add_bond(open.atom, prev_, chosen, at);
    pending_ = {};
  }

  void bracket_atom() {
    const std::size_t start = pos_;
    ++pos_;  // '['
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
      throw SmilesError("isotope labels not supported", pos_);
    if (pos_ >= s_.size())
      throw SmilesError("unterminated bracket atom", start);

    std::string symbol;
    bool aromatic = false;
    char c = s_[pos_];
    if (std::isupper(static_cast<unsigned char>(c))) {
      symbol += c;
      ++pos_;
      if (pos_ < s_.size() && std::islower(static_cast<unsigned char>(s_[pos_])) &&
          s_[pos_] != 'b' && is_symbol_tail(symbol[0], s_[pos_])) {
        symbol += s_[pos_];
        ++pos_;
      }
    } else if (std::islower(static_cast<unsigned char>(c))) {
      // aromatic bracket atoms: b c n o p s plus two-letter se / as
      if (pos_ + 1 < s_.size() &&
          ((c == 's' && s_[pos_ + 1] == 'e') ||
           (c == 'a' && s_[pos_ + 1] == 's'))) {
        symbol = c == 's' ? "Se" : "As";
        pos_ += 2;
      } else if (c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' ||
                 c == 's') {
        symbol = std::string(1, std::toupper(c));
        ++pos_;
      } else {
        throw SmilesError(std::string("unknown aromatic symbol '") + c + "'",
                          pos_);
      }
      aromatic = true;
    } else {
      throw SmilesError("expected element symbol in bracket atom", pos_);
    }
    if (symbol == "H")
      throw SmilesError("explicit hydrogen atoms are not materialized",
                        start + 1);

    // remainder: chirality marks, implicit H count, charge — parsed, unused
    while (pos_ < s_.size() && s_[pos_] != ']') {
      c = s_[pos_];
      if (c == '@') {
        ++pos_;
      } else if (c == 'H') {
        ++pos_;
        while (pos_ < s_.size() &&
               std::isdigit(static_cast<unsigned char>(s_[pos_])))
          ++pos_;
      } else if (c == '+' || c == '-') {
        const char sign = c;
        ++pos_;
        while (pos_ < s_.size() && (s_[pos_] == sign ||
               std::isdigit(static_cast<unsigned char>(s_[pos_]))))
          ++pos_;
      } else {
        throw SmilesError(std::string("unexpected character '") + c +
                              "' in bracket atom",
                          pos_);
      }
    }
    if (pos_ >= s_.size())
      throw SmilesError("unterminated bracket atom", start);
    ++pos_;  // ']'
    emit_atom(symbol, aromatic, start);
  }

  // Two-letter symbols inside brackets are accepted generously; the second
  // letter must at least form a plausible element (no digits, handled above).
  static bool is_symbol_tail(char, char) { return true; }

  void organic_atom() {
    const std::size_t at = pos_;
    const char c = s_[pos_];
    if (c == 'C' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'l') {
      pos_ += 2;
      emit_atom("Cl", false, at);
      return;
    }
    if (c == 'B' && pos_ + 1 < s_.size() && s_[pos_ + 1] == 'r') {
      pos_ += 2;
      emit_atom("Br", false, at);
      return;
    }
    switch (c) {
      case 'B': case 'C': case 'N': case 'O': case 'P': case 'S':
      case 'F': case 'I':
        ++pos_;
        emit_atom(std::string(1, c), false, at);
        return;
      case 'b': case 'c': case 'n': case 'o': case 'p': case 's':
        ++pos_;
        emit_atom(std::string(1, std::toupper(c)), true, at);
        return;
      default:
        throw SmilesError(std::string("unknown symbol '") + c + "'", at);
    }
  }

  void emit_atom(const std::string& symbol, bool aromatic, std::size_t at) {
    const int idx = static_cast<int>(mol_.atoms.size());
    mol_.atoms.push_back({symbol, aromatic, 0});
    if (prev_ >= 0) add_bond(prev_, idx, pending_, at);
    pending_ = {};
    prev_ = idx;
  }

  void add_bond(int a, int b, const PendingBond& pending, std::size_t at) {
    BondOrder order;
    if (pending.present)
      order = pending.order;
    else if (mol_.atoms[a].aromatic && mol_.atoms[b].aromatic)
      order = BondOrder::Aromatic;
    else
      order = BondOrder::Single;
    const int i = std::min(a, b), j = std::max(a, b);
    if (!seen_bonds_.insert({i, j}).second)
      throw SmilesError("duplicate bond between atoms " + std::to_string(i) +
                            " and " + std::to_string(j),
                        at);
    mol_.bonds.push_back({i, j, order});
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  Molecule mol_;
  int prev_ = -1;
  PendingBond pending_;
  std::vector<std::pair<int, std::size_t>> branch_stack_;
  std::map<int, RingOpen> open_rings_;
  std::set<std::pair<int, int>> seen_bonds_;
};

}  // namespace

Molecule parse_smiles(const std::string& smiles) {
  return Parser(smiles).run();
}

}  // namespace molpool::chem
