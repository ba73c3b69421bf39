#pragma once

#include <map>
#include <string>
#include <vector>

#include "obspinn/algebra/symbol.hpp"
#include "obspinn/error.hpp"

namespace obspinn {

/// Block elimination order on jet variables. Blocks are listed from greatest
/// to smallest and each block is ordered lexicographically in the listed
/// order, so the whole order is lex on the concatenated variable list.
/// Parameters are not ring variables; they live in the coefficient field.
class MonomialOrder {
 public:
  MonomialOrder() = default;
  explicit MonomialOrder(std::vector<std::vector<Symbol>> blocks) : blocks_(std::move(blocks)) {
    for (std::size_t b = 0; b < blocks_.size(); ++b)
      for (Symbol s : blocks_[b]) {
        if (s.is_param()) throw RingMismatch("parameters cannot be ring variables");
        if (!rank_.emplace(s, static_cast<int>(vars_.size())).second)
          throw RingMismatch("variable listed twice in monomial order");
        vars_.push_back(s);
        block_of_.push_back(b);
      }
  }

  /// Plain lex order on the given variables (single block).
  static MonomialOrder lex(std::vector<Symbol> vars) { return MonomialOrder({std::move(vars)}); }

  const std::vector<std::vector<Symbol>>& blocks() const { return blocks_; }
  std::size_t size() const { return vars_.size(); }
  Symbol variable(std::size_t rank) const { return vars_[rank]; }
  std::size_t block_of_rank(std::size_t rank) const { return block_of_[rank]; }

  bool contains(Symbol s) const { return rank_.count(s) != 0; }
  int rank(Symbol s) const {
    auto it = rank_.find(s);
    if (it == rank_.end()) throw RingMismatch("symbol " + default_symbol_name(s) + " is not a ring variable");
    return it->second;
  }
  std::size_t block_of(Symbol s) const { return block_of_[static_cast<std::size_t>(rank(s))]; }

  friend bool operator==(const MonomialOrder& a, const MonomialOrder& b) { return a.blocks_ == b.blocks_; }

 private:
  std::vector<std::vector<Symbol>> blocks_;
  std::vector<Symbol> vars_;
  std::vector<std::size_t> block_of_;
  std::map<Symbol, int> rank_;
};

}  // namespace obspinn
