#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>

namespace obspinn {

enum class SymbolKind : std::uint8_t { param = 0, state = 1, output = 2, input = 3 };

/// A ring indeterminate: a model parameter or the `order`-th time derivative
/// (jet) of a state, output or input.
struct Symbol {
  SymbolKind kind = SymbolKind::param;
  std::uint16_t index = 0;
  std::uint16_t order = 0;

  static constexpr Symbol param(int i) {
    return {SymbolKind::param, static_cast<std::uint16_t>(i), 0};
  }
  static constexpr Symbol state(int i, int order = 0) {
    return {SymbolKind::state, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(order)};
  }
  static constexpr Symbol output(int i, int order = 0) {
    return {SymbolKind::output, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(order)};
  }
  static constexpr Symbol input(int i, int order = 0) {
    return {SymbolKind::input, static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(order)};
  }

  constexpr bool is_param() const { return kind == SymbolKind::param; }
  constexpr bool is_jet() const { return kind != SymbolKind::param; }

  /// Next jet; parameters are constant and have no successor.
  constexpr Symbol prolonged() const {
    return {kind, index, static_cast<std::uint16_t>(order + 1)};
  }

  friend constexpr auto operator<=>(const Symbol&, const Symbol&) = default;
};

/// Maps symbols to display names.
using SymbolNamer = std::function<std::string(Symbol)>;

/// Fallback namer: theta1, x1, d1x1, y1, d2y1, u1 ...
inline std::string default_symbol_name(Symbol s) {
  std::string base;
  switch (s.kind) {
    case SymbolKind::param: return "theta" + std::to_string(s.index + 1);
    case SymbolKind::state: base = "x"; break;
    case SymbolKind::output: base = "y"; break;
    case SymbolKind::input: base = "u"; break;
  }
  base += std::to_string(s.index + 1);
  if (s.order == 0) return base;
  return "d" + std::to_string(s.order) + base;
}

}  // namespace obspinn
