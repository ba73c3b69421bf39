#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obspinn/error.hpp"

namespace obspinn {

class Tape;

/// Scalar on a reverse-mode tape. A Var without a tape is a constant.
struct Var {
  Tape* tape = nullptr;
  std::int32_t id = -1;
  double value = 0.0;

  Var() = default;
  Var(double c) : value(c) {}  // NOLINT: constants convert implicitly
  Var(Tape* t, std::int32_t i, double v) : tape(t), id(i), value(v) {}

  bool is_constant() const { return tape == nullptr; }
};

/// Wengert list of scalar operations. Each node stores the local partial
/// derivative towards each of its operands, so the reverse sweep is a single
/// pass of multiply-adds.
class Tape {
 public:
  Var variable(double v) { return push(v, std::vector<Edge>{}); }

  std::size_t size() const { return nodes_.size(); }
  void clear() {
    nodes_.clear();
    edges_.clear();
  }

  Var add(Var a, Var b) { return binary(a.value + b.value, a, 1.0, b, 1.0); }
  Var sub(Var a, Var b) { return binary(a.value - b.value, a, 1.0, b, -1.0); }
  Var mul(Var a, Var b) { return binary(a.value * b.value, a, b.value, b, a.value); }
  Var square(Var a) { return unary(a.value * a.value, a, 2.0 * a.value); }
  Var tanh(Var a) {
    const double t = std::tanh(a.value);
    return unary(t, a, 1.0 - t * t);
  }
  Var pow(Var a, int e) {
    if (e == 0) return Var(1.0);
    return unary(std::pow(a.value, e), a, e * std::pow(a.value, e - 1));
  }
  Var sum(std::span<const Var> xs) {
    double s = 0.0;
    std::vector<Edge> in;
    for (const auto& x : xs) {
      s += x.value;
      if (!x.is_constant()) in.push_back({x.id, 1.0});
    }
    return in.empty() ? Var(s) : push(s, in);
  }
  Var mean(std::span<const Var> xs) {
    if (xs.empty()) throw EmptySplit("mean of an empty sequence");
    const double w = 1.0 / static_cast<double>(xs.size());
    double s = 0.0;
    std::vector<Edge> in;
    for (const auto& x : xs) {
      s += x.value;
      if (!x.is_constant()) in.push_back({x.id, w});
    }
    return in.empty() ? Var(s * w) : push(s * w, in);
  }

  /// Named primitive; anything outside add, sub, mul, pow, square, tanh,
  /// sum, mean is rejected.
  Var apply(std::string_view op, std::span<const Var> args) {
    auto need = [&](std::size_t k) {
      if (args.size() != k) throw UnsupportedPrimitive(std::string(op) + " with " + std::to_string(args.size()) + " operands");
    };
    if (op == "add") return need(2), add(args[0], args[1]);
    if (op == "sub") return need(2), sub(args[0], args[1]);
    if (op == "mul") return need(2), mul(args[0], args[1]);
    if (op == "square") return need(1), square(args[0]);
    if (op == "tanh") return need(1), tanh(args[0]);
    if (op == "pow") {
      need(2);
      const double e = args[1].value;
      if (!args[1].is_constant() || e != std::floor(e) || std::abs(e) > 64)
        throw UnsupportedPrimitive("pow needs a constant integer exponent");
      return pow(args[0], static_cast<int>(e));
    }
    if (op == "sum") return sum(args);
    if (op == "mean") return mean(args);
    throw UnsupportedPrimitive("unsupported primitive '" + std::string(op) + "'");
  }

  /// d(out)/d(node) for every node on the tape.
  std::vector<double> gradient(Var out) const {
    std::vector<double> adj(nodes_.size(), 0.0);
    if (out.is_constant()) return adj;
    if (out.tape != this) throw InvalidModel("variable belongs to a different tape");
    adj[static_cast<std::size_t>(out.id)] = 1.0;
    for (std::size_t k = static_cast<std::size_t>(out.id) + 1; k-- > 0;) {
      const double a = adj[k];
      if (a == 0.0) continue;
      const auto& n = nodes_[k];
      for (std::size_t e = n.begin; e < n.end; ++e) adj[static_cast<std::size_t>(edges_[e].from)] += a * edges_[e].partial;
    }
    return adj;
  }

 private:
  struct Edge {
    std::int32_t from;
    double partial;
  };
  struct Node {
    std::size_t begin, end;
  };

  Var push(double v, Edge a) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({edges_.size(), edges_.size() + 1});
    edges_.push_back(a);
    return {this, id, v};
  }
  Var push(double v, Edge a, Edge b) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({edges_.size(), edges_.size() + 2});
    edges_.push_back(a);
    edges_.push_back(b);
    return {this, id, v};
  }
  Var push(double v, const std::vector<Edge>& in) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({edges_.size(), edges_.size() + in.size()});
    edges_.insert(edges_.end(), in.begin(), in.end());
    return {this, id, v};
  }
  Var unary(double v, Var a, double da) {
    if (a.is_constant()) return Var(v);
    return push(v, Edge{a.id, da});
  }
  Var binary(double v, Var a, double da, Var b, double db) {
    if (a.is_constant() && b.is_constant()) return Var(v);
    if (a.is_constant()) return push(v, Edge{b.id, db});
    if (b.is_constant()) return push(v, Edge{a.id, da});
    return push(v, Edge{a.id, da}, Edge{b.id, db});
  }

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
};

inline Tape* tape_of(const Var& a, const Var& b) { return a.tape ? a.tape : b.tape; }

inline Var operator+(Var a, Var b) {
  if (auto* t = tape_of(a, b)) return t->add(a, b);
  return Var(a.value + b.value);
}
inline Var operator-(Var a, Var b) {
  if (auto* t = tape_of(a, b)) return t->sub(a, b);
  return Var(a.value - b.value);
}
inline Var operator-(Var a) { return Var(0.0) - a; }
inline Var operator*(Var a, Var b) {
  if (auto* t = tape_of(a, b)) return t->mul(a, b);
  return Var(a.value * b.value);
}
inline Var square(Var a) { return a.tape ? a.tape->square(a) : Var(a.value * a.value); }
inline Var tanh(Var a) { return a.tape ? a.tape->tanh(a) : Var(std::tanh(a.value)); }

}  // namespace obspinn
