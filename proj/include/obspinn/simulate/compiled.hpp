#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "obspinn/model/model.hpp"

namespace obspinn {

/// A JetPoly flattened for repeated numeric evaluation. Every symbol is mapped
/// to a slot of a caller-supplied value array.
class CompiledPoly {
 public:
  CompiledPoly() = default;

  CompiledPoly(const JetPoly& p, const std::function<std::size_t(Symbol)>& slot_of) {
    for (const auto& [m, c] : p.terms()) {
      Term t;
      t.coefficient = c.get_d();
      t.begin = factors_.size();
      for (const auto& [s, e] : m.factors()) factors_.push_back({slot_of(s), e});
      t.end = factors_.size();
      terms_.push_back(t);
    }
  }

  std::size_t num_terms() const { return terms_.size(); }

  template <class T>
  T evaluate(const T* v) const {
    T sum{};
    for (const auto& t : terms_) {
      T term = T(t.coefficient);
      for (std::size_t k = t.begin; k < t.end; ++k)
        for (unsigned e = 0; e < factors_[k].exponent; ++e) term = term * v[factors_[k].slot];
      sum = sum + term;
    }
    return sum;
  }

  double operator()(const double* v) const { return evaluate(v); }

  /// Adds scale * d(p)/d(v_j) to grad[j] for every slot j and returns p(v).
  double accumulate_gradient(const double* v, double scale, double* grad) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
      double term = t.coefficient;
      for (std::size_t k = t.begin; k < t.end; ++k) term *= std::pow(v[factors_[k].slot], factors_[k].exponent);
      sum += term;
      for (std::size_t k = t.begin; k < t.end; ++k) {
        const auto [slot, e] = factors_[k];
        double d = t.coefficient * e * std::pow(v[slot], e - 1);
        for (std::size_t j = t.begin; j < t.end; ++j)
          if (j != k) d *= std::pow(v[factors_[j].slot], factors_[j].exponent);
        grad[slot] += scale * d;
      }
    }
    return sum;
  }

 private:
  struct Term {
    double coefficient = 0.0;
    std::size_t begin = 0, end = 0;
  };
  struct Factor {
    std::size_t slot;
    unsigned exponent;
  };
  std::vector<Term> terms_;
  std::vector<Factor> factors_;
};

/// Slot layout [x_1..x_N, θ_1..θ_n, u_1..u_L] used for the right-hand side
/// and measurement maps of a model.
struct SystemLayout {
  std::size_t N = 0, n = 0, L = 0;

  explicit SystemLayout(const ModelSpec& m) : N(m.num_states()), n(m.num_params()), L(m.num_inputs()) {}

  std::size_t size() const { return N + n + L; }
  std::size_t state(std::size_t i) const { return i; }
  std::size_t param(std::size_t k) const { return N + k; }
  std::size_t input(std::size_t l) const { return N + n + l; }

  std::size_t operator()(Symbol s) const {
    if (s.kind == SymbolKind::param) return param(s.index);
    if (s.order != 0) throw InvalidModel("derivative jets cannot be evaluated pointwise");
    if (s.kind == SymbolKind::state) return state(s.index);
    if (s.kind == SymbolKind::input) return input(s.index);
    throw InvalidModel("output symbols cannot be evaluated pointwise");
  }
};

/// Right-hand side f and measurement map g of a model, compiled.
struct CompiledSystem {
  SystemLayout layout;
  std::vector<CompiledPoly> f;
  std::vector<CompiledPoly> g;

  explicit CompiledSystem(const ModelSpec& m) : layout(m) {
    const std::function<std::size_t(Symbol)> slot = [this](Symbol s) { return layout(s); };
    for (const auto& p : m.dynamics) f.emplace_back(p, slot);
    for (const auto& p : m.measurements) g.emplace_back(p, slot);
  }

  /// Packs states, parameters and inputs into one value array.
  std::vector<double> pack(const double* x, const std::vector<double>& theta, const std::vector<double>& u) const {
    std::vector<double> v(layout.size());
    std::copy(x, x + layout.N, v.begin());
    std::copy(theta.begin(), theta.end(), v.begin() + static_cast<std::ptrdiff_t>(layout.N));
    std::copy(u.begin(), u.end(), v.begin() + static_cast<std::ptrdiff_t>(layout.N + layout.n));
    return v;
  }
};

}  // namespace obspinn
