#pragma once

#include <string>
#include <vector>

#include "obspinn/neural/gradient.hpp"
#include "obspinn/observability/analysis.hpp"
#include "obspinn/observability/reconstruction.hpp"
#include "obspinn/scenarios/dataset.hpp"
#include "obspinn/simulate/compiled.hpp"

namespace obspinn {

struct LossWeights {
  double eq = 1.0, init = 1.0, data = 1.0;
};

/// Individually logged loss terms. `aug` is the augmented-data part of the
/// data term.
struct LossParts {
  double eq = 0.0, init = 0.0, data = 0.0, aug = 0.0, total = 0.0;
};

/// Pseudo-measurements of unmeasured observable states on one split.
struct Augmentation {
  std::vector<std::size_t> states;  // full-model state indices
  std::vector<std::string> names;
  std::vector<std::vector<double>> values;  // [a][d]
  std::vector<std::vector<char>> valid;     // false where the denominator vanished
  std::size_t excluded = 0;

  bool empty() const { return states.empty(); }
};

/// Degree-one reconstruction formulas for every observable unmeasured state
/// of the scenario's analysis system.
inline std::vector<ReconstructionExpr> reconstruction_formulas(const Scenario& s) {
  AnalysisOptions opt;
  opt.outputs = {s.analysis_output};
  const auto result = analyze_all(s.analysis, opt);
  std::vector<ReconstructionExpr> out;
  for (const auto& st : result.states) {
    if (!st.observable() || st.certificate->degree != 1) continue;
    auto e = reconstruction(st);
    e.state = *s.model.state_index(st.name);
    out.push_back(std::move(e));
  }
  return out;
}

inline Augmentation augment(const std::vector<ReconstructionExpr>& formulas, const SplitData& split,
                            const std::vector<double>& theta) {
  Augmentation a;
  for (const auto& f : formulas) {
    a.states.push_back(f.state);
    a.names.push_back(f.name);
    std::vector<double> values(split.size(), 0.0);
    std::vector<char> valid(split.size(), 1);
    for (std::size_t d = 0; d < split.size(); ++d) {
      try {
        values[d] = evaluate_reconstruction(f, split.jets[d], theta);
        if (!std::isfinite(values[d])) throw DenominatorNearZero("non-finite reconstruction");
      } catch (const DenominatorNearZero&) {
        valid[d] = 0;
        values[d] = 0.0;
        ++a.excluded;
      }
    }
    a.values.push_back(std::move(values));
    a.valid.push_back(std::move(valid));
  }
  return a;
}

/// Weighted PINN loss on one split:
///   λ_eq L_eq + λ_init L_init + λ_data (L_data + L_aug).
/// The network is evaluated at t = 0 followed by the split's time points,
/// which also serve as collocation points.
class PinnLoss {
 public:
  PinnLoss(const Scenario& s, const SplitData& split, LossWeights w, const Augmentation* aug = nullptr)
      : sys_(s.model), split_(split), w_(w), aug_(aug), x0_(s.x0), init_known_(s.init_known) {
    if (split.size() == 0) throw EmptySplit("split has no time points");
    times_.push_back(0.0);
    times_.insert(times_.end(), split.t.begin(), split.t.end());
    for (double t : split.t) inputs_.push_back(s.input.values(t));
    if (s.model.num_inputs() == 0)
      for (auto& u : inputs_) u.clear();
  }

  const std::vector<double>& times() const { return times_; }

  Var operator()(Tape& tape, const NetworkLeaves& v, LossParts* parts = nullptr) const {
    const auto& L = sys_.layout;
    const std::size_t D = split_.size();
    std::vector<Var> slots(L.size());
    for (std::size_t k = 0; k < L.n; ++k) slots[L.param(k)] = v.theta[k];

    std::vector<Var> eq_terms, data_terms;
    std::vector<std::vector<Var>> per_output(sys_.g.size());
    for (std::size_t d = 0; d < D; ++d) {
      for (std::size_t i = 0; i < L.N; ++i) slots[L.state(i)] = v.X(i, d + 1);
      for (std::size_t l = 0; l < L.L; ++l) slots[L.input(l)] = Var(inputs_[d][l]);
      Var residuals = 0.0;
      for (std::size_t i = 0; i < L.N; ++i) residuals = residuals + square(v.DX(i, d + 1) - sys_.f[i].evaluate(slots.data()));
      eq_terms.push_back(residuals);
      for (std::size_t m = 0; m < sys_.g.size(); ++m)
        per_output[m].push_back(square(sys_.g[m].evaluate(slots.data()) - split_.measurement(d, m)));
    }
    const Var eq = tape.mean(eq_terms);

    Var init = 0.0;
    for (auto i : init_known_) init = init + square(v.X(i, 0) - x0_[i]);

    Var data = 0.0;
    for (const auto& terms : per_output) data = data + tape.mean(terms);

    Var aug = 0.0;
    if (aug_)
      for (std::size_t a = 0; a < aug_->states.size(); ++a) {
        std::vector<Var> terms;
        for (std::size_t d = 0; d < D; ++d)
          if (aug_->valid[a][d]) terms.push_back(square(v.X(aug_->states[a], d + 1) - aug_->values[a][d]));
        if (!terms.empty()) aug = aug + tape.mean(terms);
      }

    const Var total = w_.eq * eq + w_.init * init + w_.data * (data + aug);
    if (parts) *parts = {eq.value, init.value, data.value, aug.value, total.value};
    return total;
  }

  LossParts parts(const Mlp& net, const std::vector<double>& theta) const {
    LossParts p;
    loss_value(net, times_, theta, [&](Tape& t, const NetworkLeaves& v) { return (*this)(t, v, &p); });
    return p;
  }

 private:
  CompiledSystem sys_;
  const SplitData& split_;
  LossWeights w_;
  const Augmentation* aug_;
  std::vector<double> x0_;
  std::vector<std::size_t> init_known_;
  std::vector<double> times_;
  std::vector<std::vector<double>> inputs_;
};

}  // namespace obspinn
