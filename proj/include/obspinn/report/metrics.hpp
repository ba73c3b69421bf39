#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "obspinn/error.hpp"

namespace obspinn {

namespace detail {

// Every double is a dyadic rational, so sums and products below are exact
// and the final rounding is the only one.
inline mpq_class exact_of(double v) {
  if (!std::isfinite(v)) throw InvalidModel("metric input is not finite");
  return mpq_class(v);
}

}  // namespace detail

/// Relative squared error: sum (pred - truth)^2 / sum (truth - mean)^2.
/// Batch form: the mean is formed first.
inline double rse(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size()) throw InvalidModel("prediction and truth lengths differ");
  if (truth.size() < 2) throw InvalidModel("RSE needs at least two points");
  mpq_class mean = 0;
  for (double t : truth) mean += detail::exact_of(t);
  mean /= static_cast<unsigned long>(truth.size());
  mpq_class num = 0, den = 0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const mpq_class t = detail::exact_of(truth[k]);
    const mpq_class e = detail::exact_of(pred[k]) - t;
    num += e * e;
    den += (t - mean) * (t - mean);
  }
  if (den == 0) throw ConstantTruth("truth series is constant");
  return mpq_class(num / den).get_d();
}

/// Streaming RSE from running power sums; the denominator is
/// sum t^2 - (sum t)^2 / n.
class RseAccumulator {
 public:
  void add(double pred, double truth) {
    const mpq_class t = detail::exact_of(truth);
    const mpq_class e = detail::exact_of(pred) - t;
    sq_err_ += e * e;
    sum_ += t;
    sum_sq_ += t * t;
    ++n_;
  }
  std::size_t count() const { return n_; }
  double value() const {
    if (n_ < 2) throw InvalidModel("RSE needs at least two points");
    const mpq_class den = sum_sq_ - sum_ * sum_ / static_cast<unsigned long>(n_);
    if (den == 0) throw ConstantTruth("truth series is constant");
    return mpq_class(sq_err_ / den).get_d();
  }

 private:
  mpq_class sq_err_ = 0, sum_ = 0, sum_sq_ = 0;
  std::size_t n_ = 0;
};

/// Relative absolute error |truth - estimate| / |truth|.
inline double rae(double estimate, double truth) {
  if (truth == 0.0) throw ZeroTruth("true parameter is zero");
  const mpq_class t = detail::exact_of(truth);
  return mpq_class(abs(t - detail::exact_of(estimate)) / abs(t)).get_d();
}

/// Same quantity as |1 - estimate / truth|.
inline double rae_from_ratio(double estimate, double truth) {
  if (truth == 0.0) throw ZeroTruth("true parameter is zero");
  return mpq_class(abs(1 - detail::exact_of(estimate) / detail::exact_of(truth))).get_d();
}

}  // namespace obspinn
