#include "bpdq/quantize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bpdq {

Vector quantize(const Vector& v, const QuantizerSpec& spec) {
  if (!(spec.alpha > 0.0)) throw std::invalid_argument("quantize: alpha must be > 0");
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw std::invalid_argument("quantize: non-finite input");
    out[i] = spec.alpha * std::floor(v[i] / spec.alpha) + spec.alpha / 2.0;
  }
  return out;
}

double zeta_p(double p, Index m, double alpha) {
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("zeta_p: requires finite p >= 1 (use epsilon_p for p = inf)");
  if (m < 1) throw std::invalid_argument("zeta_p: m must be >= 1");
  const double md = static_cast<double>(m);
  return std::pow(alpha / 2.0, p) * md / (p + 1.0);
}

NoiseBound epsilon_p(double p, Index m, double alpha, double kappa) {
  if (!(p >= 2.0)) throw std::invalid_argument("epsilon_p: requires p >= 2");
  if (m < 1) throw std::invalid_argument("epsilon_p: m must be >= 1");
  if (kappa < 0.0) throw std::invalid_argument("epsilon_p: kappa must be >= 0");
  NoiseBound b;
  b.p = p;
  b.kappa = kappa;
  if (std::isinf(p)) {
    b.epsilon = alpha / 2.0;
    b.zeta_p = std::numeric_limits<double>::quiet_NaN();
    b.tail_prob = 0.0;  // |xi_i| <= alpha/2 always
    return b;
  }
  const double md = static_cast<double>(m);
  b.epsilon = alpha / (2.0 * std::pow(p + 1.0, 1.0 / p)) *
              std::pow(md + kappa * (p + 1.0) * std::sqrt(md), 1.0 / p);
  b.zeta_p = zeta_p(p, m, alpha);
  b.tail_prob = std::exp(-2.0 * kappa * kappa);
  return b;
}

double epsilon_2_variance(Index m, double alpha, double kappa) {
  if (m < 1) throw std::invalid_argument("epsilon_2_variance: m must be >= 1");
  const double md = static_cast<double>(m);
  return std::sqrt(alpha * alpha * md / 12.0 +
                   kappa * alpha * alpha * std::sqrt(md) / (6.0 * std::sqrt(5.0)));
}

}  // namespace bpdq
