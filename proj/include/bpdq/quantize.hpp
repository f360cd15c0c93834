#pragma once

#include "bpdq/linear_operator.hpp"

namespace bpdq {

/// Uniform midpoint quantizer of bin width alpha:
/// Q(v)_i = alpha * floor(v_i / alpha) + alpha / 2.
struct QuantizerSpec {
  double alpha = 1.0;
};

/// Statistical bound on the lp norm of uniform quantization noise, used as
/// the decoder fidelity radius.
struct NoiseBound {
  double p = 2.0;            // moment; may be +inf
  double kappa = 2.0;        // tail parameter
  double epsilon = 0.0;      // fidelity radius
  double zeta_p = 0.0;       // E ||xi||_p^p (NaN for p = inf)
  double tail_prob = 0.0;    // bound on P[||xi||_p > epsilon]
};

/// Component-wise midpoint quantization. Exact bin edges quantize upward
/// (floor semantics): Q(1.0) = 1.5 for alpha = 1.
Vector quantize(const Vector& v, const QuantizerSpec& spec);

/// E ||xi||_p^p = alpha^p * m / (2^p (p+1)) for xi uniform on
/// [-alpha/2, alpha/2]^m. Finite p only.
double zeta_p(double p, Index m, double alpha);

/// Fidelity radius for the lp fidelity constraint:
///   finite p:  alpha / (2 (p+1)^{1/p}) * (m + kappa (p+1) sqrt(m))^{1/p},
///   infeasible with probability at most exp(-2 kappa^2);
///   p = inf:   alpha / 2 exactly (never infeasible).
NoiseBound epsilon_p(double p, Index m, double alpha, double kappa);

/// Variance-route radius for the l2 constraint:
/// sqrt(alpha^2 m / 12 + kappa alpha^2 sqrt(m) / (6 sqrt 5)).
double epsilon_2_variance(Index m, double alpha, double kappa);

}  // namespace bpdq
