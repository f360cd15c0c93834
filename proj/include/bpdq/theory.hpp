#pragma once

#include <cstdint>
#include <optional>

#include "bpdq/linear_operator.hpp"

namespace bpdq {

/// p-th root of E|g|^p for standard normal g:
/// nu_p = (2^{p/2} pi^{-1/2} Gamma((p+1)/2))^{1/p}, evaluated via lgamma.
double nu_p(double p);

/// Non-asymptotic sandwich for mu_{p,2} = E||xi||_p of a standard Gaussian
/// m-vector: upper = nu_p m^{1/p}, lower = upper (1 + 2^{p+1}/m)^{1/p - 1}.
struct MuBounds {
  double lower = 0.0;
  double upper = 0.0;
};
MuBounds mu_p2_bounds(double p, Index m);

/// Cross-correlation constant controlling disjoint-support interactions
/// under the duality map; minimum of two branches, with pbar = p - 2:
///   sqrt((d_s + d_ss)(d_sp + d_ss + pbar (1 + d_sp)))
///   sqrt((d_ss + pbar (1+d_ss)/2)(d_ss + pbar (2 + d_sp + d_ss)/2))
/// Reduces to d_ss at p = 2 for monotone radii.
double c_p(double p, double delta_s, double delta_sp, double delta_ss);

/// Restricted-isometry profile of an operator at sparsity K.
struct RipProfile {
  Index sparsity = 0;             // K
  double delta_k = 0.0;           // radius at order K
  double delta_2k = 0.0;          // radius at order 2K
  double delta_3k = 0.0;          // radius at order 3K
  double mu_p2 = 0.0;             // normalization
  double p = 2.0;
  enum class Source { Assumed, MonteCarloEstimate } source = Source::Assumed;
};

/// Instance-optimality constants of the lp decoder:
/// A_p = 2 (1 + C_p - d_2K) / (1 - d_2K - C_p),
/// B_p = 4 sqrt(1 + d_2K) / (1 - d_2K - C_p), with C_p at orders (2K, K).
/// valid is false (constants +inf) when 1 - d_2K - C_p <= 0.
struct OptimalityConstants {
  double a_p = 0.0;
  double b_p = 0.0;
  double c_p = 0.0;
  bool valid = false;
};
OptimalityConstants theorem2_constants(double p, const RipProfile& profile);

/// l2 baseline constants: A = 2 (1 + (sqrt2 - 1) d) / (1 - (sqrt2 + 1) d),
/// B = 4 sqrt(1 + d) / (1 - (sqrt2 + 1) d); requires 0 < d < sqrt2 - 1.
struct BaselineConstants {
  double a = 0.0;
  double b = 0.0;
};
BaselineConstants theorem1_constants(double delta_2k);

/// Smallest m with Theta_p(m) >= c delta^-2 (K log[e (N/K)(1 + 12/delta)]
/// + log(2/eta)), where Theta_p(m) = m^{2/p} for finite p and log m for
/// p = inf; finite p additionally requires m >= (p-1) 2^{p+1}.
struct MeasurementBound {
  double rhs = 0.0;
  std::uint64_t m = 0;
  bool astronomical = false;  // p = inf overflowed the integer range
};
MeasurementBound theta_bound(double p, Index sparsity, Index dim, double delta,
                             double eta, double c = 1.0);

/// Checks the quantization noise-error bound: lhs = epsilon_p / mu_lower
/// against rhs = 2.17 alpha / sqrt(p+1). Requires m >= (p-1) 2^{p+1} and
/// m > ((p+1) kappa / p)^2.
struct NoiseErrorCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};
NoiseErrorCheck noise_error_bound_check(double p, Index m, double alpha, double kappa);

/// Monte-Carlo lower estimate of the RIP_{p,2} radius at sparsity K:
/// delta_hat = max(max r^2 - 1, 1 - min r^2) over trials of
/// r = ||Phi u||_p / mu_hat for random unit K-sparse u, with
/// mu_hat = nu_p m^{1/p} (finite p; Monte-Carlo for p = inf) unless
/// overridden. Trials use derived seeds and parallelize deterministically.
struct RipEstimate {
  double delta_hat = 0.0;
  double mu_used = 0.0;
  double r_min = 0.0;
  double r_max = 0.0;
  Index trials = 0;
};
RipEstimate estimate_rip_radius(const LinearOperator& op, Index sparsity, double p,
                                Index trials, std::uint64_t seed,
                                std::optional<double> normalization = std::nullopt);

/// Build a RipProfile from Monte-Carlo radius estimates at orders K, 2K, 3K.
RipProfile estimate_rip_profile(const LinearOperator& op, Index sparsity, double p,
                                Index trials, std::uint64_t seed);

/// e0(K) = K^{-1/2} ||x - x_K||_1 with x_K the best K-term approximation
/// (K largest magnitudes, ties broken by lower index).
double compressibility_error(const Vector& x, Index sparsity);

}  // namespace bpdq
