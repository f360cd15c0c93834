#include "bpdq/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bpdq/prox.hpp"
#include "bpdq/rng.hpp"

namespace bpdq {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;
}  // namespace

double nu_p(double p) {
  if (!(p >= 1.0) || std::isinf(p))
    throw std::invalid_argument("nu_p: requires finite p >= 1");
  const double log_moment =
      0.5 * p * std::log(2.0) - 0.5 * std::log(kPi) + std::lgamma((p + 1.0) / 2.0);
  return std::exp(log_moment / p);
}

MuBounds mu_p2_bounds(double p, Index m) {
  if (!(p >= 1.0)) throw std::invalid_argument("mu_p2_bounds: requires p >= 1");
  if (std::isinf(p))
    throw std::invalid_argument(
        "mu_p2_bounds: p = inf has no computable constant (rho sqrt(log m) only)");
  if (m < 1) throw std::invalid_argument("mu_p2_bounds: m must be >= 1");
  const double md = static_cast<double>(m);
  MuBounds b;
  b.upper = nu_p(p) * std::pow(md, 1.0 / p);
  b.lower = b.upper * std::pow(1.0 + std::pow(2.0, p + 1.0) / md, 1.0 / p - 1.0);
  return b;
}

double c_p(double p, double delta_s, double delta_sp, double delta_ss) {
  if (!(p >= 2.0) || std::isinf(p))
    throw std::invalid_argument("c_p: requires finite p >= 2");
  for (double d : {delta_s, delta_sp, delta_ss})
    if (!(d >= 0.0 && d < 1.0)) throw std::invalid_argument("c_p: deltas must lie in [0, 1)");
  const double pbar = p - 2.0;
  const double branch1 =
      std::sqrt((delta_s + delta_ss) * (delta_sp + delta_ss + pbar * (1.0 + delta_sp)));
  const double branch2 =
      std::sqrt((delta_ss + pbar * (1.0 + delta_ss) / 2.0) *
                (delta_ss + pbar * (2.0 + delta_sp + delta_ss) / 2.0));
  return std::min(branch1, branch2);
}

OptimalityConstants theorem2_constants(double p, const RipProfile& profile) {
  OptimalityConstants out;
  out.c_p = c_p(p, profile.delta_2k, profile.delta_k, profile.delta_3k);
  const double denom = 1.0 - profile.delta_2k - out.c_p;
  if (denom <= 0.0) {
    out.a_p = kInf;
    out.b_p = kInf;
    out.valid = false;
    return out;
  }
  out.a_p = 2.0 * (1.0 + out.c_p - profile.delta_2k) / denom;
  out.b_p = 4.0 * std::sqrt(1.0 + profile.delta_2k) / denom;
  out.valid = true;
  return out;
}

BaselineConstants theorem1_constants(double delta_2k) {
  const double sqrt2 = std::sqrt(2.0);
  if (!(delta_2k > 0.0 && delta_2k < sqrt2 - 1.0))
    throw std::invalid_argument("theorem1_constants: requires 0 < delta_2K < sqrt(2) - 1");
  const double denom = 1.0 - (sqrt2 + 1.0) * delta_2k;
  return {2.0 * (1.0 + (sqrt2 - 1.0) * delta_2k) / denom,
          4.0 * std::sqrt(1.0 + delta_2k) / denom};
}

MeasurementBound theta_bound(double p, Index sparsity, Index dim, double delta,
                             double eta, double c) {
  if (!(p >= 2.0)) throw std::invalid_argument("theta_bound: requires p >= 2");
  if (sparsity < 1 || dim < sparsity)
    throw std::invalid_argument("theta_bound: requires 1 <= K <= N");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("theta_bound: delta in (0,1)");
  if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("theta_bound: eta in (0,1)");
  if (!(c > 0.0)) throw std::invalid_argument("theta_bound: c must be > 0");

  const double k = static_cast<double>(sparsity);
  const double n = static_cast<double>(dim);
  MeasurementBound out;
  out.rhs = c / (delta * delta) *
            (k * std::log(std::exp(1.0) * (n / k) * (1.0 + 12.0 / delta)) +
             std::log(2.0 / eta));

  if (std::isinf(p)) {
    // Theta_inf(m) = log m; m = ceil(exp(rhs)), which overflows quickly.
    if (out.rhs > 43.0) {  // exp(43) > 2^62
      out.astronomical = true;
      out.m = std::numeric_limits<std::uint64_t>::max();
    } else {
      out.m = static_cast<std::uint64_t>(std::ceil(std::exp(out.rhs)));
      out.m = std::max<std::uint64_t>(out.m, 1);
    }
    return out;
  }

  const double m_theta = std::pow(out.rhs, p / 2.0);
  const double m_moment = (p - 1.0) * std::pow(2.0, p + 1.0);
  const double m_req = std::max({m_theta, m_moment, 1.0});
  if (m_req > 9.0e18) {
    out.astronomical = true;
    out.m = std::numeric_limits<std::uint64_t>::max();
  } else {
    out.m = static_cast<std::uint64_t>(std::ceil(m_req));
  }
  return out;
}

NoiseErrorCheck noise_error_bound_check(double p, Index m, double alpha, double kappa) {
  if (!(p >= 2.0) || std::isinf(p))
    throw std::invalid_argument("noise_error_bound_check: requires finite p >= 2");
  const double md = static_cast<double>(m);
  if (!(md >= (p - 1.0) * std::pow(2.0, p + 1.0)))
    throw std::invalid_argument("noise_error_bound_check: requires m >= (p-1) 2^{p+1}");
  const double kr = (p + 1.0) * kappa / p;
  if (!(md > kr * kr))
    throw std::invalid_argument("noise_error_bound_check: requires m > ((p+1) kappa / p)^2");
  const double eps = alpha / (2.0 * std::pow(p + 1.0, 1.0 / p)) *
                     std::pow(md + kappa * (p + 1.0) * std::sqrt(md), 1.0 / p);
  NoiseErrorCheck out;
  out.lhs = eps / mu_p2_bounds(p, m).lower;
  out.rhs = 2.17 * alpha / std::sqrt(p + 1.0);
  out.holds = out.lhs < out.rhs;
  return out;
}

namespace {

// Shared by estimate_rip_radius for the p = inf normalization.
double monte_carlo_mu_inf(Index m, std::uint64_t seed, Index draws) {
  Rng rng(seed);
  double acc = 0.0;
  for (Index t = 0; t < draws; ++t) {
    double mx = 0.0;
    for (Index i = 0; i < m; ++i) mx = std::max(mx, std::abs(rng.gaussian()));
    acc += mx;
  }
  return acc / static_cast<double>(draws);
}

}  // namespace

RipEstimate estimate_rip_radius(const LinearOperator& op, Index sparsity, double p,
                                Index trials, std::uint64_t seed,
                                std::optional<double> normalization) {
  if (trials < 1) throw std::invalid_argument("estimate_rip_radius: trials must be >= 1");
  if (sparsity < 1 || sparsity > op.cols())
    throw std::invalid_argument("estimate_rip_radius: requires 1 <= K <= N");

  double mu;
  if (normalization) {
    mu = *normalization;
  } else if (std::isinf(p)) {
    mu = monte_carlo_mu_inf(op.rows(), derive_seed(seed, {0x6d75ULL}), 2000);
  } else {
    mu = nu_p(p) * std::pow(static_cast<double>(op.rows()), 1.0 / p);
  }

  std::vector<double> ratios(static_cast<std::size_t>(trials));
  const auto run_range = [&](Index begin, Index end) {
    for (Index t = begin; t < end; ++t) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(t)}));
      auto support = rng.sample_without_replacement(static_cast<long>(op.cols()),
                                                    static_cast<long>(sparsity));
      Vector coeffs(sparsity);
      for (Index i = 0; i < sparsity; ++i) coeffs[i] = rng.gaussian();
      coeffs.normalize();
      ratios[static_cast<std::size_t>(t)] =
          lp_norm(op.apply_sparse(support, coeffs), p) / mu;
    }
  };
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const Index n_threads = std::min<Index>(trials, static_cast<Index>(hw));
  if (n_threads <= 1) {
    run_range(0, trials);
  } else {
    std::vector<std::thread> pool;
    const Index chunk = (trials + n_threads - 1) / n_threads;
    for (Index b = 0; b < trials; b += chunk)
      pool.emplace_back(run_range, b, std::min(trials, b + chunk));
    for (auto& th : pool) th.join();
  }

  const auto [mn, mx] = std::minmax_element(ratios.begin(), ratios.end());
  RipEstimate out;
  out.mu_used = mu;
  out.r_min = *mn;
  out.r_max = *mx;
  out.trials = trials;
  out.delta_hat = std::max((*mx) * (*mx) - 1.0, 1.0 - (*mn) * (*mn));
  return out;
}

RipProfile estimate_rip_profile(const LinearOperator& op, Index sparsity, double p,
                                Index trials, std::uint64_t seed) {
  RipProfile profile;
  profile.sparsity = sparsity;
  profile.p = p;
  profile.source = RipProfile::Source::MonteCarloEstimate;
  const RipEstimate e1 = estimate_rip_radius(op, sparsity, p, trials, derive_seed(seed, {1}));
  const RipEstimate e2 =
      estimate_rip_radius(op, 2 * sparsity, p, trials, derive_seed(seed, {2}));
  const RipEstimate e3 =
      estimate_rip_radius(op, 3 * sparsity, p, trials, derive_seed(seed, {3}));
  profile.delta_k = e1.delta_hat;
  // Nested sparse sets make the true radii monotone; enforce it on estimates.
  profile.delta_2k = std::max(e1.delta_hat, e2.delta_hat);
  profile.delta_3k = std::max(profile.delta_2k, e3.delta_hat);
  profile.mu_p2 = e1.mu_used;
  return profile;
}

double compressibility_error(const Vector& x, Index sparsity) {
  if (sparsity < 1 || sparsity > x.size())
    throw std::invalid_argument("compressibility_error: requires 1 <= K <= N");
  std::vector<Index> order(static_cast<std::size_t>(x.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  double tail = 0.0;
  for (Index r = sparsity; r < x.size(); ++r)
    tail += std::abs(x[order[static_cast<std::size_t>(r)]]);
  return tail / std::sqrt(static_cast<double>(sparsity));
}

}  // namespace bpdq
