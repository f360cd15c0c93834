// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "bpdq/experiments.hpp"
#include "bpdq/prox.hpp"
#include "bpdq/quantize.hpp"
#include "bpdq/rng.hpp"
#include "bpdq/solver.hpp"
#include "bpdq/theory.hpp"
#include "oracles.hpp"

using namespace bpdq;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---- 1. Theorem-1 constants -------------------------------------------------
Outcome criterion_theorem1() {
  const auto t = theorem1_constants(0.2);
  const bool pass = t.a > 4.18 && t.a < 4.20 && t.b > 8.46 && t.b < 8.50;
  return {pass, "A=" + fmt(t.a) + " B=" + fmt(t.b)};
}

// ---- 2. Quantizer property suite -------------------------------------------
Outcome criterion_quantizer() {
  Rng rng(2024);
  const double alpha = 1.0;
  long bound_violations = 0, lattice_violations = 0;
  for (int i = 0; i < 1000000; ++i) {
    const double v = (rng.uniform() - 0.5) * 1000.0;
    Vector x(1);
    x[0] = v;
    const double q = quantize(x, {alpha})[0];
    if (std::abs(q - v) > alpha / 2.0) ++bound_violations;
    if (std::nearbyint(q - 0.5) != q - 0.5) ++lattice_violations;
  }
  const bool pass = bound_violations == 0 && lattice_violations == 0;
  return {pass, "bound violations=" + std::to_string(bound_violations) +
                    " lattice violations=" + std::to_string(lattice_violations)};
}

// ---- 3. Feasibility of the lp noise radius ----------------------------------
Outcome criterion_feasibility() {
  Rng rng(3033);
  const Index m = 100;
  const double alpha = 1.0, kappa = 2.0;
  std::string detail;
  bool pass = true;
  for (double p : {2.0, 4.0, 10.0}) {
    const double eps = epsilon_p(p, m, alpha, kappa).epsilon;
    int violations = 0;
    for (int trial = 0; trial < 10000; ++trial) {
      double acc = 0.0;
      for (Index i = 0; i < m; ++i)
        acc += std::pow(std::abs((rng.uniform() - 0.5) * alpha), p);
      if (std::pow(acc, 1.0 / p) > eps) ++violations;
    }
    pass = pass && violations <= 2;
    detail += "p=" + fmt(p) + ":" + std::to_string(violations) + " ";
  }
  return {pass, detail + "violations of 10^4 (allow <= 2)"};
}

// ---- 4. lp-ball projection --------------------------------------------------
Outcome criterion_projection() {
  Rng rng(4044);
  const double ps[] = {3.0, 4.0, 7.0, 10.0};
  double worst_res = 0.0, worst_norm = 0.0;
  long worst_iters = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const Index m = 2 + static_cast<Index>(rng.below(511));
    const double p = ps[rep % 4];
    Vector y(m);
    for (Index i = 0; i < m; ++i) y[i] = rng.gaussian();
    y *= (1.0 + 4.0 * rng.uniform()) / lp_norm(y, p);
    NewtonState info;
    const Vector u = project_ball(y, p, 1e-9, 50, &info);
    worst_res = std::max(worst_res, info.kkt_residual);
    worst_norm = std::max(worst_norm, std::abs(lp_norm(u, p) - 1.0));
    worst_iters = std::max<long>(worst_iters, info.iteration);
  }
  double worst_oracle = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const Index m = 3 + static_cast<Index>(rng.below(60));
    const double p = ps[rep % 4];
    Vector y(m);
    for (Index i = 0; i < m; ++i) y[i] = rng.gaussian();
    y *= (1.0 + 3.0 * rng.uniform()) / lp_norm(y, p);
    const Vector diff = project_ball(y, p) - oracles::project_ball_bisection(y, p);
    worst_oracle = std::max(worst_oracle, diff.cwiseAbs().maxCoeff());
  }
  const bool pass = worst_res < 1e-8 && worst_norm < 1e-9 && worst_iters <= 15 &&
                    worst_oracle <= 1e-6;
  return {pass, "max|F|=" + fmt(worst_res) + " max|norm-1|=" + fmt(worst_norm) +
                    " max iters=" + std::to_string(worst_iters) +
                    " oracle dev=" + fmt(worst_oracle)};
}

// ---- 5. Moment identities ---------------------------------------------------
Outcome criterion_moments() {
  bool pass = true;
  std::string detail;
  {
    Rng rng(5055);
    const Index m = 100;
    const double alpha = 2.0;
    for (double p : {1.0, 2.0, 3.0, 4.0, 10.0}) {
      double sum = 0.0, sum_sq = 0.0;
      const int draws = 1000000;
      for (int i = 0; i < draws; ++i) {
        const double t = std::pow(std::abs((rng.uniform() - 0.5) * alpha), p);
        sum += t;
        sum_sq += t * t;
      }
      const double mean = sum / draws;
      const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
      const double dev = std::abs(m * mean - zeta_p(p, m, alpha)) / (m * se);
      pass = pass && dev <= 3.0;
      detail += "z" + fmt(p) + "=" + fmt(dev) + "SE ";
    }
  }
  {
    Rng rng(5056);
    for (double p : {2.0, 3.0}) {
      for (Index m : {64, 100, 1024}) {
        const int draws = 20000;
        double sum = 0.0, sum_sq = 0.0;
        for (int d = 0; d < draws; ++d) {
          double acc = 0.0;
          for (Index i = 0; i < m; ++i) acc += std::pow(std::abs(rng.gaussian()), p);
          const double norm = std::pow(acc, 1.0 / p);
          sum += norm;
          sum_sq += norm * norm;
        }
        const double mean = sum / draws;
        const double se = std::sqrt((sum_sq / draws - mean * mean) / draws);
        const auto b = mu_p2_bounds(p, m);
        pass = pass && mean >= b.lower - 3.0 * se && mean <= b.upper + 3.0 * se;
      }
    }
  }
  return {pass, detail + "+ mu sandwich on {2,3}x{64,100,1024}"};
}

// ---- 6. Geometry identities -------------------------------------------------
Outcome criterion_geometry() {
  Rng rng(6066);
  const double ps[] = {2.0, 3.0, 4.0, 10.0};
  long violations = 0;
  double worst_rel = 0.0;
  for (int rep = 0; rep < 100000; ++rep) {
    const Index m = 2 + static_cast<Index>(rng.below(31));
    const double p = ps[rng.below(4)];
    Vector u(m), v(m);
    for (Index i = 0; i < m; ++i) {
      u[i] = rng.gaussian();
      v[i] = rng.gaussian();
    }
    const Vector j = duality_map(u, p);
    const double norm = lp_norm(u, p);
    const double dev1 = std::abs(j.dot(u) - norm * norm) / (norm * norm);
    const double dev2 = std::abs(lp_norm(j, p / (p - 1.0)) - norm) / norm;
    const double lhs = std::pow(lp_norm(u + v, p), 2.0);
    const double rhs =
        norm * norm + 2.0 * j.dot(v) + (p - 1.0) * std::pow(lp_norm(v, p), 2.0);
    worst_rel = std::max({worst_rel, dev1, dev2});
    if (dev1 > 1e-10 || dev2 > 1e-10) ++violations;
    if (lhs > rhs + 1e-10 * (1.0 + std::abs(rhs))) ++violations;
  }
  return {violations == 0,
          "violations=" + std::to_string(violations) + " worst identity dev=" + fmt(worst_rel)};
}

// ---- 7. Basis Pursuit limit -------------------------------------------------
Outcome criterion_basis_pursuit() {
  int hits = 0;
  double min_snr = kInf;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Vector x = gen_sparse_signal(128, 4, derive_seed(seed, {0}));
    const auto op = make_sgr(64, 128, derive_seed(seed, {1}));
    DecoderConfig cfg;
    cfg.p = 2.0;
    cfg.epsilon = 0.0;
    const auto res = decode_bpdq(op, op.apply(x), cfg);
    const double err = (x - res.x_hat).norm();
    const double snr =
        err == 0.0 ? kInf : 20.0 * std::log10(x.norm() / err);
    min_snr = std::min(min_snr, snr);
    if (snr > 100.0) ++hits;
  }
  return {hits >= 9, std::to_string(hits) + "/10 seeds above 100 dB (min " +
                         fmt(min_snr) + " dB)"};
}

// ---- 8/9/12. Oversampling sweep, histograms, determinism --------------------
struct SweepOutputs {
  ExperimentResult result;
  std::string cells_csv, hist_csv, raw_csv;
};

SweepOutputs run_sweep(std::uint64_t seed) {
  ExperimentSpec spec;
  spec.n = 1024;
  spec.k = 16;
  spec.m_over_k = {40.0};
  spec.p_list = {2.0, 4.0, 10.0};
  spec.trials = 25;
  spec.alpha_rule = {AlphaRule::Type::FractionOfMax, 40.0};
  spec.kappa = 2.0;
  spec.seed = seed;
  SweepOutputs out;
  out.result = run_experiment_1d(spec);
  out.cells_csv = cells_to_csv(out.result, false);
  out.hist_csv = histograms_to_csv(out.result, false);
  out.raw_csv = raw_to_csv(out.result, false);
  return out;
}

Outcome criterion_oversampling(const SweepOutputs& sweep) {
  const auto& cells = sweep.result.cells;  // p = 2, 4, 10
  if (cells.size() != 3) return {false, "unexpected cell layout"};
  for (const auto& c : cells)
    if (c.failed > 0) return {false, "failed decodes in the sweep"};

  const auto& snr2 = cells[0].snr_values;
  const auto& snr10 = cells[2].snr_values;
  const std::size_t n = snr2.size();
  double mean_diff = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_diff += snr10[i] - snr2[i];
  mean_diff /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = snr10[i] - snr2[i] - mean_diff;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);
  const double t_stat = mean_diff / std::sqrt(var / static_cast<double>(n));
  const double t_crit = 1.7109;  // one-sided 5%, 24 dof

  const bool qc_increasing = cells[0].mean_qc_fraction < cells[1].mean_qc_fraction &&
                             cells[1].mean_qc_fraction < cells[2].mean_qc_fraction;
  const bool pass = mean_diff > 0.0 && t_stat > t_crit && qc_increasing;
  return {pass, "mean SNR gain (p=10 vs 2)=" + fmt(mean_diff) + " dB, t=" + fmt(t_stat) +
                    " (crit 1.7109), QC " + fmt(cells[0].mean_qc_fraction) + " < " +
                    fmt(cells[1].mean_qc_fraction) + " < " + fmt(cells[2].mean_qc_fraction)};
}

Outcome criterion_histograms(const SweepOutputs& sweep) {
  const auto& cells = sweep.result.cells;
  if (cells.size() != 3) return {false, "unexpected cell layout"};
  const double f2 = cells[0].frac_in_half;
  const double f10 = cells[2].frac_in_half;
  return {f10 > f2, "residual mass in [-1/2,1/2]: p=2 " + fmt(f2) + ", p=10 " + fmt(f10)};
}

Outcome criterion_determinism(const SweepOutputs& first) {
  const SweepOutputs second = run_sweep(814ULL);
  const bool pass = first.cells_csv == second.cells_csv &&
                    first.hist_csv == second.hist_csv && first.raw_csv == second.raw_csv;
  return {pass, pass ? "two full sweeps produced byte-identical CSV outputs"
                     : "sweep outputs differ between identically-seeded runs"};
}

// ---- 10. TV experiment ------------------------------------------------------
Outcome criterion_tv() {
  const Index side = 64, n = side * side;
  // tight-frame identity of the measurement operator
  const auto probe_omega = sample_fourier_omega(n, n / 16, 4242, 2);
  const auto probe = make_partial_fourier(n, probe_omega, 4242, 2);
  Rng rng(10101);
  Vector v(probe.rows());
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.gaussian();
  const double tight_dev = (probe.apply(probe.adjoint(v)) - v).cwiseAbs().maxCoeff();
  if (tight_dev > 1e-12) return {false, "tight-frame identity off by " + fmt(tight_dev)};

  ExperimentSpec spec;
  spec.side = side;
  spec.rho = 1.0 / 8.0;
  spec.trials = 5;
  spec.seed = 11;
  spec.p_list = {2.0, 10.0};
  spec.alpha_rule = {AlphaRule::Type::Fixed, 50.0};
  spec.decoder.gamma = 50.0;
  const auto result = run_experiment_tv(spec);
  for (const auto& c : result.cells)
    if (c.failed > 0) return {false, "failed TV decodes"};
  const double gain = result.cells[1].mean_improvement_db;
  return {gain > 0.0, "mean SNR improvement of p=10 over p=2: " + fmt(gain) +
                          " dB, tight-frame dev " + fmt(tight_dev)};
}

// ---- 11. Solver contracts ---------------------------------------------------
Outcome criterion_solver_contracts() {
  const std::uint64_t seed = 42;
  const Vector x = gen_sparse_signal(128, 4, derive_seed(seed, {0}));
  const auto op = make_sgr(64, 128, derive_seed(seed, {1}));
  const Vector y = op.apply(x);
  const double alpha = y.cwiseAbs().maxCoeff() / 40.0;
  const Vector y_q = quantize(y, {alpha});

  bool pass = true;
  std::string detail;
  std::vector<Vector> solutions;
  for (double gamma : {0.5, 1.0, 2.0}) {
    DecoderConfig cfg;
    cfg.p = 2.0;
    cfg.epsilon = epsilon_p(2, 64, alpha, 2.0).epsilon;
    cfg.gamma = gamma;
    cfg.outer_iters = 6000;
    cfg.inner_tol = 1e-8;
    cfg.inner_cap = 7000;
    cfg.early_exit_tol = 1e-9;
    const auto res = decode_bpdq(op, y_q, cfg);
    solutions.push_back(res.x_hat);
    if (res.residual_norm_p > cfg.epsilon * (1.0 + 1e-5)) {
      pass = false;
      detail += "feasibility violated at gamma=" + fmt(gamma) + " ";
    }
    if (lp_norm(y_q - y, 2.0) <= cfg.epsilon &&
        res.x_hat.lpNorm<1>() > 1.001 * x.lpNorm<1>()) {
      pass = false;
      detail += "l1 minimality violated at gamma=" + fmt(gamma) + " ";
    }
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < solutions.size(); ++i)
    worst = std::max(worst,
                     (solutions[i] - solutions[0]).norm() / solutions[0].norm());
  if (worst > 1e-4) {
    pass = false;
    detail += "gamma solutions differ by " + fmt(worst) + " ";
  }
  return {pass, detail + "max gamma-solution distance " + fmt(worst)};
}

}  // namespace

int main() {
  SweepOutputs sweep;

  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"theorem-1 constants at delta=0.2", criterion_theorem1},
      {"quantizer bound and lattice membership (1e6 draws)", criterion_quantizer},
      {"lp noise radius feasibility (1e4 draws, p in {2,4,10})", criterion_feasibility},
      {"lp-ball projection (1e4 instances + bisection oracle)", criterion_projection},
      {"moment identities (zeta MC, mu sandwich)", criterion_moments},
      {"duality-map identities and 2-smoothness (1e5 samples)", criterion_geometry},
      {"basis pursuit exact recovery (10 seeds)", criterion_basis_pursuit},
      {"oversampling trend at m/K=40 (25 trials)",
       [&] {
         sweep = run_sweep(814ULL);
         return criterion_oversampling(sweep);
       }},
      {"residual histogram concentration (p=10 vs p=2)",
       [&] { return criterion_histograms(sweep); }},
      {"TV experiment trend and tight-frame identity", criterion_tv},
      {"solver contracts (feasibility, minimality, gamma invariance)",
       criterion_solver_contracts},
      {"determinism: byte-identical sweep outputs", [&] { return criterion_determinism(sweep); }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double dt =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%2zu] %s  %s — %s (%.1fs)\n", i + 1, outcome.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), outcome.detail.c_str(), dt);
    std::fflush(stdout);
    if (!outcome.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criteria FAILED\n", failures);
    return 1;
  }
  std::printf("all %zu criteria passed\n", criteria.size());
  return 0;
}
