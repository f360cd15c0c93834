#include "bpdq/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "bpdq/errors.hpp"
#include "bpdq/quantize.hpp"
#include "bpdq/rng.hpp"

namespace bpdq {

namespace {

constexpr double kSnrCapDb = 300.0;

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

double capped(double snr) { return std::min(snr, kSnrCapDb); }

void parallel_for(Index total, int threads, const std::function<void(Index)>& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<Index>(threads, std::max<Index>(total, 1)));
  if (threads <= 1) {
    for (Index i = 0; i < total; ++i) fn(i);
    return;
  }
  std::atomic<Index> counter{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const Index i = counter.fetch_add(1);
        if (i >= total) return;
        fn(i);
      }
    });
  for (auto& th : pool) th.join();
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

Vector gen_sparse_signal(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || k > n) throw std::invalid_argument("gen_sparse_signal: requires 1 <= K <= N");
  Rng rng(seed);
  const auto support = rng.sample_without_replacement(static_cast<long>(n),
                                                      static_cast<long>(k));
  Vector x = Vector::Zero(n);
  for (long idx : support) {
    double g = rng.gaussian();
    while (g == 0.0) g = rng.gaussian();
    x[idx] = g;
  }
  return x;
}

Matrix gen_angiogram(Index side, Index n_ellipses, std::uint64_t seed, double intensity) {
  if (side < 32) throw std::invalid_argument("gen_angiogram: side must be >= 32");
  if (n_ellipses < 1) throw std::invalid_argument("gen_angiogram: need at least one ellipse");

  struct Ellipse {
    double cr, cc, a, b, cos_t, sin_t;
    double radius() const { return std::max(a, b); }
  };

  Rng rng(seed);
  std::vector<Ellipse> placed;
  placed.reserve(static_cast<std::size_t>(n_ellipses));
  const double ax_lo = 3.0, ax_hi = static_cast<double>(side) / 6.0;
  long attempts = 0;
  const long max_attempts = 10000;
  while (static_cast<Index>(placed.size()) < n_ellipses) {
    if (++attempts > max_attempts)
      throw GenerationError("gen_angiogram: could not place all ellipses; retry with a new seed");
    Ellipse e;
    e.cr = rng.uniform() * static_cast<double>(side);
    e.cc = rng.uniform() * static_cast<double>(side);
    e.a = ax_lo + rng.uniform() * (ax_hi - ax_lo);
    e.b = ax_lo + rng.uniform() * (ax_hi - ax_lo);
    const double theta = rng.uniform() * 3.14159265358979323846;
    e.cos_t = std::cos(theta);
    e.sin_t = std::sin(theta);
    bool clear = true;
    for (const auto& other : placed) {
      const double d = std::hypot(e.cr - other.cr, e.cc - other.cc);
      if (d <= e.radius() + other.radius()) {
        clear = false;
        break;
      }
    }
    if (clear) placed.push_back(e);
  }

  Matrix img = Matrix::Zero(side, side);
  for (const auto& e : placed)
    for (Index r = 0; r < side; ++r)
      for (Index c = 0; c < side; ++c) {
        const double u = static_cast<double>(r) - e.cr;
        const double v = static_cast<double>(c) - e.cc;
        const double ur = e.cos_t * u + e.sin_t * v;
        const double vr = -e.sin_t * u + e.cos_t * v;
        if ((ur / e.a) * (ur / e.a) + (vr / e.b) * (vr / e.b) <= 1.0)
          img(r, c) = intensity;
      }
  return img;
}

TrialReport metrics(const Vector& x, const Vector& x_hat, const LinearOperator& op,
                    const Vector& y_q, double alpha) {
  if (x.size() != x_hat.size()) throw std::invalid_argument("metrics: shape mismatch");
  TrialReport rep;
  const double err = (x - x_hat).norm();
  rep.snr_db = err == 0.0 ? std::numeric_limits<double>::infinity()
                          : 20.0 * std::log10(x.norm() / err);
  const Vector remeasured = op.apply(x_hat);
  long consistent = 0;
  rep.residual_histogram.assign(kHistogramBins, 0);
  long inside_half = 0;
  const double bin_width = (kHistogramHi - kHistogramLo) / kHistogramBins;
  for (Index i = 0; i < y_q.size(); ++i) {
    const double r = remeasured[i] - y_q[i];
    if (std::abs(r) < alpha / 2.0) ++consistent;
    const double z = r / alpha;
    if (std::abs(z) <= 0.5) ++inside_half;
    int bin = static_cast<int>(std::floor((z - kHistogramLo) / bin_width));
    bin = std::clamp(bin, 0, kHistogramBins - 1);
    ++rep.residual_histogram[static_cast<std::size_t>(bin)];
  }
  rep.qc_fraction = static_cast<double>(consistent) / static_cast<double>(y_q.size());
  rep.frac_in_half = static_cast<double>(inside_half) / static_cast<double>(y_q.size());
  return rep;
}

namespace {

struct TrialTask {
  Index cell;   // index into m_over_k (or 0 for TV)
  Index trial;
};

void aggregate_cell(CellSummary& cell, const std::vector<const TrialReport*>& reports) {
  std::vector<double> snr, qc, outer, inner_per_call;
  cell.pooled_histogram.assign(kHistogramBins, 0);
  long pooled_inside = 0, pooled_total = 0;
  for (const TrialReport* r : reports) {
    if (r->failed) {
      ++cell.failed;
      continue;
    }
    snr.push_back(capped(r->snr_db));
    qc.push_back(r->qc_fraction);
    outer.push_back(static_cast<double>(r->outer_iterations));
    if (r->outer_iterations > 0)
      inner_per_call.push_back(static_cast<double>(r->inner_iterations) /
                               static_cast<double>(r->outer_iterations + 1));
    long total = 0;
    for (int b = 0; b < kHistogramBins; ++b) {
      cell.pooled_histogram[static_cast<std::size_t>(b)] +=
          r->residual_histogram[static_cast<std::size_t>(b)];
      total += r->residual_histogram[static_cast<std::size_t>(b)];
    }
    pooled_inside += static_cast<long>(std::lround(r->frac_in_half * static_cast<double>(total)));
    pooled_total += total;
  }
  cell.trials = static_cast<Index>(reports.size());
  cell.snr_values = snr;
  cell.mean_snr_db = mean_of(snr);
  cell.std_snr_db = std_of(snr);
  cell.mean_qc_fraction = mean_of(qc);
  cell.frac_in_half = pooled_total > 0
                          ? static_cast<double>(pooled_inside) / static_cast<double>(pooled_total)
                          : 0.0;
  cell.mean_outer_iters = mean_of(outer);
  cell.mean_inner_per_call = mean_of(inner_per_call);
}

}  // namespace

ExperimentResult run_experiment_1d(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("run_experiment_1d: trials must be >= 1");
  for (double p : spec.p_list)
    if (!(p >= 2.0)) throw std::invalid_argument("run_experiment_1d: all p must be >= 2");

  const Index n_cells = static_cast<Index>(spec.m_over_k.size());
  const Index n_p = static_cast<Index>(spec.p_list.size());
  const Index n_tasks = n_cells * spec.trials;

  ExperimentResult result;
  result.raw.assign(static_cast<std::size_t>(n_tasks * n_p), TrialReport{});

  nlohmann::json manifest;
  manifest["tool"] = "bpdq exp1d";
  manifest["rng"] = rng_algorithm_name();
  manifest["config"] = spec_to_json(spec);
  manifest["note"] = "signal and matrix are redrawn per trial; p shares each trial's draw";
  nlohmann::json seeds = nlohmann::json::array();
  for (Index ci = 0; ci < n_cells; ++ci) {
    nlohmann::json cell_seeds = nlohmann::json::array();
    for (Index t = 0; t < spec.trials; ++t)
      cell_seeds.push_back(derive_seed(spec.seed, {static_cast<std::uint64_t>(ci),
                                                   static_cast<std::uint64_t>(t)}));
    seeds.push_back(cell_seeds);
  }
  manifest["trial_seeds"] = seeds;
  result.manifest = manifest;

  parallel_for(n_tasks, spec.threads, [&](Index task) {
    const Index ci = task / spec.trials;
    const Index trial = task % spec.trials;
    const std::uint64_t tseed = derive_seed(
        spec.seed, {static_cast<std::uint64_t>(ci), static_cast<std::uint64_t>(trial)});
    const Index m = static_cast<Index>(std::llround(spec.m_over_k[static_cast<std::size_t>(ci)] *
                                                    static_cast<double>(spec.k)));

    const Vector x = gen_sparse_signal(spec.n, spec.k, derive_seed(tseed, {0}));
    const LinearOperator op = make_sgr(m, spec.n, derive_seed(tseed, {1}));
    const Vector y = op.apply(x);
    const double alpha = spec.alpha_rule.type == AlphaRule::Type::FractionOfMax
                             ? y.cwiseAbs().maxCoeff() / spec.alpha_rule.value
                             : spec.alpha_rule.value;
    const Vector y_q = quantize(y, {alpha});

    for (Index pi = 0; pi < n_p; ++pi) {
      const double p = spec.p_list[static_cast<std::size_t>(pi)];
      TrialReport& rep = result.raw[static_cast<std::size_t>(task * n_p + pi)];
      rep.alpha = alpha;
      rep.epsilon = epsilon_p(p, m, alpha, spec.kappa).epsilon;
      DecoderConfig cfg = spec.decoder;
      cfg.p = p;
      cfg.epsilon = rep.epsilon;
      const auto start = std::chrono::steady_clock::now();
      try {
        const DecodeResult dec = decode_bpdq(op, y_q, cfg);
        TrialReport computed = metrics(x, dec.x_hat, op, y_q, alpha);
        computed.alpha = rep.alpha;
        computed.epsilon = rep.epsilon;
        computed.outer_iterations = dec.outer_iterations_run;
        computed.inner_iterations = dec.inner.total_iterations;
        computed.converged = dec.converged;
        computed.objective = dec.objective;
        computed.residual_norm_p = dec.residual_norm_p;
        rep = computed;
      } catch (const std::exception& e) {
        rep.failed = true;
        rep.error = e.what();
      }
      rep.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  for (Index ci = 0; ci < n_cells; ++ci)
    for (Index pi = 0; pi < n_p; ++pi) {
      CellSummary cell;
      cell.m_over_k = spec.m_over_k[static_cast<std::size_t>(ci)];
      cell.m = static_cast<Index>(std::llround(cell.m_over_k * static_cast<double>(spec.k)));
      cell.p = spec.p_list[static_cast<std::size_t>(pi)];
      std::vector<const TrialReport*> reports;
      for (Index t = 0; t < spec.trials; ++t)
        reports.push_back(&result.raw[static_cast<std::size_t>((ci * spec.trials + t) * n_p + pi)]);
      aggregate_cell(cell, reports);
      result.cells.push_back(std::move(cell));
    }

  result.raw_m_over_k.reserve(static_cast<std::size_t>(n_tasks * n_p));
  result.raw_p.reserve(static_cast<std::size_t>(n_tasks * n_p));
  result.raw_trial.reserve(static_cast<std::size_t>(n_tasks * n_p));
  for (Index task = 0; task < n_tasks; ++task)
    for (Index pi = 0; pi < n_p; ++pi) {
      result.raw_m_over_k.push_back(spec.m_over_k[static_cast<std::size_t>(task / spec.trials)]);
      result.raw_p.push_back(spec.p_list[static_cast<std::size_t>(pi)]);
      result.raw_trial.push_back(task % spec.trials);
    }
  return result;
}

ExperimentResult run_experiment_tv(const ExperimentSpec& spec) {
  if (spec.trials < 1) throw std::invalid_argument("run_experiment_tv: trials must be >= 1");
  if ((spec.side & (spec.side - 1)) != 0 || spec.side < 32)
    throw std::invalid_argument("run_experiment_tv: side must be a power of two >= 32");
  const Index n = spec.side * spec.side;
  const double locations_d = spec.rho * static_cast<double>(n) / 2.0;
  const Index locations = static_cast<Index>(std::llround(locations_d));
  if (std::abs(locations_d - static_cast<double>(locations)) > 1e-9 || locations < 1)
    throw std::invalid_argument("run_experiment_tv: rho * side^2 must be a positive even count");
  if (spec.alpha_rule.type != AlphaRule::Type::Fixed)
    throw std::invalid_argument("run_experiment_tv: requires a fixed bin width");
  const double alpha = spec.alpha_rule.value;

  const Index n_p = static_cast<Index>(spec.p_list.size());
  ExperimentResult result;
  result.raw.assign(static_cast<std::size_t>(spec.trials * n_p), TrialReport{});

  nlohmann::json manifest;
  manifest["tool"] = "bpdq exptv";
  manifest["rng"] = rng_algorithm_name();
  manifest["config"] = spec_to_json(spec);
  manifest["note"] = "image intensity calibrated so max|Phi x| = max_levels * alpha";
  nlohmann::json seeds = nlohmann::json::array();
  for (Index t = 0; t < spec.trials; ++t)
    seeds.push_back(derive_seed(spec.seed, {static_cast<std::uint64_t>(t)}));
  manifest["trial_seeds"] = seeds;
  result.manifest = manifest;

  parallel_for(spec.trials, spec.threads, [&](Index trial) {
    const std::uint64_t tseed = derive_seed(spec.seed, {static_cast<std::uint64_t>(trial)});
    TrialReport base;
    Matrix mask;
    try {
      mask = gen_angiogram(spec.side, spec.n_ellipses, derive_seed(tseed, {0}));
    } catch (const std::exception& e) {
      for (Index pi = 0; pi < n_p; ++pi) {
        TrialReport& rep = result.raw[static_cast<std::size_t>(trial * n_p + pi)];
        rep.failed = true;
        rep.error = e.what();
      }
      return;
    }
    Vector mask_vec(n);
    for (Index r = 0; r < spec.side; ++r)
      for (Index c = 0; c < spec.side; ++c) mask_vec[r * spec.side + c] = mask(r, c);

    const std::uint64_t omega_seed = derive_seed(tseed, {1});
    const auto omega = sample_fourier_omega(n, locations, omega_seed, 2);
    const LinearOperator op = make_partial_fourier(n, omega, omega_seed, 2);

    const Vector y_mask = op.apply(mask_vec);
    const double peak = y_mask.cwiseAbs().maxCoeff();
    const double intensity = peak > 0.0 ? spec.max_levels * alpha / peak : 1.0;
    const Vector x = intensity * mask_vec;
    const Vector y_q = quantize(intensity * y_mask, {alpha});

    for (Index pi = 0; pi < n_p; ++pi) {
      const double p = spec.p_list[static_cast<std::size_t>(pi)];
      TrialReport& rep = result.raw[static_cast<std::size_t>(trial * n_p + pi)];
      rep.alpha = alpha;
      rep.epsilon = epsilon_p(p, op.rows(), alpha, spec.kappa).epsilon;
      DecoderConfig cfg = spec.decoder;
      cfg.p = p;
      cfg.epsilon = rep.epsilon;
      cfg.regularizer = Regularizer::Tv;
      const auto start = std::chrono::steady_clock::now();
      try {
        const DecodeResult dec = decode_tv(op, y_q, cfg);
        TrialReport computed = metrics(x, dec.x_hat, op, y_q, alpha);
        computed.alpha = rep.alpha;
        computed.epsilon = rep.epsilon;
        computed.outer_iterations = dec.outer_iterations_run;
        computed.inner_iterations = dec.inner.total_iterations;
        computed.converged = dec.converged;
        computed.objective = dec.objective;
        computed.residual_norm_p = dec.residual_norm_p;
        rep = computed;
      } catch (const std::exception& e) {
        rep.failed = true;
        rep.error = e.what();
      }
      rep.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  });

  // paired SNR improvement over the p = 2 baseline
  Index p2_index = -1;
  for (Index pi = 0; pi < n_p; ++pi)
    if (spec.p_list[static_cast<std::size_t>(pi)] == 2.0) p2_index = pi;

  for (Index pi = 0; pi < n_p; ++pi) {
    CellSummary cell;
    cell.rho = spec.rho;
    cell.m = 2 * locations;
    cell.p = spec.p_list[static_cast<std::size_t>(pi)];
    std::vector<const TrialReport*> reports;
    for (Index t = 0; t < spec.trials; ++t)
      reports.push_back(&result.raw[static_cast<std::size_t>(t * n_p + pi)]);
    aggregate_cell(cell, reports);
    if (p2_index >= 0) {
      std::vector<double> gains;
      for (Index t = 0; t < spec.trials; ++t) {
        const auto& a = result.raw[static_cast<std::size_t>(t * n_p + pi)];
        const auto& b = result.raw[static_cast<std::size_t>(t * n_p + p2_index)];
        if (!a.failed && !b.failed) gains.push_back(capped(a.snr_db) - capped(b.snr_db));
      }
      cell.mean_improvement_db = mean_of(gains);
    }
    result.cells.push_back(std::move(cell));
  }

  result.raw_m_over_k.assign(static_cast<std::size_t>(spec.trials * n_p), spec.rho);
  for (Index t = 0; t < spec.trials; ++t)
    for (Index pi = 0; pi < n_p; ++pi) {
      result.raw_p.push_back(spec.p_list[static_cast<std::size_t>(pi)]);
      result.raw_trial.push_back(t);
    }
  return result;
}

std::string cells_to_csv(const ExperimentResult& result, bool tv) {
  std::string out;
  out += "# std_snr_db uses the unbiased (n-1) estimator; snr capped at 300 dB\n";
  if (tv)
    out += "rho,m,p,trials,failed,mean_snr_db,std_snr_db,mean_improvement_db,"
           "mean_qc_fraction,frac_residual_in_half\n";
  else
    out += "m_over_k,m,p,trials,failed,mean_snr_db,std_snr_db,mean_qc_fraction,"
           "frac_residual_in_half,mean_outer_iters,mean_inner_per_call\n";
  for (const auto& c : result.cells) {
    if (tv) {
      out += fmt(c.rho) + "," + std::to_string(c.m) + "," + fmt(c.p) + "," +
             std::to_string(c.trials) + "," + std::to_string(c.failed) + "," +
             fmt(c.mean_snr_db) + "," + fmt(c.std_snr_db) + "," +
             fmt(c.mean_improvement_db) + "," + fmt(c.mean_qc_fraction) + "," +
             fmt(c.frac_in_half) + "\n";
    } else {
      out += fmt(c.m_over_k) + "," + std::to_string(c.m) + "," + fmt(c.p) + "," +
             std::to_string(c.trials) + "," + std::to_string(c.failed) + "," +
             fmt(c.mean_snr_db) + "," + fmt(c.std_snr_db) + "," +
             fmt(c.mean_qc_fraction) + "," + fmt(c.frac_in_half) + "," +
             fmt(c.mean_outer_iters) + "," + fmt(c.mean_inner_per_call) + "\n";
    }
  }
  return out;
}

std::string histograms_to_csv(const ExperimentResult& result, bool tv) {
  std::string out = tv ? "rho,p,bin_index,bin_lo,bin_hi,count\n"
                       : "m_over_k,p,bin_index,bin_lo,bin_hi,count\n";
  const double bin_width = (kHistogramHi - kHistogramLo) / kHistogramBins;
  for (const auto& c : result.cells) {
    for (int b = 0; b < kHistogramBins; ++b) {
      const double lo = kHistogramLo + b * bin_width;
      out += fmt(tv ? c.rho : c.m_over_k) + "," + fmt(c.p) + "," + std::to_string(b) + "," +
             fmt(lo) + "," + fmt(lo + bin_width) + "," +
             std::to_string(c.pooled_histogram[static_cast<std::size_t>(b)]) + "\n";
    }
  }
  return out;
}

std::string raw_to_csv(const ExperimentResult& result, bool tv) {
  std::string out = tv ? "rho,p,trial,alpha,epsilon,snr_db,qc_fraction,frac_in_half,"
                         "outer_iterations,inner_iterations,objective,residual_norm_p,"
                         "converged,failed\n"
                       : "m_over_k,p,trial,alpha,epsilon,snr_db,qc_fraction,frac_in_half,"
                         "outer_iterations,inner_iterations,objective,residual_norm_p,"
                         "converged,failed\n";
  for (std::size_t i = 0; i < result.raw.size(); ++i) {
    const auto& r = result.raw[i];
    out += fmt(result.raw_m_over_k[i]) + "," + fmt(result.raw_p[i]) + "," +
           std::to_string(result.raw_trial[i]) + "," + fmt(r.alpha) + "," + fmt(r.epsilon) +
           "," + fmt(capped(r.snr_db)) + "," + fmt(r.qc_fraction) + "," +
           fmt(r.frac_in_half) + "," + std::to_string(r.outer_iterations) + "," +
           std::to_string(r.inner_iterations) + "," + fmt(r.objective) + "," +
           fmt(r.residual_norm_p) + "," + (r.converged ? "1" : "0") + "," +
           (r.failed ? "1" : "0") + "\n";
  }
  return out;
}

ExperimentSpec spec_from_json(const nlohmann::json& j) {
  ExperimentSpec spec;
  spec.n = j.value("N", spec.n);
  spec.k = j.value("K", spec.k);
  if (j.contains("m_over_k")) spec.m_over_k = j.at("m_over_k").get<std::vector<double>>();
  if (j.contains("p_list")) spec.p_list = j.at("p_list").get<std::vector<double>>();
  spec.trials = j.value("trials", spec.trials);
  if (j.contains("alpha_rule")) {
    const auto& a = j.at("alpha_rule");
    const std::string type = a.at("type").get<std::string>();
    if (type == "fraction-of-max")
      spec.alpha_rule = {AlphaRule::Type::FractionOfMax, a.at("divisor").get<double>()};
    else if (type == "fixed")
      spec.alpha_rule = {AlphaRule::Type::Fixed, a.at("value").get<double>()};
    else
      throw std::invalid_argument("alpha_rule.type must be 'fraction-of-max' or 'fixed'");
  }
  spec.kappa = j.value("kappa", spec.kappa);
  spec.seed = j.value("seed", spec.seed);
  spec.side = j.value("side", spec.side);
  spec.rho = j.value("rho", spec.rho);
  spec.n_ellipses = j.value("n_ellipses", spec.n_ellipses);
  spec.max_levels = j.value("max_levels", spec.max_levels);
  spec.threads = j.value("threads", spec.threads);
  spec.max_failed_trials = j.value("max_failed_trials", spec.max_failed_trials);
  if (j.contains("decoder")) {
    const auto& d = j.at("decoder");
    spec.decoder.gamma = d.value("gamma", spec.decoder.gamma);
    spec.decoder.relaxation = d.value("relaxation", spec.decoder.relaxation);
    spec.decoder.outer_iters = d.value("outer_iters", spec.decoder.outer_iters);
    spec.decoder.inner_tol = d.value("inner_tol", spec.decoder.inner_tol);
    spec.decoder.inner_cap = d.value("inner_cap", spec.decoder.inner_cap);
    spec.decoder.early_exit_tol = d.value("early_exit_tol", spec.decoder.early_exit_tol);
    spec.decoder.tv_tol = d.value("tv_tol", spec.decoder.tv_tol);
    spec.decoder.tv_iters = d.value("tv_iters", spec.decoder.tv_iters);
  }
  return spec;
}

nlohmann::json spec_to_json(const ExperimentSpec& spec) {
  nlohmann::json j;
  j["N"] = spec.n;
  j["K"] = spec.k;
  j["m_over_k"] = spec.m_over_k;
  j["p_list"] = spec.p_list;
  j["trials"] = spec.trials;
  j["alpha_rule"] =
      spec.alpha_rule.type == AlphaRule::Type::FractionOfMax
          ? nlohmann::json{{"type", "fraction-of-max"}, {"divisor", spec.alpha_rule.value}}
          : nlohmann::json{{"type", "fixed"}, {"value", spec.alpha_rule.value}};
  j["kappa"] = spec.kappa;
  j["seed"] = spec.seed;
  j["side"] = spec.side;
  j["rho"] = spec.rho;
  j["n_ellipses"] = spec.n_ellipses;
  j["max_levels"] = spec.max_levels;
  j["threads"] = spec.threads;
  j["max_failed_trials"] = spec.max_failed_trials;
  j["decoder"] = {{"gamma", spec.decoder.gamma},
                  {"relaxation", spec.decoder.relaxation},
                  {"outer_iters", spec.decoder.outer_iters},
                  {"inner_tol", spec.decoder.inner_tol},
                  {"inner_cap", spec.decoder.inner_cap},
                  {"early_exit_tol", spec.decoder.early_exit_tol},
                  {"tv_tol", spec.decoder.tv_tol},
                  {"tv_iters", spec.decoder.tv_iters}};
  return j;
}

}  // namespace bpdq
