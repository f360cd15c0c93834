#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bpdq/linear_operator.hpp"
#include "bpdq/solver.hpp"
#include "json.hpp"

namespace bpdq {

struct AlphaRule {
  enum class Type { FractionOfMax, Fixed };
  Type type = Type::FractionOfMax;
  double value = 40.0;  // divisor for FractionOfMax, bin width for Fixed
};

struct ExperimentSpec {
  // 1-D sparse sweep
  Index n = 1024;
  Index k = 16;
  std::vector<double> m_over_k = {40.0};
  std::vector<double> p_list = {2, 3, 4, 6, 8, 10};
  Index trials = 25;
  AlphaRule alpha_rule{AlphaRule::Type::FractionOfMax, 40.0};
  double kappa = 2.0;
  std::uint64_t seed = 1;
  // Per-decode overrides. The harness default raises the inner cap well above
  // the decoder's: occasional operator draws sit near the lower spectral edge
  // and need a few thousand cold-start dual iterations on the first call.
  DecoderConfig decoder = [] {
    DecoderConfig d;
    d.inner_cap = 10000;
    return d;
  }();

  // TV / partial-Fourier image experiment
  Index side = 64;
  double rho = 1.0 / 8.0;
  Index n_ellipses = 10;
  double max_levels = 6.0;  // intensity calibration: max |Phi x| / alpha

  int threads = 0;  // 0 = hardware concurrency
  Index max_failed_trials = 0;
};

/// Residual histogram layout: 41 bins covering [-1.025, 1.025].
inline constexpr int kHistogramBins = 41;
inline constexpr double kHistogramLo = -1.025;
inline constexpr double kHistogramHi = 1.025;

struct TrialReport {
  double snr_db = 0.0;  // +inf sentinel when x_hat == x exactly
  double qc_fraction = 0.0;
  std::vector<long> residual_histogram;  // kHistogramBins counts
  double frac_in_half = 0.0;             // normalized residuals inside [-1/2, 1/2]
  long outer_iterations = 0;
  long inner_iterations = 0;
  double wall_time_s = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
  double alpha = 0.0;
  double epsilon = 0.0;
  double objective = 0.0;
  double residual_norm_p = 0.0;
};

struct CellSummary {
  double m_over_k = 0.0;
  Index m = 0;
  double rho = 0.0;  // TV experiment only
  double p = 2.0;
  Index trials = 0;
  Index failed = 0;
  double mean_snr_db = 0.0;
  double std_snr_db = 0.0;  // unbiased (n-1)
  double mean_qc_fraction = 0.0;
  double frac_in_half = 0.0;  // pooled over trials
  double mean_improvement_db = 0.0;  // vs p = 2, paired; TV experiment
  double mean_outer_iters = 0.0;
  double mean_inner_per_call = 0.0;
  std::vector<long> pooled_histogram;
  std::vector<double> snr_values;  // per-trial, for paired statistics
};

struct ExperimentResult {
  std::vector<CellSummary> cells;
  std::vector<TrialReport> raw;      // cell-major, trial-minor, p-innermost
  std::vector<double> raw_m_over_k;  // row labels parallel to raw
  std::vector<double> raw_p;
  std::vector<Index> raw_trial;
  nlohmann::json manifest;
};

/// K-sparse signal: support uniform without replacement, values iid standard
/// normal (drawn in ascending support order); exact zeros are redrawn.
Vector gen_sparse_signal(Index n, Index k, std::uint64_t seed);

/// Binary image of randomly placed non-overlapping ellipses (disjointness
/// enforced by a bounding-circle test); values in {0, intensity}.
Matrix gen_angiogram(Index side, Index n_ellipses, std::uint64_t seed,
                     double intensity = 1.0);

/// Reconstruction metrics: SNR(x_hat; x) = 20 log10(||x|| / ||x - x_hat||),
/// QC fraction with strict |.| < alpha/2, and the normalized residual
/// histogram of (Phi x_hat - y_q) / alpha.
TrialReport metrics(const Vector& x, const Vector& x_hat, const LinearOperator& op,
                    const Vector& y_q, double alpha);

/// 1-D sparse sweep: per (m/K, trial) draws signal and SGR operator, shares
/// the quantized measurements across every p (paired comparisons), decodes,
/// and aggregates per (m/K, p) cell.
ExperimentResult run_experiment_1d(const ExperimentSpec& spec);

/// TV experiment: per trial draws an angiogram and a 2-D partial-Fourier
/// operator at sampling fraction rho, quantizes with the fixed bin width,
/// and decodes with the TV regularizer for every p.
ExperimentResult run_experiment_tv(const ExperimentSpec& spec);

std::string cells_to_csv(const ExperimentResult& result, bool tv);
std::string histograms_to_csv(const ExperimentResult& result, bool tv);
std::string raw_to_csv(const ExperimentResult& result, bool tv);

ExperimentSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

}  // namespace bpdq
