// Command-line front end: experiment runners, single decodes, noise-bound and
// constants calculators, RIP probes, and data generators. All structured
// output is JSON or CSV.
//
// Exit codes: 0 success, 2 invalid configuration, 3 convergence failure
// budget exceeded.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "bpdq/errors.hpp"
#include "bpdq/experiments.hpp"
#include "bpdq/linear_operator.hpp"
#include "bpdq/quantize.hpp"
#include "bpdq/rng.hpp"
#include "bpdq/solver.hpp"
#include "bpdq/theory.hpp"
#include "json.hpp"

namespace {

using nlohmann::json;

constexpr int kExitInvalidConfig = 2;
constexpr int kExitConvergenceBudget = 3;

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bpdq::Vector read_csv_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<double> values;
  std::string token;
  while (std::getline(in, token)) {
    std::stringstream line(token);
    std::string field;
    while (std::getline(line, field, ',')) {
      if (field.empty()) continue;
      values.push_back(std::stod(field));
    }
  }
  bpdq::Vector v(static_cast<bpdq::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<bpdq::Index>(i)] = values[i];
  return v;
}

std::string vector_to_csv(const bpdq::Vector& v) {
  std::string out;
  char buf[64];
  for (bpdq::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", v[i]);
    out += buf;
  }
  return out;
}

double parse_p(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "INF") return std::numeric_limits<double>::infinity();
  return std::stod(s);
}

int run_experiment_cmd(const std::string& config_path, const std::string& outdir,
                       std::optional<std::uint64_t> seed_override,
                       std::optional<long> trials_override, bool full_scale, bool emit_raw,
                       bool tv) {
  bpdq::ExperimentSpec spec;
  if (!config_path.empty()) spec = bpdq::spec_from_json(json::parse(read_file(config_path)));
  if (!tv && config_path.empty()) {
    spec.m_over_k = {40.0};
    spec.p_list = {2, 3, 4, 6, 8, 10};
  }
  if (tv && config_path.empty()) {
    spec.p_list = {2, 4, 10};
    spec.alpha_rule = {bpdq::AlphaRule::Type::Fixed, 50.0};
    spec.decoder.gamma = 50.0;  // prox scale matched to the bin width
  }
  if (full_scale) {
    if (tv) {
      spec.side = 256;
      spec.trials = 50;
    } else {
      spec.m_over_k = {10, 15, 20, 25, 30, 35, 40};
      spec.trials = 500;
    }
  }
  if (seed_override) spec.seed = *seed_override;
  if (trials_override) spec.trials = *trials_override;

  std::filesystem::create_directories(outdir);
  const bpdq::ExperimentResult result =
      tv ? bpdq::run_experiment_tv(spec) : bpdq::run_experiment_1d(spec);

  write_file(outdir + "/cells.csv", bpdq::cells_to_csv(result, tv));
  write_file(outdir + "/histograms.csv", bpdq::histograms_to_csv(result, tv));
  write_file(outdir + "/manifest.json", result.manifest.dump(2) + "\n");
  if (emit_raw) write_file(outdir + "/trials.csv", bpdq::raw_to_csv(result, tv));

  long failed = 0;
  for (const auto& c : result.cells) failed += c.failed;
  std::cout << "wrote " << outdir << "/cells.csv (" << result.cells.size() << " cells, "
            << failed << " failed decodes)\n";
  if (failed > spec.max_failed_trials) {
    std::cerr << "convergence failure budget exceeded (" << failed << " > "
              << spec.max_failed_trials << ")\n";
    return kExitConvergenceBudget;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Basis Pursuit DeQuantizer toolkit"};
  app.require_subcommand(1);

  // ---- decode ----
  auto* decode = app.add_subcommand("decode", "solve one reconstruction problem");
  std::string matrix_spec, measurements, p_str = "2", regularizer = "l1";
  std::string out_json_path, out_x_path;
  double epsilon = -1.0, gamma = 1.0, kappa = 2.0, alpha = 0.0;
  long iters = 500;
  bool auto_epsilon = false;
  decode->add_option("--matrix-spec", matrix_spec, "operator spec JSON file")->required();
  decode->add_option("--measurements", measurements, "measurement CSV file")->required();
  decode->add_option("--p", p_str, "fidelity moment (>= 2 or 'inf')");
  decode->add_option("--epsilon", epsilon, "fidelity radius (0 = Basis Pursuit)");
  decode->add_flag("--auto-epsilon", auto_epsilon, "set epsilon from the noise bound");
  decode->add_option("--alpha", alpha, "bin width (required with --auto-epsilon)");
  decode->add_option("--kappa", kappa, "tail parameter for --auto-epsilon");
  decode->add_option("--gamma", gamma, "prox scale");
  decode->add_option("--iters", iters, "outer Douglas-Rachford iterations");
  decode->add_option("--regularizer", regularizer, "l1 | tv");
  decode->add_option("--out-json", out_json_path, "write the decode report here");
  decode->add_option("--out-x", out_x_path, "write the reconstruction CSV here");

  // ---- noise-bound ----
  auto* noise = app.add_subcommand("noise-bound", "quantization noise radius");
  std::string nb_p = "2";
  long nb_m = 100;
  double nb_alpha = 1.0, nb_kappa = 2.0;
  noise->add_option("--p", nb_p, "moment (>= 2 or 'inf')");
  noise->add_option("--m", nb_m, "measurement count")->required();
  noise->add_option("--alpha", nb_alpha, "bin width")->required();
  noise->add_option("--kappa", nb_kappa, "tail parameter");

  // ---- constants ----
  auto* constants = app.add_subcommand("constants", "instance-optimality constants");
  std::string c_p_str = "2";
  double delta_k = 0.1, delta_2k = 0.1, delta_3k = 0.1;
  constants->add_option("--p", c_p_str, "moment");
  constants->add_option("--delta-k", delta_k, "RIP radius at order K");
  constants->add_option("--delta-2k", delta_2k, "RIP radius at order 2K");
  constants->add_option("--delta-3k", delta_3k, "RIP radius at order 3K");

  // ---- rip-probe ----
  auto* rip = app.add_subcommand("rip-probe", "Monte-Carlo RIP radius estimate");
  std::string rip_matrix, rip_p = "2";
  long rip_k = 4, rip_trials = 200;
  std::uint64_t rip_seed = 1;
  rip->add_option("--matrix-spec", rip_matrix, "operator spec JSON file")->required();
  rip->add_option("--K", rip_k, "sparsity order");
  rip->add_option("--p", rip_p, "moment");
  rip->add_option("--trials", rip_trials, "Monte-Carlo trials");
  rip->add_option("--seed", rip_seed, "probe seed");

  // ---- theta-bound ----
  auto* theta = app.add_subcommand("theta-bound", "minimal measurement count");
  std::string th_p = "2";
  long th_k = 16, th_n = 1024;
  double th_delta = 0.5, th_eta = 0.5, th_c = 1.0;
  theta->add_option("--p", th_p, "moment");
  theta->add_option("--K", th_k, "sparsity");
  theta->add_option("--N", th_n, "dimension");
  theta->add_option("--delta", th_delta, "target RIP radius");
  theta->add_option("--eta", th_eta, "failure probability");
  theta->add_option("--c", th_c, "unspecified leading constant (results are up to it)");

  // ---- gen ----
  auto* gen = app.add_subcommand("gen", "generate signals, images, or operators");
  std::string gen_what = "signal", gen_out;
  long gen_n = 1024, gen_k = 16, gen_m = 640, gen_side = 64, gen_ellipses = 10,
       gen_locations = 0;
  std::uint64_t gen_seed = 1;
  std::string gen_kind = "dense-gaussian";
  gen->add_option("--what", gen_what, "signal | angiogram | matrix")->required();
  gen->add_option("--out", gen_out, "output file")->required();
  gen->add_option("--N", gen_n, "signal dimension");
  gen->add_option("--K", gen_k, "sparsity");
  gen->add_option("--m", gen_m, "measurement count (dense matrix)");
  gen->add_option("--side", gen_side, "image side (angiogram)");
  gen->add_option("--ellipses", gen_ellipses, "ellipse count (angiogram)");
  gen->add_option("--locations", gen_locations, "retained locations (fourier matrix)");
  gen->add_option("--kind", gen_kind, "dense-gaussian | restricted-fourier");
  gen->add_option("--seed", gen_seed, "seed");

  // ---- exp1d / exptv ----
  auto* exp1d = app.add_subcommand("exp1d", "1-D sparse recovery sweep");
  auto* exptv = app.add_subcommand("exptv", "TV / partial-Fourier image experiment");
  std::string e1_config, e1_out = "exp1d_out", etv_config, etv_out = "exptv_out";
  std::uint64_t e1_seed = 0, etv_seed = 0;
  bool e1_seed_set = false, etv_seed_set = false;
  long e1_trials = 0, etv_trials = 0;
  bool e1_full = false, etv_full = false, e1_raw = false, etv_raw = false;
  exp1d->add_option("--config", e1_config, "experiment spec JSON");
  exp1d->add_option("--out", e1_out, "output directory");
  exp1d->add_option("--seed", e1_seed, "master seed override")->each([&](const std::string&) {
    e1_seed_set = true;
  });
  exp1d->add_option("--trials", e1_trials, "trial count override");
  exp1d->add_flag("--full-scale", e1_full, "full-scale sweep: 500 trials over the m/K grid (slow)");
  exp1d->add_flag("--raw", e1_raw, "also emit per-trial CSV");
  exptv->add_option("--config", etv_config, "experiment spec JSON");
  exptv->add_option("--out", etv_out, "output directory");
  exptv->add_option("--seed", etv_seed, "master seed override")->each([&](const std::string&) {
    etv_seed_set = true;
  });
  exptv->add_option("--trials", etv_trials, "trial count override");
  exptv->add_flag("--full-scale", etv_full, "full-scale run: 256-pixel side, 50 trials (slow)");
  exptv->add_flag("--raw", etv_raw, "also emit per-trial CSV");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*decode) {
      const auto op = bpdq::LinearOperator::from_json(json::parse(read_file(matrix_spec)));
      const bpdq::Vector y_q = read_csv_vector(measurements);
      if (y_q.size() != op.rows())
        throw std::invalid_argument("measurement count does not match the operator");
      bpdq::DecoderConfig cfg;
      cfg.p = parse_p(p_str);
      cfg.gamma = gamma;
      cfg.outer_iters = iters;
      if (auto_epsilon) {
        if (!(alpha > 0.0))
          throw std::invalid_argument("--auto-epsilon requires --alpha > 0");
        cfg.epsilon = bpdq::epsilon_p(cfg.p, op.rows(), alpha, kappa).epsilon;
      } else {
        if (epsilon < 0.0)
          throw std::invalid_argument("either --epsilon or --auto-epsilon is required");
        cfg.epsilon = epsilon;
      }
      bpdq::DecodeResult res;
      if (regularizer == "l1") {
        res = bpdq::decode_bpdq(op, y_q, cfg);
      } else if (regularizer == "tv") {
        res = bpdq::decode_tv(op, y_q, cfg);
      } else {
        throw std::invalid_argument("--regularizer must be l1 or tv");
      }
      json report{{"p", std::isinf(cfg.p) ? json("inf") : json(cfg.p)},
                  {"epsilon", cfg.epsilon},
                  {"gamma", cfg.gamma},
                  {"relaxation", cfg.relaxation},
                  {"outer_iterations", res.outer_iterations_run},
                  {"inner_iterations", res.inner.total_iterations},
                  {"objective", res.objective},
                  {"residual_norm_p", res.residual_norm_p},
                  {"converged", res.converged},
                  {"rng", bpdq::rng_algorithm_name()}};
      const std::string text = report.dump(2) + "\n";
      if (out_json_path.empty())
        std::cout << text;
      else
        write_file(out_json_path, text);
      if (!out_x_path.empty()) write_file(out_x_path, vector_to_csv(res.x_hat));
      return 0;
    }

    if (*noise) {
      const auto b = bpdq::epsilon_p(parse_p(nb_p), nb_m, nb_alpha, nb_kappa);
      json out{{"p", std::isinf(b.p) ? json("inf") : json(b.p)},
               {"m", nb_m},
               {"alpha", nb_alpha},
               {"kappa", b.kappa},
               {"epsilon", b.epsilon},
               {"tail_prob", b.tail_prob}};
      if (!std::isnan(b.zeta_p)) out["zeta_p"] = b.zeta_p;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*constants) {
      const double p = parse_p(c_p_str);
      bpdq::RipProfile profile;
      profile.delta_k = delta_k;
      profile.delta_2k = delta_2k;
      profile.delta_3k = delta_3k;
      profile.p = p;
      const auto t2 = bpdq::theorem2_constants(p, profile);
      json out{{"p", p},
               {"deltas", {{"K", delta_k}, {"2K", delta_2k}, {"3K", delta_3k}}},
               {"C_p", t2.c_p},
               {"A_p", t2.valid ? json(t2.a_p) : json("inf")},
               {"B_p", t2.valid ? json(t2.b_p) : json("inf")},
               {"valid", t2.valid},
               {"nu_p", bpdq::nu_p(p)}};
      if (delta_2k > 0.0 && delta_2k < std::sqrt(2.0) - 1.0) {
        const auto t1 = bpdq::theorem1_constants(delta_2k);
        out["baseline_A"] = t1.a;
        out["baseline_B"] = t1.b;
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*rip) {
      const auto op = bpdq::LinearOperator::from_json(json::parse(read_file(rip_matrix)));
      const auto est =
          bpdq::estimate_rip_radius(op, rip_k, parse_p(rip_p), rip_trials, rip_seed);
      json out{{"K", rip_k},
               {"p", parse_p(rip_p)},
               {"trials", est.trials},
               {"delta_hat", est.delta_hat},
               {"mu", est.mu_used},
               {"r_min", est.r_min},
               {"r_max", est.r_max},
               {"source", "monte-carlo-estimate (lower bound)"}};
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*theta) {
      const auto b = bpdq::theta_bound(parse_p(th_p), th_k, th_n, th_delta, th_eta, th_c);
      json out{{"p", parse_p(th_p)},
               {"K", th_k},
               {"N", th_n},
               {"delta", th_delta},
               {"eta", th_eta},
               {"c", th_c},
               {"rhs", b.rhs},
               {"note", "up to the unspecified constant c"}};
      if (b.astronomical)
        out["m"] = "astronomically large";
      else
        out["m"] = b.m;
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (*gen) {
      if (gen_what == "signal") {
        write_file(gen_out, vector_to_csv(bpdq::gen_sparse_signal(gen_n, gen_k, gen_seed)));
      } else if (gen_what == "angiogram") {
        const bpdq::Matrix img = bpdq::gen_angiogram(gen_side, gen_ellipses, gen_seed);
        std::string out;
        char buf[64];
        for (bpdq::Index r = 0; r < img.rows(); ++r) {
          for (bpdq::Index c = 0; c < img.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), c + 1 == img.cols() ? "%.17g\n" : "%.17g,", img(r, c));
            out += buf;
          }
        }
        write_file(gen_out, out);
      } else if (gen_what == "matrix") {
        bpdq::LinearOperator op = [&] {
          if (gen_kind == "dense-gaussian") return bpdq::make_sgr(gen_m, gen_n, gen_seed);
          if (gen_kind == "restricted-fourier") {
            const long count = gen_locations > 0 ? gen_locations : gen_m / 2;
            const int dims = gen_side * gen_side == gen_n ? 2 : 1;
            return bpdq::make_partial_fourier(
                gen_n, bpdq::sample_fourier_omega(gen_n, count, gen_seed, dims), gen_seed, dims);
          }
          throw std::invalid_argument("--kind must be dense-gaussian or restricted-fourier");
        }();
        write_file(gen_out, op.to_json().dump(2) + "\n");
      } else {
        throw std::invalid_argument("--what must be signal, angiogram, or matrix");
      }
      std::cout << "wrote " << gen_out << "\n";
      return 0;
    }

    if (*exp1d)
      return run_experiment_cmd(e1_config, e1_out,
                                e1_seed_set ? std::optional<std::uint64_t>(e1_seed) : std::nullopt,
                                e1_trials > 0 ? std::optional<long>(e1_trials) : std::nullopt,
                                e1_full, e1_raw, false);
    if (*exptv)
      return run_experiment_cmd(etv_config, etv_out,
                                etv_seed_set ? std::optional<std::uint64_t>(etv_seed) : std::nullopt,
                                etv_trials > 0 ? std::optional<long>(etv_trials) : std::nullopt,
                                etv_full, etv_raw, true);
  } catch (const bpdq::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return kExitConvergenceBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInvalidConfig;
  }
  return 0;
}
