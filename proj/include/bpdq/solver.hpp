#pragma once

#include "bpdq/linear_operator.hpp"
#include "bpdq/prox.hpp"

namespace bpdq {

enum class Regularizer { L1, Tv };

struct DecoderConfig {
  double p = 2.0;            // fidelity moment, in [2, inf]
  double epsilon = 0.0;      // fidelity radius; 0 selects the Basis Pursuit limit
  double gamma = 1.0;        // soft-threshold / TV prox scale
  double relaxation = 1.0;   // DR relaxation alpha_t, constant in (0, 2)
  long outer_iters = 500;
  double inner_tol = 1e-6;   // relative-change stop of the dual iteration
  long inner_cap = 700;
  Regularizer regularizer = Regularizer::L1;
  double early_exit_tol = 0.0;  // >0 stops once the iterate change falls below it
  double tv_tol = 1e-5;
  int tv_iters = 200;
};

struct InnerStats {
  long calls = 0;
  long total_iterations = 0;
  long max_iterations = 0;
};

struct DecodeResult {
  Vector x_hat;
  double objective = 0.0;        // l1 norm or TV of x_hat
  double residual_norm_p = 0.0;  // ||y_q - Phi x_hat||_p
  long outer_iterations_run = 0;
  double final_iterate_change = 0.0;
  InnerStats inner;
  bool converged = false;
};

/// Solve  min ||u||_1  s.t.  ||y_q - Phi u||_p <= epsilon  by Douglas-Rachford
/// splitting: x <- (1 - a/2) x + (a/2) (2 S_gamma - Id)((2 P_T - Id)(x)),
/// started at Phi^T y_q / c2; the returned solution is the tube projection of
/// the final iterate. epsilon = 0 degenerates the tube to the affine set and
/// is handled by substituting 1e-12 for the radius.
DecodeResult decode_bpdq(const LinearOperator& op, const Vector& y_q,
                         const DecoderConfig& cfg);

/// The p = 2 instance, kept as a named baseline.
DecodeResult decode_bpdn(const LinearOperator& op, const Vector& y_q, DecoderConfig cfg);

/// TV-regularized variant for square images measured by a tight frame:
/// S_gamma is replaced by the TV proximity operator.
DecodeResult decode_tv(const LinearOperator& op, const Vector& y_q, DecoderConfig cfg);

}  // namespace bpdq
