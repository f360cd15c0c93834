#include "bpdq/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bpdq/errors.hpp"

namespace bpdq {

namespace {

constexpr double kBasisPursuitEps = 1e-12;

void validate(const DecoderConfig& cfg) {
  if (!(cfg.p >= 2.0)) throw std::invalid_argument("decode: p must be in [2, inf]");
  if (cfg.epsilon < 0.0) throw std::invalid_argument("decode: epsilon must be >= 0");
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("decode: gamma must be > 0");
  if (!(cfg.relaxation > 0.0 && cfg.relaxation < 2.0))
    throw std::invalid_argument("decode: relaxation must lie in (0, 2)");
  if (cfg.outer_iters < 1) throw std::invalid_argument("decode: outer_iters must be >= 1");
}

Matrix as_image(const Vector& x, Index side) {
  Matrix img(side, side);
  for (Index i = 0; i < side; ++i)
    for (Index j = 0; j < side; ++j) img(i, j) = x[i * side + j];
  return img;
}

Vector as_vector(const Matrix& img) {
  const Index side = img.rows();
  Vector x(side * img.cols());
  for (Index i = 0; i < side; ++i)
    for (Index j = 0; j < img.cols(); ++j) x[i * side + j] = img(i, j);
  return x;
}

// A dense SGR operator with m < N is a frame (Phi Phi^T > 0 a.s.), so the
// dual iteration can run at the 2/(c1+c2) step instead of the conservative
// 1/c2. Estimate the smallest Gram eigenvalue by inverse power iteration,
// deflated for safety; any 0 <= c1 <= true lambda_min keeps the step valid.
FrameBounds refine_frame_bounds(const LinearOperator& op, FrameBounds bounds) {
  if (bounds.c1 > 0.0) return bounds;
  const Matrix* gram = op.gram();
  if (!gram) return bounds;
  Eigen::LLT<Matrix> llt(*gram);
  if (llt.info() != Eigen::Success) return bounds;
  Vector v = Vector::Ones(gram->rows()).normalized();
  double lambda_min = 0.0;
  for (int it = 0; it < 30; ++it) {
    Vector w = llt.solve(v);
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) return bounds;
    lambda_min = 1.0 / norm;
    v = w / norm;
  }
  bounds.c1 = std::min(0.99 * lambda_min, bounds.c2);
  return bounds;
}

DecodeResult run_douglas_rachford(const LinearOperator& op, const Vector& y_q,
                                  const DecoderConfig& cfg, Index image_side) {
  validate(cfg);
  if (y_q.size() != op.rows()) throw std::invalid_argument("decode: measurement size mismatch");

  const double eps = cfg.epsilon > 0.0 ? cfg.epsilon : kBasisPursuitEps;
  // The degenerate tube needs the dual iteration to run much closer to the
  // affine projection; scale the cap rather than fail on the first call.
  const long inner_cap = cfg.epsilon > 1e-10 ? cfg.inner_cap : cfg.inner_cap * 10;
  TubeSpec tube{&op, y_q, eps, cfg.p};
  const FrameBounds bounds = refine_frame_bounds(op, estimate_frame_bounds(op, 50));

  DecodeResult result;
  Vector warm_dual;
  auto project_tube = [&](const Vector& v) {
    DualIterationStats st;
    Vector out = prox_affine_composition(v, tube, bounds, cfg.inner_tol, inner_cap,
                                         &warm_dual, &st);
    result.inner.calls += 1;
    result.inner.total_iterations += st.iterations;
    result.inner.max_iterations = std::max(result.inner.max_iterations, st.iterations);
    return out;
  };
  auto regularizer_prox = [&](const Vector& v) {
    if (cfg.regularizer == Regularizer::L1) return soft_threshold(v, cfg.gamma);
    return as_vector(prox_tv(as_image(v, image_side), cfg.gamma, cfg.tv_tol, cfg.tv_iters));
  };

  Vector x = op.adjoint(y_q) / bounds.c2;
  const double half_relax = cfg.relaxation / 2.0;
  double change = std::numeric_limits<double>::infinity();
  long t = 0;
  for (; t < cfg.outer_iters; ++t) {
    const Vector reflected = 2.0 * project_tube(x) - x;
    const Vector x_next =
        (1.0 - half_relax) * x + half_relax * (2.0 * regularizer_prox(reflected) - reflected);
    if (!x_next.allFinite())
      throw std::runtime_error("decode: non-finite iterate at outer iteration " +
                               std::to_string(t));
    change = (x_next - x).norm();
    x = x_next;
    if (cfg.early_exit_tol > 0.0 && change < cfg.early_exit_tol) {
      ++t;
      break;
    }
  }

  result.x_hat = project_tube(x);
  result.objective = cfg.regularizer == Regularizer::L1
                         ? result.x_hat.lpNorm<1>()
                         : tv_norm(as_image(result.x_hat, image_side));
  result.residual_norm_p = lp_norm(y_q - op.apply(result.x_hat), cfg.p);
  result.outer_iterations_run = t;
  result.final_iterate_change = change;
  result.converged = change <= 1e-6 * std::max(1.0, x.norm());
  return result;
}

}  // namespace

DecodeResult decode_bpdq(const LinearOperator& op, const Vector& y_q,
                         const DecoderConfig& cfg) {
  if (cfg.regularizer != Regularizer::L1)
    throw std::invalid_argument("decode_bpdq: use decode_tv for the TV regularizer");
  return run_douglas_rachford(op, y_q, cfg, 0);
}

DecodeResult decode_bpdn(const LinearOperator& op, const Vector& y_q, DecoderConfig cfg) {
  cfg.p = 2.0;
  cfg.regularizer = Regularizer::L1;
  return run_douglas_rachford(op, y_q, cfg, 0);
}

DecodeResult decode_tv(const LinearOperator& op, const Vector& y_q, DecoderConfig cfg) {
  cfg.regularizer = Regularizer::Tv;
  const Index side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(op.cols()))));
  if (side * side != op.cols())
    throw std::invalid_argument("decode_tv: signal dimension must be a perfect square");
  const FrameBounds b = estimate_frame_bounds(op, 1);
  if (!b.tight())
    throw std::invalid_argument("decode_tv: requires a tight-frame operator");
  return run_douglas_rachford(op, y_q, cfg, side);
}

}  // namespace bpdq
