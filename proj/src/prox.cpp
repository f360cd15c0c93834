#include "bpdq/prox.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bpdq/errors.hpp"

namespace bpdq {

namespace {
constexpr double kP2Snap = 1e-9;  // dispatch window around the closed forms

bool is_inf_moment(double p) { return std::isinf(p) || p > 1.0 / kP2Snap; }

// x^e for x >= 0, with repeated squaring when e is a small integer (the
// moments used in practice); falls back to std::pow otherwise.
inline double pow_nn(double x, double e) {
  const int ie = static_cast<int>(e);
  if (static_cast<double>(ie) == e && ie >= 0 && ie <= 64) {
    double result = 1.0, base = x;
    for (int k = ie; k > 0; k >>= 1) {
      if (k & 1) result *= base;
      base *= base;
    }
    return result;
  }
  return std::pow(x, e);
}
}  // namespace

double lp_norm(const Vector& v, double p) {
  if (v.size() == 0) return 0.0;
  if (is_inf_moment(p)) return v.cwiseAbs().maxCoeff();
  if (p == 2.0) return v.norm();
  const double s = v.cwiseAbs().maxCoeff();
  if (s == 0.0) return 0.0;
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) acc += pow_nn(std::abs(v[i]) / s, p);
  return s * std::pow(acc, 1.0 / p);
}

Vector soft_threshold(const Vector& x, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("soft_threshold: gamma must be > 0");
  Vector out(x.size());
  for (Index i = 0; i < x.size(); ++i) {
    const double a = std::abs(x[i]) - gamma;
    out[i] = a > 0.0 ? (x[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

Vector duality_map(const Vector& u, double p) {
  if (!(p >= 2.0) || is_inf_moment(p))
    throw std::invalid_argument("duality_map: requires finite p in [2, inf)");
  const double norm = lp_norm(u, p);
  if (norm == 0.0) return Vector::Zero(u.size());
  // ||u||_p (|u_i|/||u||_p)^{p-1}: normalized powers avoid overflow.
  Vector out(u.size());
  for (Index i = 0; i < u.size(); ++i) {
    const double w = std::abs(u[i]) / norm;
    const double mag = norm * pow_nn(w, p - 1.0);
    out[i] = u[i] >= 0.0 ? mag : -mag;
  }
  return out;
}

namespace {

// KKT residual F(z) for the lp-ball projection of ya (nonnegative):
//   F_i = z_i + p lambda z_i^{p-1} - ya_i   (i < m)
//   F_m = sum_j z_j^p - 1
Vector kkt_residual(const Vector& z, const Vector& ya, double p) {
  const Index m = ya.size();
  Vector f(m + 1);
  double g = 0.0;
  const double lambda = z[m];
  for (Index i = 0; i < m; ++i) {
    const double zi = z[i];
    const double zp1 = pow_nn(zi, p - 1.0);
    f[i] = zi + p * lambda * zp1 - ya[i];
    g += zp1 * zi;
  }
  f[m] = g - 1.0;
  return f;
}

}  // namespace

NewtonState newton_init(const Vector& y_abs, double p) {
  const double norm = lp_norm(y_abs, p);
  if (!(norm > 1.0)) throw std::invalid_argument("newton_init: requires ||y||_p > 1");
  const Index m = y_abs.size();
  NewtonState st;
  st.z.resize(m + 1);
  st.z.head(m) = y_abs / norm;
  // lambda0 = argmin_l ||F(u0, l)||_2; the constraint row is l-free since
  // g(u0) = 1, leaving a scalar least-squares problem.
  double num = 0.0, den = 0.0;
  for (Index i = 0; i < m; ++i) {
    const double b = p * pow_nn(st.z[i], p - 1.0);
    num += b * (y_abs[i] - st.z[i]);
    den += b * b;
  }
  st.z[m] = den > 0.0 ? num / den : 0.0;
  st.kkt_residual = kkt_residual(st.z, y_abs, p).norm();
  st.iteration = 0;
  return st;
}

Vector project_ball(const Vector& y, double p, double tol, int max_iter,
                    NewtonState* info) {
  if (!(p >= 2.0 - kP2Snap)) throw std::invalid_argument("project_ball: requires p >= 2");
  if (!(tol > 0.0)) throw std::invalid_argument("project_ball: tol must be > 0");
  if (info) *info = NewtonState{};

  if (is_inf_moment(p)) {
    Vector out(y.size());
    for (Index i = 0; i < y.size(); ++i)
      out[i] = y[i] > 1.0 ? 1.0 : (y[i] < -1.0 ? -1.0 : y[i]);
    return out;
  }
  if (std::abs(p - 2.0) <= kP2Snap) {
    const double n2 = y.norm();
    return n2 <= 1.0 ? y : Vector(y / n2);
  }
  if (lp_norm(y, p) <= 1.0) return y;

  // Newton on the KKT system in the positive orthant; signs restored at exit.
  // The KKT components scale with y, so the tolerance is taken relative to
  // max(1, ||y||_inf); below that, cancellation noise dominates.
  const Index m = y.size();
  const Vector ya = y.cwiseAbs();
  const double tol_eff = tol * std::max(1.0, ya.maxCoeff());
  NewtonState st = newton_init(ya, p);
  Vector f = kkt_residual(st.z, ya, p);
  double res = f.norm();

  Vector bbar(m), dinv_f(m), trial(m + 1);
  while (res >= tol_eff && st.iteration < max_iter) {
    // Jacobian V = [D b; b^T 0] with D_ii = 1 + p(p-1) lambda z_i^{p-2},
    // b_i = p z_i^{p-1}; inverted via the diagonal-plus-rank-one structure.
    const double lambda = st.z[m];
    double mu = 0.0, bbar_f = 0.0;
    for (Index i = 0; i < m; ++i) {
      const double zi = st.z[i];
      const double zp2 = pow_nn(zi, p - 2.0);
      const double b = p * zp2 * zi;
      const double d = 1.0 + p * (p - 1.0) * lambda * zp2;
      bbar[i] = b / d;
      dinv_f[i] = f[i] / d;
      mu += b * b / d;
      bbar_f += bbar[i] * f[i];
    }
    if (!(mu > 0.0) || !std::isfinite(mu))
      throw ConvergenceError("project_ball: singular Jacobian", res, st.iteration);
    const double dlam_raw = (bbar_f - f[m]) / mu;
    // delta_u = D^{-1} f + ((f_m - bbar^T f)/mu) bbar
    // delta_lambda = (bbar^T f - f_m)/mu
    //
    // Far from the ball the linearization undershoots the growth of z^{p-1}
    // and the raw direction can jump by many orders of magnitude; clip each
    // coordinate step into [0, 2 z_i + 1/2] (which also preserves positivity)
    // and bound the multiplier step. Near the solution the clips are inactive
    // and the iteration is plain Newton.
    Vector delta(m + 1);
    for (Index i = 0; i < m; ++i) {
      const double cap_grow = st.z[i] + 0.5;
      delta[i] = std::clamp(dinv_f[i] - dlam_raw * bbar[i], -cap_grow, st.z[i]);
    }
    delta[m] = std::clamp(dlam_raw, -(std::abs(st.z[m]) + ya.maxCoeff()),
                          std::abs(st.z[m]) + ya.maxCoeff());
    double step = 1.0;
    for (int halving = 0; halving <= 20; ++halving) {
      for (Index i = 0; i <= m; ++i) trial[i] = st.z[i] - step * delta[i];
      const Vector ftrial = kkt_residual(trial, ya, p);
      const double rtrial = ftrial.norm();
      if (rtrial <= res || halving == 20) {
        st.z = trial;
        f = ftrial;
        res = rtrial;
        break;
      }
      step *= 0.5;
    }
    ++st.iteration;
  }
  st.kkt_residual = res;
  if (info) *info = st;
  if (res >= tol_eff)
    throw ConvergenceError("project_ball: Newton did not converge", res, st.iteration);

  Vector out(m);
  for (Index i = 0; i < m; ++i) out[i] = y[i] >= 0.0 ? st.z[i] : -st.z[i];
  return out;
}

Vector prox_affine_composition(const Vector& x, const TubeSpec& tube,
                               const FrameBounds& bounds, double inner_tol,
                               long inner_cap, Vector* warm_dual,
                               DualIterationStats* stats) {
  if (!tube.op) throw std::invalid_argument("prox_affine_composition: missing operator");
  if (!(tube.epsilon > 0.0))
    throw std::invalid_argument("prox_affine_composition: epsilon must be > 0");
  if (!(inner_tol > 0.0))
    throw std::invalid_argument("prox_affine_composition: inner_tol must be > 0");
  const LinearOperator& op = *tube.op;
  const double eps = tube.epsilon;
  const double p = tube.p;

  // Feasibility target: relative slack per the tube contract plus an absolute
  // floor covering double-precision residual evaluation near eps ~ 0.
  const double feas_target =
      eps * (1.0 + 1e-6) + 5e-13 * (1.0 + lp_norm(tube.y_q, p));

  Vector r = op.apply(x) - tube.y_q;
  if (lp_norm(r, p) <= eps) return x;  // already in the tube

  if (bounds.tight()) {
    const Vector a = r / eps;
    return x + (eps / bounds.c1) * op.adjoint(project_ball(a, p) - a);
  }

  if (!(bounds.c2 > 0.0))
    throw std::invalid_argument("prox_affine_composition: invalid frame bounds");
  const double beta =
      bounds.c1 > 0.0 ? 2.0 / (bounds.c1 + bounds.c2) : 1.0 / bounds.c2;

  // Dual forward-backward in unscaled variables: with v = u/eps the recursion
  //   w = v/beta + (Phi q - y_q),  v <- beta (w - eps P_B(w/eps)),
  //   q <- x - Phi^T v
  // converges to q = projection of x onto the tube. With the Gram matrix
  // cached the whole loop runs in measurement space: Phi q = Phi x - G v, and
  // the relative change of q is evaluated exactly in the Gram metric,
  //   ||q' - q||^2 = dv^T G dv,  ||q||^2 = ||x||^2 - 2 v^T Phi x + v^T G v.
  Vector v = (warm_dual && warm_dual->size() == op.rows()) ? *warm_dual
                                                           : Vector::Zero(op.rows());
  const Matrix* gram = op.gram();
  double rel_change = std::numeric_limits<double>::infinity();
  long t = 0;
  double res_p = 0.0;

  if (gram) {
    const Vector phi_x = r + tube.y_q;  // r still holds Phi x - y_q
    const double x_sq = x.squaredNorm();
    Vector gv = v.isZero(0.0) ? Vector(Vector::Zero(op.rows())) : Vector((*gram) * v);
    for (; t < inner_cap; ++t) {
      r = phi_x - tube.y_q - gv;
      res_p = lp_norm(r, p);
      if (t > 0 && rel_change < inner_tol && res_p <= feas_target) break;
      Vector w = v / beta + r;
      Vector v_next = beta * (w - eps * project_ball(w / eps, p));
      Vector gv_next = (*gram) * v_next;
      const Vector dv = v_next - v;
      const double dq_sq = std::max(0.0, dv.dot(gv_next - gv));
      const double q_sq =
          std::max(0.0, x_sq - 2.0 * v_next.dot(phi_x) + v_next.dot(gv_next));
      rel_change = q_sq > 0.0 ? std::sqrt(dq_sq / q_sq) : std::sqrt(dq_sq);
      v = std::move(v_next);
      gv = std::move(gv_next);
    }
  } else {
    Vector q = x - op.adjoint(v);
    for (; t < inner_cap; ++t) {
      r = op.apply(q) - tube.y_q;
      res_p = lp_norm(r, p);
      if (t > 0 && rel_change < inner_tol && res_p <= feas_target) break;
      Vector w = v / beta + r;
      v = beta * (w - eps * project_ball(w / eps, p));
      Vector q_next = x - op.adjoint(v);
      const double scale = q_next.norm();
      rel_change = scale > 0.0 ? (q_next - q).norm() / scale : (q_next - q).norm();
      q = std::move(q_next);
    }
  }

  if (stats) *stats = {t, rel_change, res_p};
  if (t >= inner_cap && !(rel_change < inner_tol && res_p <= feas_target))
    throw ConvergenceError("prox_affine_composition: dual iteration hit the cap (residual " +
                               std::to_string(res_p) + ", target " +
                               std::to_string(feas_target) + ")",
                           res_p, t);
  if (warm_dual) *warm_dual = v;
  return x - op.adjoint(v);
}

namespace {

// Forward-difference gradient with Neumann boundary, and its negative
// adjoint (the discrete divergence); gx/gy live on the pixel grid.
void image_gradient(const Matrix& u, Matrix& gx, Matrix& gy) {
  const Index r = u.rows(), c = u.cols();
  gx.setZero(r, c);
  gy.setZero(r, c);
  if (r > 1) gx.topRows(r - 1) = u.bottomRows(r - 1) - u.topRows(r - 1);
  if (c > 1) gy.leftCols(c - 1) = u.rightCols(c - 1) - u.leftCols(c - 1);
}

Matrix gradient_adjoint(const Matrix& gx, const Matrix& gy) {
  const Index r = gx.rows(), c = gx.cols();
  Matrix out = Matrix::Zero(r, c);
  for (Index i = 0; i < r; ++i)
    for (Index j = 0; j < c; ++j) {
      double acc = 0.0;
      if (i < r - 1) acc -= gx(i, j);
      if (i > 0) acc += gx(i - 1, j);
      if (j < c - 1) acc -= gy(i, j);
      if (j > 0) acc += gy(i, j - 1);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace

double tv_norm(const Matrix& u) {
  Matrix gx, gy;
  image_gradient(u, gx, gy);
  return (gx.array().square() + gy.array().square()).sqrt().sum();
}

Matrix prox_tv(const Matrix& y, double gamma, double tol, int max_iter) {
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_tv: gamma must be > 0");
  if (!(tol > 0.0)) throw std::invalid_argument("prox_tv: tol must be > 0");
  const Index r = y.rows(), c = y.cols();
  Matrix wx = Matrix::Zero(r, c), wy = Matrix::Zero(r, c);
  Matrix u = y;
  Matrix gx, gy;
  double energy = gamma * tv_norm(y);
  for (int it = 0; it < max_iter; ++it) {
    image_gradient(u, gx, gy);
    wx += 0.125 * gx;
    wy += 0.125 * gy;
    // project each dual pixel onto the radius-gamma disc
    for (Index i = 0; i < r; ++i)
      for (Index j = 0; j < c; ++j) {
        const double n = std::hypot(wx(i, j), wy(i, j));
        if (n > gamma) {
          const double s = gamma / n;
          wx(i, j) *= s;
          wy(i, j) *= s;
        }
      }
    u = y - gradient_adjoint(wx, wy);
    const double next = 0.5 * (u - y).squaredNorm() + gamma * tv_norm(u);
    if (std::abs(energy - next) <= tol * std::max(1.0, std::abs(next))) {
      energy = next;
      break;
    }
    energy = next;
  }
  return u;
}

}  // namespace bpdq
