#pragma once

#include "bpdq/linear_operator.hpp"

namespace bpdq {

/// lp norm with overflow-safe scaling; p may be +inf.
double lp_norm(const Vector& v, double p);

/// prox of gamma * ||.||_1: component-wise shrinkage toward zero.
Vector soft_threshold(const Vector& x, double gamma);

/// Normalized duality mapping of l_p, p in [2, inf):
/// J(u)_i = ||u||_p^{2-p} |u_i|^{p-1} sign(u_i), with J(0) = 0 by convention.
/// Satisfies <J(u), u> = ||u||_p^2 and ||J(u)||_{p/(p-1)} = ||u||_p.
Vector duality_map(const Vector& u, double p);

/// State of the Newton solve for the lp-ball projection. z packs the
/// candidate point u (positive orthant, m entries) and the Lagrange
/// multiplier lambda (last entry).
struct NewtonState {
  Vector z;
  double kkt_residual = 0.0;
  int iteration = 0;
};

/// Initial Newton state for projecting y_abs (nonnegative, ||y_abs||_p > 1):
/// u0 is the radial projection, lambda0 the least-squares multiplier.
NewtonState newton_init(const Vector& y_abs, double p);

/// Orthogonal projection onto the unit lp ball, p in [2, inf].
/// Closed forms for p = 2 and p = inf (and for p within 1e-9 of them);
/// otherwise Newton on the KKT system with an O(m) block Jacobian inverse
/// and step halving as a safeguard. Throws ConvergenceError if the KKT
/// residual does not fall below tol within max_iter iterations.
Vector project_ball(const Vector& y, double p, double tol = 1e-9, int max_iter = 50,
                    NewtonState* info = nullptr);

/// Feasibility tube T^p(eps) = { x : ||y_q - Phi x||_p <= eps }.
struct TubeSpec {
  const LinearOperator* op = nullptr;
  Vector y_q;
  double epsilon = 0.0;
  double p = 2.0;
};

struct DualIterationStats {
  long iterations = 0;      // inner iterations of the last call
  double rel_change = 0.0;  // final relative change of the primal iterate
  double residual_p = 0.0;  // ||y_q - Phi out||_p at exit
};

/// Orthogonal projection of x onto T^p(eps).
///
/// Tight frames (c1 == c2 == c) use the one-shot formula
///   x + (eps/c) Phi^T (P_B - Id)((Phi x - y_q)/eps).
/// General frames run the dual forward-backward iteration with constant step
/// 2/(c1+c2) (or 1/c2 when c1 = 0), stopping when the relative change of the
/// primal iterate falls below inner_tol and the iterate is inside the
/// slightly inflated tube. warm_dual, when given, carries the dual variable
/// across calls.
Vector prox_affine_composition(const Vector& x, const TubeSpec& tube,
                               const FrameBounds& bounds, double inner_tol = 1e-6,
                               long inner_cap = 700, Vector* warm_dual = nullptr,
                               DualIterationStats* stats = nullptr);

/// prox of gamma * TV (isotropic, forward differences, Neumann boundary),
/// computed by projected gradient descent on the dual with step 1/8.
/// Stops on relative energy change below tol; best effort after max_iter.
Matrix prox_tv(const Matrix& y, double gamma, double tol = 1e-5, int max_iter = 200);

/// Isotropic total variation of an image (matching prox_tv's discretization).
double tv_norm(const Matrix& u);

}  // namespace bpdq
