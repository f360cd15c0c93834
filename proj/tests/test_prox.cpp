#include <cmath>
#include <limits>

#include "bpdq/errors.hpp"
#include "bpdq/prox.hpp"
#include "bpdq/quantize.hpp"
#include "bpdq/rng.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace bpdq;

namespace {
Vector random_vector(Index n, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * rng.gaussian();
  return v;
}
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("soft threshold") {
  Vector x(3);
  x << 2.0, -0.5, 1.0;
  const Vector out = soft_threshold(x, 1.0);
  CHECK(out[0] == 1.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 0.0);
  CHECK(soft_threshold(Vector::Zero(4), 1.0).isZero(0.0));
  Vector neg(1);
  neg << -2.0;
  CHECK(soft_threshold(neg, 0.5)[0] == -1.5);
  CHECK_THROWS_AS(soft_threshold(x, 0.0), std::invalid_argument);
}

TEST_CASE("duality map point values") {
  Vector u(2);
  u << 3.0, 4.0;
  CHECK((duality_map(u, 2.0) - u).cwiseAbs().maxCoeff() <= 1e-14);  // identity at p = 2

  Vector e(3);
  e << 0.0, 2.5, 0.0;
  CHECK((duality_map(e, 7.0) - e).cwiseAbs().maxCoeff() <= 1e-12);  // single coordinate

  Vector ones(2);
  ones << 1.0, 1.0;
  const Vector j = duality_map(ones, 4.0);
  CHECK(j[0] == doctest::Approx(std::pow(2.0, -0.5)).epsilon(1e-12));
  CHECK(j.dot(ones) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));  // = ||u||_4^2

  CHECK(duality_map(Vector::Zero(3), 4.0).isZero(0.0));
  CHECK_THROWS_AS(duality_map(ones, kInf), std::invalid_argument);
  CHECK_THROWS_AS(duality_map(ones, 1.5), std::invalid_argument);
}

TEST_CASE("duality map identities and 2-smoothness") {
  Rng rng(3);
  const double ps[] = {2.0, 3.0, 4.0, 10.0};
  for (int rep = 0; rep < 10000; ++rep) {
    const Index m = 2 + static_cast<Index>(rng.below(31));
    const double p = ps[rng.below(4)];
    Vector u(m), v(m);
    for (Index i = 0; i < m; ++i) {
      u[i] = rng.gaussian();
      v[i] = rng.gaussian();
    }
    const Vector j = duality_map(u, p);
    const double norm = lp_norm(u, p);
    CHECK(std::abs(j.dot(u) - norm * norm) <= 1e-10 * norm * norm);
    const double q = p / (p - 1.0);
    CHECK(std::abs(lp_norm(j, q) - norm) <= 1e-10 * norm);
    // ||u+v||_p^2 <= ||u||_p^2 + 2 <J(u), v> + (p-1) ||v||_p^2
    const double lhs = std::pow(lp_norm(u + v, p), 2.0);
    const double rhs =
        norm * norm + 2.0 * j.dot(v) + (p - 1.0) * std::pow(lp_norm(v, p), 2.0);
    CHECK(lhs <= rhs + 1e-10 * (1.0 + std::abs(rhs)));
  }
}

TEST_CASE("project_ball closed forms") {
  Vector y(2);
  y << 3.0, 4.0;
  const Vector p2 = project_ball(y, 2.0);
  CHECK(p2[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(p2[1] == doctest::Approx(0.8).epsilon(1e-14));

  Vector z(2);
  z << 2.0, -0.5;
  const Vector pinf = project_ball(z, kInf);
  CHECK(pinf[0] == 1.0);
  CHECK(pinf[1] == -0.5);

  Vector inside(2);
  inside << 0.3, -0.2;
  CHECK(project_ball(inside, 3.0) == inside);  // returned unchanged

  Vector ones(2);
  ones << 1.0, 1.0;
  const Vector p4 = project_ball(ones, 4.0);
  CHECK(p4[0] == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));
  CHECK(p4[1] == doctest::Approx(std::pow(2.0, -0.25)).epsilon(1e-12));

  // near-closed-form moments dispatch to the exact branches
  CHECK((project_ball(y, 2.0 + 1e-12) - p2).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("newton_init") {
  Vector y(2);
  y << 2.0, 0.0;
  const NewtonState st = newton_init(y, 4.0);
  CHECK(st.z[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(st.z[1] == 0.0);
  CHECK(st.z[2] == doctest::Approx(0.25).epsilon(1e-14));  // 4*1*(2-1)/16

  Vector on_sphere(1);
  on_sphere << 1.0;
  CHECK_THROWS_AS(newton_init(on_sphere, 4.0), std::invalid_argument);

  // lambda0 >= 0 whenever y is outside the ball
  Rng rng(5);
  for (int rep = 0; rep < 1000; ++rep) {
    const Index m = 2 + static_cast<Index>(rng.below(20));
    Vector v = random_vector(m, 600 + rep).cwiseAbs();
    const double p = 2.5 + rng.uniform() * 7.0;
    v *= (1.0 + rng.uniform() * 5.0) / lp_norm(v, p);
    CHECK(newton_init(v, p).z[m] >= 0.0);
  }
}

TEST_CASE("newton projection: residuals, norms, iteration counts") {
  Rng rng(7);
  const double ps[] = {3.0, 4.0, 7.0, 10.0};
  for (int rep = 0; rep < 500; ++rep) {
    const Index m = 2 + static_cast<Index>(rng.below(127));
    const double p = ps[rng.below(4)];
    Vector y = random_vector(m, 700 + rep);
    y *= (1.0 + 4.0 * rng.uniform()) / lp_norm(y, p);
    NewtonState info;
    const Vector u = project_ball(y, p, 1e-9, 50, &info);
    CHECK(info.kkt_residual < 1e-8);
    CHECK(std::abs(lp_norm(u, p) - 1.0) < 1e-9);
    CHECK(info.iteration <= 15);
    // same orthant as the input
    for (Index i = 0; i < m; ++i) CHECK(u[i] * y[i] >= 0.0);
  }
}

TEST_CASE("newton projection agrees with the lambda-bisection oracle") {
  Rng rng(11);
  for (int rep = 0; rep < 25; ++rep) {
    const Index m = 3 + static_cast<Index>(rng.below(40));
    Vector y = random_vector(m, 800 + rep);
    y *= (1.0 + 3.0 * rng.uniform()) / lp_norm(y, 3.0);
    const Vector newton = project_ball(y, 3.0);
    const Vector oracle = oracles::project_ball_bisection(y, 3.0);
    CHECK((newton - oracle).cwiseAbs().maxCoeff() <= 1e-6);
  }
  // the moment is a real parameter, not only an integer
  for (int rep = 0; rep < 5; ++rep) {
    Vector y = random_vector(20, 850 + rep);
    y *= (1.0 + rng.uniform()) / lp_norm(y, 3.5);
    const Vector newton = project_ball(y, 3.5);
    const Vector oracle = oracles::project_ball_bisection(y, 3.5);
    CHECK((newton - oracle).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(std::abs(lp_norm(newton, 3.5) - 1.0) <= 1e-9);
  }
}

TEST_CASE("projection idempotence and optimality") {
  Rng rng(13);
  for (double p : {2.0, 3.0, 4.0, 10.0, kInf}) {
    const Vector y = random_vector(40, 900 + static_cast<int>(p == kInf ? 99 : p), 2.0);
    const Vector u = project_ball(y, p);
    CHECK((project_ball(u, p) - u).cwiseAbs().maxCoeff() <= 1e-8);
    if (std::isinf(p)) continue;
    // no feasible sphere point is closer than the projection
    for (int rep = 0; rep < 100; ++rep) {
      Vector w = random_vector(40, 1000 + rep);
      w /= lp_norm(w, p);
      CHECK((y - u).norm() <= (y - w).norm() + 1e-9);
    }
  }
}

TEST_CASE("newton projection failure carries diagnostics") {
  Vector y = random_vector(20, 55);
  y *= 3.0 / lp_norm(y, 5.0);
  CHECK_THROWS_AS(project_ball(y, 5.0, 1e-9, 1), ConvergenceError);
  try {
    project_ball(y, 5.0, 1e-9, 1);
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
    CHECK(e.iterations() == 1);
  }
}

TEST_CASE("tube projection: fixed point and interval instance") {
  // 1x1 operator with entry a: the tube is the interval |a x - y_q| <= eps.
  const auto op = make_sgr(1, 1, 3);
  const double a = op.dense()(0, 0);
  Vector y_q(1);
  y_q << 0.0;
  const TubeSpec tube{&op, y_q, 1.0, 2.0};
  const auto bounds = estimate_frame_bounds(op, 10);

  Vector inside(1);
  inside << 0.5 / a;
  CHECK(prox_affine_composition(inside, tube, bounds) == inside);

  Vector outside(1);
  outside << 3.0 / std::abs(a);
  const Vector out = prox_affine_composition(outside, tube, bounds);
  CHECK(out[0] == doctest::Approx(1.0 / std::abs(a)).epsilon(1e-6));
}

TEST_CASE("tube projection: tight shortcut and dual iteration agree") {
  const Index n = 64;
  const auto op = make_partial_fourier(n, sample_fourier_omega(n, 12, 21), 21);
  const Vector x_true = random_vector(n, 60);
  const Vector y_q = quantize(op.apply(x_true), {0.5});
  for (double p : {2.0, 4.0, kInf}) {
    const double eps = epsilon_p(p, op.rows(), 0.5, 2.0).epsilon;
    const TubeSpec tube{&op, y_q, eps, p};
    const Vector x = random_vector(n, 61) * 2.0;
    const Vector tight = prox_affine_composition(x, tube, {1.0, 1.0});
    // force the general dual path with loose (but valid) bounds
    const Vector general =
        prox_affine_composition(x, tube, {0.5, 1.0}, 1e-9, 20000);
    CHECK((tight - general).norm() <= 1e-6 * (1.0 + tight.norm()));
    CHECK(lp_norm(y_q - op.apply(tight), p) <= eps * (1.0 + 1e-6));
  }
}

TEST_CASE("tube projection: membership and cap behavior") {
  const auto op = make_sgr(24, 48, 9);
  const Vector x_true = random_vector(48, 70);
  const Vector y_q = quantize(op.apply(x_true), {0.25});
  const auto bounds = estimate_frame_bounds(op, 50);
  for (double p : {2.0, 3.0, 10.0}) {
    const double eps = epsilon_p(p, op.rows(), 0.25, 2.0).epsilon;
    const TubeSpec tube{&op, y_q, eps, p};
    const Vector x = random_vector(48, 71) * 3.0;
    DualIterationStats stats;
    const Vector out = prox_affine_composition(x, tube, bounds, 1e-6, 700, nullptr, &stats);
    CHECK(lp_norm(y_q - op.apply(out), p) <= eps * (1.0 + 1e-6));
    CHECK(stats.iterations <= 700);
  }
  const TubeSpec tube{&op, y_q, epsilon_p(2, op.rows(), 0.25, 2.0).epsilon, 2.0};
  CHECK_THROWS_AS(
      prox_affine_composition(random_vector(48, 72) * 3.0, tube, bounds, 1e-6, 2),
      ConvergenceError);
}

TEST_CASE("prox_tv basics") {
  const Matrix constant = Matrix::Constant(8, 8, 3.25);
  CHECK((prox_tv(constant, 1.0) - constant).cwiseAbs().maxCoeff() <= 1e-12);

  Rng rng(15);
  Matrix y(16, 16);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) y(i, j) = rng.gaussian();
  const Matrix near_id = prox_tv(y, 1e-6);
  CHECK((near_id - y).norm() <= 1e-3 * y.norm());

  Matrix impulse = Matrix::Zero(16, 16);
  impulse(8, 8) = 10.0;
  const Matrix flat = prox_tv(impulse, 100.0, 1e-12, 2000);
  CHECK(flat.maxCoeff() - flat.minCoeff() <= 1e-4);
  CHECK(flat.sum() == doctest::Approx(10.0).epsilon(1e-10));  // gradient adjoint has zero mean

  CHECK_THROWS_AS(prox_tv(y, 0.0), std::invalid_argument);
}

TEST_CASE("prox_tv objective is non-increasing across iterations") {
  Rng rng(19);
  Matrix y(16, 16);
  for (Index i = 0; i < 16; ++i)
    for (Index j = 0; j < 16; ++j) y(i, j) = rng.gaussian();
  double prev = std::numeric_limits<double>::infinity();
  for (int iters = 1; iters <= 50; ++iters) {
    const double obj = oracles::rof_objective(y, prox_tv(y, 0.3, 1e-14, iters), 0.3);
    CHECK(obj <= prev + 1e-12);
    prev = obj;
  }
}

TEST_CASE("prox_tv matches the dense dual oracle on a 4x4 image") {
  Rng rng(21);
  Matrix y(4, 4);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j) y(i, j) = rng.gaussian();
  const Matrix mine = prox_tv(y, 0.5, 1e-12, 20000);
  const Matrix oracle = oracles::prox_tv_fista(y, 0.5, 50000);
  CHECK(std::abs(oracles::rof_objective(y, mine, 0.5) -
                 oracles::rof_objective(y, oracle, 0.5)) <= 1e-6);
}
