#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"

namespace bpdq {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Index = Eigen::Index;

enum class OperatorKind { DenseGaussian, RestrictedFourier };

/// Spectral bounds c1*Id <= Phi*Phi^T <= c2*Id of a sensing operator.
struct FrameBounds {
  double c1 = 0.0;
  double c2 = 0.0;
  bool tight() const { return c1 == c2 && c1 > 0.0; }
};

/// Immutable sensing map Phi: R^N -> R^m with adjoint. Two kinds:
///
///  * dense-gaussian: m x N matrix of iid N(0,1) entries, filled row by row
///    from the seeded generator (row-major storage).
///
///  * restricted-fourier: pairs of rows of the orthonormal real Fourier
///    basis of R^N (1-D, or separable 2-D on a sqrt(N) x sqrt(N) image).
///    Each retained frequency location w contributes two measurements,
///    sqrt(2)*Re X_w and sqrt(2)*Im X_w of the unitary DFT X. The
///    self-conjugate frequencies (DC/Nyquist, which have no imaginary part)
///    are packed as real pairs so every row keeps unit norm; consequently
///    apply(adjoint(v)) == v exactly for any duplicate-free location set,
///    and a full location set (|Omega| = N/2) is an orthogonal map.
///    Locations are canonical: w and its conjugate N-w name the same
///    location, and passing both is rejected as a duplicate.
///
/// Operators are immutable after construction; concurrent apply/adjoint
/// calls are safe.
class LinearOperator {
 public:
  Index rows() const;  // m, number of measurements
  Index cols() const;  // N, signal dimension
  OperatorKind kind() const;
  std::uint64_t seed() const;

  Vector apply(const Vector& x) const;
  Vector adjoint(const Vector& v) const;

  /// apply() restricted to a sparse input given as (support, values);
  /// support must be sorted unique indices into {0..N-1}.
  Vector apply_sparse(const std::vector<long>& support, const Vector& values) const;

  /// Dense entries; only valid for kind() == DenseGaussian.
  const RowMajorMatrix& dense() const;

  /// Lazily built Gram matrix Phi Phi^T for dense operators with modest m
  /// (nullptr otherwise). Lets measurement-space iterations run on one m x m
  /// product instead of two m x N ones.
  const Matrix* gram() const;

  /// Canonical retained frequency locations (sorted); restricted-fourier only.
  const std::vector<Index>& omega() const;

  /// 1 for 1-D transforms, 2 for separable 2-D; restricted-fourier only.
  int fourier_dims() const;

  nlohmann::json to_json() const;
  static LinearOperator from_json(const nlohmann::json& j);

  struct Impl;

 private:
  friend LinearOperator make_sgr(Index, Index, std::uint64_t);
  friend LinearOperator make_partial_fourier(Index, std::vector<Index>, std::uint64_t, int);
  explicit LinearOperator(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

/// Dense m x N operator with iid standard normal entries; deterministic per seed.
LinearOperator make_sgr(Index m, Index n, std::uint64_t seed);

/// Restricted real-Fourier operator with m = 2*|omega| measurements.
/// omega holds canonical frequency locations (0-based); dims selects a 1-D
/// transform of length N or a 2-D transform on a sqrt(N)-sided image.
LinearOperator make_partial_fourier(Index n, std::vector<Index> omega,
                                    std::uint64_t seed, int dims = 1);

/// Draw `count` distinct canonical frequency locations uniformly at random.
std::vector<Index> sample_fourier_omega(Index n, Index count, std::uint64_t seed, int dims = 1);

/// Total number of canonical frequency locations (= N/2 for even N).
Index fourier_location_count(Index n);

/// c2 = squared power-iteration estimate of the top singular value, inflated
/// by 1%; c1 = 0 for dense operators (conservative) and c1 = c2 = 1 exactly
/// for restricted-fourier.
FrameBounds estimate_frame_bounds(const LinearOperator& op, int iters);

}  // namespace bpdq
