#include "bpdq/linear_operator.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "bpdq/rng.hpp"

namespace bpdq {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution on distinct
// buffers is.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

struct FftwPlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;

  FftwPlanPair(Index n, int dims, Index side) {
    std::vector<std::complex<double>> scratch_in(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> scratch_out(static_cast<std::size_t>(n));
    auto* in = reinterpret_cast<fftw_complex*>(scratch_in.data());
    auto* out = reinterpret_cast<fftw_complex*>(scratch_out.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (dims == 1) {
      forward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, flags);
      backward = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_BACKWARD, flags);
    } else {
      forward = fftw_plan_dft_2d(static_cast<int>(side), static_cast<int>(side), in, out,
                                 FFTW_FORWARD, flags);
      backward = fftw_plan_dft_2d(static_cast<int>(side), static_cast<int>(side), in, out,
                                  FFTW_BACKWARD, flags);
    }
    if (!forward || !backward) throw std::runtime_error("fftw plan creation failed");
  }

  ~FftwPlanPair() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }

  FftwPlanPair(const FftwPlanPair&) = delete;
  FftwPlanPair& operator=(const FftwPlanPair&) = delete;
};

// Conjugate partner of frequency w. The self-conjugate frequencies (whose
// DFT coefficient is real for real signals) are paired among themselves:
// 1-D pairs DC with Nyquist; 2-D pairs (0,0)<->(h,h) and (0,h)<->(h,0).
// Returns -1 for a self-conjugate frequency with no available partner
// (odd lengths, where Nyquist does not exist).
Index conj_partner(Index n, int dims, Index side, Index w) {
  if (dims == 1) {
    if (n % 2 == 0) {
      if (w == 0) return n / 2;
      if (w == n / 2) return 0;
    } else if (w == 0) {
      return -1;
    }
    return (n - w) % n;
  }
  const Index r = w / side;
  const Index c = w % side;
  const Index pr = (side - r) % side;
  const Index pc = (side - c) % side;
  if (pr == r && pc == c) {
    if (side % 2 != 0) return -1;
    const Index h = side / 2;
    if (r == 0 && c == 0) return h * side + h;
    if (r == 0 && c == h) return h * side;
    if (r == h && c == 0) return h;
    return 0;  // (h, h) pairs back to (0, 0)
  }
  return pr * side + pc;
}

bool is_self_conjugate(Index n, int dims, Index side, Index w) {
  if (dims == 1) return w == 0 || (n % 2 == 0 && w == n / 2);
  const Index r = w / side;
  const Index c = w % side;
  return (side - r) % side == r && (side - c) % side == c;
}

}  // namespace

struct LinearOperator::Impl {
  OperatorKind kind;
  Index m = 0;
  Index n = 0;
  std::uint64_t seed = 0;

  // dense
  RowMajorMatrix entries;
  mutable std::once_flag gram_once;
  mutable Matrix gram;

  // restricted-fourier
  std::vector<Index> omega;    // canonical locations, sorted
  std::vector<Index> partner;  // conjugate partner per location
  std::vector<bool> special;   // true when the location packs two real rows
  int dims = 1;
  Index side = 0;
  std::unique_ptr<FftwPlanPair> plans;

  Vector fourier_apply(const Vector& x) const {
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    std::vector<std::complex<double>> in(static_cast<std::size_t>(n));
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) in[static_cast<std::size_t>(i)] = x[i];
    fftw_execute_dft(plans->forward, reinterpret_cast<fftw_complex*>(in.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    Vector y(m);
    const double sqrt2 = std::sqrt(2.0);
    for (std::size_t j = 0; j < omega.size(); ++j) {
      const auto cw = out[static_cast<std::size_t>(omega[j])] * scale;
      if (special[j]) {
        y[2 * static_cast<Index>(j)] = cw.real();
        y[2 * static_cast<Index>(j) + 1] =
            (out[static_cast<std::size_t>(partner[j])] * scale).real();
      } else {
        y[2 * static_cast<Index>(j)] = sqrt2 * cw.real();
        y[2 * static_cast<Index>(j) + 1] = sqrt2 * cw.imag();
      }
    }
    return y;
  }

  Vector fourier_adjoint(const Vector& v) const {
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    std::vector<std::complex<double>> spec(static_cast<std::size_t>(n), {0.0, 0.0});
    for (std::size_t j = 0; j < omega.size(); ++j) {
      const double v1 = v[2 * static_cast<Index>(j)];
      const double v2 = v[2 * static_cast<Index>(j) + 1];
      if (special[j]) {
        spec[static_cast<std::size_t>(omega[j])] = v1;
        spec[static_cast<std::size_t>(partner[j])] = v2;
      } else {
        spec[static_cast<std::size_t>(omega[j])] = {v1 * inv_sqrt2, v2 * inv_sqrt2};
        spec[static_cast<std::size_t>(partner[j])] = {v1 * inv_sqrt2, -v2 * inv_sqrt2};
      }
    }
    std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
    fftw_execute_dft(plans->backward, reinterpret_cast<fftw_complex*>(spec.data()),
                     reinterpret_cast<fftw_complex*>(out.data()));
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    Vector x(n);
    for (Index i = 0; i < n; ++i) x[i] = out[static_cast<std::size_t>(i)].real() * scale;
    return x;
  }
};

Index LinearOperator::rows() const { return impl_->m; }
Index LinearOperator::cols() const { return impl_->n; }
OperatorKind LinearOperator::kind() const { return impl_->kind; }
std::uint64_t LinearOperator::seed() const { return impl_->seed; }

Vector LinearOperator::apply(const Vector& x) const {
  if (x.size() != impl_->n) throw std::invalid_argument("apply: dimension mismatch");
  if (impl_->kind == OperatorKind::DenseGaussian) return impl_->entries * x;
  return impl_->fourier_apply(x);
}

Vector LinearOperator::adjoint(const Vector& v) const {
  if (v.size() != impl_->m) throw std::invalid_argument("adjoint: dimension mismatch");
  if (impl_->kind == OperatorKind::DenseGaussian) return impl_->entries.transpose() * v;
  return impl_->fourier_adjoint(v);
}

Vector LinearOperator::apply_sparse(const std::vector<long>& support,
                                    const Vector& values) const {
  if (static_cast<Index>(support.size()) != values.size())
    throw std::invalid_argument("apply_sparse: support/value size mismatch");
  if (impl_->kind == OperatorKind::DenseGaussian) {
    Vector y = Vector::Zero(impl_->m);
    for (std::size_t k = 0; k < support.size(); ++k)
      y += values[static_cast<Index>(k)] * impl_->entries.col(support[k]);
    return y;
  }
  Vector x = Vector::Zero(impl_->n);
  for (std::size_t k = 0; k < support.size(); ++k)
    x[support[k]] = values[static_cast<Index>(k)];
  return impl_->fourier_apply(x);
}

const RowMajorMatrix& LinearOperator::dense() const {
  if (impl_->kind != OperatorKind::DenseGaussian)
    throw std::logic_error("dense(): not a dense operator");
  return impl_->entries;
}

const Matrix* LinearOperator::gram() const {
  if (impl_->kind != OperatorKind::DenseGaussian || impl_->m > 2048) return nullptr;
  std::call_once(impl_->gram_once, [this] {
    impl_->gram.noalias() = impl_->entries * impl_->entries.transpose();
  });
  return &impl_->gram;
}

const std::vector<Index>& LinearOperator::omega() const {
  if (impl_->kind != OperatorKind::RestrictedFourier)
    throw std::logic_error("omega(): not a restricted-fourier operator");
  return impl_->omega;
}

int LinearOperator::fourier_dims() const {
  if (impl_->kind != OperatorKind::RestrictedFourier)
    throw std::logic_error("fourier_dims(): not a restricted-fourier operator");
  return impl_->dims;
}

LinearOperator make_sgr(Index m, Index n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw std::invalid_argument("make_sgr: m and N must be >= 1");
  auto impl = std::make_shared<LinearOperator::Impl>();
  impl->kind = OperatorKind::DenseGaussian;
  impl->m = m;
  impl->n = n;
  impl->seed = seed;
  impl->entries.resize(m, n);
  Rng rng(seed);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) impl->entries(i, j) = rng.gaussian();
  return LinearOperator(std::move(impl));
}

LinearOperator make_partial_fourier(Index n, std::vector<Index> omega,
                                    std::uint64_t seed, int dims) {
  if (n < 2) throw std::invalid_argument("make_partial_fourier: N must be >= 2");
  if (dims != 1 && dims != 2)
    throw std::invalid_argument("make_partial_fourier: dims must be 1 or 2");
  Index side = 0;
  if (dims == 2) {
    side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side * side != n)
      throw std::invalid_argument("make_partial_fourier: N must be a perfect square for 2-D");
  }
  if (omega.empty()) throw std::invalid_argument("make_partial_fourier: omega is empty");

  // Canonicalize and validate: in range, self-conjugate frequencies must have
  // a real partner to pack with, and no location may appear twice (a frequency
  // and its conjugate count as the same location).
  std::vector<Index> canon;
  canon.reserve(omega.size());
  for (Index w : omega) {
    if (w < 0 || w >= n)
      throw std::invalid_argument("make_partial_fourier: omega index out of range");
    const Index p = conj_partner(n, dims, side, w);
    if (p < 0)
      throw std::invalid_argument(
          "make_partial_fourier: frequency has no conjugate partner (odd length DC)");
    canon.push_back(std::min(w, p));
  }
  std::sort(canon.begin(), canon.end());
  if (std::adjacent_find(canon.begin(), canon.end()) != canon.end())
    throw std::invalid_argument(
        "make_partial_fourier: duplicate location (a frequency and its conjugate "
        "select the same measurement pair)");

  auto impl = std::make_shared<LinearOperator::Impl>();
  impl->kind = OperatorKind::RestrictedFourier;
  impl->n = n;
  impl->m = 2 * static_cast<Index>(canon.size());
  impl->seed = seed;
  impl->dims = dims;
  impl->side = side;
  impl->omega = std::move(canon);
  impl->partner.reserve(impl->omega.size());
  impl->special.reserve(impl->omega.size());
  for (Index w : impl->omega) {
    impl->partner.push_back(conj_partner(n, dims, side, w));
    impl->special.push_back(is_self_conjugate(n, dims, side, w));
  }
  impl->plans = std::make_unique<FftwPlanPair>(n, dims, side);
  return LinearOperator(std::move(impl));
}

Index fourier_location_count(Index n) { return n / 2; }

std::vector<Index> sample_fourier_omega(Index n, Index count, std::uint64_t seed, int dims) {
  Index side = 0;
  if (dims == 2) {
    side = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    if (side * side != n)
      throw std::invalid_argument("sample_fourier_omega: N must be a perfect square for 2-D");
  }
  std::vector<Index> pool;
  for (Index w = 0; w < n; ++w) {
    const Index p = conj_partner(n, dims, side, w);
    if (p >= 0 && std::min(w, p) == w) pool.push_back(w);
  }
  if (count < 1 || count > static_cast<Index>(pool.size()))
    throw std::invalid_argument("sample_fourier_omega: count out of range");
  Rng rng(seed);
  auto picks = rng.sample_without_replacement(static_cast<long>(pool.size()),
                                              static_cast<long>(count));
  std::vector<Index> omega;
  omega.reserve(picks.size());
  for (long idx : picks) omega.push_back(pool[static_cast<std::size_t>(idx)]);
  return omega;
}

FrameBounds estimate_frame_bounds(const LinearOperator& op, int iters) {
  if (iters < 1) throw std::invalid_argument("estimate_frame_bounds: iters must be >= 1");
  if (op.kind() == OperatorKind::RestrictedFourier) return {1.0, 1.0};
  Rng rng(derive_seed(op.seed(), {0x46424e4453ULL}));
  Vector v(op.rows());
  for (Index i = 0; i < v.size(); ++i) v[i] = rng.gaussian();
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vector w = op.apply(op.adjoint(v));
    lambda = w.norm();
    if (lambda == 0.0) break;  // operator annihilates the probe
    v = w / lambda;
  }
  return {0.0, lambda * 1.01};
}

nlohmann::json LinearOperator::to_json() const {
  nlohmann::json j;
  j["kind"] = impl_->kind == OperatorKind::DenseGaussian ? "dense-gaussian"
                                                         : "restricted-fourier";
  j["m"] = impl_->m;
  j["N"] = impl_->n;
  j["seed"] = impl_->seed;
  j["rng"] = rng_algorithm_name();
  if (impl_->kind == OperatorKind::RestrictedFourier) {
    j["omega"] = impl_->omega;
    j["dims"] = impl_->dims;
  }
  return j;
}

LinearOperator LinearOperator::from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "dense-gaussian" && kind != "restricted-fourier")
    throw std::invalid_argument("LinearOperator::from_json: unknown kind '" + kind + "'");
  const Index n = j.at("N").get<Index>();
  const std::uint64_t seed = j.at("seed").get<std::uint64_t>();
  if (kind == "dense-gaussian") return make_sgr(j.at("m").get<Index>(), n, seed);
  auto omega = j.at("omega").get<std::vector<Index>>();
  const int dims = j.value("dims", 1);
  return make_partial_fourier(n, std::move(omega), seed, dims);
}

}  // namespace bpdq
