#include "elmcsi/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "elmcsi/kernels.hpp"

namespace elmcsi {

SvdError::SvdError(const std::string& algorithm, Index rows, Index cols, int status)
    : std::runtime_error(algorithm + " failed to converge on a " + shape_str(rows, cols) +
                         " matrix (backend status " + std::to_string(status) + ")"),
      rows_(rows),
      cols_(cols),
      status_(status) {}

std::string shape_str(Index rows, Index cols) {
  return std::to_string(rows) + "x" + std::to_string(cols);
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: " + shape_str(a.rows(), a.cols()) + " times " + shape_str(b.rows(), b.cols()));
  }
  return a * b;
}

namespace {

double cutoff_for(const RealVector& s, Index rows, Index cols, const PinvOptions& opts) {
  if (opts.tol) {
    if (*opts.tol < 0.0) throw std::invalid_argument("pinv: negative tolerance");
    return *opts.tol;
  }
  const double smax = s.size() > 0 ? s(0) : 0.0;
  const double rel = opts.relative_tol.value_or(static_cast<double>(std::max(rows, cols)) *
                                                std::numeric_limits<double>::epsilon());
  return smax * rel;
}

// Pseudo-inverse of a square matrix; the cutoff is computed against the
// caller's original dimensions.
ComplexMatrix pinv_square(const ComplexMatrix& a, Index rows, Index cols, const PinvOptions& opts) {
  Eigen::BDCSVD<ComplexMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw SvdError("BDCSVD", a.rows(), a.cols(), static_cast<int>(svd.info()));
  }
  const RealVector& s = svd.singularValues();
  const double cut = cutoff_for(s, rows, cols, opts);
  RealVector inv = RealVector::Zero(s.size());
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > cut && s(i) > 0.0) {
      inv(i) = opts.regularization > 0.0 ? s(i) / (s(i) * s(i) + opts.regularization) : 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

ComplexMatrix pinv_tall(const ComplexMatrix& a, Index rows, Index cols, const PinvOptions& opts) {
  if (a.rows() == a.cols()) return pinv_square(a, rows, cols, opts);
  // a = Q R with Q having orthonormal columns, so a^+ = R^+ Q^H.
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  const Index n = a.cols();
  ComplexMatrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(a.rows(), n);
  return pinv_square(r, rows, cols, opts) * q.adjoint();
}

}  // namespace

ComplexMatrix pinv(const ComplexMatrix& a, const PinvOptions& opts) {
  if (a.size() == 0) throw DimensionError("pinv: empty matrix");
  if (opts.regularization < 0.0) throw std::invalid_argument("pinv: negative regularization");
  if (a.rows() < a.cols()) {
    ComplexMatrix ah = a.adjoint();
    return pinv_tall(ah, a.rows(), a.cols(), opts).adjoint();
  }
  return pinv_tall(a, a.rows(), a.cols(), opts);
}

RealVector singular_values(const ComplexMatrix& a) {
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  if (svd.info() != Eigen::Success) {
    throw SvdError("BDCSVD", a.rows(), a.cols(), static_cast<int>(svd.info()));
  }
  return svd.singularValues();
}

ComplexMatrix right_lstsq_factored(const ComplexMatrix& t, const RealMatrix& a, const ComplexMatrix& z,
                                   const PinvOptions& opts) {
  if (a.cols() != z.rows() || t.cols() != z.cols()) {
    throw DimensionError("right_lstsq_factored: T " + shape_str(t.rows(), t.cols()) + ", A " +
                         shape_str(a.rows(), a.cols()) + ", Z " + shape_str(z.rows(), z.cols()));
  }
  if (a.rows() < a.cols()) throw DimensionError("right_lstsq_factored: A must have rows >= cols");

  Eigen::BDCSVD<RealMatrix> svd_a(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd_a.info() != Eigen::Success) {
    throw SvdError("BDCSVD", a.rows(), a.cols(), static_cast<int>(svd_a.info()));
  }
  const RealMatrix g = svd_a.singularValues().asDiagonal() * svd_a.matrixV().transpose();
  const ComplexMatrix k = kernels::real_times_complex(g, z);

  PinvOptions inner = opts;
  if (!inner.tol && !inner.relative_tol) {
    inner.relative_tol = static_cast<double>(std::max(a.rows(), z.cols())) * std::numeric_limits<double>::epsilon();
  }
  const ComplexMatrix tk = t * pinv(k, inner);
  return tk * svd_a.matrixU().transpose();
}

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

namespace {

std::seed_seq make_seed_seq(std::uint64_t seed, std::uint64_t stream) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  return std::seed_seq{lo(seed), hi(seed), lo(stream), hi(stream), 0x5eedu};
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {
  auto seq = make_seed_seq(seed, stream);
  engine_.seed(seq);
}

double RngStream::normal() { return normal_(engine_); }

ComplexVector gaussian_complex(RngStream& rng, Index n, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_complex: variance must be positive");
  if (n < 0) throw std::invalid_argument("gaussian_complex: negative length");
  const double scale = std::sqrt(variance / 2.0);
  ComplexVector v(n);
  for (Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v(i) = Complex(scale * re, scale * im);
  }
  return v;
}

RealMatrix gaussian_real(RngStream& rng, Index rows, Index cols) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("gaussian_real: rows and cols must be positive");
  RealMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  }
  return m;
}

ComplexMatrix gaussian_real_matrix(RngStream& rng, Index rows, Index cols) {
  return gaussian_real(rng, rows, cols).cast<Complex>();
}

}  // namespace elmcsi
