#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace elmcsi {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// SVD backend failure. Carries the shape and backend status so the caller can
/// report which solve broke.
class SvdError : public std::runtime_error {
 public:
  SvdError(const std::string& algorithm, Index rows, Index cols, int status);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  int status() const { return status_; }

 private:
  Index rows_;
  Index cols_;
  int status_;
};

std::string shape_str(Index rows, Index cols);

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

struct PinvOptions {
  // Absolute singular-value cutoff. Takes precedence over relative_tol.
  std::optional<double> tol;
  // Cutoff as a fraction of the largest singular value. When neither field is
  // set the cutoff is sigma_max * max(rows, cols) * machine epsilon.
  std::optional<double> relative_tol;
  // Ridge term lambda: retained singular values invert as s / (s^2 + lambda).
  double regularization = 0.0;
};

/// Moore-Penrose pseudo-inverse via SVD. Tall and wide inputs are first
/// reduced with a Householder QR so the SVD runs on a square factor.
ComplexMatrix pinv(const ComplexMatrix& a, const PinvOptions& opts = {});

/// Singular values of `a`, descending.
RealVector singular_values(const ComplexMatrix& a);

/// Returns T * (A Z)^+ without forming A Z.
///
/// A is a real p x q matrix with p >= q, Z is q x n and T is m x n. The thin
/// SVD A = U S V^T gives A Z = U K with K = S V^T Z; U has orthonormal columns
/// so (A Z)^+ = K^+ U^T and the singular values of K are those of A Z. The
/// default cutoff is computed with the dimensions of A Z, so the result equals
/// T * pinv(A * Z) up to rounding.
ComplexMatrix right_lstsq_factored(const ComplexMatrix& t, const RealMatrix& a, const ComplexMatrix& z,
                                   const PinvOptions& opts = {});

/// Reproducible random stream. Output depends only on (seed, stream); each
/// Monte-Carlo worker owns its own instance.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  double normal();
  std::uint64_t next_u64() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer, used to derive independent seeds from a root seed.
std::uint64_t mix_seed(std::uint64_t x);

/// i.i.d. CN(0, variance): real and imaginary parts each N(0, variance / 2).
ComplexVector gaussian_complex(RngStream& rng, Index n, double variance);

/// i.i.d. real N(0, 1) entries, drawn in row-major order.
RealMatrix gaussian_real(RngStream& rng, Index rows, Index cols);

/// Same draw as gaussian_real, embedded with zero imaginary parts.
ComplexMatrix gaussian_real_matrix(RngStream& rng, Index rows, Index cols);

}  // namespace elmcsi
