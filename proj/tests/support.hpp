#pragma once

// Independent oracles and helpers for the tests. Nothing here calls into the
// library's linear algebra.

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "elmcsi/numerics.hpp"

namespace testing {

using elmcsi::Complex;
using elmcsi::ComplexMatrix;
using elmcsi::ComplexVector;
using elmcsi::Index;
using elmcsi::RealMatrix;

class TestRng {
 public:
  explicit TestRng(std::uint64_t seed) : gen_(seed) {}

  double normal() { return norm_(gen_); }
  double uniform() { return unif_(gen_); }

  ComplexMatrix complex(Index rows, Index cols) {
    ComplexMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = Complex(normal(), normal());
    return m;
  }
  ComplexVector complex_vec(Index n) { return complex(n, 1).col(0); }
  RealMatrix real(Index rows, Index cols) {
    RealMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
      for (Index j = 0; j < cols; ++j) m(i, j) = normal();
    return m;
  }
  // rows x cols with the given rank (rank <= min(rows, cols)).
  ComplexMatrix low_rank(Index rows, Index cols, Index rank) { return product(complex(rows, rank), complex(rank, cols)); }

  std::vector<std::uint8_t> bits(std::size_t n) {
    std::vector<std::uint8_t> b(n);
    for (auto& v : b) v = static_cast<std::uint8_t>(gen_() & 1U);
    return b;
  }

  static ComplexMatrix product(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out = ComplexMatrix::Zero(a.rows(), b.cols());
    for (Index i = 0; i < a.rows(); ++i)
      for (Index j = 0; j < b.cols(); ++j)
        for (Index k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
    return out;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> norm_{0.0, 1.0};
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
};

inline ComplexMatrix triple_loop(const ComplexMatrix& a, const ComplexMatrix& b) { return TestRng::product(a, b); }

inline ComplexMatrix adjoint(const ComplexMatrix& a) {
  ComplexMatrix out(a.cols(), a.rows());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out(j, i) = std::conj(a(i, j));
  return out;
}

inline double fro(const ComplexMatrix& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) s += std::norm(a(i, j));
  return std::sqrt(s);
}

inline double rel_err(const ComplexMatrix& got, const ComplexMatrix& want) {
  const double d = fro(want);
  return fro(got - want) / (d > 0 ? d : 1.0);
}

/// Gauss-Jordan inverse with partial pivoting.
inline ComplexMatrix inverse(ComplexMatrix a) {
  const Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("inverse: not square");
  ComplexMatrix inv = ComplexMatrix::Identity(n, n);
  for (Index c = 0; c < n; ++c) {
    Index piv = c;
    for (Index r = c + 1; r < n; ++r)
      if (std::abs(a(r, c)) > std::abs(a(piv, c))) piv = r;
    if (std::abs(a(piv, c)) == 0.0) throw std::runtime_error("inverse: singular");
    a.row(c).swap(a.row(piv));
    inv.row(c).swap(inv.row(piv));
    const Complex d = a(c, c);
    a.row(c) /= d;
    inv.row(c) /= d;
    for (Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const Complex f = a(r, c);
      if (f == Complex(0.0)) continue;
      a.row(r) -= f * a.row(c);
      inv.row(r) -= f * inv.row(c);
    }
  }
  return inv;
}

/// Pseudo-inverse of a full-rank matrix from the normal equations.
inline ComplexMatrix normal_equations_pinv(const ComplexMatrix& a) {
  const ComplexMatrix ah = adjoint(a);
  if (a.rows() >= a.cols()) return triple_loop(inverse(triple_loop(ah, a)), ah);
  return triple_loop(ah, inverse(triple_loop(a, ah)));
}

/// Walsh entry of the Sylvester-ordered Hadamard matrix: (-1)^popcount(i & j).
inline int walsh_entry(Index i, Index j) {
  auto v = static_cast<std::uint64_t>(i & j);
  int parity = 0;
  while (v) {
    parity ^= static_cast<int>(v & 1U);
    v >>= 1;
  }
  return parity ? -1 : 1;
}

/// k orthonormal vectors orthogonal to every column of `p`, by modified
/// Gram-Schmidt (two passes) applied to random vectors.
inline ComplexMatrix orthogonal_complement(const RealMatrix& p, Index k, TestRng& rng) {
  const Index m = p.rows();
  std::vector<ComplexVector> basis;
  for (Index j = 0; j < p.cols(); ++j) {
    ComplexVector v(m);
    for (Index i = 0; i < m; ++i) v(i) = p(i, j);
    basis.push_back(v);
  }
  auto orthonormalize = [&basis](ComplexVector v) {
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : basis) {
        Complex dot = 0.0;
        double nb = 0.0;
        for (Index i = 0; i < v.size(); ++i) {
          dot += std::conj(b(i)) * v(i);
          nb += std::norm(b(i));
        }
        for (Index i = 0; i < v.size(); ++i) v(i) -= dot / nb * b(i);
      }
    }
    double n = 0.0;
    for (Index i = 0; i < v.size(); ++i) n += std::norm(v(i));
    return ComplexVector(v / std::sqrt(n));
  };
  ComplexMatrix out(m, k);
  for (Index c = 0; c < k; ++c) {
    ComplexVector v = orthonormalize(rng.complex_vec(m));
    basis.push_back(v);
    out.col(c) = v;
  }
  return out;
}

}  // namespace testing
