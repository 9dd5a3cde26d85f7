#include "elmcsi/kernels.hpp"

#include <omp.h>

#include <exception>
#include <mutex>

namespace elmcsi::kernels {

void set_threads(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

namespace {

std::int64_t block_count(Index cols) { return (cols + kColumnBlock - 1) / kColumnBlock; }

}  // namespace

ComplexMatrix real_times_complex(const RealMatrix& g, const ComplexMatrix& z) {
  if (g.cols() != z.rows()) {
    throw DimensionError("real_times_complex: " + shape_str(g.rows(), g.cols()) + " times " +
                         shape_str(z.rows(), z.cols()));
  }
  ComplexMatrix out(g.rows(), z.cols());
  const std::int64_t blocks = block_count(z.cols());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const Index c0 = b * kColumnBlock;
    const Index w = std::min<Index>(kColumnBlock, z.cols() - c0);
    const RealMatrix re = g * z.middleCols(c0, w).real();
    const RealMatrix im = g * z.middleCols(c0, w).imag();
    out.middleCols(c0, w).real() = re;
    out.middleCols(c0, w).imag() = im;
  }
  return out;
}

ComplexMatrix real_times_complex_serial(const RealMatrix& g, const ComplexMatrix& z) {
  if (g.cols() != z.rows()) {
    throw DimensionError("real_times_complex_serial: " + shape_str(g.rows(), g.cols()) + " times " +
                         shape_str(z.rows(), z.cols()));
  }
  ComplexMatrix out = ComplexMatrix::Zero(g.rows(), z.cols());
  for (Index j = 0; j < z.cols(); ++j) {
    for (Index k = 0; k < g.cols(); ++k) {
      const Complex zkj = z(k, j);
      for (Index i = 0; i < g.rows(); ++i) out(i, j) += g(i, k) * zkj;
    }
  }
  return out;
}

ComplexMatrix affine_columns(const ComplexMatrix& a, const ComplexVector& c, const ComplexMatrix& x) {
  if (a.cols() != x.rows() || a.rows() != c.size()) {
    throw DimensionError("affine_columns: A " + shape_str(a.rows(), a.cols()) + ", c " + std::to_string(c.size()) +
                         ", X " + shape_str(x.rows(), x.cols()));
  }
  ComplexMatrix out(a.rows(), x.cols());
  const std::int64_t blocks = block_count(x.cols());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const Index c0 = b * kColumnBlock;
    const Index w = std::min<Index>(kColumnBlock, x.cols() - c0);
    out.middleCols(c0, w).noalias() = a * x.middleCols(c0, w);
    out.middleCols(c0, w).colwise() += c;
  }
  return out;
}

ComplexMatrix affine_columns_serial(const ComplexMatrix& a, const ComplexVector& c, const ComplexMatrix& x) {
  if (a.cols() != x.rows() || a.rows() != c.size()) {
    throw DimensionError("affine_columns_serial: A " + shape_str(a.rows(), a.cols()) + ", c " +
                         std::to_string(c.size()) + ", X " + shape_str(x.rows(), x.cols()));
  }
  ComplexMatrix out(a.rows(), x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      Complex acc = c(i);
      for (Index k = 0; k < a.cols(); ++k) acc += a(i, k) * x(k, j);
      out(i, j) = acc;
    }
  }
  return out;
}

void parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& body) {
  // Exceptions cannot cross the OpenMP region; keep the one from the lowest
  // index so the reported failure does not depend on scheduling.
  std::exception_ptr first;
  std::int64_t first_index = end;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = begin; i < end; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < first_index) {
        first_index = i;
        first = std::current_exception();
      }
    }
  }
  if (first) std::rethrow_exception(first);
}

void serial_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& body) {
  for (std::int64_t i = begin; i < end; ++i) body(i);
}

}  // namespace elmcsi::kernels
