#pragma once

// Data-parallel kernels. Each OpenMP kernel has a serial reference next to it
// that the tests compare against. The parallel versions split work into
// fixed-width column blocks, so the arithmetic performed for any output entry
// does not depend on the number of threads: results are bit-identical at any
// thread count.

#include <cstdint>
#include <functional>

#include "elmcsi/numerics.hpp"

namespace elmcsi::kernels {

inline constexpr Index kColumnBlock = 128;

void set_threads(int threads);
int max_threads();

/// G * Z for real G and complex Z.
ComplexMatrix real_times_complex(const RealMatrix& g, const ComplexMatrix& z);
ComplexMatrix real_times_complex_serial(const RealMatrix& g, const ComplexMatrix& z);

/// Y = A X + c 1^T.
ComplexMatrix affine_columns(const ComplexMatrix& a, const ComplexVector& c, const ComplexMatrix& x);
ComplexMatrix affine_columns_serial(const ComplexMatrix& a, const ComplexVector& c, const ComplexMatrix& x);

/// Runs body(i) for i in [begin, end). Iterations must be independent. If any
/// iteration throws, the exception from the lowest index is rethrown.
void parallel_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& body);
void serial_for(std::int64_t begin, std::int64_t end, const std::function<void(std::int64_t)>& body);

}  // namespace elmcsi::kernels
