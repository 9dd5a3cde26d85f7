// Serial reference kernels against the OpenMP versions.
//
//   bench_kernels [threads] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "elmcsi/kernels.hpp"
#include "elmcsi/numerics.hpp"

using namespace elmcsi;

namespace {

double best_ms(int reps, const std::function<void()>& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial_ms, double parallel_ms, double max_diff) {
  std::printf("%-22s serial %9.2f ms   openmp %9.2f ms   speedup %5.2fx   max|diff| %.2e\n", name, serial_ms,
              parallel_ms, serial_ms / parallel_ms, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : 0;
  const int reps = argc > 2 ? std::atoi(argv[2]) : 3;
  kernels::set_threads(threads);
  std::printf("threads: %d\n", kernels::max_threads());

  RngStream rng(7, 0);
  {
    // Hidden-layer product of a DET subnet at M = 128 over 2048 samples.
    const RealMatrix g = gaussian_real(rng, 1024, 128);
    const ComplexMatrix z = gaussian_complex(rng, 128 * 2048, 1.0).reshaped(128, 2048);
    ComplexMatrix a, b;
    const double s = best_ms(reps, [&] { a = kernels::real_times_complex_serial(g, z); });
    const double p = best_ms(reps, [&] { b = kernels::real_times_complex(g, z); });
    report("real_times_complex", s, p, (a - b).cwiseAbs().maxCoeff());
  }
  {
    // Fused DET subnet at M = 512 over 1024 coarse estimates.
    const ComplexMatrix a = gaussian_complex(rng, 512 * 512, 1.0).reshaped(512, 512);
    const ComplexVector c = gaussian_complex(rng, 512, 1.0);
    const ComplexMatrix x = gaussian_complex(rng, 512 * 1024, 1.0).reshaped(512, 1024);
    ComplexMatrix y1, y2;
    const double s = best_ms(reps, [&] { y1 = kernels::affine_columns_serial(a, c, x); });
    const double p = best_ms(reps, [&] { y2 = kernels::affine_columns(a, c, x); });
    report("affine_columns", s, p, (y1 - y2).cwiseAbs().maxCoeff());
  }
  {
    // Independent per-trial work of the Monte-Carlo loop.
    const std::int64_t n = 256;
    std::vector<double> out1(n), out2(n);
    auto body = [](std::vector<double>& out) {
      return [&out](std::int64_t i) {
        RngStream r(11, static_cast<std::uint64_t>(i));
        out[static_cast<std::size_t>(i)] = gaussian_complex(r, 16 * 512, 1.0).squaredNorm();
      };
    };
    const double s = best_ms(reps, [&] { kernels::serial_for(0, n, body(out1)); });
    const double p = best_ms(reps, [&] { kernels::parallel_for(0, n, body(out2)); });
    double diff = 0.0;
    for (std::int64_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(out1[i] - out2[i]));
    report("trial draws", s, p, diff);
  }
  return 0;
}
