#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "elmcsi/numerics.hpp"

namespace elmcsi::metrics {

/// sigma^2 = Eu * 10^(-snr_db / 10). +inf dB maps to 0.
double snr_to_sigma2(double snr_db, double eu);

/// ||h_est - h_true||^2 / ||h_true||^2 for one realization.
double nmse(const ComplexVector& h_true, const ComplexVector& h_est);

enum class Method { kElm, kBaseline };

const char* to_string(Method m);
Method parse_method(const std::string& name);

struct BerStopRule {
  std::uint64_t error_floor = 1000;
  std::uint64_t bit_cap = 100'000'000;
};

/// Sufficient statistics for one (SNR, method) cell. Merging is a sum, so it
/// is associative and commutative.
struct MetricsRecord {
  double snr_db = 0.0;
  Method method = Method::kElm;
  double nmse_sum = 0.0;
  std::uint64_t nmse_count = 0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits_total = 0;

  void add_nmse(double value);
  void merge(const MetricsRecord& other);
  double nmse_mean() const;
  double ber() const;
};

bool ber_done(const MetricsRecord& rec, const BerStopRule& rule);

/// Adds the error and bit counts of one comparison and returns true once the
/// record has enough errors or has reached the bit cap.
bool accumulate_ber(MetricsRecord& rec, std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits,
                    const BerStopRule& rule = {});

/// Closed-form parameter, storage and operation counts for the ELM cascade
/// ("proposed") and the real-valued deep network it replaces ("ref").
/// Storage assumes 4-byte floats; complex entries count twice.
struct OverheadReport {
  std::uint64_t m = 0;
  std::uint64_t n = 0;
  std::uint64_t proposed_params = 0;
  std::uint64_t ref_params = 0;
  std::uint64_t proposed_bytes = 0;
  std::uint64_t ref_bytes = 0;
  std::uint64_t proposed_mults = 0;
  std::uint64_t ref_mults = 0;
  std::uint64_t proposed_adds = 0;
  std::uint64_t ref_adds = 0;
};

OverheadReport overhead_report(std::uint64_t m, std::uint64_t n);

inline constexpr double kBytesPerMegabyte = 1024.0 * 1024.0;

/// Bytes in MB (1024^2) with three decimals, e.g. "40.031".
std::string format_megabytes(std::uint64_t bytes);
/// Thousands-separated integer, e.g. "4,198,400".
std::string format_count(std::uint64_t v);

}  // namespace elmcsi::metrics
