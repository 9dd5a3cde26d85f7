#include "elmcsi/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace elmcsi::metrics {

double snr_to_sigma2(double snr_db, double eu) {
  if (!(eu > 0.0)) throw std::invalid_argument("snr_to_sigma2: Eu must be positive");
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  return eu * std::pow(10.0, -snr_db / 10.0);
}

double nmse(const ComplexVector& h_true, const ComplexVector& h_est) {
  if (h_true.size() != h_est.size()) {
    throw DimensionError("nmse: lengths " + std::to_string(h_true.size()) + " and " + std::to_string(h_est.size()));
  }
  const double denom = h_true.squaredNorm();
  if (!(denom > 0.0)) throw std::domain_error("nmse: reference vector has zero norm");
  return (h_est - h_true).squaredNorm() / denom;
}

const char* to_string(Method m) { return m == Method::kElm ? "elm" : "baseline"; }

Method parse_method(const std::string& name) {
  if (name == "elm") return Method::kElm;
  if (name == "baseline") return Method::kBaseline;
  throw std::invalid_argument("unknown method '" + name + "' (expected elm or baseline)");
}

void MetricsRecord::add_nmse(double value) {
  nmse_sum += value;
  ++nmse_count;
}

void MetricsRecord::merge(const MetricsRecord& other) {
  nmse_sum += other.nmse_sum;
  nmse_count += other.nmse_count;
  bit_errors += other.bit_errors;
  bits_total += other.bits_total;
}

double MetricsRecord::nmse_mean() const {
  return nmse_count ? nmse_sum / static_cast<double>(nmse_count) : std::numeric_limits<double>::quiet_NaN();
}

double MetricsRecord::ber() const {
  return bits_total ? static_cast<double>(bit_errors) / static_cast<double>(bits_total)
                    : std::numeric_limits<double>::quiet_NaN();
}

bool ber_done(const MetricsRecord& rec, const BerStopRule& rule) {
  return rec.bit_errors >= rule.error_floor || rec.bits_total >= rule.bit_cap;
}

bool accumulate_ber(MetricsRecord& rec, std::span<const std::uint8_t> tx_bits, std::span<const std::uint8_t> rx_bits,
                    const BerStopRule& rule) {
  if (tx_bits.size() != rx_bits.size()) {
    throw DimensionError("accumulate_ber: " + std::to_string(tx_bits.size()) + " sent bits vs " +
                         std::to_string(rx_bits.size()) + " received");
  }
  std::uint64_t errors = 0;
  for (std::size_t i = 0; i < tx_bits.size(); ++i) errors += (tx_bits[i] != 0) != (rx_bits[i] != 0);
  rec.bit_errors += errors;
  rec.bits_total += tx_bits.size();
  return ber_done(rec, rule);
}

OverheadReport overhead_report(std::uint64_t m, std::uint64_t n) {
  if (m == 0 || n == 0) throw std::invalid_argument("overhead_report: M and N must be positive");
  const std::uint64_t sq = m * m + n * n;
  OverheadReport r;
  r.m = m;
  r.n = n;
  // Phi of each CSI subnet is N x 8N and of each detection subnet M x 8M.
  r.proposed_params = 16 * sq;
  // Two 2x-wide real subnets per task: weights both ways plus hidden and
  // output biases.
  r.ref_params = 128 * sq + 36 * (m + n);
  // Complex Phi entries take 2 floats; the shared pool adds 8M^2 floats.
  r.proposed_bytes = r.proposed_params * 2 * 4 + 8 * m * m * 4;
  r.ref_bytes = r.ref_params * 4;
  r.proposed_mults = 96 * sq;
  r.proposed_adds = 96 * sq - 4 * (m + n);
  r.ref_mults = 128 * sq;
  r.ref_adds = 128 * sq;
  return r;
}

std::string format_megabytes(std::uint64_t bytes) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", static_cast<double>(bytes) / kBytesPerMegabyte);
  return buf;
}

std::string format_count(std::uint64_t v) {
  const std::string digits = std::to_string(v);
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i != 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

}  // namespace elmcsi::metrics
