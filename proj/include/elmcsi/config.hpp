#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "elmcsi/metrics.hpp"
#include "elmcsi/numerics.hpp"

namespace elmcsi::harness {

struct ExperimentConfig {
  Index m = 512;
  Index n = 16;
  double rho = 0.20;
  double eu = 1.0;
  Index nt = 10'000;
  std::vector<double> snr_grid_db = {0, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20};
  std::uint64_t seed = 1;
  double train_sigma2 = 0.0;
  std::uint64_t ber_error_floor = 1000;
  std::uint64_t ber_bit_cap = 100'000'000;
  std::uint64_t nmse_min_trials = 2000;
  std::vector<metrics::Method> methods = {metrics::Method::kElm, metrics::Method::kBaseline};
  // Ridge term for the output-weight solve; 0 is the plain pseudo-inverse.
  double regularization = 0.0;
  // Variance of an additive CN error on the uplink channel known at the base
  // station; 0 means perfect knowledge.
  double csi_error_var = 0.0;

  void validate() const;
  bool has_method(metrics::Method m) const;

  /// One `key = value` line per field in a fixed order, doubles with 17
  /// significant digits. Two configs with equal fields serialize identically.
  std::string canonical() const;
  /// 64-bit FNV-1a of canonical(), as 16 lowercase hex digits.
  std::string hash() const;
};

/// Sets one field from its config-file key. Throws on unknown keys or
/// malformed values.
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat `key = value` text; `#` starts a comment.
ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>");
ExperimentConfig load_config_file(const std::filesystem::path& path);

/// Comma-separated items, each a value or an inclusive start:step:stop
/// range: "0:2:20", "0,5,10", "0:4:20,inf". "inf" is a noise-free point.
std::vector<double> parse_snr_grid(const std::string& spec);
std::vector<metrics::Method> parse_methods(const std::string& spec);

}  // namespace elmcsi::harness
