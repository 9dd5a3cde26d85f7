#pragma once

// Sweep results as CSV or JSON.
//
// CSV: header `method,snr_db,nmse_linear,nmse_db,ber,trials,bits,config_hash`
// then one line per row. JSON: an array of objects with the same keys.
// Reals carry 9 significant digits. Non-finite reals are written as inf,
// -inf or nan; JSON has no literal for them, so there they become strings.

#include <filesystem>
#include <string>
#include <vector>

#include "elmcsi/harness.hpp"

namespace elmcsi::harness {

enum class ResultFormat { kCsv, kJson };

ResultFormat parse_format(const std::string& name);
/// From the extension: .json -> JSON, anything else -> CSV.
ResultFormat format_for_path(const std::filesystem::path& path);

std::string results_to_csv(const std::vector<ResultRow>& rows);
std::string results_to_json(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_results_csv(const std::string& text);
std::vector<ResultRow> parse_results_json(const std::string& text);

/// Throws std::runtime_error naming `path` on I/O failure.
void emit_results(const std::vector<ResultRow>& rows, ResultFormat format, const std::filesystem::path& path);
std::vector<ResultRow> load_results(const std::filesystem::path& path);

/// "%.9g", with inf / -inf / nan for non-finite values.
std::string format_real(double v);
double parse_real(const std::string& s);

}  // namespace elmcsi::harness
