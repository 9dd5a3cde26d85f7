#include "elmcsi/results_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace elmcsi::harness {

namespace {

constexpr const char* kHeader = "method,snr_db,nmse_linear,nmse_db,ber,trials,bits,config_hash";

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::uint64_t parse_count(const std::string& s) {
  std::size_t pos = 0;
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("results: bad count '" + s + "'");
  return v;
}

nlohmann::ordered_json real_to_json(double v) {
  if (!std::isfinite(v)) return format_real(v);
  // Round to 9 significant digits so both formats carry the same value.
  return parse_real(format_real(v));
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_string()) return parse_real(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

ResultFormat parse_format(const std::string& name) {
  if (name == "csv") return ResultFormat::kCsv;
  if (name == "json") return ResultFormat::kJson;
  throw std::invalid_argument("unknown result format '" + name + "' (expected csv or json)");
}

ResultFormat format_for_path(const std::filesystem::path& path) {
  return path.extension() == ".json" ? ResultFormat::kJson : ResultFormat::kCsv;
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

double parse_real(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("results: bad number '" + s + "'");
  return v;
}

std::string results_to_csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  os << kHeader << "\n";
  for (const auto& r : rows) {
    os << r.method << ',' << format_real(r.snr_db) << ',' << format_real(r.nmse_linear) << ','
       << format_real(r.nmse_db) << ',' << format_real(r.ber) << ',' << r.trials << ',' << r.bits << ','
       << r.config_hash << "\n";
  }
  return os.str();
}

std::string results_to_json(const std::vector<ResultRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({
        {"method", r.method},
        {"snr_db", real_to_json(r.snr_db)},
        {"nmse_linear", real_to_json(r.nmse_linear)},
        {"nmse_db", real_to_json(r.nmse_db)},
        {"ber", real_to_json(r.ber)},
        {"trials", r.trials},
        {"bits", r.bits},
        {"config_hash", r.config_hash},
    });
  }
  return arr.dump(2) + "\n";
}

std::vector<ResultRow> parse_results_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("results: empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw std::invalid_argument("results: unexpected CSV header '" + line + "'");
  std::vector<ResultRow> rows;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) {
      throw std::invalid_argument("results: line " + std::to_string(lineno) + " has " + std::to_string(f.size()) +
                                  " fields, expected 8");
    }
    ResultRow r;
    r.method = f[0];
    r.snr_db = parse_real(f[1]);
    r.nmse_linear = parse_real(f[2]);
    r.nmse_db = parse_real(f[3]);
    r.ber = parse_real(f[4]);
    r.trials = parse_count(f[5]);
    r.bits = parse_count(f[6]);
    r.config_hash = f[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ResultRow> parse_results_json(const std::string& text) {
  const auto arr = nlohmann::json::parse(text);
  if (!arr.is_array()) throw std::invalid_argument("results: JSON root must be an array");
  std::vector<ResultRow> rows;
  for (const auto& o : arr) {
    ResultRow r;
    r.method = o.at("method").get<std::string>();
    r.snr_db = real_from_json(o.at("snr_db"));
    r.nmse_linear = real_from_json(o.at("nmse_linear"));
    r.nmse_db = real_from_json(o.at("nmse_db"));
    r.ber = real_from_json(o.at("ber"));
    r.trials = o.at("trials").get<std::uint64_t>();
    r.bits = o.at("bits").get<std::uint64_t>();
    r.config_hash = o.at("config_hash").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

void emit_results(const std::vector<ResultRow>& rows, ResultFormat format, const std::filesystem::path& path) {
  if (rows.empty()) throw std::invalid_argument("emit_results: no rows to write to " + path.string());
  const std::string text = format == ResultFormat::kJson ? results_to_json(rows) : results_to_csv(rows);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

std::vector<ResultRow> load_results(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  try {
    return format_for_path(path) == ResultFormat::kJson ? parse_results_json(text.str())
                                                        : parse_results_csv(text.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace elmcsi::harness
