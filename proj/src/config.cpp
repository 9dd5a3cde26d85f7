#include "elmcsi/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "elmcsi/phy.hpp"

namespace elmcsi::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) parts.push_back(trim(cur));
  return parts;
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  }
  if (pos != v.size()) throw std::invalid_argument("config: " + key + " expects a number, got '" + v + "'");
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  // Accept 1e8-style values for the large counters.
  const double d = to_double(key, v);
  if (d < 0.0 || d != std::floor(d) || d > 1.8e19) {
    throw std::invalid_argument("config: " + key + " expects a non-negative integer, got '" + v + "'");
  }
  return static_cast<std::uint64_t>(d);
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!phy::is_power_of_two(m)) throw std::invalid_argument("config: M = " + std::to_string(m) + " is not a power of two");
  if (n <= 0 || n >= m) throw std::invalid_argument("config: need 0 < N < M");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("config: rho must lie in [0, 1]");
  if (!(eu > 0.0)) throw std::invalid_argument("config: Eu must be positive");
  if (nt < 2) throw std::invalid_argument("config: Nt must be at least 2");
  if (snr_grid_db.empty()) throw std::invalid_argument("config: empty SNR grid");
  for (double s : snr_grid_db) {
    if (std::isnan(s) || (std::isinf(s) && s < 0.0)) throw std::invalid_argument("config: invalid SNR point");
  }
  if (!(train_sigma2 >= 0.0)) throw std::invalid_argument("config: train_sigma2 must be non-negative");
  if (methods.empty()) throw std::invalid_argument("config: no methods selected");
  if (ber_bit_cap == 0) throw std::invalid_argument("config: ber_bit_cap must be positive");
  if (!(regularization >= 0.0)) throw std::invalid_argument("config: regularization must be non-negative");
  if (!(csi_error_var >= 0.0)) throw std::invalid_argument("config: csi_error_var must be non-negative");
  if (has_method(metrics::Method::kBaseline) && (rho <= 0.0 || rho >= 1.0)) {
    throw std::invalid_argument("config: the baseline receiver needs 0 < rho < 1");
  }
}

bool ExperimentConfig::has_method(metrics::Method m) const {
  return std::find(methods.begin(), methods.end(), m) != methods.end();
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  os << "M = " << m << "\n";
  os << "N = " << n << "\n";
  os << "rho = " << fmt17(rho) << "\n";
  os << "Eu = " << fmt17(eu) << "\n";
  os << "Nt = " << nt << "\n";
  os << "snr =";
  for (std::size_t i = 0; i < snr_grid_db.size(); ++i) os << (i ? ", " : " ") << fmt17(snr_grid_db[i]);
  os << "\n";
  os << "seed = " << seed << "\n";
  os << "train_sigma2 = " << fmt17(train_sigma2) << "\n";
  os << "ber_error_floor = " << ber_error_floor << "\n";
  os << "ber_bit_cap = " << ber_bit_cap << "\n";
  os << "nmse_min_trials = " << nmse_min_trials << "\n";
  os << "methods =";
  for (std::size_t i = 0; i < methods.size(); ++i) os << (i ? ", " : " ") << metrics::to_string(methods[i]);
  os << "\n";
  os << "regularization = " << fmt17(regularization) << "\n";
  os << "csi_error_var = " << fmt17(csi_error_var) << "\n";
  return os.str();
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<double> parse_snr_grid(const std::string& spec) {
  const std::string s = trim(spec);
  if (s.empty()) throw std::invalid_argument("snr grid: empty");
  std::vector<double> grid;
  for (const auto& item : split(s, ',')) {
    if (item.find(':') != std::string::npos) {
      const auto parts = split(item, ':');
      if (parts.size() != 3) throw std::invalid_argument("snr grid: expected start:step:stop, got '" + item + "'");
      const double start = to_double("snr", parts[0]);
      const double step = to_double("snr", parts[1]);
      const double stop = to_double("snr", parts[2]);
      if (!(step > 0.0) || stop < start) throw std::invalid_argument("snr grid: bad range '" + item + "'");
      const auto count = static_cast<long>(std::floor((stop - start) / step + 1e-9)) + 1;
      for (long i = 0; i < count; ++i) grid.push_back(start + static_cast<double>(i) * step);
    } else if (item == "inf" || item == "+inf") {
      grid.push_back(std::numeric_limits<double>::infinity());
    } else {
      grid.push_back(to_double("snr", item));
    }
  }
  return grid;
}

std::vector<metrics::Method> parse_methods(const std::string& spec) {
  std::vector<metrics::Method> out;
  for (const auto& p : split(spec, ',')) {
    if (p.empty()) continue;
    const auto m = metrics::parse_method(p);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw std::invalid_argument("methods: none given");
  return out;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (key == "M") {
    cfg.m = static_cast<Index>(to_count(key, v));
  } else if (key == "N") {
    cfg.n = static_cast<Index>(to_count(key, v));
  } else if (key == "rho") {
    cfg.rho = to_double(key, v);
  } else if (key == "Eu") {
    cfg.eu = to_double(key, v);
  } else if (key == "Nt") {
    cfg.nt = static_cast<Index>(to_count(key, v));
  } else if (key == "snr") {
    cfg.snr_grid_db = parse_snr_grid(v);
  } else if (key == "seed") {
    cfg.seed = to_count(key, v);
  } else if (key == "train_sigma2") {
    cfg.train_sigma2 = to_double(key, v);
  } else if (key == "ber_error_floor") {
    cfg.ber_error_floor = to_count(key, v);
  } else if (key == "ber_bit_cap") {
    cfg.ber_bit_cap = to_count(key, v);
  } else if (key == "nmse_min_trials") {
    cfg.nmse_min_trials = to_count(key, v);
  } else if (key == "methods") {
    cfg.methods = parse_methods(v);
  } else if (key == "regularization") {
    cfg.regularization = to_double(key, v);
  } else if (key == "csi_error_var") {
    cfg.csi_error_var = to_double(key, v);
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  ExperimentConfig cfg;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    try {
      apply_config_entry(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream text;
  text << is.rdbuf();
  return parse_config(text.str(), path.string());
}

}  // namespace elmcsi::harness
