#include "elmcsi/cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "elmcsi/config.hpp"
#include "elmcsi/harness.hpp"
#include "elmcsi/kernels.hpp"
#include "elmcsi/metrics.hpp"
#include "elmcsi/model_io.hpp"
#include "elmcsi/results_io.hpp"
#include "elmcsi/signal_io.hpp"

namespace elmcsi {

namespace {

constexpr std::uint64_t kRecordStreams = 0x3000000000000000ULL;

// Config-key overrides collected from flags; applied after the file.
struct Overrides {
  std::string config_path;
  std::map<std::string, std::string> values;

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { values[key] = v; }, help);
  }

  harness::ExperimentConfig resolve() const {
    harness::ExperimentConfig cfg;
    if (!config_path.empty()) cfg = harness::load_config_file(config_path);
    for (const auto& [k, v] : values) harness::apply_config_entry(cfg, k, v);
    cfg.validate();
    return cfg;
  }
};

void add_model_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "key = value config file");
  o.add(app, "--M", "M", "spreading length, a power of two");
  o.add(app, "--N", "N", "CSI length");
  o.add(app, "--rho", "rho", "power proportional coefficient");
  o.add(app, "--eu", "Eu", "transmit power");
  o.add(app, "--Nt", "Nt", "training samples per block");
  o.add(app, "--seed", "seed", "experiment seed");
  o.add(app, "--train-sigma2", "train_sigma2", "noise variance of the training data");
  o.add(app, "--regularization", "regularization", "ridge term for the output-weight solve");
  o.add(app, "--csi-error-var", "csi_error_var", "variance of the uplink-CSI error at the base station");
}

nlohmann::json complex_array(const ComplexVector& v) {
  nlohmann::json a = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
  return a;
}

std::string bit_string(const phy::Bits& bits) {
  std::string s(bits.size(), '0');
  for (std::size_t i = 0; i < bits.size(); ++i) s[i] = bits[i] ? '1' : '0';
  return s;
}

void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + path);
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cascaded ELM receiver for superimposed CSI feedback"};
  app.name("elmcsi");
  app.require_subcommand(1);

  // sweep
  Overrides sweep_o;
  std::string sweep_out;
  std::string sweep_format;
  std::string sweep_model;
  int sweep_threads = 0;
  bool sweep_quiet = false;
  auto* sweep = app.add_subcommand("sweep", "train once, then measure NMSE and BER over an SNR grid");
  add_model_flags(sweep, sweep_o);
  sweep_o.add(sweep, "--snr", "snr", "SNR grid in dB: start:step:stop or a comma list");
  sweep_o.add(sweep, "--methods", "methods", "comma list of elm, baseline");
  sweep_o.add(sweep, "--min-trials", "nmse_min_trials", "minimum trials per SNR point");
  sweep_o.add(sweep, "--error-floor", "ber_error_floor", "bit errors before a BER point stops");
  sweep_o.add(sweep, "--bit-cap", "ber_bit_cap", "bit budget per BER point");
  sweep->add_option("--out", sweep_out, "result file (stdout if omitted)");
  sweep->add_option("--format", sweep_format, "csv or json (default from the --out extension)");
  sweep->add_option("--model", sweep_model, "use a trained model file instead of training");
  sweep->add_option("--threads", sweep_threads, "worker threads (0 = OpenMP default)");
  sweep->add_flag("--quiet", sweep_quiet, "no progress output");

  // overhead
  std::uint64_t oh_m = 512;
  std::uint64_t oh_n = 16;
  auto* overhead = app.add_subcommand("overhead", "closed-form parameter, storage and operation counts");
  overhead->add_option("--M", oh_m, "spreading length")->capture_default_str();
  overhead->add_option("--N", oh_n, "CSI length")->capture_default_str();

  // train
  Overrides train_o;
  std::string train_out;
  int train_threads = 0;
  auto* train = app.add_subcommand("train", "train the cascade and write the model file");
  add_model_flags(train, train_o);
  train->add_option("--out", train_out, "model file")->required();
  train->add_option("--threads", train_threads, "worker threads (0 = OpenMP default)");

  // infer
  std::string infer_model;
  std::string infer_input;
  std::string infer_out;
  bool infer_soft = false;
  auto* infer = app.add_subcommand("infer", "run a trained model over a recorded signal file");
  infer->add_option("--model", infer_model, "model file")->required();
  infer->add_option("--input", infer_input, "recorded signal file")->required();
  infer->add_option("--out", infer_out, "JSON output (stdout if omitted)");
  infer->add_flag("--soft", infer_soft, "also write the soft data symbols");

  // record
  harness::ExperimentConfig rec_cfg;
  double rec_snr = 20.0;
  std::uint64_t rec_count = 1;
  std::string rec_out;
  std::string rec_truth;
  auto* record = app.add_subcommand("record", "simulate received blocks and write a signal file");
  record->add_option("--M", rec_cfg.m, "spreading length")->capture_default_str();
  record->add_option("--N", rec_cfg.n, "CSI length")->capture_default_str();
  record->add_option("--rho", rec_cfg.rho, "power proportional coefficient")->capture_default_str();
  record->add_option("--eu", rec_cfg.eu, "transmit power")->capture_default_str();
  record->add_option("--snr", rec_snr, "SNR in dB")->capture_default_str();
  record->add_option("--seed", rec_cfg.seed, "seed")->capture_default_str();
  record->add_option("--count", rec_count, "number of frames")->capture_default_str();
  record->add_option("--out", rec_out, "signal file")->required();
  record->add_option("--truth", rec_truth, "JSON with the transmitted CSI and bits");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*sweep) {
      const auto cfg = sweep_o.resolve();
      harness::SweepOptions opts;
      opts.threads = sweep_threads;
      if (!sweep_quiet) opts.log = &err;
      std::optional<elm::CascadeReceiver> model;
      if (!sweep_model.empty()) {
        model = elm::load_model(sweep_model);
        opts.receiver = &*model;
      }
      const auto rows = harness::run_sweep(cfg, opts);
      harness::ResultFormat fmt = harness::ResultFormat::kCsv;
      if (!sweep_format.empty()) {
        fmt = harness::parse_format(sweep_format);
      } else if (!sweep_out.empty()) {
        fmt = harness::format_for_path(sweep_out);
      }
      if (sweep_out.empty()) {
        out << (fmt == harness::ResultFormat::kJson ? harness::results_to_json(rows) : harness::results_to_csv(rows));
      } else {
        harness::emit_results(rows, fmt, sweep_out);
      }
      return 0;
    }

    if (*overhead) {
      const auto r = metrics::overhead_report(oh_m, oh_n);
      using metrics::format_count;
      using metrics::format_megabytes;
      out << "M = " << r.m << ", N = " << r.n << "\n";
      out << pad("", 18) << pad("proposed", 16) << "reference\n";
      out << pad("parameters", 18) << pad(format_count(r.proposed_params), 16) << format_count(r.ref_params) << "\n";
      out << pad("storage (bytes)", 18) << pad(format_count(r.proposed_bytes), 16) << format_count(r.ref_bytes)
          << "\n";
      out << pad("storage (MB)", 18) << pad(format_megabytes(r.proposed_bytes), 16) << format_megabytes(r.ref_bytes)
          << "\n";
      out << pad("multiplications", 18) << pad(format_count(r.proposed_mults), 16) << format_count(r.ref_mults)
          << "\n";
      out << pad("additions", 18) << pad(format_count(r.proposed_adds), 16) << format_count(r.ref_adds) << "\n";
      return 0;
    }

    if (*train) {
      const auto cfg = train_o.resolve();
      kernels::set_threads(train_threads);
      elm::TrainingDiagnostics diag;
      const auto net = harness::train_receiver(cfg, &diag);
      for (const auto& w : diag.warnings) err << "warning: " << w << "\n";
      elm::save_model(train_out, net);
      out << "trained M=" << cfg.m << " N=" << cfg.n << " Nt=" << cfg.nt << ", "
          << net.training_parameter_count() << " complex output weights -> " << train_out << "\n";
      return 0;
    }

    if (*infer) {
      const auto net = elm::load_model(infer_model);
      const auto sig = io::load_signal(infer_input);
      if (sig.m != net.m() || sig.n != net.n()) {
        throw std::runtime_error(infer_input + ": shape " + shape_str(sig.n, sig.m) + " does not match the model (" +
                                 shape_str(net.n(), net.m()) + ")");
      }
      nlohmann::json frames = nlohmann::json::array();
      for (const auto& f : sig.frames) {
        const ComplexVector xhat = phy::coarse_estimate(f.r, f.g);
        const auto est = elm::infer(xhat, net);
        nlohmann::json o;
        o["h_tilde"] = complex_array(est.h_tilde);
        o["bits"] = bit_string(phy::qpsk_demodulate(est.d_tilde));
        if (infer_soft) o["d_tilde"] = complex_array(est.d_tilde);
        frames.push_back(std::move(o));
      }
      nlohmann::json doc;
      doc["M"] = net.m();
      doc["N"] = net.n();
      doc["frames"] = std::move(frames);
      write_text(infer_out, doc.dump(2) + "\n", out);
      return 0;
    }

    if (*record) {
      rec_cfg.validate();
      const auto p = phy::build_walsh(rec_cfg.m, rec_cfg.n);
      const phy::PowerProfile pw{rec_cfg.rho, rec_cfg.eu};
      const double sigma2 = metrics::snr_to_sigma2(rec_snr, rec_cfg.eu);
      io::SignalFile file;
      file.n = rec_cfg.n;
      file.m = rec_cfg.m;
      nlohmann::json truth = nlohmann::json::array();
      for (std::uint64_t k = 0; k < rec_count; ++k) {
        RngStream rng(rec_cfg.seed, kRecordStreams + k);
        auto t = harness::draw_trial(p, pw, sigma2, 0.0, rng);
        truth.push_back({{"h", complex_array(t.h)}, {"bits", bit_string(t.bits)}});
        file.frames.push_back({std::move(t.g_known), std::move(t.r)});
      }
      io::save_signal(rec_out, file);
      if (!rec_truth.empty()) write_text(rec_truth, truth.dump(2) + "\n", out);
      out << "wrote " << rec_count << " frame(s) to " << rec_out << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace elmcsi
