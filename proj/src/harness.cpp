#include "elmcsi/harness.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "elmcsi/baseline.hpp"
#include "elmcsi/kernels.hpp"
#include "elmcsi/metrics.hpp"

namespace elmcsi::harness {

TrialDraw draw_trial(const phy::SpreadingMatrix& p, const phy::PowerProfile& pw, double sigma2, double csi_error_var,
                     RngStream& rng) {
  const Index n = p.n;
  const Index m = p.m;
  const double var = 1.0 / static_cast<double>(n);

  TrialDraw t;
  t.h = gaussian_complex(rng, n, var);
  t.g = gaussian_complex(rng, n, var);

  t.bits.resize(static_cast<std::size_t>(2 * m));
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < t.bits.size(); ++i) {
    if (i % 64 == 0) word = rng.next_u64();
    t.bits[i] = static_cast<std::uint8_t>((word >> (63 - i % 64)) & 1U);
  }
  t.d = phy::qpsk_modulate(t.bits);

  const ComplexVector x = phy::superimpose(t.h, t.d, p, pw);
  t.r = phy::uplink_transmit(x, phy::ChannelRealization{t.h, t.g, sigma2}, rng);

  t.g_known = t.g;
  if (csi_error_var > 0.0) t.g_known += gaussian_complex(rng, n, csi_error_var);
  t.xhat = phy::coarse_estimate(t.r, t.g_known);
  return t;
}

elm::TrainingSet generate_training_set(const ExperimentConfig& cfg, const phy::SpreadingMatrix& p) {
  cfg.validate();
  const phy::PowerProfile pw{cfg.rho, cfg.eu};
  const Index nt = cfg.nt;

  elm::TrainingSet ts;
  for (auto& block : ts.inputs) block.resize(cfg.m, nt);
  for (auto& block : ts.labels_h) block.resize(cfg.n, nt);
  for (auto& block : ts.labels_d) block.resize(cfg.m, nt);

  // Sample j lands in block j / Nt, column j % Nt. Every sample owns its
  // stream, so the set does not depend on scheduling.
  kernels::parallel_for(0, 4 * nt, [&](std::int64_t j) {
    RngStream rng(cfg.seed, kTrainStreams + static_cast<std::uint64_t>(j));
    TrialDraw t = draw_trial(p, pw, cfg.train_sigma2, cfg.csi_error_var, rng);
    const auto block = static_cast<std::size_t>(j / nt);
    const Index col = j % nt;
    ts.inputs[block].col(col) = t.xhat;
    if (block % 2 == 0) {
      ts.labels_h[block / 2].col(col) = t.h;
    } else {
      ts.labels_d[block / 2].col(col) = t.d;
    }
  });
  return ts;
}

elm::CascadeReceiver train_receiver(const ExperimentConfig& cfg, elm::TrainingDiagnostics* diag) {
  cfg.validate();
  const auto p = phy::build_walsh(cfg.m, cfg.n);
  const phy::PowerProfile pw{cfg.rho, cfg.eu};
  const elm::TrainingSet ts = generate_training_set(cfg, p);
  const auto pool = elm::SharedWeightPool::generate(cfg.seed, cfg.m);
  elm::TrainOptions opts;
  opts.pinv.regularization = cfg.regularization;
  return elm::train_cascade(ts, pool, p, pw, opts, diag);
}

namespace {

struct TrialOutcome {
  bool fault = false;
  double nmse = 0.0;
  std::uint64_t errors = 0;
  std::uint64_t bits = 0;
};

bool finite(const ComplexVector& v) { return v.allFinite(); }

std::uint64_t count_errors(const phy::Bits& tx, const phy::Bits& rx) {
  std::uint64_t e = 0;
  for (std::size_t i = 0; i < tx.size(); ++i) e += tx[i] != rx[i];
  return e;
}

struct MethodState {
  metrics::Method method;
  metrics::MetricsRecord rec;
  std::uint64_t trials = 0;
  std::uint64_t faults = 0;
  bool active = true;
};

ResultRow to_row(const MethodState& s, double snr_db, const std::string& hash) {
  ResultRow row;
  row.method = metrics::to_string(s.method);
  row.snr_db = snr_db;
  row.nmse_linear = s.rec.nmse_count ? s.rec.nmse_mean() : std::numeric_limits<double>::quiet_NaN();
  row.nmse_db = 10.0 * std::log10(row.nmse_linear);
  row.ber = s.rec.bits_total ? s.rec.ber() : std::numeric_limits<double>::quiet_NaN();
  row.trials = s.trials;
  row.bits = s.rec.bits_total;
  row.config_hash = hash;
  return row;
}

}  // namespace

std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts) {
  cfg.validate();
  kernels::set_threads(opts.threads);

  const auto p = phy::build_walsh(cfg.m, cfg.n);
  const phy::PowerProfile pw{cfg.rho, cfg.eu};
  const std::string hash = cfg.hash();
  const metrics::BerStopRule rule{cfg.ber_error_floor, cfg.ber_bit_cap};

  std::optional<elm::CompiledCascade> compiled;
  if (cfg.has_method(metrics::Method::kElm)) {
    if (opts.receiver) {
      if (opts.receiver->m() != cfg.m || opts.receiver->n() != cfg.n) {
        throw std::invalid_argument("run_sweep: receiver shape does not match the config");
      }
      compiled.emplace(*opts.receiver);
    } else {
      elm::TrainingDiagnostics diag;
      try {
        compiled.emplace(train_receiver(cfg, &diag));
        if (opts.report) opts.report->trained = true;
      } catch (const std::exception& e) {
        throw std::runtime_error(std::string("training failed: ") + e.what());
      }
      if (opts.log) {
        for (const auto& w : diag.warnings) *opts.log << "warning: " << w << "\n";
      }
    }
  }

  const std::size_t n_methods = cfg.methods.size();
  std::vector<ResultRow> rows;

  for (double snr_db : cfg.snr_grid_db) {
    const double sigma2 = metrics::snr_to_sigma2(snr_db, cfg.eu);
    std::vector<MethodState> states;
    for (auto m : cfg.methods) {
      MethodState s{m, {}, 0, 0, true};
      s.rec.snr_db = snr_db;
      s.rec.method = m;
      states.push_back(s);
    }

    std::vector<TrialOutcome> outcome(static_cast<std::size_t>(kTrialBatch) * n_methods);
    std::vector<TrialDraw> draws(static_cast<std::size_t>(kTrialBatch));
    std::vector<char> drawn(static_cast<std::size_t>(kTrialBatch));

    for (std::int64_t base = 0;; base += kTrialBatch) {
      // Draw and run the baseline per trial in parallel.
      kernels::parallel_for(0, kTrialBatch, [&](std::int64_t k) {
        const auto ku = static_cast<std::size_t>(k);
        RngStream rng(cfg.seed, kTestStreams + static_cast<std::uint64_t>(base + k));
        drawn[ku] = 0;
        try {
          draws[ku] = draw_trial(p, pw, sigma2, cfg.csi_error_var, rng);
          drawn[ku] = finite(draws[ku].xhat);
        } catch (const std::exception&) {
          drawn[ku] = 0;
        }
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
          TrialOutcome& o = outcome[ku * n_methods + mi];
          o = TrialOutcome{};
          if (!drawn[ku]) {
            o.fault = true;
            continue;
          }
          if (cfg.methods[mi] != metrics::Method::kBaseline) continue;
          try {
            const auto est = baseline::baseline_receive(draws[ku].xhat, p, pw);
            if (!finite(est.h_hat) || !finite(est.d_hat)) {
              o.fault = true;
              continue;
            }
            o.nmse = metrics::nmse(draws[ku].h, est.h_hat);
            const auto rx = phy::qpsk_demodulate(est.d_hat);
            o.errors = count_errors(draws[ku].bits, rx);
            o.bits = rx.size();
          } catch (const std::exception&) {
            o.fault = true;
          }
        }
      });

      // The ELM runs once per batch as a matrix product. Faulted draws get a
      // zero column and their outcome stays marked as a fault.
      if (compiled) {
        ComplexMatrix xb = ComplexMatrix::Zero(cfg.m, kTrialBatch);
        for (std::int64_t k = 0; k < kTrialBatch; ++k) {
          if (drawn[static_cast<std::size_t>(k)]) xb.col(k) = draws[static_cast<std::size_t>(k)].xhat;
        }
        const elm::BatchEstimate est = compiled->run_batch(xb);
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
          if (cfg.methods[mi] != metrics::Method::kElm) continue;
          kernels::parallel_for(0, kTrialBatch, [&](std::int64_t k) {
            const auto ku = static_cast<std::size_t>(k);
            TrialOutcome& o = outcome[ku * n_methods + mi];
            if (o.fault) return;
            const ComplexVector h = est.h_tilde.col(k);
            const ComplexVector d = est.d_tilde.col(k);
            if (!finite(h) || !finite(d)) {
              o.fault = true;
              return;
            }
            o.nmse = metrics::nmse(draws[ku].h, h);
            const auto rx = phy::qpsk_demodulate(d);
            o.errors = count_errors(draws[ku].bits, rx);
            o.bits = rx.size();
          });
        }
      }

      // Merge in trial order; each method stops at the first trial after
      // which both stopping rules hold.
      std::int64_t batch_faults = 0;
      for (std::int64_t k = 0; k < kTrialBatch; ++k) {
        bool all_faulted = true;
        for (std::size_t mi = 0; mi < n_methods; ++mi) {
          MethodState& s = states[mi];
          const TrialOutcome& o = outcome[static_cast<std::size_t>(k) * n_methods + mi];
          if (!o.fault) all_faulted = false;
          if (!s.active) continue;
          if (o.fault) {
            ++s.faults;
            continue;
          }
          s.rec.add_nmse(o.nmse);
          s.rec.bit_errors += o.errors;
          s.rec.bits_total += o.bits;
          ++s.trials;
          if (s.trials >= cfg.nmse_min_trials && metrics::ber_done(s.rec, rule)) s.active = false;
        }
        if (all_faulted) ++batch_faults;
      }
      if (batch_faults == kTrialBatch) {
        throw std::runtime_error("run_sweep: every trial in batch starting at " + std::to_string(base) + " faulted at " +
                                 std::to_string(snr_db) + " dB");
      }
      bool any_active = false;
      for (const auto& s : states) any_active = any_active || s.active;
      if (!any_active) break;
    }

    for (const auto& s : states) {
      if (opts.report) opts.report->faults += s.faults;
      rows.push_back(to_row(s, snr_db, hash));
      if (opts.log) {
        const ResultRow& r = rows.back();
        *opts.log << r.method << " snr=" << r.snr_db << " dB nmse=" << r.nmse_db << " dB ber=" << r.ber
                  << " trials=" << r.trials;
        if (s.faults) *opts.log << " faults=" << s.faults;
        *opts.log << "\n";
      }
    }
  }
  return rows;
}

}  // namespace elmcsi::harness
