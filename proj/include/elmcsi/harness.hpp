#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "elmcsi/config.hpp"
#include "elmcsi/elm.hpp"
#include "elmcsi/phy.hpp"

namespace elmcsi::harness {

// Stream-id domains under the experiment seed. Training sample j uses
// kTrainStreams + j and test trial t uses kTestStreams + t, at every SNR point
// and for every method.
inline constexpr std::uint64_t kTrainStreams = 0x1000000000000000ULL;
inline constexpr std::uint64_t kTestStreams = 0x2000000000000000ULL;

inline constexpr std::int64_t kTrialBatch = 64;

/// One end-to-end realization: channels, data, received signal and the
/// base station's coarse estimate.
struct TrialDraw {
  ComplexVector h;
  ComplexVector g;
  phy::Bits bits;
  ComplexVector d;
  ComplexMatrix r;      // N x M received block
  ComplexVector g_known;  // uplink CSI used by the base station
  ComplexVector xhat;
};

/// Draw order: h, g, data bits, noise, then the optional uplink-CSI error.
/// h and g are CN(0, 1/N); the 2M data bits come from one 64-bit word per 64
/// bits, most significant bit first.
TrialDraw draw_trial(const phy::SpreadingMatrix& p, const phy::PowerProfile& pw, double sigma2, double csi_error_var,
                     RngStream& rng);

/// 4 Nt independent draws at the training noise level, split into the four
/// training blocks in draw order.
elm::TrainingSet generate_training_set(const ExperimentConfig& cfg, const phy::SpreadingMatrix& p);

elm::CascadeReceiver train_receiver(const ExperimentConfig& cfg, elm::TrainingDiagnostics* diag = nullptr);

struct ResultRow {
  std::string method;
  double snr_db = 0.0;
  double nmse_linear = 0.0;
  double nmse_db = 0.0;
  double ber = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t bits = 0;
  std::string config_hash;

  bool operator==(const ResultRow&) const = default;
};

struct SweepReport {
  bool trained = false;
  std::uint64_t faults = 0;  // trials skipped for numeric faults, all points
};

struct SweepOptions {
  int threads = 0;                 // 0 keeps the OpenMP default
  std::ostream* log = nullptr;     // progress and fault messages
  const elm::CascadeReceiver* receiver = nullptr;  // skip training and use this
  SweepReport* report = nullptr;
};

/// One row per (method, SNR point), ordered by SNR then by cfg.methods.
std::vector<ResultRow> run_sweep(const ExperimentConfig& cfg, const SweepOptions& opts = {});

}  // namespace elmcsi::harness
