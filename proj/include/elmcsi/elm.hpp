#pragma once

// Four-subnet cascaded extreme learning machine receiver.
//
// Data flow for one coarse estimate x_hat (length M):
//
//   h1 = P^T x_hat                         despread
//   ht1 = CSI-ELM1(h1)                     N -> 8N -> N
//   d1 = x_hat - sqrt(rho Eu / N) P ht1    cancel CSI
//   dt1 = DET-ELM1(d1)                     M -> 8M -> M
//   h2 = P^T (x_hat - sqrt((1-rho) Eu) dt1) cancel uplink data, despread
//   ht2 = CSI-ELM2(h2)
//   d2 = x_hat - sqrt(rho Eu / N) P ht2
//   dt2 = DET-ELM2(d2)
//
// Each subnet computes Phi (W BN(x) + b) with a linear activation. W and b are
// fixed slices of one shared random pool; only Phi is trained, by least
// squares, one subnet at a time with the earlier ones frozen.

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "elmcsi/numerics.hpp"
#include "elmcsi/phy.hpp"

namespace elmcsi::elm {

inline constexpr double kBnEpsilon = 1e-8;
inline constexpr Index kHiddenFactor = 8;

/// Random real 8M x M matrix from which every subnet's input weights and
/// biases are sliced. Only the seed needs to be stored.
struct SharedWeightPool {
  RealMatrix w;
  std::uint64_t seed = 0;

  static SharedWeightPool generate(std::uint64_t seed, Index m);
  Index stored_scalars() const { return w.size(); }
};

struct WeightSlice {
  RealMatrix weights;  // 8 in_dim x in_dim
  RealVector bias;     // 8 in_dim
};

/// Weights are the top-left (8 in_dim x in_dim) block of the pool; the bias is
/// the first 8 in_dim entries of the pool's last column. With in_dim == M that
/// column is also a weight column, so the bias reads it bottom-up instead.
WeightSlice slice_weights(const SharedWeightPool& pool, Index in_dim);

/// Per-feature statistics with no learned scale or shift.
struct BnStats {
  ComplexVector mean;
  RealVector var;  // E|x - mean|^2
  double epsilon = kBnEpsilon;

  Index features() const { return mean.size(); }
};

/// Features are rows, samples are columns.
BnStats bn_fit(const ComplexMatrix& batch);
ComplexMatrix bn_apply(const BnStats& stats, const ComplexMatrix& x);
ComplexVector bn_apply(const BnStats& stats, const ComplexVector& x);

enum class SubnetKind : std::uint8_t { kCsi = 0, kDet = 1 };

const char* to_string(SubnetKind kind);

/// y = a x + c
struct AffineMap {
  ComplexMatrix a;
  ComplexVector c;

  ComplexVector apply(const ComplexVector& x) const;
  ComplexMatrix apply(const ComplexMatrix& x) const;
};

struct ElmSubnet {
  SubnetKind kind = SubnetKind::kCsi;
  Index in_dim = 0;
  Index hidden_dim = 0;
  std::shared_ptr<const WeightSlice> slice;
  std::optional<BnStats> bn;
  std::optional<ComplexMatrix> phi;  // in_dim x hidden_dim

  static ElmSubnet make(SubnetKind kind, std::shared_ptr<const WeightSlice> slice);

  Index out_dim() const { return in_dim; }
  bool trained() const { return bn.has_value() && phi.has_value(); }

  /// Phi * hidden_output(input).
  ComplexMatrix forward(const ComplexMatrix& input) const;
  ComplexVector forward(const ComplexVector& input) const;

  /// The subnet collapsed into a single affine map on the raw input:
  /// Phi W diag(s) x + Phi (b - W diag(s) mean), s = 1 / sqrt(var + eps).
  AffineMap fused() const;
};

/// W BN(input) + b 1^T, linear activation.
ComplexMatrix hidden_output(const ElmSubnet& subnet, const ComplexMatrix& input);

/// Phi = T H^+, the minimum-norm minimizer of ||T - Phi H||_F. Appends a
/// warning when H has fewer columns than rows.
ComplexMatrix train_output_weights(const ComplexMatrix& h, const ComplexMatrix& t, const PinvOptions& opts = {},
                                   std::vector<std::string>* warnings = nullptr);

/// x_hat - sqrt(rho Eu / N) P h_tilde
ComplexVector cancel_csi(const ComplexVector& xhat, const ComplexVector& h_tilde, const phy::SpreadingMatrix& p,
                         const phy::PowerProfile& pw);
ComplexMatrix cancel_csi(const ComplexMatrix& xhat, const ComplexMatrix& h_tilde, const phy::SpreadingMatrix& p,
                         const phy::PowerProfile& pw);

/// P^T (x_hat - sqrt((1 - rho) Eu) d_tilde)
ComplexVector cancel_ulus(const ComplexVector& xhat, const ComplexVector& d_tilde, const phy::SpreadingMatrix& p,
                          const phy::PowerProfile& pw);
ComplexMatrix cancel_ulus(const ComplexMatrix& xhat, const ComplexMatrix& d_tilde, const phy::SpreadingMatrix& p,
                          const phy::PowerProfile& pw);

/// Four disjoint blocks of N_t coarse estimates (M x N_t each). Blocks 1 and 3
/// train the CSI subnets against labels_h; blocks 2 and 4 train the detection
/// subnets against labels_d.
struct TrainingSet {
  std::array<ComplexMatrix, 4> inputs;
  std::array<ComplexMatrix, 2> labels_h;  // N x N_t
  std::array<ComplexMatrix, 2> labels_d;  // M x N_t

  Index nt() const { return inputs[0].cols(); }
  void validate(Index m, Index n) const;
};

struct CascadeReceiver {
  ElmSubnet csi1;
  ElmSubnet det1;
  ElmSubnet csi2;
  ElmSubnet det2;
  phy::SpreadingMatrix p;
  phy::PowerProfile pw;
  std::uint64_t pool_seed = 0;

  /// Untrained receiver wired to slices of `pool`. CSI-ELM1/2 share one slice
  /// and DET-ELM1/2 share another.
  static CascadeReceiver assemble(const SharedWeightPool& pool, phy::SpreadingMatrix p, phy::PowerProfile pw);

  bool trained() const;
  Index m() const { return p.m; }
  Index n() const { return p.n; }
  /// Number of complex entries across Phi_1..Phi_4.
  Index training_parameter_count() const;
};

struct TrainOptions {
  PinvOptions pinv;
  // Keep every stage's subnet input, labels and output for inspection.
  bool keep_trace = false;
};

struct StageTrace {
  ComplexMatrix input;   // subnet input before batch normalization
  ComplexMatrix labels;
  ComplexMatrix output;  // trained subnet's output on `input`
};

struct TrainingDiagnostics {
  std::vector<std::string> warnings;
  std::array<StageTrace, 4> stages;
};

/// Runs the four training stages in order. Each stage freezes everything
/// trained before it.
class CascadeTrainer {
 public:
  CascadeTrainer(const TrainingSet& ts, const SharedWeightPool& pool, const phy::SpreadingMatrix& p,
                 const phy::PowerProfile& pw, TrainOptions opts = {});

  /// Stage 1: CSI-ELM1, 2: DET-ELM1, 3: CSI-ELM2, 4: DET-ELM2.
  void train_stage(int stage);
  void train_all();

  int stages_done() const { return stages_done_; }
  const CascadeReceiver& receiver() const { return net_; }
  CascadeReceiver take() && { return std::move(net_); }
  const TrainingDiagnostics& diagnostics() const { return diag_; }

 private:
  void fit(ElmSubnet& subnet, int stage, const ComplexMatrix& input, const ComplexMatrix& labels);
  // Runs already-trained subnets over a training block.
  ComplexMatrix csi1_out(const ComplexMatrix& xhat) const;
  ComplexMatrix det1_input(const ComplexMatrix& xhat) const;
  ComplexMatrix csi2_input(const ComplexMatrix& xhat) const;
  ComplexMatrix det2_input(const ComplexMatrix& xhat) const;

  const TrainingSet& ts_;
  TrainOptions opts_;
  CascadeReceiver net_;
  std::array<AffineMap, 4> fused_;  // filled as stages complete
  TrainingDiagnostics diag_;
  int stages_done_ = 0;
};

CascadeReceiver train_cascade(const TrainingSet& ts, const SharedWeightPool& pool, const phy::SpreadingMatrix& p,
                              const phy::PowerProfile& pw, const TrainOptions& opts = {},
                              TrainingDiagnostics* diag = nullptr);

struct Estimate {
  ComplexVector h_tilde;  // N
  ComplexVector d_tilde;  // M, soft symbols
};

struct BatchEstimate {
  ComplexMatrix h_tilde;
  ComplexMatrix d_tilde;
};

/// Online running, step by step through both cascade stages. This is the
/// reference path; CompiledCascade gives the same numbers faster.
Estimate infer(const ComplexVector& xhat, const CascadeReceiver& net);
BatchEstimate infer_batch(const ComplexMatrix& xhat, const CascadeReceiver& net);

/// Trained cascade with every subnet collapsed to its affine map. Immutable
/// and safe to share across threads.
class CompiledCascade {
 public:
  explicit CompiledCascade(const CascadeReceiver& net);

  Estimate run(const ComplexVector& xhat) const;
  BatchEstimate run_batch(const ComplexMatrix& xhat) const;

  Index m() const { return p_.m; }
  Index n() const { return p_.n; }

 private:
  AffineMap csi1_;
  AffineMap det1_;
  AffineMap csi2_;
  AffineMap det2_;
  phy::SpreadingMatrix p_;
  phy::PowerProfile pw_;
};

}  // namespace elmcsi::elm
