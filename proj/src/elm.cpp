#include "elmcsi/elm.hpp"

#include <cmath>
#include <utility>

#include "elmcsi/kernels.hpp"

namespace elmcsi::elm {

namespace {

// Stream id reserved for the weight pool draw.
constexpr std::uint64_t kPoolStream = 0x5700000000000000ULL;

ComplexMatrix real_times(const RealMatrix& w, const ComplexMatrix& z) {
  ComplexMatrix out(w.rows(), z.cols());
  out.real() = w * z.real();
  out.imag() = w * z.imag();
  return out;
}

ComplexMatrix complex_times_real(const ComplexMatrix& a, const RealMatrix& w) {
  ComplexMatrix out(a.rows(), w.cols());
  out.real() = a.real() * w;
  out.imag() = a.imag() * w;
  return out;
}

ComplexMatrix as_matrix(const ComplexVector& v) { return v; }

}  // namespace

SharedWeightPool SharedWeightPool::generate(std::uint64_t seed, Index m) {
  if (m <= 0) throw std::invalid_argument("SharedWeightPool: M must be positive");
  RngStream rng(seed, kPoolStream);
  return SharedWeightPool{gaussian_real(rng, kHiddenFactor * m, m), seed};
}

WeightSlice slice_weights(const SharedWeightPool& pool, Index in_dim) {
  if (in_dim <= 0 || kHiddenFactor * in_dim > pool.w.rows() || in_dim > pool.w.cols()) {
    throw std::invalid_argument("slice_weights: in_dim " + std::to_string(in_dim) + " does not fit a " +
                                shape_str(pool.w.rows(), pool.w.cols()) + " pool");
  }
  const Index hidden = kHiddenFactor * in_dim;
  const auto last = pool.w.col(pool.w.cols() - 1);
  // A full-width slice already uses the last column as weights. Taking it
  // bottom-up keeps the bias off that column, so the affine hidden layer
  // keeps rank in_dim + 1.
  RealVector bias = in_dim < pool.w.cols() ? RealVector(last.head(hidden)) : RealVector(last.tail(hidden).reverse());
  return WeightSlice{pool.w.topLeftCorner(hidden, in_dim), std::move(bias)};
}

BnStats bn_fit(const ComplexMatrix& batch) {
  if (batch.rows() == 0 || batch.cols() == 0) throw std::invalid_argument("bn_fit: empty batch");
  BnStats stats;
  stats.mean = batch.rowwise().mean();
  stats.var = (batch.colwise() - stats.mean).cwiseAbs2().rowwise().mean();
  return stats;
}

ComplexMatrix bn_apply(const BnStats& stats, const ComplexMatrix& x) {
  if (x.rows() != stats.features()) {
    throw DimensionError("bn_apply: input has " + std::to_string(x.rows()) + " features, stats have " +
                         std::to_string(stats.features()));
  }
  const RealVector inv = (stats.var.array() + stats.epsilon).rsqrt();
  return inv.cast<Complex>().asDiagonal() * (x.colwise() - stats.mean);
}

ComplexVector bn_apply(const BnStats& stats, const ComplexVector& x) {
  return bn_apply(stats, as_matrix(x)).col(0);
}

const char* to_string(SubnetKind kind) { return kind == SubnetKind::kCsi ? "csi" : "det"; }

ComplexVector AffineMap::apply(const ComplexVector& x) const { return a * x + c; }

ComplexMatrix AffineMap::apply(const ComplexMatrix& x) const { return kernels::affine_columns(a, c, x); }

ElmSubnet ElmSubnet::make(SubnetKind kind, std::shared_ptr<const WeightSlice> slice) {
  ElmSubnet s;
  s.kind = kind;
  s.in_dim = slice->weights.cols();
  s.hidden_dim = slice->weights.rows();
  s.slice = std::move(slice);
  return s;
}

ComplexMatrix hidden_output(const ElmSubnet& subnet, const ComplexMatrix& input) {
  if (!subnet.bn) throw std::logic_error("hidden_output: batch normalization of the subnet is not fitted");
  ComplexMatrix h = real_times(subnet.slice->weights, bn_apply(*subnet.bn, input));
  h.colwise() += subnet.slice->bias.cast<Complex>();
  return h;
}

ComplexMatrix ElmSubnet::forward(const ComplexMatrix& input) const {
  if (!phi) throw std::logic_error(std::string("forward: ") + to_string(kind) + " subnet has no output weights");
  return *phi * hidden_output(*this, input);
}

ComplexVector ElmSubnet::forward(const ComplexVector& input) const { return forward(as_matrix(input)).col(0); }

AffineMap ElmSubnet::fused() const {
  if (!trained()) throw std::logic_error(std::string("fused: ") + to_string(kind) + " subnet is not trained");
  const RealVector s = (bn->var.array() + bn->epsilon).rsqrt();
  const RealMatrix w_scaled = slice->weights * s.asDiagonal();
  AffineMap map;
  map.a = complex_times_real(*phi, w_scaled);
  ComplexVector shifted = slice->bias.cast<Complex>();
  shifted -= real_times(w_scaled, as_matrix(bn->mean)).col(0);
  map.c = *phi * shifted;
  return map;
}

ComplexMatrix train_output_weights(const ComplexMatrix& h, const ComplexMatrix& t, const PinvOptions& opts,
                                   std::vector<std::string>* warnings) {
  if (h.cols() != t.cols()) {
    throw DimensionError("train_output_weights: H is " + shape_str(h.rows(), h.cols()) + ", T is " +
                         shape_str(t.rows(), t.cols()));
  }
  if (warnings && h.cols() < h.rows()) {
    warnings->push_back("train_output_weights: " + std::to_string(h.cols()) + " samples for " +
                        std::to_string(h.rows()) + " hidden neurons; solution is rank deficient");
  }
  return t * pinv(h, opts);
}

ComplexVector cancel_csi(const ComplexVector& xhat, const ComplexVector& h_tilde, const phy::SpreadingMatrix& p,
                         const phy::PowerProfile& pw) {
  return cancel_csi(as_matrix(xhat), as_matrix(h_tilde), p, pw).col(0);
}

ComplexMatrix cancel_csi(const ComplexMatrix& xhat, const ComplexMatrix& h_tilde, const phy::SpreadingMatrix& p,
                         const phy::PowerProfile& pw) {
  if (xhat.rows() != p.m || h_tilde.cols() != xhat.cols()) {
    throw DimensionError("cancel_csi: x_hat is " + shape_str(xhat.rows(), xhat.cols()) + ", h_tilde is " +
                         shape_str(h_tilde.rows(), h_tilde.cols()) + ", P is " + shape_str(p.m, p.n));
  }
  return xhat - pw.csi_gain(p.n) * phy::spread(h_tilde, p);
}

ComplexVector cancel_ulus(const ComplexVector& xhat, const ComplexVector& d_tilde, const phy::SpreadingMatrix& p,
                          const phy::PowerProfile& pw) {
  return cancel_ulus(as_matrix(xhat), as_matrix(d_tilde), p, pw).col(0);
}

ComplexMatrix cancel_ulus(const ComplexMatrix& xhat, const ComplexMatrix& d_tilde, const phy::SpreadingMatrix& p,
                          const phy::PowerProfile& pw) {
  if (xhat.rows() != p.m || d_tilde.rows() != p.m || d_tilde.cols() != xhat.cols()) {
    throw DimensionError("cancel_ulus: x_hat is " + shape_str(xhat.rows(), xhat.cols()) + ", d_tilde is " +
                         shape_str(d_tilde.rows(), d_tilde.cols()) + ", P is " + shape_str(p.m, p.n));
  }
  return phy::despread(ComplexMatrix(xhat - pw.data_gain() * d_tilde), p);
}

void TrainingSet::validate(Index m, Index n) const {
  const Index cols = nt();
  if (cols < 1) throw DimensionError("training set: no samples");
  for (const auto& x : inputs) {
    if (x.rows() != m || x.cols() != cols) throw DimensionError("training set: input block is " + shape_str(x.rows(), x.cols()));
  }
  for (const auto& t : labels_h) {
    if (t.rows() != n || t.cols() != cols) throw DimensionError("training set: CSI label block is " + shape_str(t.rows(), t.cols()));
  }
  for (const auto& t : labels_d) {
    if (t.rows() != m || t.cols() != cols) throw DimensionError("training set: data label block is " + shape_str(t.rows(), t.cols()));
  }
}

CascadeReceiver CascadeReceiver::assemble(const SharedWeightPool& pool, phy::SpreadingMatrix p, phy::PowerProfile pw) {
  if (pool.w.cols() != p.m) {
    throw DimensionError("assemble: pool is " + shape_str(pool.w.rows(), pool.w.cols()) + " but M = " + std::to_string(p.m));
  }
  pw.validate();
  auto csi = std::make_shared<const WeightSlice>(slice_weights(pool, p.n));
  auto det = std::make_shared<const WeightSlice>(slice_weights(pool, p.m));
  CascadeReceiver net;
  net.csi1 = ElmSubnet::make(SubnetKind::kCsi, csi);
  net.csi2 = ElmSubnet::make(SubnetKind::kCsi, csi);
  net.det1 = ElmSubnet::make(SubnetKind::kDet, det);
  net.det2 = ElmSubnet::make(SubnetKind::kDet, det);
  net.p = std::move(p);
  net.pw = pw;
  net.pool_seed = pool.seed;
  return net;
}

bool CascadeReceiver::trained() const { return csi1.trained() && det1.trained() && csi2.trained() && det2.trained(); }

Index CascadeReceiver::training_parameter_count() const {
  Index total = 0;
  for (const ElmSubnet* s : {&csi1, &det1, &csi2, &det2}) {
    if (s->phi) total += s->phi->size();
  }
  return total;
}

CascadeTrainer::CascadeTrainer(const TrainingSet& ts, const SharedWeightPool& pool, const phy::SpreadingMatrix& p,
                               const phy::PowerProfile& pw, TrainOptions opts)
    : ts_(ts), opts_(opts), net_(CascadeReceiver::assemble(pool, p, pw)) {
  ts_.validate(p.m, p.n);
  if (ts_.nt() < 2) diag_.warnings.push_back("training set has fewer than 2 samples per block");
}

void CascadeTrainer::fit(ElmSubnet& subnet, int stage, const ComplexMatrix& input, const ComplexMatrix& labels) {
  const Index nt = input.cols();
  if (nt < subnet.hidden_dim) {
    diag_.warnings.push_back("stage " + std::to_string(stage) + ": " + std::to_string(nt) + " samples for " +
                             std::to_string(subnet.hidden_dim) + " hidden neurons; output weights are rank deficient");
  }
  subnet.bn = bn_fit(input);

  // H = [W b] [BN(x); 1^T]; the least-squares solve works on the factors.
  ComplexMatrix z(subnet.in_dim + 1, nt);
  z.topRows(subnet.in_dim) = bn_apply(*subnet.bn, input);
  z.bottomRows(1).setOnes();
  RealMatrix a(subnet.hidden_dim, subnet.in_dim + 1);
  a.leftCols(subnet.in_dim) = subnet.slice->weights;
  a.col(subnet.in_dim) = subnet.slice->bias;
  subnet.phi = right_lstsq_factored(labels, a, z, opts_.pinv);
  const auto idx = static_cast<std::size_t>(stage - 1);
  fused_[idx] = subnet.fused();

  if (opts_.keep_trace) {
    StageTrace& tr = diag_.stages[idx];
    tr.input = input;
    tr.labels = labels;
    tr.output = fused_[idx].apply(input);
  }
}

ComplexMatrix CascadeTrainer::csi1_out(const ComplexMatrix& xhat) const {
  return fused_[0].apply(phy::despread(xhat, net_.p));
}

ComplexMatrix CascadeTrainer::det1_input(const ComplexMatrix& xhat) const {
  return cancel_csi(xhat, csi1_out(xhat), net_.p, net_.pw);
}

ComplexMatrix CascadeTrainer::csi2_input(const ComplexMatrix& xhat) const {
  const ComplexMatrix dt1 = fused_[1].apply(det1_input(xhat));
  return cancel_ulus(xhat, dt1, net_.p, net_.pw);
}

ComplexMatrix CascadeTrainer::det2_input(const ComplexMatrix& xhat) const {
  const ComplexMatrix ht2 = fused_[2].apply(csi2_input(xhat));
  return cancel_csi(xhat, ht2, net_.p, net_.pw);
}

void CascadeTrainer::train_stage(int stage) {
  if (stage != stages_done_ + 1) {
    throw std::logic_error("train_stage: stage " + std::to_string(stage) + " requested after " +
                           std::to_string(stages_done_) + " completed stages");
  }
  switch (stage) {
    case 1:
      fit(net_.csi1, 1, phy::despread(ts_.inputs[0], net_.p), ts_.labels_h[0]);
      break;
    case 2:
      fit(net_.det1, 2, det1_input(ts_.inputs[1]), ts_.labels_d[0]);
      break;
    case 3:
      fit(net_.csi2, 3, csi2_input(ts_.inputs[2]), ts_.labels_h[1]);
      break;
    case 4:
      fit(net_.det2, 4, det2_input(ts_.inputs[3]), ts_.labels_d[1]);
      break;
    default:
      throw std::logic_error("train_stage: no stage " + std::to_string(stage));
  }
  stages_done_ = stage;
}

void CascadeTrainer::train_all() {
  while (stages_done_ < 4) train_stage(stages_done_ + 1);
}

CascadeReceiver train_cascade(const TrainingSet& ts, const SharedWeightPool& pool, const phy::SpreadingMatrix& p,
                              const phy::PowerProfile& pw, const TrainOptions& opts, TrainingDiagnostics* diag) {
  CascadeTrainer trainer(ts, pool, p, pw, opts);
  trainer.train_all();
  if (diag) *diag = trainer.diagnostics();
  return std::move(trainer).take();
}

namespace {

void require_trained(const CascadeReceiver& net) {
  if (!net.trained()) throw std::logic_error("cascade receiver is not fully trained");
}

}  // namespace

BatchEstimate infer_batch(const ComplexMatrix& xhat, const CascadeReceiver& net) {
  require_trained(net);
  if (xhat.rows() != net.m()) {
    throw DimensionError("infer: input has " + std::to_string(xhat.rows()) + " rows, expected " + std::to_string(net.m()));
  }
  const ComplexMatrix h1 = phy::despread(xhat, net.p);
  const ComplexMatrix ht1 = net.csi1.forward(h1);
  const ComplexMatrix d1 = cancel_csi(xhat, ht1, net.p, net.pw);
  const ComplexMatrix dt1 = net.det1.forward(d1);
  const ComplexMatrix h2 = cancel_ulus(xhat, dt1, net.p, net.pw);
  ComplexMatrix ht2 = net.csi2.forward(h2);
  const ComplexMatrix d2 = cancel_csi(xhat, ht2, net.p, net.pw);
  ComplexMatrix dt2 = net.det2.forward(d2);
  return BatchEstimate{std::move(ht2), std::move(dt2)};
}

Estimate infer(const ComplexVector& xhat, const CascadeReceiver& net) {
  BatchEstimate b = infer_batch(as_matrix(xhat), net);
  return Estimate{b.h_tilde.col(0), b.d_tilde.col(0)};
}

CompiledCascade::CompiledCascade(const CascadeReceiver& net)
    : csi1_((require_trained(net), net.csi1.fused())),
      det1_(net.det1.fused()),
      csi2_(net.csi2.fused()),
      det2_(net.det2.fused()),
      p_(net.p),
      pw_(net.pw) {}

Estimate CompiledCascade::run(const ComplexVector& xhat) const {
  if (xhat.size() != p_.m) {
    throw DimensionError("CompiledCascade::run: input has " + std::to_string(xhat.size()) + " entries, expected " +
                         std::to_string(p_.m));
  }
  const ComplexVector ht1 = csi1_.apply(phy::despread(xhat, p_));
  const ComplexVector dt1 = det1_.apply(cancel_csi(xhat, ht1, p_, pw_));
  ComplexVector ht2 = csi2_.apply(cancel_ulus(xhat, dt1, p_, pw_));
  ComplexVector dt2 = det2_.apply(cancel_csi(xhat, ht2, p_, pw_));
  return Estimate{std::move(ht2), std::move(dt2)};
}

BatchEstimate CompiledCascade::run_batch(const ComplexMatrix& xhat) const {
  if (xhat.rows() != p_.m) {
    throw DimensionError("CompiledCascade::run_batch: input has " + std::to_string(xhat.rows()) + " rows, expected " +
                         std::to_string(p_.m));
  }
  const ComplexMatrix ht1 = csi1_.apply(phy::despread(xhat, p_));
  const ComplexMatrix dt1 = det1_.apply(cancel_csi(xhat, ht1, p_, pw_));
  ComplexMatrix ht2 = csi2_.apply(cancel_ulus(xhat, dt1, p_, pw_));
  ComplexMatrix dt2 = det2_.apply(cancel_csi(xhat, ht2, p_, pw_));
  return BatchEstimate{std::move(ht2), std::move(dt2)};
}

}  // namespace elmcsi::elm
