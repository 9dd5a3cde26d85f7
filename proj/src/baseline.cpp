#include "elmcsi/baseline.hpp"

#include <cmath>

namespace elmcsi::baseline {

BaselineEstimate baseline_receive(const ComplexVector& xhat, const phy::SpreadingMatrix& p,
                                  const phy::PowerProfile& pw) {
  pw.validate();
  if (pw.rho <= 0.0) throw std::domain_error("baseline_receive: rho = 0 leaves no CSI branch to estimate");
  if (pw.rho >= 1.0) throw std::domain_error("baseline_receive: rho = 1 leaves no data branch to detect");
  if (xhat.size() != p.m) {
    throw DimensionError("baseline_receive: x_hat has " + std::to_string(xhat.size()) + " entries, expected " +
                         std::to_string(p.m));
  }
  const double csi_gain = pw.csi_gain(p.n);
  BaselineEstimate out;
  out.h_hat = phy::despread(xhat, p) / (static_cast<double>(p.m) * csi_gain);
  const ComplexMatrix respread = phy::spread(ComplexMatrix(out.h_hat), p);
  out.d_hat = (xhat - csi_gain * respread.col(0)) / pw.data_gain();
  return out;
}

}  // namespace elmcsi::baseline
