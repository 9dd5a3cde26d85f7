#pragma once

// Non-learned superimposed-feedback receiver: despread for the CSI, cancel
// the re-spread CSI estimate, then hard-decide the data. Used as the
// comparison curve for the ELM cascade.

#include "elmcsi/phy.hpp"

namespace elmcsi::baseline {

struct BaselineEstimate {
  ComplexVector h_hat;  // N
  ComplexVector d_hat;  // M, soft symbols before the QPSK decision
};

/// h_hat = sqrt(N / (rho Eu)) P^T x_hat / M
/// d_hat = (x_hat - sqrt(rho Eu / N) P h_hat) / sqrt((1 - rho) Eu)
/// Requires 0 < rho < 1.
BaselineEstimate baseline_receive(const ComplexVector& xhat, const phy::SpreadingMatrix& p,
                                  const phy::PowerProfile& pw);

}  // namespace elmcsi::baseline
