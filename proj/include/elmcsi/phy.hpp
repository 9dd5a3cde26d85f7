#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "elmcsi/numerics.hpp"

namespace elmcsi::phy {

using Bits = std::vector<std::uint8_t>;

/// First N columns of the Sylvester-ordered M x M Walsh-Hadamard matrix.
/// Entries are +-1 and P^T P = M I_N.
struct SpreadingMatrix {
  RealMatrix p;
  Index m = 0;
  Index n = 0;
};

struct ChannelRealization {
  ComplexVector h;  // downlink CSI, length N
  ComplexVector g;  // uplink CSI, length N
  double sigma2 = 0.0;
};

/// rho is the power proportional coefficient: the share of the transmit power
/// Eu given to the spread CSI branch.
struct PowerProfile {
  double rho = 0.2;
  double eu = 1.0;

  double csi_gain(Index n) const;  // sqrt(rho Eu / N)
  double data_gain() const;        // sqrt((1 - rho) Eu)
  void validate() const;
};

SpreadingMatrix build_walsh(Index m, Index n);
bool is_power_of_two(Index v);

/// Gray mapping, bit pair (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt(2),
/// so 00 -> (+1+j)/sqrt(2) and 11 -> (-1-j)/sqrt(2).
ComplexVector qpsk_modulate(std::span<const std::uint8_t> bits);

/// Hard decision per quadrant. A component that is exactly zero decides bit 0.
Bits qpsk_demodulate(const ComplexVector& symbols);

/// x = sqrt(rho Eu / N) P h + sqrt((1 - rho) Eu) d
ComplexVector superimpose(const ComplexVector& h, const ComplexVector& d, const SpreadingMatrix& p,
                          const PowerProfile& pw);

/// r = g x^T + n with n i.i.d. CN(0, sigma2). No noise is drawn when sigma2 is 0.
ComplexMatrix uplink_transmit(const ComplexVector& x, const ChannelRealization& ch, RngStream& rng);

/// x_hat^T = g^+ r, with g^+ = g^H / (g^H g). The base station is assumed to
/// know g.
ComplexVector coarse_estimate(const ComplexMatrix& r, const ComplexVector& g);

/// P^T x_hat
ComplexVector despread(const ComplexVector& xhat, const SpreadingMatrix& p);
/// Column-wise P^T X.
ComplexMatrix despread(const ComplexMatrix& xhat, const SpreadingMatrix& p);

/// P h for a CSI vector or a matrix of CSI columns.
ComplexMatrix spread(const ComplexMatrix& h, const SpreadingMatrix& p);

}  // namespace elmcsi::phy
