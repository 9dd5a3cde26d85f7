#include "elmcsi/phy.hpp"

#include <cmath>
#include <string>

namespace elmcsi::phy {

double PowerProfile::csi_gain(Index n) const { return std::sqrt(rho * eu / static_cast<double>(n)); }

double PowerProfile::data_gain() const { return std::sqrt((1.0 - rho) * eu); }

void PowerProfile::validate() const {
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("power profile: rho must lie in [0, 1]");
  if (!(eu > 0.0)) throw std::invalid_argument("power profile: Eu must be positive");
}

bool is_power_of_two(Index v) { return v > 0 && (v & (v - 1)) == 0; }

SpreadingMatrix build_walsh(Index m, Index n) {
  if (!is_power_of_two(m)) throw std::invalid_argument("build_walsh: M = " + std::to_string(m) + " is not a power of two");
  if (n <= 0 || n >= m) throw std::invalid_argument("build_walsh: need 0 < N < M");

  // Sylvester recursion H_{2k} = [H_k H_k; H_k -H_k].
  RealMatrix h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < m) {
    const Index k = h.rows();
    RealMatrix next(2 * k, 2 * k);
    next.topLeftCorner(k, k) = h;
    next.topRightCorner(k, k) = h;
    next.bottomLeftCorner(k, k) = h;
    next.bottomRightCorner(k, k) = -h;
    h = std::move(next);
  }
  return SpreadingMatrix{h.leftCols(n), m, n};
}

ComplexVector qpsk_modulate(std::span<const std::uint8_t> bits) {
  if (bits.size() % 2 != 0) throw std::invalid_argument("qpsk_modulate: odd bit count " + std::to_string(bits.size()));
  const double a = 1.0 / std::sqrt(2.0);
  ComplexVector out(static_cast<Index>(bits.size() / 2));
  for (Index i = 0; i < out.size(); ++i) {
    const double re = bits[2 * i] ? -a : a;
    const double im = bits[2 * i + 1] ? -a : a;
    out(i) = Complex(re, im);
  }
  return out;
}

Bits qpsk_demodulate(const ComplexVector& symbols) {
  Bits out(static_cast<std::size_t>(symbols.size()) * 2);
  for (Index i = 0; i < symbols.size(); ++i) {
    out[2 * i] = symbols(i).real() < 0.0 ? 1 : 0;
    out[2 * i + 1] = symbols(i).imag() < 0.0 ? 1 : 0;
  }
  return out;
}

ComplexVector superimpose(const ComplexVector& h, const ComplexVector& d, const SpreadingMatrix& p,
                          const PowerProfile& pw) {
  if (h.size() != p.n || d.size() != p.m) {
    throw DimensionError("superimpose: h has " + std::to_string(h.size()) + " entries, d has " +
                         std::to_string(d.size()) + ", P is " + shape_str(p.m, p.n));
  }
  ComplexVector ph(p.m);
  ph.real() = p.p * h.real();
  ph.imag() = p.p * h.imag();
  return pw.csi_gain(p.n) * ph + pw.data_gain() * d;
}

ComplexMatrix uplink_transmit(const ComplexVector& x, const ChannelRealization& ch, RngStream& rng) {
  if (ch.sigma2 < 0.0) throw std::invalid_argument("uplink_transmit: negative noise variance");
  ComplexMatrix r = ch.g * x.transpose();
  if (ch.sigma2 > 0.0) {
    const double scale = std::sqrt(ch.sigma2 / 2.0);
    for (Index j = 0; j < r.cols(); ++j) {
      for (Index i = 0; i < r.rows(); ++i) {
        const double re = rng.normal();
        const double im = rng.normal();
        r(i, j) += Complex(scale * re, scale * im);
      }
    }
  }
  return r;
}

ComplexVector coarse_estimate(const ComplexMatrix& r, const ComplexVector& g) {
  if (r.rows() != g.size()) {
    throw DimensionError("coarse_estimate: r is " + shape_str(r.rows(), r.cols()) + ", g has " +
                         std::to_string(g.size()) + " entries");
  }
  const double norm = g.norm();
  if (!(norm >= 1e-12)) throw std::domain_error("coarse_estimate: degenerate uplink channel (|g| < 1e-12)");
  return (g.adjoint() * r).transpose() / (norm * norm);
}

ComplexVector despread(const ComplexVector& xhat, const SpreadingMatrix& p) {
  if (xhat.size() != p.m) {
    throw DimensionError("despread: input has " + std::to_string(xhat.size()) + " entries, expected " +
                         std::to_string(p.m));
  }
  ComplexVector out(p.n);
  out.real() = p.p.transpose() * xhat.real();
  out.imag() = p.p.transpose() * xhat.imag();
  return out;
}

ComplexMatrix despread(const ComplexMatrix& xhat, const SpreadingMatrix& p) {
  if (xhat.rows() != p.m) {
    throw DimensionError("despread: input has " + std::to_string(xhat.rows()) + " rows, expected " +
                         std::to_string(p.m));
  }
  ComplexMatrix out(p.n, xhat.cols());
  out.real() = p.p.transpose() * xhat.real();
  out.imag() = p.p.transpose() * xhat.imag();
  return out;
}

ComplexMatrix spread(const ComplexMatrix& h, const SpreadingMatrix& p) {
  if (h.rows() != p.n) {
    throw DimensionError("spread: input has " + std::to_string(h.rows()) + " rows, expected " + std::to_string(p.n));
  }
  ComplexMatrix out(p.m, h.cols());
  out.real() = p.p * h.real();
  out.imag() = p.p * h.imag();
  return out;
}

}  // namespace elmcsi::phy
