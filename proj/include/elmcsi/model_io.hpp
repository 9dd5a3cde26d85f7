#pragma once

// Trained receiver container.
//
//   offset  field
//   0       magic "ELMCSIMD" (8 bytes)
//   8       u32 format version (1)
//   12      u64 pool seed
//   20      u32 M, u32 N
//   28      f64 rho, f64 Eu
//   44      four subnet records: CSI-ELM1, DET-ELM1, CSI-ELM2, DET-ELM2
//
// Subnet record: u8 kind (0 csi, 1 det), u32 in_dim, u32 hidden_dim,
// f64 epsilon, in_dim complex BN means, in_dim f64 BN variances, then Phi as
// in_dim x hidden_dim complex entries in row-major order.
//
// Integers and doubles are little-endian; a complex value is (re, im). The
// weight pool is not stored: it is regenerated from the seed on load.

#include <filesystem>
#include <iosfwd>

#include "elmcsi/elm.hpp"

namespace elmcsi::elm {

inline constexpr char kModelMagic[8] = {'E', 'L', 'M', 'C', 'S', 'I', 'M', 'D'};
inline constexpr std::uint32_t kModelVersion = 2;

void write_model(std::ostream& os, const CascadeReceiver& net);
CascadeReceiver read_model(std::istream& is);

void save_model(const std::filesystem::path& path, const CascadeReceiver& net);
CascadeReceiver load_model(const std::filesystem::path& path);

}  // namespace elmcsi::elm
