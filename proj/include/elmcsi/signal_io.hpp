#pragma once

// Recorded uplink blocks for offline inference.
//
//   offset  field
//   0       magic "ELMCSIRX" (8 bytes)
//   8       u32 format version (1)
//   12      u32 N, u32 M
//   20      u64 frame count
//   28      frames
//
// Each frame is the uplink channel g known at the base station (N complex)
// followed by the received block r (N x M complex, row-major). Little-endian
// throughout; a complex value is (re, im) as two f64.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "elmcsi/numerics.hpp"

namespace elmcsi::io {

inline constexpr char kSignalMagic[8] = {'E', 'L', 'M', 'C', 'S', 'I', 'R', 'X'};
inline constexpr std::uint32_t kSignalVersion = 1;

struct RecordedFrame {
  ComplexVector g;  // N
  ComplexMatrix r;  // N x M
};

struct SignalFile {
  Index n = 0;
  Index m = 0;
  std::vector<RecordedFrame> frames;
};

void write_signal(std::ostream& os, const SignalFile& file);
SignalFile read_signal(std::istream& is, const std::string& context = "signal");

void save_signal(const std::filesystem::path& path, const SignalFile& file);
SignalFile load_signal(const std::filesystem::path& path);

}  // namespace elmcsi::io
