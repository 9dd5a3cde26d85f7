#include "elmcsi/signal_io.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

#include "binary_io.hpp"

namespace elmcsi::io {

void write_signal(std::ostream& os, const SignalFile& file) {
  for (const auto& f : file.frames) {
    if (f.g.size() != file.n || f.r.rows() != file.n || f.r.cols() != file.m) {
      throw DimensionError("write_signal: frame shape does not match the header " + shape_str(file.n, file.m));
    }
  }
  detail::ByteWriter w(os);
  w.bytes(kSignalMagic, sizeof kSignalMagic);
  w.u32(kSignalVersion);
  w.u32(static_cast<std::uint32_t>(file.n));
  w.u32(static_cast<std::uint32_t>(file.m));
  w.u64(file.frames.size());
  for (const auto& f : file.frames) {
    for (Index i = 0; i < f.g.size(); ++i) w.c128(f.g(i));
    w.matrix(f.r);
  }
}

SignalFile read_signal(std::istream& is, const std::string& context) {
  detail::ByteReader rd(is, context);
  char magic[8];
  rd.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kSignalMagic, sizeof magic) != 0) throw std::runtime_error(context + ": not a signal file");
  const auto version = rd.u32();
  if (version != kSignalVersion) {
    throw std::runtime_error(context + ": unsupported signal format version " + std::to_string(version));
  }
  SignalFile file;
  file.n = rd.u32();
  file.m = rd.u32();
  if (file.n == 0 || file.m == 0 || file.n > (1 << 20) || file.m > (1 << 20)) {
    throw std::runtime_error(context + ": bad shape " + shape_str(file.n, file.m));
  }
  const auto count = rd.u64();
  for (std::uint64_t k = 0; k < count; ++k) {
    RecordedFrame f;
    f.g.resize(file.n);
    for (Index i = 0; i < file.n; ++i) f.g(i) = rd.c128();
    f.r = rd.matrix(file.n, file.m);
    file.frames.push_back(std::move(f));
  }
  if (!rd.at_end()) throw std::runtime_error(context + ": trailing bytes after the last frame");
  return file;
}

void save_signal(const std::filesystem::path& path, const SignalFile& file) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_signal(os, file);
  os.flush();
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

SignalFile load_signal(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open signal file " + path.string());
  return read_signal(is, path.string());
}

}  // namespace elmcsi::io
