#include "elmcsi/model_io.hpp"

#include <fstream>
#include <sstream>

#include "binary_io.hpp"

namespace elmcsi::elm {

namespace {

void write_subnet(detail::ByteWriter& w, const ElmSubnet& s) {
  w.u8(static_cast<std::uint8_t>(s.kind));
  w.u32(static_cast<std::uint32_t>(s.in_dim));
  w.u32(static_cast<std::uint32_t>(s.hidden_dim));
  w.f64(s.bn->epsilon);
  for (Index i = 0; i < s.in_dim; ++i) w.c128(s.bn->mean(i));
  for (Index i = 0; i < s.in_dim; ++i) w.f64(s.bn->var(i));
  w.matrix(*s.phi);
}

void read_subnet(detail::ByteReader& r, ElmSubnet& s, SubnetKind expected) {
  const auto kind = r.u8();
  const auto in_dim = static_cast<Index>(r.u32());
  const auto hidden = static_cast<Index>(r.u32());
  if (kind != static_cast<std::uint8_t>(expected) || in_dim != s.in_dim || hidden != s.hidden_dim) {
    throw std::runtime_error("model: subnet record (kind " + std::to_string(kind) + ", " + shape_str(hidden, in_dim) +
                             ") does not match the expected " + to_string(expected) + " subnet " +
                             shape_str(s.hidden_dim, s.in_dim));
  }
  BnStats bn;
  bn.epsilon = r.f64();
  bn.mean.resize(in_dim);
  bn.var.resize(in_dim);
  for (Index i = 0; i < in_dim; ++i) bn.mean(i) = r.c128();
  for (Index i = 0; i < in_dim; ++i) bn.var(i) = r.f64();
  s.bn = std::move(bn);
  s.phi = r.matrix(in_dim, hidden);
}

}  // namespace

void write_model(std::ostream& os, const CascadeReceiver& net) {
  if (!net.trained()) throw std::logic_error("write_model: receiver is not trained");
  detail::ByteWriter w(os);
  w.bytes(kModelMagic, sizeof kModelMagic);
  w.u32(kModelVersion);
  w.u64(net.pool_seed);
  w.u32(static_cast<std::uint32_t>(net.m()));
  w.u32(static_cast<std::uint32_t>(net.n()));
  w.f64(net.pw.rho);
  w.f64(net.pw.eu);
  for (const ElmSubnet* s : {&net.csi1, &net.det1, &net.csi2, &net.det2}) write_subnet(w, *s);
}

CascadeReceiver read_model(std::istream& is) {
  detail::ByteReader r(is, "model");
  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kModelMagic, sizeof magic) != 0) throw std::runtime_error("model: bad magic header");
  const auto version = r.u32();
  if (version != kModelVersion) throw std::runtime_error("model: unsupported format version " + std::to_string(version));
  const std::uint64_t seed = r.u64();
  const auto m = static_cast<Index>(r.u32());
  const auto n = static_cast<Index>(r.u32());
  phy::PowerProfile pw;
  pw.rho = r.f64();
  pw.eu = r.f64();

  CascadeReceiver net = CascadeReceiver::assemble(SharedWeightPool::generate(seed, m), phy::build_walsh(m, n), pw);
  read_subnet(r, net.csi1, SubnetKind::kCsi);
  read_subnet(r, net.det1, SubnetKind::kDet);
  read_subnet(r, net.csi2, SubnetKind::kCsi);
  read_subnet(r, net.det2, SubnetKind::kDet);
  if (!r.at_end()) throw std::runtime_error("model: trailing bytes after last subnet record");
  return net;
}

void save_model(const std::filesystem::path& path, const CascadeReceiver& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_model(os, net);
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

CascadeReceiver load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open model file " + path.string());
  try {
    return read_model(is);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

}  // namespace elmcsi::elm
