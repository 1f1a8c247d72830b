#include "vpc/snapshot.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "vpc/errors.hpp"

namespace vpc {

namespace {

constexpr char kMagic[8] = {'V', 'P', 'C', 'S', 'N', 'A', 'P', '\0'};

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u64(std::uint64_t v) {
    std::array<char, 8> b;
    for (int k = 0; k < 8; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    out_.write(b.data(), 8);
  }
  void u32(std::uint32_t v) {
    std::array<char, 4> b;
    for (int k = 0; k < 4; ++k) b[k] = static_cast<char>((v >> (8 * k)) & 0xff);
    out_.write(b.data(), 4);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void vec(const Vec3& v) {
    f64(v.x);
    f64(v.y);
    f64(v.z);
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  void bytes(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw ConfigError("snapshot: truncated file");
  }
  std::uint64_t u64() {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int k = 7; k >= 0; --k) v = (v << 8) | b[k];
    return v;
  }
  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | b[k];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  Vec3 vec() {
    const double x = f64();
    const double y = f64();
    return {x, y, f64()};
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_snapshot(std::ostream& out, const SimState& state, SnapshotHeader header) {
  header.time = state.time;
  header.M = state.ensemble.size();
  header.N = state.charges.size();
  Writer w(out);
  out.write(kMagic, sizeof kMagic);
  w.u32(kSnapshotVersion);
  w.u32(0);
  w.f64(header.time);
  w.u64(header.M);
  w.u64(header.N);
  w.f64(header.epsilon_charge);
  w.f64(header.epsilon_plasma);
  w.u64(header.seed);
  w.u64(header.config_hash);
  for (const auto& p : state.ensemble.particles()) {
    w.vec(p.position);
    w.vec(p.velocity);
    w.f64(p.weight);
  }
  for (const auto& c : state.charges) {
    w.vec(c.position);
    w.vec(c.velocity);
  }
  if (!out) throw ConfigError("snapshot: write failed");
}

void write_snapshot(const std::string& path, const SimState& state, const SnapshotHeader& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("snapshot: cannot open '" + path + "' for writing");
  write_snapshot(out, state, header);
}

Snapshot read_snapshot(std::istream& in) {
  Reader r(in);
  char magic[8];
  r.bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw ConfigError("snapshot: bad magic");
  Snapshot s;
  s.header.version = r.u32();
  if (s.header.version != kSnapshotVersion) {
    throw ConfigError("snapshot: unsupported version " + std::to_string(s.header.version));
  }
  r.u32();
  s.header.time = r.f64();
  s.header.M = r.u64();
  s.header.N = r.u64();
  s.header.epsilon_charge = r.f64();
  s.header.epsilon_plasma = r.f64();
  s.header.seed = r.u64();
  s.header.config_hash = r.u64();

  std::vector<Macroparticle> particles;
  particles.reserve(s.header.M < (1u << 26) ? s.header.M : 0);
  for (std::uint64_t j = 0; j < s.header.M; ++j) {
    Macroparticle p;
    p.position = r.vec();
    p.velocity = r.vec();
    p.weight = r.f64();
    particles.push_back(p);
  }
  s.state.time = s.header.time;
  s.state.ensemble = PlasmaEnsemble(std::move(particles));
  for (std::uint64_t a = 0; a < s.header.N; ++a) {
    ChargeState c;
    c.position = r.vec();
    c.velocity = r.vec();
    s.state.charges.push_back(c);
  }
  return s;
}

Snapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("snapshot: cannot open '" + path + "'");
  return read_snapshot(in);
}

}  // namespace vpc
