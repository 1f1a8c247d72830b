#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "vpc/state.hpp"

namespace vpc {

/// Binary snapshot layout, all fields little-endian:
///
///   char[8]  magic "VPCSNAP\0"
///   u32      version (1)
///   u32      reserved (0)
///   f64      time
///   u64      M, N
///   f64      epsilon_charge, epsilon_plasma
///   u64      seed, config hash
///   M x 7 f64  x y z vx vy vz w
///   N x 6 f64  xi eta
struct SnapshotHeader {
  std::uint32_t version = 1;
  double time = 0.0;
  std::uint64_t M = 0;
  std::uint64_t N = 0;
  double epsilon_charge = 0.0;
  double epsilon_plasma = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;

  friend bool operator==(const SnapshotHeader&, const SnapshotHeader&) = default;
};

struct Snapshot {
  SnapshotHeader header;
  SimState state;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// header.time, M and N are taken from `state`.
void write_snapshot(std::ostream& out, const SimState& state, SnapshotHeader header);
void write_snapshot(const std::string& path, const SimState& state, const SnapshotHeader& header);

/// Throws ConfigError on a bad magic, unknown version or truncated file.
Snapshot read_snapshot(std::istream& in);
Snapshot read_snapshot(const std::string& path);

}  // namespace vpc
