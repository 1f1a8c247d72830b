#pragma once

#include <array>
#include <cstddef>

namespace vpc::detail {

// Fixed row partition of the upper-triangular pair set {(i, j) : i < j < n}
// into blocks of roughly equal pair count. Depends on n only, never on the
// thread count, so block-wise reductions are reproducible.
inline constexpr std::size_t kPairBlocks = 8;

inline std::array<std::size_t, kPairBlocks + 1> pair_block_rows(std::size_t n) {
  std::array<std::size_t, kPairBlocks + 1> rows{};
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n > 0 ? n - 1 : 0);
  std::size_t row = 0;
  double done = 0.0;
  for (std::size_t b = 1; b < kPairBlocks; ++b) {
    const double target = total * static_cast<double>(b) / kPairBlocks;
    while (row < n && done < target) {
      done += static_cast<double>(n - row - 1);
      ++row;
    }
    rows[b] = row;
  }
  rows[kPairBlocks] = n;
  return rows;
}

}  // namespace vpc::detail
