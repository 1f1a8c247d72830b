#include "vpc/field.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "vpc/errors.hpp"
#include "vpc/parallel.hpp"
#include "pair_blocks.hpp"

namespace vpc {

using detail::kPairBlocks;
using detail::pair_block_rows;

namespace {

// Structure-of-arrays copy of the ensemble for the pair loops.
struct Sources {
  std::vector<double> x, y, z, w;

  explicit Sources(const PlasmaEnsemble& ensemble) {
    const std::size_t n = ensemble.size();
    x.resize(n);
    y.resize(n);
    z.resize(n);
    w.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& p = ensemble[j];
      x[j] = p.position.x;
      y[j] = p.position.y;
      z[j] = p.position.z;
      w[j] = p.weight;
    }
  }
  std::size_t size() const { return w.size(); }
};

void require_finite(std::span<const Vec3> field, const char* what) {
  for (const auto& e : field) {
    if (!is_finite(e)) {
      throw DomainError(std::string(what) + ": coincident points with epsilon_plasma = 0");
    }
  }
}

}  // namespace

void FieldSolverConfig::validate() const {
  kernel.validate();
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw ConfigError("field: theta must be >= 0");
  if (leaf_capacity < 1) throw ConfigError("field: leaf_capacity must be >= 1");
  if (threads < 1) throw ConfigError("field: threads must be >= 1");
}

std::vector<Vec3> plasma_field_direct(std::span<const Vec3> targets, const PlasmaEnsemble& ensemble,
                                      const KernelSpec& spec, unsigned threads) {
  const Sources src(ensemble);
  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  const std::size_t m = src.size();
  const double* xs = src.x.data();
  const double* ys = src.y.data();
  const double* zs = src.z.data();
  const double* ws = src.w.data();
  std::vector<Vec3> out(targets.size());
  parallel_for(targets.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double xi = targets[i].x, yi = targets[i].y, zi = targets[i].z;
      double sx = 0.0, sy = 0.0, sz = 0.0;
#pragma omp simd reduction(+ : sx, sy, sz)
      for (std::size_t j = 0; j < m; ++j) {
        const double dx = xi - xs[j], dy = yi - ys[j], dz = zi - zs[j];
        const double s2 = dx * dx + dy * dy + dz * dz + e2;
        const double k = ws[j] / (s2 * std::sqrt(s2));
        sx += k * dx;
        sy += k * dy;
        sz += k * dz;
      }
      out[i] = {sx, sy, sz};
    }
  });
  require_finite(out, "plasma_field_direct");
  return out;
}

std::vector<Vec3> plasma_self_field_direct(const PlasmaEnsemble& ensemble, const KernelSpec& spec,
                                           unsigned threads) {
  const Sources src(ensemble);
  const std::size_t m = src.size();
  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  const auto rows = pair_block_rows(m);

  // One accumulator per block; reduced afterwards in block order.
  std::vector<std::array<std::vector<double>, 3>> acc(kPairBlocks);
  parallel_for(kPairBlocks, threads, [&](std::size_t bbegin, std::size_t bend) {
    for (std::size_t b = bbegin; b < bend; ++b) {
      auto& [bx, by, bz] = acc[b];
      if (rows[b] == rows[b + 1]) continue;
      bx.assign(m, 0.0);
      by.assign(m, 0.0);
      bz.assign(m, 0.0);
      const double* xs = src.x.data();
      const double* ys = src.y.data();
      const double* zs = src.z.data();
      const double* ws = src.w.data();
      double* ax = bx.data();
      double* ay = by.data();
      double* az = bz.data();
      for (std::size_t i = rows[b]; i < rows[b + 1]; ++i) {
        const double xi = xs[i], yi = ys[i], zi = zs[i], wi = ws[i];
        double sx = 0.0, sy = 0.0, sz = 0.0;
#pragma omp simd reduction(+ : sx, sy, sz)
        for (std::size_t j = i + 1; j < m; ++j) {
          const double dx = xi - xs[j], dy = yi - ys[j], dz = zi - zs[j];
          const double s2 = dx * dx + dy * dy + dz * dz + e2;
          const double k = 1.0 / (s2 * std::sqrt(s2));
          const double kj = ws[j] * k;
          const double ki = wi * k;
          sx += kj * dx;
          sy += kj * dy;
          sz += kj * dz;
          ax[j] -= ki * dx;
          ay[j] -= ki * dy;
          az[j] -= ki * dz;
        }
        ax[i] += sx;
        ay[i] += sy;
        az[i] += sz;
      }
    }
  });

  std::vector<Vec3> out(m);
  for (std::size_t b = 0; b < kPairBlocks; ++b) {
    const auto& [bx, by, bz] = acc[b];
    if (bx.empty()) continue;
    for (std::size_t i = 0; i < m; ++i) out[i] += Vec3{bx[i], by[i], bz[i]};
  }
  require_finite(out, "plasma_self_field_direct");
  return out;
}

// ---------------------------------------------------------------------------
// Octree

namespace {
constexpr int kMaxDepth = 48;
}

Octree::Octree(const PlasmaEnsemble& ensemble, std::size_t leaf_capacity)
    : leaf_capacity_(std::max<std::size_t>(leaf_capacity, 1)) {
  const std::size_t m = ensemble.size();
  positions_.reserve(m);
  weights_.reserve(m);
  for (const auto& p : ensemble.particles()) {
    positions_.push_back(p.position);
    weights_.push_back(p.weight);
  }
  order_.resize(m);
  std::iota(order_.begin(), order_.end(), 0u);

  Node root;
  if (m > 0) {
    Vec3 lo = positions_[0], hi = positions_[0];
    for (const auto& x : positions_) {
      lo = {std::min(lo.x, x.x), std::min(lo.y, x.y), std::min(lo.z, x.z)};
      hi = {std::max(hi.x, x.x), std::max(hi.y, x.y), std::max(hi.z, x.z)};
    }
    root.center = 0.5 * (lo + hi);
    const double extent = std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z});
    root.half_width = 0.5 * extent * (1.0 + 1e-12) + 1e-300;
  }
  root.begin = 0;
  root.end = static_cast<std::uint32_t>(m);
  nodes_.push_back(root);
  split(0, 0);
}

void Octree::split(std::size_t node_index, int depth) {
  const Node node = nodes_[node_index];
  const std::size_t count = node.end - node.begin;

  if (count <= leaf_capacity_ || depth >= kMaxDepth) {
    double w = 0.0;
    Vec3 moment;
    for (std::uint32_t k = node.begin; k < node.end; ++k) {
      const auto j = order_[k];
      w += weights_[j];
      moment += weights_[j] * positions_[j];
    }
    nodes_[node_index].weight = w;
    nodes_[node_index].centroid = w > 0.0 ? moment / w : node.center;
    return;
  }

  // Partition the index range by octant: bit 0 = x, bit 1 = y, bit 2 = z.
  auto first = order_.begin() + node.begin;
  auto last = order_.begin() + node.end;
  const Vec3 c = node.center;
  auto px = [&](double Vec3::*axis) {
    return [this, axis, c](std::uint32_t j) { return positions_[j].*axis < c.*axis; };
  };
  std::array<std::uint32_t, 9> bounds{};
  bounds[0] = node.begin;
  bounds[8] = node.end;
  auto mid_z = std::partition(first, last, px(&Vec3::z));
  auto mid_y0 = std::partition(first, mid_z, px(&Vec3::y));
  auto mid_y1 = std::partition(mid_z, last, px(&Vec3::y));
  auto mid_x00 = std::partition(first, mid_y0, px(&Vec3::x));
  auto mid_x01 = std::partition(mid_y0, mid_z, px(&Vec3::x));
  auto mid_x10 = std::partition(mid_z, mid_y1, px(&Vec3::x));
  auto mid_x11 = std::partition(mid_y1, last, px(&Vec3::x));
  auto offset = [&](auto it) { return static_cast<std::uint32_t>(it - order_.begin()); };
  bounds[1] = offset(mid_x00);
  bounds[2] = offset(mid_y0);
  bounds[3] = offset(mid_x01);
  bounds[4] = offset(mid_z);
  bounds[5] = offset(mid_x10);
  bounds[6] = offset(mid_y1);
  bounds[7] = offset(mid_x11);

  const auto first_child = static_cast<std::int32_t>(nodes_.size());
  const double h = 0.5 * node.half_width;
  for (int octant = 0; octant < 8; ++octant) {
    Node child;
    child.half_width = h;
    child.center = {c.x + ((octant & 1) ? h : -h), c.y + ((octant & 2) ? h : -h),
                    c.z + ((octant & 4) ? h : -h)};
    child.begin = bounds[octant];
    child.end = bounds[octant + 1];
    nodes_.push_back(child);
  }
  nodes_[node_index].first_child = first_child;

  double w = 0.0;
  Vec3 moment;
  for (int octant = 0; octant < 8; ++octant) {
    split(static_cast<std::size_t>(first_child + octant), depth + 1);
    const Node& ch = nodes_[static_cast<std::size_t>(first_child + octant)];
    w += ch.weight;
    moment += ch.weight * ch.centroid;
  }
  nodes_[node_index].weight = w;
  nodes_[node_index].centroid = w > 0.0 ? moment / w : node.center;
}

Vec3 Octree::field_at(const Vec3& x, double theta, const KernelSpec& spec,
                      std::int64_t exclude) const {
  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  Vec3 sum;
  std::vector<std::size_t> stack;
  stack.reserve(128);
  stack.push_back(0);
  while (!stack.empty()) {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (node.begin == node.end) continue;
    if (node.is_leaf()) {
      for (std::uint32_t k = node.begin; k < node.end; ++k) {
        const auto j = order_[k];
        if (static_cast<std::int64_t>(j) == exclude) continue;
        const Vec3 r = x - positions_[j];
        const double s2 = norm2(r) + e2;
        if (s2 == 0.0) throw DomainError("plasma_field_tree: coincident points with epsilon_plasma = 0");
        sum += r * (weights_[j] / (s2 * std::sqrt(s2)));
      }
      continue;
    }
    const Vec3 r = x - node.centroid;
    const double d = norm(r);
    if (2.0 * node.half_width < theta * d) {
      const double s2 = d * d + e2;
      sum += r * (node.weight / (s2 * std::sqrt(s2)));
      continue;
    }
    for (int octant = 7; octant >= 0; --octant) {
      stack.push_back(static_cast<std::size_t>(node.first_child + octant));
    }
  }
  return sum;
}

std::vector<Vec3> plasma_field_tree(std::span<const Vec3> targets, const PlasmaEnsemble& ensemble,
                                    const FieldSolverConfig& config) {
  const Octree tree(ensemble, config.leaf_capacity);
  std::vector<Vec3> out(targets.size());
  parallel_for(targets.size(), config.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = tree.field_at(targets[i], config.theta, config.kernel);
  });
  return out;
}

std::vector<Vec3> plasma_self_field_tree(const PlasmaEnsemble& ensemble,
                                         const FieldSolverConfig& config) {
  const Octree tree(ensemble, config.leaf_capacity);
  std::vector<Vec3> out(ensemble.size());
  parallel_for(ensemble.size(), config.threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      out[i] = tree.field_at(ensemble[i].position, config.theta, config.kernel,
                             static_cast<std::int64_t>(i));
    }
  });
  return out;
}

std::vector<Vec3> plasma_self_field(const PlasmaEnsemble& ensemble, const FieldSolverConfig& config) {
  switch (config.method) {
    case FieldMethod::direct:
      return plasma_self_field_direct(ensemble, config.kernel, config.threads);
    case FieldMethod::barnes_hut:
      return plasma_self_field_tree(ensemble, config);
    case FieldMethod::none:
      break;
  }
  return std::vector<Vec3>(ensemble.size());
}

Vec3 charge_field(const Vec3& x, std::span<const ChargeState> charges, const KernelSpec& spec) {
  Vec3 sum;
  for (const auto& c : charges) sum += regularized_charge_force(x - c.position, spec);
  return sum;
}

Vec3 plasma_field_at_charge(const Vec3& xi, const PlasmaEnsemble& ensemble, const KernelSpec& spec) {
  Vec3 sum;
  for (const auto& p : ensemble.particles()) {
    sum += p.weight * regularized_charge_force(xi - p.position, spec);
  }
  return sum;
}

Vec3 field_on_charge(std::size_t alpha, const SimState& state, const FieldSolverConfig& config) {
  if (alpha >= state.charges.size()) throw DomainError("field_on_charge: charge index out of range");
  const Vec3 xi = state.charges[alpha].position;
  Vec3 sum;
  if (config.method != FieldMethod::none) sum = plasma_field_at_charge(xi, state.ensemble, config.kernel);
  for (std::size_t b = 0; b < state.charges.size(); ++b) {
    if (b == alpha) continue;
    const Vec3 r = xi - state.charges[b].position;
    if (norm2(r) == 0.0) {
      throw DomainError("charges " + std::to_string(alpha) + " and " + std::to_string(b) + " coincide");
    }
    sum += coulomb_force(r);
  }
  return sum;
}

double static_field_bound(const PlasmaEnsemble& ensemble, const Vec3& x, double R,
                          const KernelSpec& spec) {
  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  const double R2 = R * R;
  double sum = 0.0;
  for (const auto& p : ensemble.particles()) {
    if (norm2(p.velocity) < R2) sum += p.weight / (norm2(x - p.position) + e2);
  }
  return sum;
}

std::vector<double> static_field_bound_profile(const PlasmaEnsemble& ensemble, const Vec3& x,
                                               std::span<const double> radii,
                                               const KernelSpec& spec) {
  const std::size_t k = radii.size();
  std::vector<std::size_t> rank(k);
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::sort(rank.begin(), rank.end(), [&](auto a, auto b) { return radii[a] < radii[b]; });
  std::vector<double> sorted2(k);
  for (std::size_t i = 0; i < k; ++i) sorted2[i] = radii[rank[i]] * radii[rank[i]];

  const double e2 = spec.epsilon_plasma * spec.epsilon_plasma;
  // bucket[i] collects particles first counted at the i-th smallest radius.
  std::vector<double> bucket(k + 1, 0.0);
  for (const auto& p : ensemble.particles()) {
    const double v2 = norm2(p.velocity);
    const auto slot = static_cast<std::size_t>(
        std::upper_bound(sorted2.begin(), sorted2.end(), v2) - sorted2.begin());
    if (slot < k) bucket[slot] += p.weight / (norm2(x - p.position) + e2);
  }
  std::vector<double> out(k);
  double running = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    running += bucket[i];
    out[rank[i]] = running;
  }
  return out;
}

FieldComparison compare_fields(std::span<const Vec3> approx, std::span<const Vec3> reference) {
  if (approx.size() != reference.size()) throw DomainError("compare_fields: size mismatch");
  FieldComparison c;
  double sum = 0.0;
  for (std::size_t j = 0; j < approx.size(); ++j) {
    const double err = norm(approx[j] - reference[j]);
    const double ref = norm(reference[j]);
    const double rel = ref > 0.0 ? err / ref : (err > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    c.max_absolute = std::max(c.max_absolute, err);
    if (rel > c.max_relative) {
      c.max_relative = rel;
      c.worst = j;
    }
    sum += rel * rel;
  }
  if (!approx.empty()) c.rms_relative = std::sqrt(sum / static_cast<double>(approx.size()));
  return c;
}

}  // namespace vpc
