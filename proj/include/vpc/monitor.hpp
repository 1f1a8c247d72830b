#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "vpc/field.hpp"
#include "vpc/kernels.hpp"
#include "vpc/state.hpp"

namespace vpc {

/// Outcome of one inequality check.
///
/// `sense` tells which side the bound sits on: for at_most the check is
/// measured <= bound, for at_least it is measured >= bound. Skipped checks
/// (monitor not applicable, e.g. separation with one charge) count as
/// satisfied.
struct MonitorResult {
  enum class Sense { at_most, at_least };
  struct Witness {
    std::size_t index = 0;  ///< particle index (or charge index for charge monitors)
    double time = 0.0;
  };

  std::string name;
  std::size_t window = 0;
  double measured = 0.0;
  double bound = 0.0;
  Sense sense = Sense::at_most;
  bool satisfied = true;
  bool skipped = false;
  std::optional<Witness> witness;

  /// Sets `satisfied` from measured, bound and sense.
  MonitorResult& judge() {
    satisfied = skipped || (sense == Sense::at_most ? measured <= bound : measured >= bound);
    return *this;
  }
};

/// Read-only view of one integrator substep handed to monitors.
struct SubstepView {
  std::size_t window = 0;
  double dt = 0.0;
  const SimState& before;
  const SimState& after;
  const Accelerations& acc_before;
  const Accelerations& acc_after;
  const KernelSpec& kernel;
};

class SubstepMonitor {
 public:
  virtual ~SubstepMonitor() = default;
  virtual std::string_view name() const = 0;
  virtual MonitorResult check(const SubstepView& view) = 0;
};

}  // namespace vpc
