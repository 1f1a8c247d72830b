#include "vpc/run.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <ostream>

#include <json.hpp>

#include "vpc/diagnostics.hpp"
#include "vpc/dynamics.hpp"
#include "vpc/errors.hpp"
#include "vpc/sampling.hpp"
#include "vpc/snapshot.hpp"

namespace vpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class Tallies {
 public:
  explicit Tallies(const MonitorSettings& settings) {
    for (const auto& name : settings.enabled) {
      index_[name] = tallies_.size();
      MonitorTally t;
      t.name = name;
      tallies_.push_back(std::move(t));
    }
  }

  void add(const MonitorResult& r) {
    auto& t = tallies_.at(index_.at(r.name));
    ++t.checks;
    if (r.skipped) {
      ++t.skipped;
      return;
    }
    if (!r.satisfied) ++t.failures;
    const bool worse = !t.worst || (r.sense == MonitorResult::Sense::at_most ? r.measured > t.worst->measured
                                                                              : r.measured < t.worst->measured);
    if (worse) t.worst = r;
  }

  const std::vector<MonitorTally>& all() const { return tallies_; }

 private:
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<MonitorTally> tallies_;
};

// Forwards to a monitor and tallies each result as it is produced, so the
// diagnostics rows written mid-window see current counts.
class Tallying final : public SubstepMonitor {
 public:
  Tallying(std::unique_ptr<SubstepMonitor> inner, Tallies& tallies) : inner_(std::move(inner)), tallies_(tallies) {}
  std::string_view name() const override { return inner_->name(); }
  MonitorResult check(const SubstepView& view) override {
    auto r = inner_->check(view);
    tallies_.add(r);
    return r;
  }

 private:
  std::unique_ptr<SubstepMonitor> inner_;
  Tallies& tallies_;
};

nlohmann::json result_json(const MonitorResult& r) {
  nlohmann::json j = {{"name", r.name},
                      {"window", r.window},
                      {"measured", r.measured},
                      {"bound", r.bound},
                      {"sense", r.sense == MonitorResult::Sense::at_most ? "at_most" : "at_least"},
                      {"satisfied", r.satisfied}};
  if (r.witness) j["witness"] = {{"index", r.witness->index}, {"time", r.witness->time}};
  return j;
}

void write_summary(const std::filesystem::path& path, const RunConfig& config, const RunSummary& s) {
  nlohmann::json j;
  j["exit_code"] = s.exit_code;
  j["error"] = s.error;
  j["config_hash"] = config_hash(config);
  j["H0"] = s.H0;
  j["Q0"] = s.Q0;
  j["K1"] = s.K1;
  j["windows"] = s.windows;
  j["substeps"] = s.substeps;
  j["diagnostics_rows"] = s.rows;
  j["final_time"] = s.final_time;
  j["max_energy_drift"] = s.max_energy_drift;
  j["min_charge_distance"] = s.min_charge_distance;
  j["min_charge_separation"] = s.min_charge_separation;
  j["Q_running"] = s.q_running;
  j["empirical_constants"] = {{"envelope_C", s.envelope_C},
                              {"protection_meas_Q13_8", s.max_protection_constant},
                              {"protection_meas_Q15_8", s.max_protection_constant_wide},
                              {"min_convexity_ratio", s.min_convexity_ratio}};
  j["windows_boundaries"] = s.boundaries;
  j["q_per_window"] = s.q_per_window;
  auto& monitors = j["monitors"];
  monitors = nlohmann::json::array();
  for (const auto& t : s.monitors) {
    nlohmann::json m = {{"name", t.name}, {"checks", t.checks}, {"failures", t.failures}, {"skipped", t.skipped}};
    m["worst"] = t.worst ? result_json(*t.worst) : nlohmann::json();
    monitors.push_back(m);
  }
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

}  // namespace

std::vector<std::string> diagnostics_columns(const MonitorSettings& monitors) {
  std::vector<std::string> cols = {"t", "H", "kinetic_plasma", "Q_running", "min_charge_distance",
                                   "min_charge_separation"};
  for (const auto& m : monitors.enabled) {
    cols.push_back(m + "_pass");
    cols.push_back(m + "_fail");
  }
  return cols;
}

RunSummary run_command(const RunConfig& config, const RunOptions& options) {
  namespace fs = std::filesystem;
  RunSummary summary;
  config.validate();
  const fs::path dir(config.output);
  fs::create_directories(dir);
  const KernelSpec& kernel = config.kernel;
  const FieldSolverConfig& field = config.field;
  const auto& mon = config.monitors;

  SimState initial = sample(config.initial);
  const EnergyReport e0 = total_energy(initial, kernel, field.threads);
  summary.H0 = e0.total;
  summary.K1 = config.K1.value_or(default_K1(e0.total));
  const double K1 = summary.K1;
  const bool has_q = !initial.ensemble.empty() && !initial.charges.empty();
  summary.Q0 = has_q ? initial_Q(initial, K1, kernel) : kNaN;
  summary.q_running = summary.Q0;
  summary.min_charge_distance = kInf;
  summary.min_charge_separation = kInf;
  summary.min_convexity_ratio = kInf;

  {
    std::ofstream echo(dir / "resolved_config.ini");
    echo << "# K1 resolves to " << fmt(K1) << "\n" << to_text(config);
  }
  const SnapshotHeader header{kSnapshotVersion, 0.0, 0, 0, kernel.epsilon_charge, kernel.epsilon_plasma,
                              config.initial.seed, config_hash(config)};
  write_snapshot((dir / "initial.snap").string(), initial, header);

  Tallies tallies(mon);
  std::vector<std::unique_ptr<SubstepMonitor>> owned;
  if (mon.has("velocity_energy_bound")) {
    owned.push_back(std::make_unique<Tallying>(std::make_unique<VelocityEnergyBoundMonitor>(K1), tallies));
  }
  if (mon.has("eta_bound")) {
    owned.push_back(std::make_unique<Tallying>(std::make_unique<EtaBoundMonitor>(summary.H0, mon.eta_tol), tallies));
  }
  if (mon.has("separation")) {
    owned.push_back(
        std::make_unique<Tallying>(std::make_unique<SeparationMonitor>(summary.H0, mon.separation_tol), tallies));
  }
  if (mon.has("sqrt_h_variation")) {
    owned.push_back(std::make_unique<Tallying>(
        std::make_unique<SqrtHVariationMonitor>(K1, mon.sqrt_h_tol, mon.sqrt_h_tol_field), tallies));
  }
  std::vector<SubstepMonitor*> monitors;
  for (auto& m : owned) monitors.push_back(m.get());
  const bool window_monitors = has_q && (mon.has("lemma_fac") || mon.has("protection_sphere"));

  std::ofstream csv(dir / "diagnostics.csv");
  {
    const auto cols = diagnostics_columns(mon);
    for (std::size_t k = 0; k < cols.size(); ++k) csv << (k ? "," : "") << cols[k];
    csv << "\n";
  }
  auto write_row = [&](const SimState& s) {
    const EnergyReport e = total_energy(s, kernel, field.threads);
    const double drift = summary.H0 != 0.0 ? std::abs(e.total - summary.H0) / summary.H0 : std::abs(e.total);
    summary.max_energy_drift = std::max(summary.max_energy_drift, drift);
    if (mon.has("energy_drift")) {
      MonitorResult r;
      r.name = "energy_drift";
      r.window = summary.windows;
      r.measured = drift;
      r.bound = mon.energy_drift_tol;
      r.witness = MonitorResult::Witness{0, s.time};
      tallies.add(r.judge());
    }
    const double q = has_q ? compute_Q(s, K1, kernel) : kNaN;
    if (has_q) summary.q_running = std::max(summary.q_running, q);
    const double dist = has_q ? min_charge_distance(s) : kInf;
    const double sep = s.charges.size() >= 2 ? min_charge_separation(s) : kInf;
    csv << fmt(s.time) << "," << fmt(e.total) << "," << fmt(e.kinetic_plasma) << "," << fmt(summary.q_running) << ","
        << fmt(dist) << "," << fmt(sep);
    for (const auto& t : tallies.all()) csv << "," << (t.checks - t.failures) << "," << t.failures;
    csv << "\n";
    ++summary.rows;
  };

  Propagator prop(std::move(initial), field);
  write_row(prop.state());
  std::size_t substeps_total = 0;
  std::size_t last_row_substep = 0;
  const std::size_t stride = config.integrator.output_stride;

  double q_ref = has_q ? summary.Q0 : 1.0 / (config.integrator.window_K2 * config.T);
  WindowPartition partition = build_partition(config.T, q_ref, config.integrator);
  std::vector<std::pair<double, double>> envelope_samples;

  try {
    for (std::size_t i = 0; i + 1 < partition.boundaries.size(); ++i) {
      WindowOptions wopt;
      wopt.window_index = i;
      wopt.K1 = K1;
      wopt.record_trajectory = window_monitors;
      wopt.after_substep = [&](const Propagator& p, std::size_t) {
        ++substeps_total;
        if (substeps_total % stride == 0) {
          write_row(p.state());
          last_row_substep = substeps_total;
        }
      };
      WindowOutcome out;
      try {
        out = run_window(prop, partition.boundaries[i + 1], config.integrator, monitors, wopt);
      } catch (const WindowAborted& e) {
        summary.min_charge_distance = std::min(summary.min_charge_distance, e.partial().min_charge_distance);
        summary.min_charge_separation = std::min(summary.min_charge_separation, e.partial().min_charge_separation);
        throw;
      }
      ++summary.windows;
      summary.min_charge_distance = std::min(summary.min_charge_distance, out.min_charge_distance);
      summary.min_charge_separation = std::min(summary.min_charge_separation, out.min_charge_separation);
      partition.q_per_window.push_back(out.q_window);

      if (has_q) {
        summary.q_running = std::max(summary.q_running, out.q_window);
        envelope_samples.emplace_back(prop.state().time, summary.q_running);
        if (window_monitors) {
          if (mon.has("lemma_fac")) tallies.add(lemma_fac_monitor(out.trajectory, out.q_window, mon.lemma_fac_tol, i));
          if (mon.has("protection_sphere")) {
            const auto params = AnalysisParameters::from_Q(out.q_window, K1, config.integrator.window_K2);
            const auto rep = protection_sphere_monitor(out.trajectory, params, i);
            tallies.add(rep.connectedness);
            summary.max_protection_constant = std::max(summary.max_protection_constant, rep.max_constant);
            summary.max_protection_constant_wide =
                std::max(summary.max_protection_constant_wide, rep.max_constant_wide);
            summary.min_convexity_ratio = std::min(summary.min_convexity_ratio, rep.min_convexity_ratio);
          }
        }
        // Forward estimate of Q: once the running sup exceeds the estimate
        // the rest of [0, T] is re-partitioned with the larger value.
        if (summary.q_running > q_ref && i + 2 < partition.boundaries.size()) {
          q_ref = summary.q_running;
          const double t0 = partition.boundaries[i + 1];
          const auto rest = build_partition(config.T - t0, q_ref, config.integrator);
          partition.boundaries.resize(i + 2);
          for (std::size_t k = 1; k < rest.boundaries.size(); ++k) {
            partition.boundaries.push_back(k + 1 == rest.boundaries.size() ? config.T : t0 + rest.boundaries[k]);
          }
          partition.delta_T = rest.delta_T;
        }
      }
      if ((i + 1) % config.snapshot_stride == 0 && i + 2 < partition.boundaries.size()) {
        char name[32];
        std::snprintf(name, sizeof name, "snap_%06zu.snap", i + 1);
        write_snapshot((dir / name).string(), prop.state(), header);
      }
      if (options.log) {
        *options.log << "window " << (i + 1) << "/" << (partition.boundaries.size() - 1) << " t=" << prop.state().time
                     << " substeps=" << out.substeps << " Q_i=" << out.q_window << "\n";
      }
    }
    if (last_row_substep != substeps_total) write_row(prop.state());
  } catch (const IntegrationError& e) {
    summary.exit_code = kExitIntegrationFailure;
    summary.error = e.what();
    write_row(prop.state());
  } catch (const DomainError& e) {
    summary.exit_code = kExitIntegrationFailure;
    summary.error = e.what();
  }

  summary.substeps = substeps_total;
  summary.final_time = prop.state().time;
  summary.boundaries = partition.boundaries;
  summary.q_per_window = partition.q_per_window;
  summary.monitors = tallies.all();
  if (has_q) summary.envelope_C = envelope_constant(summary.Q0, envelope_samples);
  if (summary.exit_code == kExitPass) {
    for (const auto& t : summary.monitors) {
      if (t.failures > 0) summary.exit_code = kExitMonitorFailure;
    }
  }
  csv.flush();
  write_snapshot((dir / "final.snap").string(), prop.state(), header);
  write_summary(dir / "summary.json", config, summary);
  return summary;
}

}  // namespace vpc
