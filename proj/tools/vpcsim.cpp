// vpcsim: command-line front end of the plasma/point-charge simulator.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vpc/config.hpp"
#include "vpc/diagnostics.hpp"
#include "vpc/errors.hpp"
#include "vpc/field.hpp"
#include "vpc/oracle.hpp"
#include "vpc/run.hpp"
#include "vpc/sampling.hpp"
#include "vpc/snapshot.hpp"

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> output;
  std::optional<double> theta;
  bool quiet = false;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

vpc::RunConfig load(const std::string& path, const Globals& g) {
  vpc::RunConfig c = vpc::load_config(path);
  if (g.seed) c.initial.seed = *g.seed;
  if (g.threads) c.field.threads = *g.threads;
  if (g.output) c.output = *g.output;
  if (g.theta) c.field.theta = *g.theta;
  c.validate();
  return c;
}

int cmd_run(const std::string& path, const Globals& g) {
  const auto config = load(path, g);
  vpc::RunOptions opt;
  if (!g.quiet) opt.log = &std::cerr;
  const auto s = vpc::run_command(config, opt);
  if (!g.quiet) {
    std::cout << "exit_code = " << s.exit_code << "\n"
              << "windows = " << s.windows << "\nsubsteps = " << s.substeps << "\n"
              << "H0 = " << fmt(s.H0) << "\nQ0 = " << fmt(s.Q0) << "\nQ_running = " << fmt(s.q_running) << "\n"
              << "max_energy_drift = " << fmt(s.max_energy_drift) << "\n"
              << "min_charge_distance = " << fmt(s.min_charge_distance) << "\n"
              << "min_charge_separation = " << fmt(s.min_charge_separation) << "\n"
              << "envelope_C = " << fmt(s.envelope_C) << "\n";
    for (const auto& t : s.monitors) {
      std::cout << "monitor " << t.name << ": checks=" << t.checks << " failures=" << t.failures << "\n";
    }
    if (!s.error.empty()) std::cout << "error: " << s.error << "\n";
  }
  return s.exit_code;
}

int cmd_sample(const std::string& path, const Globals& g) {
  const auto config = load(path, g);
  const auto state = vpc::sample(config.initial);
  std::filesystem::create_directories(config.output);
  const auto file = (std::filesystem::path(config.output) / "initial.snap").string();
  vpc::write_snapshot(file, state,
                      {vpc::kSnapshotVersion, 0.0, 0, 0, config.kernel.epsilon_charge, config.kernel.epsilon_plasma,
                       config.initial.seed, vpc::config_hash(config)});
  const double H = vpc::total_energy(state, config.kernel, config.field.threads).total;
  const double K1 = config.K1.value_or(vpc::default_K1(H));
  std::cout << "snapshot = " << file << "\nM = " << state.ensemble.size() << "\nN = " << state.charges.size()
            << "\nH = " << fmt(H) << "\nK1 = " << fmt(K1) << "\n";
  if (!state.ensemble.empty() && !state.charges.empty()) {
    std::cout << "Q0 = " << fmt(vpc::initial_Q(state, K1, config.kernel)) << "\n";
  }
  return vpc::kExitPass;
}

int cmd_diagnose(const std::string& path, std::optional<double> K1_flag, const Globals& g) {
  const auto snap = vpc::read_snapshot(path);
  vpc::KernelSpec spec;
  spec.epsilon_charge = snap.header.epsilon_charge;
  spec.epsilon_plasma = snap.header.epsilon_plasma;
  const auto& s = snap.state;
  const auto e = vpc::total_energy(s, spec, g.threads.value_or(1));
  const double K1 = K1_flag.value_or(vpc::default_K1(e.total));
  std::cout << "time = " << fmt(s.time) << "\nM = " << s.ensemble.size() << "\nN = " << s.charges.size() << "\n"
            << "kinetic_plasma = " << fmt(e.kinetic_plasma) << "\n"
            << "kinetic_charges = " << fmt(e.kinetic_charges) << "\n"
            << "plasma_charge_potential = " << fmt(e.plasma_charge_potential) << "\n"
            << "plasma_plasma_potential = " << fmt(e.plasma_plasma_potential) << "\n"
            << "charge_charge_potential = " << fmt(e.charge_charge_potential) << "\n"
            << "H = " << fmt(e.total) << "\nK1 = " << fmt(K1) << "\n";
  if (!s.ensemble.empty()) std::cout << "max_speed = " << fmt(vpc::max_speed(s)) << "\n";
  if (s.charges.size() >= 2) std::cout << "min_charge_separation = " << fmt(vpc::min_charge_separation(s)) << "\n";
  if (!s.ensemble.empty() && !s.charges.empty()) {
    const double Q = vpc::compute_Q(s, K1, spec);
    const auto p = vpc::AnalysisParameters::from_Q(Q, K1, 16.0);
    std::cout << "min_charge_distance = " << fmt(vpc::min_charge_distance(s)) << "\n"
              << "Q = " << fmt(Q) << "\nDelta_T = " << fmt(p.delta_T) << "\nR = " << fmt(p.R)
              << "\ndelta = " << fmt(p.delta) << "\nl = " << fmt(p.l) << "\n";
  }
  return vpc::kExitPass;
}

int cmd_two_body(const std::string& path, const Globals& g) {
  const auto c = load(path, g);
  if (c.initial.charges.empty()) throw vpc::ConfigError("oracle two-body: [initial] needs one charge");
  vpc::TwoBodyProblem p;
  p.x = c.study.particle_position;
  p.v = c.study.particle_velocity;
  p.xi = c.initial.charges.front().position;
  p.eta = c.initial.charges.front().velocity;
  p.charge_mobile = c.study.charge_mobile;
  p.particle_weight = c.study.particle_weight;
  std::vector<double> times;
  for (std::size_t k = 0; k <= c.study.samples; ++k) {
    times.push_back(c.T * static_cast<double>(k) / static_cast<double>(c.study.samples));
  }
  const auto ref = vpc::two_body_reference(p, c.T, c.study.tolerance, times);

  std::filesystem::create_directories(c.output);
  std::ofstream csv(std::filesystem::path(c.output) / "two_body.csv");
  csv << "t,x,y,z,vx,vy,vz,xi_x,xi_y,xi_z,eta_x,eta_y,eta_z,energy,Lx,Ly,Lz\n";
  const double E0 = vpc::two_body_energy(p, ref.front());
  double drift = 0.0, closest = std::numeric_limits<double>::infinity();
  for (const auto& s : ref) {
    const double E = vpc::two_body_energy(p, s);
    const auto L = vpc::two_body_angular_momentum(p, s);
    drift = std::max(drift, std::abs(E - E0));
    closest = std::min(closest, vpc::norm(s.x - s.xi));
    csv << fmt(s.t) << "," << fmt(s.x.x) << "," << fmt(s.x.y) << "," << fmt(s.x.z) << "," << fmt(s.v.x) << ","
        << fmt(s.v.y) << "," << fmt(s.v.z) << "," << fmt(s.xi.x) << "," << fmt(s.xi.y) << "," << fmt(s.xi.z) << ","
        << fmt(s.eta.x) << "," << fmt(s.eta.y) << "," << fmt(s.eta.z) << "," << fmt(E) << "," << fmt(L.x) << ","
        << fmt(L.y) << "," << fmt(L.z) << "\n";
  }

  vpc::FieldSolverConfig field = c.field;
  field.method = vpc::FieldMethod::none;
  vpc::Propagator prop(vpc::to_sim_state(p), field);
  vpc::run_window(prop, c.T, c.integrator, {});
  const double err = vpc::norm(prop.state().ensemble[0].position - ref.back().x);
  std::cout << "oracle_energy_drift = " << fmt(drift) << "\nclosest_sampled_approach = " << fmt(closest)
            << "\nsimulator_final_position_error = " << fmt(err) << "\n";
  return vpc::kExitPass;
}

int cmd_study_eps(const std::string& path, const Globals& g) {
  const auto c = load(path, g);
  const auto state = vpc::sample(c.initial);
  const auto r = vpc::epsilon_convergence_study(state, c.field, c.integrator, c.study.epsilons, c.T, c.study.samples);
  std::filesystem::create_directories(c.output);
  std::ofstream csv(std::filesystem::path(c.output) / "eps_study.csv");
  csv << "eps_coarse,eps_fine,charge_sup_diff,particle_mean_diff,comparable\n";
  for (const auto& p : r.pairs) {
    csv << fmt(p.eps_coarse) << "," << fmt(p.eps_fine) << "," << fmt(p.charge_sup_diff) << ","
        << fmt(p.particle_mean_diff) << "," << (p.comparable ? 1 : 0) << "\n";
    std::cout << "eps " << fmt(p.eps_coarse) << " -> " << fmt(p.eps_fine) << ": charge_sup_diff = "
              << fmt(p.charge_sup_diff) << " particle_mean_diff = " << fmt(p.particle_mean_diff)
              << (p.comparable ? "" : " (not comparable)") << "\n";
  }
  for (std::size_t k = 0; k < r.epsilons.size(); ++k) {
    std::cout << "eps " << fmt(r.epsilons[k]) << ": min_charge_distance = " << fmt(r.min_charge_distance[k])
              << " substeps = " << r.substeps[k] << "\n";
  }
  return vpc::kExitPass;
}

int cmd_study_dt(const std::string& path, const Globals& g) {
  const auto c = load(path, g);
  const auto state = vpc::sample(c.initial);
  const auto r = vpc::dt_convergence_study(state, c.field, c.integrator, c.study.dts, c.T);
  std::filesystem::create_directories(c.output);
  std::ofstream csv(std::filesystem::path(c.output) / "dt_study.csv");
  csv << "dt,substeps,error_vs_finest,increment,min_charge_bound,unstable\n";
  for (const auto& run : r.runs) {
    csv << fmt(run.dt) << "," << run.substeps << "," << fmt(run.error_vs_finest) << "," << fmt(run.increment) << ","
        << fmt(run.min_charge_bound) << "," << (run.unstable ? 1 : 0) << "\n";
    std::cout << "dt " << fmt(run.dt) << ": error_vs_finest = " << fmt(run.error_vs_finest)
              << " increment = " << fmt(run.increment) << (run.unstable ? " (unstable)" : "") << "\n";
  }
  std::cout << "order = " << fmt(r.order) << " (" << r.fit_points << " points)\n";
  return vpc::kExitPass;
}

int cmd_field_check(const std::string& path, std::size_t leaf, const Globals& g) {
  const auto snap = vpc::read_snapshot(path);
  vpc::FieldSolverConfig cfg;
  cfg.kernel.epsilon_charge = snap.header.epsilon_charge;
  cfg.kernel.epsilon_plasma = snap.header.epsilon_plasma;
  cfg.theta = g.theta.value_or(0.5);
  cfg.leaf_capacity = leaf;
  cfg.threads = g.threads.value_or(1);
  cfg.validate();
  const auto& ens = snap.state.ensemble;
  const auto direct = vpc::plasma_self_field_direct(ens, cfg.kernel, cfg.threads);
  const auto tree = vpc::plasma_self_field_tree(ens, cfg);
  const auto cmp = vpc::compare_fields(tree, direct);
  std::cout << "M = " << ens.size() << "\ntheta = " << fmt(cfg.theta) << "\nmax_relative_error = "
            << fmt(cmp.max_relative) << "\nrms_relative_error = " << fmt(cmp.rms_relative)
            << "\nmax_absolute_error = " << fmt(cmp.max_absolute) << "\nworst_particle = " << cmp.worst << "\n";
  return vpc::kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vlasov-Poisson plasma with repulsive point charges"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Override the sampling seed");
  app.add_option("--threads", g.threads, "Threads for field evaluation")->check(CLI::PositiveNumber);
  app.add_option("--output", g.output, "Output directory");
  app.add_option("--theta", g.theta, "Barnes-Hut opening angle");
  app.add_flag("--quiet", g.quiet, "Suppress progress and report output");
  app.fallthrough();

  std::string path;
  std::optional<double> K1;
  std::size_t leaf = 8;
  int code = vpc::kExitPass;

  auto* run = app.add_subcommand("run", "Run a simulation");
  run->add_option("config", path, "Config file")->required();
  run->callback([&] { code = cmd_run(path, g); });

  auto* sample = app.add_subcommand("sample", "Write the initial snapshot only");
  sample->add_option("config", path, "Config file")->required();
  sample->callback([&] { code = cmd_sample(path, g); });

  auto* diagnose = app.add_subcommand("diagnose", "Energy report and parameters of a snapshot");
  diagnose->add_option("snapshot", path, "Snapshot file")->required();
  diagnose->add_option("--K1", K1, "K1 (default max(8 H, 1))");
  diagnose->callback([&] { code = cmd_diagnose(path, K1, g); });

  auto* oracle = app.add_subcommand("oracle", "Reference computations");
  oracle->require_subcommand(1);
  auto* two_body = oracle->add_subcommand("two-body", "High-accuracy particle/charge fly-by");
  two_body->add_option("config", path, "Config file")->required();
  two_body->callback([&] { code = cmd_two_body(path, g); });

  auto* study = app.add_subcommand("study", "Convergence studies");
  study->require_subcommand(1);
  auto* eps = study->add_subcommand("eps", "Cauchy study in epsilon");
  eps->add_option("config", path, "Config file")->required();
  eps->callback([&] { code = cmd_study_eps(path, g); });
  auto* dt = study->add_subcommand("dt", "Fixed-step convergence study");
  dt->add_option("config", path, "Config file")->required();
  dt->callback([&] { code = cmd_study_dt(path, g); });

  auto* check = app.add_subcommand("field-check", "Barnes-Hut against direct summation");
  check->add_option("snapshot", path, "Snapshot file")->required();
  check->add_option("--leaf", leaf, "Leaf capacity");
  check->callback([&] { code = cmd_field_check(path, leaf, g); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return vpc::kExitConfigError;
  } catch (const vpc::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return vpc::kExitConfigError;
  } catch (const vpc::IntegrationError& e) {
    std::cerr << e.what() << "\n";
    return vpc::kExitIntegrationFailure;
  } catch (const vpc::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return vpc::kExitConfigError;
  }
  return code;
}
