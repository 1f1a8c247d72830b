#include "vpc/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "vpc/errors.hpp"

namespace vpc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Location {
  std::size_t line = 0;
  std::size_t column = 0;
};

[[noreturn]] void fail(const Location& at, const std::string& what) {
  throw ConfigError("config line " + std::to_string(at.line) + ", column " + std::to_string(at.column) + ": " +
                    what);
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    if (j > i) out.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(const std::string& word, const Location& at) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
  if (ec != std::errc() || ptr != word.data() + word.size()) fail(at, "expected a number, got '" + word + "'");
  return v;
}

std::uint64_t to_uint(const std::string& word, const Location& at) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(word.data(), word.data() + word.size(), v);
  if (ec != std::errc() || ptr != word.data() + word.size()) {
    fail(at, "expected a non-negative integer, got '" + word + "'");
  }
  return v;
}

std::vector<double> numbers(std::string_view value, std::size_t count, const Location& at) {
  const auto words = split_words(value);
  if (count != 0 && words.size() != count) {
    fail(at, "expected " + std::to_string(count) + " numbers, got " + std::to_string(words.size()));
  }
  std::vector<double> out;
  for (const auto& w : words) out.push_back(to_double(w, at));
  return out;
}

std::string single(std::string_view value, const Location& at) {
  const auto words = split_words(value);
  if (words.size() != 1) fail(at, "expected a single value");
  return words.front();
}

Vec3 vec3(std::string_view value, const Location& at) {
  const auto v = numbers(value, 3, at);
  return {v[0], v[1], v[2]};
}

bool boolean(std::string_view value, const Location& at) {
  const auto w = single(value, at);
  if (w == "true") return true;
  if (w == "false") return false;
  fail(at, "expected true or false, got '" + w + "'");
}

template <class E>
E choice(std::string_view value, const Location& at, std::initializer_list<std::pair<const char*, E>> options) {
  const auto w = single(value, at);
  std::string names;
  for (const auto& [name, e] : options) {
    if (w == name) return e;
    names += names.empty() ? name : std::string(", ") + name;
  }
  fail(at, "unknown value '" + w + "' (expected one of " + names + ")");
}

using Setter = std::function<void(RunConfig&, std::string_view, const Location&)>;
using Table = std::map<std::string, std::map<std::string, Setter>, std::less<>>;

const Table& table() {
  static const Table t = {
      {"initial",
       {
           {"spatial",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.initial.spatial = choice<SpatialShape>(
                  v, at, {{"ball", SpatialShape::ball}, {"shell", SpatialShape::shell}, {"box", SpatialShape::box}});
            }},
           {"center", [](RunConfig& c, std::string_view v, const Location& at) { c.initial.center = vec3(v, at); }},
           {"radius",
            [](RunConfig& c, std::string_view v, const Location& at) { c.initial.radius = numbers(v, 1, at)[0]; }},
           {"r_inner",
            [](RunConfig& c, std::string_view v, const Location& at) { c.initial.r_inner = numbers(v, 1, at)[0]; }},
           {"box_min", [](RunConfig& c, std::string_view v, const Location& at) { c.initial.box_min = vec3(v, at); }},
           {"box_max", [](RunConfig& c, std::string_view v, const Location& at) { c.initial.box_max = vec3(v, at); }},
           {"velocity",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.initial.velocity = choice<VelocityShape>(v, at,
                                                         {{"uniform_ball", VelocityShape::uniform_ball},
                                                          {"truncated_maxwellian", VelocityShape::truncated_maxwellian}});
            }},
           {"v_max",
            [](RunConfig& c, std::string_view v, const Location& at) { c.initial.v_max = numbers(v, 1, at)[0]; }},
           {"sigma",
            [](RunConfig& c, std::string_view v, const Location& at) { c.initial.sigma = numbers(v, 1, at)[0]; }},
           {"M", [](RunConfig& c, std::string_view v, const Location& at) { c.initial.M = to_uint(single(v, at), at); }},
           {"vacuum_radius",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.initial.vacuum_radius = numbers(v, 1, at)[0];
            }},
           {"seed",
            [](RunConfig& c, std::string_view v, const Location& at) { c.initial.seed = to_uint(single(v, at), at); }},
           {"charge",
            [](RunConfig& c, std::string_view v, const Location& at) {
              const auto n = numbers(v, 6, at);
              c.initial.charges.push_back({{n[0], n[1], n[2]}, {n[3], n[4], n[5]}});
            }},
       }},
      {"kernel",
       {
           {"epsilon_charge",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.kernel.epsilon_charge = numbers(v, 1, at)[0];
            }},
           {"epsilon_plasma",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.kernel.epsilon_plasma = single(v, at) == "auto" ? kNaN : numbers(v, 1, at)[0];
            }},
           {"mode",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.kernel.mode =
                  choice<KernelMode>(v, at, {{"regularized", KernelMode::regularized}, {"exact", KernelMode::exact}});
            }},
       }},
      {"integrator",
       {
           {"dt_max",
            [](RunConfig& c, std::string_view v, const Location& at) { c.integrator.dt_max = numbers(v, 1, at)[0]; }},
           {"cfl_charge",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.integrator.cfl_charge = numbers(v, 1, at)[0];
            }},
           {"cfl_speed",
            [](RunConfig& c, std::string_view v, const Location& at) { c.integrator.cfl_speed = numbers(v, 1, at)[0]; }},
           {"window_K2",
            [](RunConfig& c, std::string_view v, const Location& at) { c.integrator.window_K2 = numbers(v, 1, at)[0]; }},
           {"output_stride",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.integrator.output_stride = to_uint(single(v, at), at);
            }},
           {"adaptive",
            [](RunConfig& c, std::string_view v, const Location& at) { c.integrator.adaptive = boolean(v, at); }},
       }},
      {"field",
       {
           {"method",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.field.method = choice<FieldMethod>(v, at,
                                                   {{"direct", FieldMethod::direct},
                                                    {"barnes_hut", FieldMethod::barnes_hut},
                                                    {"none", FieldMethod::none}});
            }},
           {"theta", [](RunConfig& c, std::string_view v, const Location& at) { c.field.theta = numbers(v, 1, at)[0]; }},
           {"leaf_capacity",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.field.leaf_capacity = to_uint(single(v, at), at);
            }},
           {"threads",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.field.threads = static_cast<unsigned>(to_uint(single(v, at), at));
            }},
       }},
      {"run",
       {
           {"T", [](RunConfig& c, std::string_view v, const Location& at) { c.T = numbers(v, 1, at)[0]; }},
           {"K1",
            [](RunConfig& c, std::string_view v, const Location& at) {
              const auto w = single(v, at);
              if (w == "auto") {
                c.K1.reset();
              } else {
                c.K1 = to_double(w, at);
              }
            }},
           {"output", [](RunConfig& c, std::string_view v, const Location& at) { c.output = single(v, at); }},
           {"snapshot_stride",
            [](RunConfig& c, std::string_view v, const Location& at) { c.snapshot_stride = to_uint(single(v, at), at); }},
       }},
      {"monitors",
       {
           {"enabled", [](RunConfig& c, std::string_view v, const Location&) { c.monitors.enabled = split_words(v); }},
           {"energy_drift_tol",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.monitors.energy_drift_tol = numbers(v, 1, at)[0];
            }},
           {"separation_tol",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.monitors.separation_tol = numbers(v, 1, at)[0];
            }},
           {"eta_tol",
            [](RunConfig& c, std::string_view v, const Location& at) { c.monitors.eta_tol = numbers(v, 1, at)[0]; }},
           {"lemma_fac_tol",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.monitors.lemma_fac_tol = numbers(v, 1, at)[0];
            }},
           {"sqrt_h_tol",
            [](RunConfig& c, std::string_view v, const Location& at) { c.monitors.sqrt_h_tol = numbers(v, 1, at)[0]; }},
           {"sqrt_h_tol_field",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.monitors.sqrt_h_tol_field = numbers(v, 1, at)[0];
            }},
       }},
      {"study",
       {
           {"epsilons",
            [](RunConfig& c, std::string_view v, const Location& at) { c.study.epsilons = numbers(v, 0, at); }},
           {"dts", [](RunConfig& c, std::string_view v, const Location& at) { c.study.dts = numbers(v, 0, at); }},
           {"samples",
            [](RunConfig& c, std::string_view v, const Location& at) { c.study.samples = to_uint(single(v, at), at); }},
           {"tolerance",
            [](RunConfig& c, std::string_view v, const Location& at) { c.study.tolerance = numbers(v, 1, at)[0]; }},
           {"particle",
            [](RunConfig& c, std::string_view v, const Location& at) {
              const auto n = numbers(v, 6, at);
              c.study.particle_position = {n[0], n[1], n[2]};
              c.study.particle_velocity = {n[3], n[4], n[5]};
            }},
           {"charge_mobile",
            [](RunConfig& c, std::string_view v, const Location& at) { c.study.charge_mobile = boolean(v, at); }},
           {"particle_weight",
            [](RunConfig& c, std::string_view v, const Location& at) {
              c.study.particle_weight = numbers(v, 1, at)[0];
            }},
       }},
  };
  return t;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num(const Vec3& v) { return num(v.x) + " " + num(v.y) + " " + num(v.z); }

}  // namespace

bool MonitorSettings::has(std::string_view name) const {
  return std::find(enabled.begin(), enabled.end(), name) != enabled.end();
}

void RunConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("run: T must be > 0");
  if (K1 && !(*K1 >= 1.0)) throw ConfigError("run: K1 must be >= 1");
  if (snapshot_stride < 1) throw ConfigError("run: snapshot_stride must be >= 1");
  if (output.empty()) throw ConfigError("run: output must be non-empty");
  kernel.validate();
  if (!(field.kernel == kernel)) throw ConfigError("field: kernel out of sync with [kernel]");
  field.validate();
  integrator.validate();
  initial.validate(kernel);
  for (const auto& m : monitors.enabled) {
    if (std::find(std::begin(kMonitorNames), std::end(kMonitorNames), m) == std::end(kMonitorNames)) {
      throw ConfigError("monitors: unknown monitor '" + m + "'");
    }
  }
  const double tols[] = {monitors.energy_drift_tol, monitors.separation_tol, monitors.eta_tol,
                         monitors.lemma_fac_tol,    monitors.sqrt_h_tol,     monitors.sqrt_h_tol_field};
  for (double t : tols) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("monitors: tolerances must be finite and >= 0");
  }
  if (study.samples < 1) throw ConfigError("study: samples must be >= 1");
  for (double e : study.epsilons) {
    if (!(e > 0.0)) throw ConfigError("study: epsilons must be > 0");
  }
  for (double d : study.dts) {
    if (!(d > 0.0)) throw ConfigError("study: dts must be > 0");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig config;
  config.kernel.epsilon_plasma = kNaN;  // auto unless given
  const auto& sections = table();
  const std::map<std::string, Setter>* current = nullptr;
  std::string current_name;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    const auto hash = raw.find_first_of("#;");
    const std::string_view content = raw.substr(0, hash);
    const std::string_view line = trim(content);
    if (line.empty()) continue;
    const std::size_t indent = content.find_first_not_of(" \t\r");
    Location at{line_no, indent + 1};

    if (line.front() == '[') {
      if (line.back() != ']') fail(at, "unterminated section header");
      current_name = std::string(trim(line.substr(1, line.size() - 2)));
      const auto it = sections.find(current_name);
      if (it == sections.end()) fail(at, "unknown section [" + current_name + "]");
      current = &it->second;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(at, "expected key = value");
    if (!current) fail(at, "key outside of any section");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) fail(at, "missing key");
    const auto it = current->find(key);
    if (it == current->end()) fail(at, "unknown key '" + key + "' in section [" + current_name + "]");
    const std::string_view value = trim(line.substr(eq + 1));
    const std::size_t value_col =
        value.empty() ? indent + eq + 2 : static_cast<std::size_t>(value.data() - raw.data()) + 1;
    const Location value_at{line_no, value_col};
    it->second(config, value, value_at);
  }
  if (std::isnan(config.kernel.epsilon_plasma)) {
    config.kernel.epsilon_plasma = config.initial.M > 0 ? mean_spacing(config.initial) : 0.0;
  }
  config.field.kernel = config.kernel;
  config.validate();
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_text(const RunConfig& c) {
  std::ostringstream o;
  const auto& ic = c.initial;
  const char* spatial[] = {"ball", "shell", "box"};
  const char* velocity[] = {"uniform_ball", "truncated_maxwellian"};
  const char* method[] = {"direct", "barnes_hut", "none"};
  o << "[initial]\n"
    << "spatial = " << spatial[static_cast<int>(ic.spatial)] << "\n"
    << "center = " << num(ic.center) << "\n"
    << "radius = " << num(ic.radius) << "\n"
    << "r_inner = " << num(ic.r_inner) << "\n"
    << "box_min = " << num(ic.box_min) << "\n"
    << "box_max = " << num(ic.box_max) << "\n"
    << "velocity = " << velocity[static_cast<int>(ic.velocity)] << "\n"
    << "v_max = " << num(ic.v_max) << "\n"
    << "sigma = " << num(ic.sigma) << "\n"
    << "M = " << ic.M << "\n"
    << "vacuum_radius = " << num(ic.vacuum_radius) << "\n"
    << "seed = " << ic.seed << "\n";
  for (const auto& ch : ic.charges) o << "charge = " << num(ch.position) << " " << num(ch.velocity) << "\n";
  o << "\n[kernel]\n"
    << "epsilon_charge = " << num(c.kernel.epsilon_charge) << "\n"
    << "epsilon_plasma = " << num(c.kernel.epsilon_plasma) << "\n"
    << "mode = " << (c.kernel.mode == KernelMode::regularized ? "regularized" : "exact") << "\n"
    << "\n[integrator]\n"
    << "dt_max = " << num(c.integrator.dt_max) << "\n"
    << "cfl_charge = " << num(c.integrator.cfl_charge) << "\n"
    << "cfl_speed = " << num(c.integrator.cfl_speed) << "\n"
    << "window_K2 = " << num(c.integrator.window_K2) << "\n"
    << "output_stride = " << c.integrator.output_stride << "\n"
    << "adaptive = " << (c.integrator.adaptive ? "true" : "false") << "\n"
    << "\n[field]\n"
    << "method = " << method[static_cast<int>(c.field.method)] << "\n"
    << "theta = " << num(c.field.theta) << "\n"
    << "leaf_capacity = " << c.field.leaf_capacity << "\n"
    << "threads = " << c.field.threads << "\n"
    << "\n[run]\n"
    << "T = " << num(c.T) << "\n"
    << "K1 = " << (c.K1 ? num(*c.K1) : std::string("auto")) << "\n"
    << "output = " << c.output << "\n"
    << "snapshot_stride = " << c.snapshot_stride << "\n"
    << "\n[monitors]\n"
    << "enabled =";
  for (const auto& m : c.monitors.enabled) o << " " << m;
  o << "\n"
    << "energy_drift_tol = " << num(c.monitors.energy_drift_tol) << "\n"
    << "separation_tol = " << num(c.monitors.separation_tol) << "\n"
    << "eta_tol = " << num(c.monitors.eta_tol) << "\n"
    << "lemma_fac_tol = " << num(c.monitors.lemma_fac_tol) << "\n"
    << "sqrt_h_tol = " << num(c.monitors.sqrt_h_tol) << "\n"
    << "sqrt_h_tol_field = " << num(c.monitors.sqrt_h_tol_field) << "\n"
    << "\n[study]\n"
    << "epsilons =";
  for (double e : c.study.epsilons) o << " " << num(e);
  o << "\ndts =";
  for (double d : c.study.dts) o << " " << num(d);
  o << "\n"
    << "samples = " << c.study.samples << "\n"
    << "tolerance = " << num(c.study.tolerance) << "\n"
    << "particle = " << num(c.study.particle_position) << " " << num(c.study.particle_velocity) << "\n"
    << "charge_mobile = " << (c.study.charge_mobile ? "true" : "false") << "\n"
    << "particle_weight = " << num(c.study.particle_weight) << "\n";
  return o.str();
}

std::uint64_t config_hash(const RunConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vpc
