#include "plasmodicke/scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "plasmodicke/constants.hpp"
#include "plasmodicke/errors.hpp"
#include "plasmodicke/greens.hpp"
#include "plasmodicke/modes.hpp"

namespace plasmodicke {
namespace {

using njson = nlohmann::ordered_json;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_of(const std::string& bytes) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

// All writes go through here so the manifest sees every file; run_scenario is
// the only writer per output directory, which keeps writes serialized.
OutputFile write_file(const std::string& dir, const std::string& rel, const std::string& bytes) {
  const std::filesystem::path full = std::filesystem::path(dir) / rel;
  std::ofstream out(full, std::ios::binary);
  if (!out) throw config_error("cannot write " + full.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw config_error("short write on " + full.string());
  return OutputFile{rel, digest_of(bytes)};
}

bool has_task(const Scenario& s, const std::string& task) {
  return std::find(s.tasks.begin(), s.tasks.end(), task) != s.tasks.end();
}

const std::vector<std::string>& known_tasks() {
  static const std::vector<std::string> tasks = {"modes",  "rates",  "eigenstates",
                                                 "evolve", "ladder", "sweep"};
  return tasks;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

// --- JSON navigation with key-path context ---------------------------------

const njson* find_path(const njson& root, const std::string& path) {
  const njson* node = &root;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(key)) return nullptr;
    node = &(*node)[key];
    if (dot == std::string::npos) return node;
    start = dot + 1;
  }
}

double require_number(const njson& root, const std::string& path, const std::string& ctx) {
  const njson* node = find_path(root, path);
  if (node == nullptr) throw config_error(ctx + ": missing required key " + path);
  if (!node->is_number()) throw config_error(ctx + ": key " + path + " must be a number");
  return node->get<double>();
}

double number_or(const njson& root, const std::string& path, double fallback,
                 const std::string& ctx) {
  const njson* node = find_path(root, path);
  if (node == nullptr) return fallback;
  if (!node->is_number()) throw config_error(ctx + ": key " + path + " must be a number");
  return node->get<double>();
}

int int_or(const njson& root, const std::string& path, int fallback, const std::string& ctx) {
  const njson* node = find_path(root, path);
  if (node == nullptr) return fallback;
  if (!node->is_number_integer()) throw config_error(ctx + ": key " + path + " must be an integer");
  return node->get<int>();
}

std::string string_or(const njson& root, const std::string& path, const std::string& fallback,
                      const std::string& ctx) {
  const njson* node = find_path(root, path);
  if (node == nullptr) return fallback;
  if (!node->is_string()) throw config_error(ctx + ": key " + path + " must be a string");
  return node->get<std::string>();
}

Vector3d parse_vec3(const njson& node, const std::string& where, const std::string& ctx) {
  if (!node.is_array() || node.size() != 3 || !node[0].is_number() || !node[1].is_number() ||
      !node[2].is_number())
    throw config_error(ctx + ": " + where + " must be an [x, y, z] number triple");
  return Vector3d(node[0].get<double>(), node[1].get<double>(), node[2].get<double>());
}

// --- scenario <-> JSON ------------------------------------------------------

Scenario scenario_from_json(const njson& j, const std::string& ctx) {
  Scenario s;
  s.name = string_or(j, "name", "custom", ctx);

  // radius is deliberately default-free: "30 nm nanoparticle" reads as either
  // a radius or a diameter, so every config has to commit to one.
  s.sphere.radius_nm = require_number(j, "sphere.radius_nm", ctx);
  s.sphere.eps_d = number_or(j, "sphere.eps_d", 1.0, ctx);
  s.sphere.metal.eps_inf = number_or(j, "metal.eps_inf", 6.0, ctx);
  s.sphere.metal.omega_p_eV = number_or(j, "metal.omega_p_eV", 7.90, ctx);
  s.sphere.metal.gamma_p_eV = number_or(j, "metal.gamma_p_eV", 0.051, ctx);

  s.emitters.layout = string_or(j, "emitters.layout", "ring", ctx);
  s.emitters.count = int_or(j, "emitters.count", 2, ctx);
  s.emitters.h_nm = number_or(j, "emitters.h_nm", 20.0, ctx);
  s.emitters.orientation = string_or(j, "emitters.orientation", "radial", ctx);
  s.emitters.theta_deg = number_or(j, "emitters.theta_deg", 180.0, ctx);
  s.emitters.offset_deg = number_or(j, "emitters.offset_deg", 1.0, ctx);
  s.emitters.omega0_eV = number_or(j, "emitters.omega0_eV", 2.77, ctx);
  s.emitters.d0 = number_or(j, "emitters.d0", 1.0, ctx);
  if (const njson* pos = find_path(j, "emitters.positions")) {
    if (!pos->is_array()) throw config_error(ctx + ": emitters.positions must be an array");
    for (const auto& p : *pos) s.emitters.positions.push_back(parse_vec3(p, "position", ctx));
  }
  if (const njson* ori = find_path(j, "emitters.orientations")) {
    if (!ori->is_array()) throw config_error(ctx + ": emitters.orientations must be an array");
    for (const auto& o : *ori) s.emitters.orientations.push_back(parse_vec3(o, "orientation", ctx));
  }

  NumericalControls defaults;
  s.controls.max_multipole = int_or(j, "controls.max_multipole", defaults.max_multipole, ctx);
  s.controls.fit_window_eV = number_or(j, "controls.fit_window_eV", defaults.fit_window_eV, ctx);
  s.controls.fit_samples = int_or(j, "controls.fit_samples", defaults.fit_samples, ctx);
  s.controls.time_step_factor =
      number_or(j, "controls.time_step_factor", defaults.time_step_factor, ctx);
  s.controls.eigen_tolerance =
      number_or(j, "controls.eigen_tolerance", defaults.eigen_tolerance, ctx);

  if (const njson* tasks = find_path(j, "tasks")) {
    if (!tasks->is_array()) throw config_error(ctx + ": tasks must be an array of strings");
    for (const auto& t : *tasks) {
      if (!t.is_string()) throw config_error(ctx + ": tasks must be an array of strings");
      s.tasks.push_back(t.get<std::string>());
    }
  }
  s.route = string_or(j, "route", "both", ctx);

  if (const njson* modes = find_path(j, "eigenstates.modes")) {
    if (!modes->is_array()) throw config_error(ctx + ": eigenstates.modes must be an array");
    s.eigen_modes.clear();
    for (const auto& m : *modes) {
      if (!m.is_number_integer())
        throw config_error(ctx + ": eigenstates.modes entries must be integers");
      s.eigen_modes.push_back(m.get<int>());
    }
  }

  s.evolve.t_end_gamma1 = number_or(j, "evolve.t_end_gamma1", s.evolve.t_end_gamma1, ctx);
  s.evolve.samples = int_or(j, "evolve.samples", s.evolve.samples, ctx);

  if (const njson* sw = find_path(j, "sweep")) {
    if (!sw->is_object()) throw config_error(ctx + ": sweep must be an object");
    SweepSpec spec;
    spec.param = string_or(*sw, "param", "", ctx + ".sweep");
    if (spec.param.empty()) throw config_error(ctx + ": missing required key sweep.param");
    spec.from = require_number(*sw, "from", ctx + ".sweep");
    spec.to = require_number(*sw, "to", ctx + ".sweep");
    spec.steps = int_or(*sw, "steps", 2, ctx + ".sweep");
    if (const njson* variants = find_path(*sw, "variants")) {
      if (!variants->is_array()) throw config_error(ctx + ": sweep.variants must be an array");
      for (const auto& v : *variants) {
        SweepVariant variant;
        variant.name = string_or(v, "name", "", ctx + ".sweep.variants");
        if (const njson* set = find_path(v, "set")) {
          if (!set->is_object())
            throw config_error(ctx + ": sweep variant set must map paths to numbers");
          for (auto it = set->begin(); it != set->end(); ++it) {
            if (!it.value().is_number())
              throw config_error(ctx + ": sweep variant set values must be numbers");
            variant.set.emplace_back(it.key(), it.value().get<double>());
          }
        }
        spec.variants.push_back(std::move(variant));
      }
    }
    s.sweep = std::move(spec);
  }

  s.threads = int_or(j, "threads", 0, ctx);
  s.out_dir = string_or(j, "out_dir", "", ctx);
  return s;
}

// The output directory and thread count are execution details, not part of
// the physical scenario, so config.json omits them and digests stay put when
// the same run lands somewhere else.
njson scenario_to_json(const Scenario& s) {
  njson j;
  j["name"] = s.name;
  j["sphere"]["radius_nm"] = s.sphere.radius_nm;
  j["sphere"]["eps_d"] = s.sphere.eps_d;
  j["metal"]["eps_inf"] = s.sphere.metal.eps_inf;
  j["metal"]["omega_p_eV"] = s.sphere.metal.omega_p_eV;
  j["metal"]["gamma_p_eV"] = s.sphere.metal.gamma_p_eV;
  njson& em = j["emitters"];
  em["layout"] = s.emitters.layout;
  em["count"] = s.emitters.count;
  em["h_nm"] = s.emitters.h_nm;
  em["orientation"] = s.emitters.orientation;
  if (s.emitters.layout == "pair") em["theta_deg"] = s.emitters.theta_deg;
  if (s.emitters.layout == "polar") em["offset_deg"] = s.emitters.offset_deg;
  em["omega0_eV"] = s.emitters.omega0_eV;
  em["d0"] = s.emitters.d0;
  if (s.emitters.layout == "list") {
    njson pos = njson::array();
    njson ori = njson::array();
    for (const auto& p : s.emitters.positions) pos.push_back({p.x(), p.y(), p.z()});
    for (const auto& o : s.emitters.orientations) ori.push_back({o.x(), o.y(), o.z()});
    em["positions"] = std::move(pos);
    em["orientations"] = std::move(ori);
  }
  j["controls"]["max_multipole"] = s.controls.max_multipole;
  j["controls"]["fit_window_eV"] = s.controls.fit_window_eV;
  j["controls"]["fit_samples"] = s.controls.fit_samples;
  j["controls"]["time_step_factor"] = s.controls.time_step_factor;
  j["controls"]["eigen_tolerance"] = s.controls.eigen_tolerance;
  j["tasks"] = s.tasks;
  j["route"] = s.route;
  if (has_task(s, "eigenstates")) j["eigenstates"]["modes"] = s.eigen_modes;
  if (has_task(s, "evolve")) {
    j["evolve"]["t_end_gamma1"] = s.evolve.t_end_gamma1;
    j["evolve"]["samples"] = s.evolve.samples;
  }
  if (s.sweep) {
    njson sw;
    sw["param"] = s.sweep->param;
    sw["from"] = s.sweep->from;
    sw["to"] = s.sweep->to;
    sw["steps"] = s.sweep->steps;
    if (!s.sweep->variants.empty()) {
      njson variants = njson::array();
      for (const auto& v : s.sweep->variants) {
        njson vj;
        vj["name"] = v.name;
        njson set;
        for (const auto& [path, value] : v.set) set[path] = value;
        vj["set"] = std::move(set);
        variants.push_back(std::move(vj));
      }
      sw["variants"] = std::move(variants);
    }
    j["sweep"] = std::move(sw);
  }
  return j;
}

// --- presets ----------------------------------------------------------------

struct PresetDef {
  Scenario scenario;
  std::string summary;
};

Scenario base_scenario(const std::string& name, const std::string& layout, int count, double h_nm,
                       const std::string& orientation, double omega0_eV,
                       std::vector<std::string> tasks) {
  Scenario s;
  s.name = name;
  s.sphere.radius_nm = 15.0;
  s.emitters.layout = layout;
  s.emitters.count = count;
  s.emitters.h_nm = h_nm;
  s.emitters.orientation = orientation;
  s.emitters.omega0_eV = omega0_eV;
  s.tasks = std::move(tasks);
  return s;
}

std::map<std::string, PresetDef> build_presets() {
  std::map<std::string, PresetDef> presets;
  auto add = [&](Scenario s, const std::string& summary) {
    const std::string name = s.name;
    presets.emplace(name, PresetDef{s, summary});
    // Sub-preset pinning the other reading of the particle size: the bare
    // name treats 30 nm as the diameter (radius 15 nm), _r30 as the radius.
    const std::string r30_name = name + "_r30";
    Scenario r30 = std::move(s);
    r30.name = r30_name;
    r30.sphere.radius_nm = 30.0;
    presets.emplace(r30_name, PresetDef{std::move(r30), summary + " (radius 30 nm variant)"});
  };

  add(base_scenario("fig2a", "ring", 6, 20.0, "azimuthal", 2.77, {"rates", "evolve", "ladder"}),
      "6-emitter ring, azimuthal dipoles, h = 20 nm: superradiant burst");
  add(base_scenario("fig2b", "ring", 6, 20.0, "radial", 2.77, {"rates", "evolve"}),
      "6-emitter ring, radial dipoles, h = 20 nm: weak burst");
  add(base_scenario("fig2c", "ring", 6, 2.0, "radial", 2.77, {"rates", "evolve"}),
      "6-emitter ring, radial dipoles, h = 2 nm: nearly incoherent decay");
  add(base_scenario("fig2_poles", "polar", 6, 20.0, "radial", 2.7931, {"rates", "evolve"}),
      "6 emitters split between the poles at the dipole-mode resonance");
  add(base_scenario("fig3", "ring", 6, 20.0, "azimuthal", 2.77, {"rates", "ladder"}),
      "Dicke-ladder rates for the azimuthal 6-ring");

  Scenario fig4a = base_scenario("fig4a", "pair", 2, 20.0, "radial", 2.771, {"sweep"});
  SweepSpec sweep;
  sweep.param = "emitters.theta_deg";
  sweep.from = 0.0;
  sweep.to = 180.0;
  sweep.steps = 61;
  sweep.variants = {
      {"h20", {{"emitters.h_nm", 20.0}, {"emitters.omega0_eV", 2.771}}},
      {"h2", {{"emitters.h_nm", 2.0}, {"emitters.omega0_eV", 2.964}}},
  };
  fig4a.sweep = std::move(sweep);
  add(std::move(fig4a), "pair cross rate vs angular separation, h = 20 and 2 nm");

  add(base_scenario("fig4b", "pair", 2, 20.0, "radial", 2.771, {"rates", "evolve"}),
      "facing radial pair, h = 20 nm: inverted superradiance");
  add(base_scenario("fig4c", "pair", 2, 2.0, "radial", 2.964, {"rates", "evolve"}),
      "facing radial pair, h = 2 nm: superradiance blockade");
  add(base_scenario("pole_yield", "pair", 2, 20.0, "radial", 2.7931, {"rates"}),
      "facing radial pair at the dipole-mode resonance: bright-state yield");

  Scenario table1 = base_scenario("table1", "ring", 6, 20.0, "azimuthal", 2.77,
                                  {"rates", "eigenstates"});
  table1.eigen_modes = {0};
  add(std::move(table1), "all-multipole brightest collective state, azimuthal 6-ring");
  Scenario table1r = base_scenario("table1_radial", "ring", 6, 20.0, "radial", 2.77,
                                   {"rates", "eigenstates"});
  table1r.eigen_modes = {0};
  add(std::move(table1r), "all-multipole brightest collective state, radial 6-ring");

  Scenario table2 = base_scenario("table2", "ring", 6, 20.0, "azimuthal", 2.77, {"eigenstates"});
  table2.eigen_modes = {0, 1, 2, 3};
  add(std::move(table2), "brightest ratios per plasmon mode for the azimuthal 6-ring");

  Scenario table3 = base_scenario("table3", "pair", 2, 20.0, "radial", 2.771,
                                  {"rates", "eigenstates"});
  table3.eigen_modes = {0};
  add(std::move(table3), "super/subradiant facing radial pair, h = 20 nm");
  Scenario table3a = base_scenario("table3_azimuthal", "pair", 2, 20.0, "azimuthal", 2.771,
                                   {"rates", "eigenstates"});
  table3a.eigen_modes = {0};
  add(std::move(table3a), "super/subradiant parallel azimuthal pair, h = 20 nm");

  Scenario table4 = base_scenario("table4", "pair", 2, 2.0, "radial", 2.964,
                                  {"rates", "eigenstates"});
  table4.eigen_modes = {1, 2, 3};
  add(std::move(table4), "single-mode bright states for the close radial pair, h = 2 nm");

  return presets;
}

const std::map<std::string, PresetDef>& presets() {
  static const std::map<std::string, PresetDef> table = build_presets();
  return table;
}

// --- sweep execution --------------------------------------------------------

int resolve_threads(int requested, int n_jobs) {
  int cap = std::numeric_limits<int>::max();
  if (const char* env = std::getenv("PLASMODICKE_THREADS")) {
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end != env && parsed > 0) cap = static_cast<int>(parsed);
  }
  int want = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
  if (want <= 0) want = 1;
  return std::max(1, std::min({want, cap, n_jobs}));
}

std::vector<double> sweep_point_summary(const Scenario& point) {
  const SystemConfig config = materialize(point);
  const RateMatrices rates = compute_rates(config, point.emitters.omega0_eV, point.route);
  const double gamma1 = rates.gamma(0, 0);
  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(rates.gamma);
  const double brightest = solver.eigenvalues()(rates.gamma.rows() - 1);
  const double gamma12 =
      rates.gamma.rows() >= 2 ? rates.gamma(0, 1) / gamma1 : 0.0;
  return {gamma1, gamma12, brightest / gamma1, bright_state_yield(rates.gamma, rates.gamma_rad)};
}

}  // namespace

SystemConfig materialize(const Scenario& s) {
  SystemConfig config;
  config.sphere = s.sphere;
  config.controls = s.controls;
  const LayoutSpec& em = s.emitters;
  if (em.layout == "ring") {
    config.emitters =
        place_ring(em.count, em.h_nm, em.orientation, s.sphere, em.omega0_eV, em.d0);
  } else if (em.layout == "polar") {
    config.emitters =
        place_polar(em.count, em.h_nm, s.sphere, em.omega0_eV, em.d0, em.offset_deg);
  } else if (em.layout == "pair") {
    config.emitters = place_pair(em.theta_deg * kPi / 180.0, em.h_nm, em.orientation, s.sphere,
                                 em.omega0_eV, em.d0);
  } else if (em.layout == "list") {
    if (em.positions.empty() || em.positions.size() != em.orientations.size())
      throw config_error("list layout needs matching emitters.positions and emitters.orientations");
    for (std::size_t i = 0; i < em.positions.size(); ++i) {
      Emitter e;
      e.position_nm = em.positions[i];
      const double norm = em.orientations[i].norm();
      if (norm <= 0.0) throw config_error("emitter orientation must be a nonzero vector");
      e.orientation = em.orientations[i] / norm;
      e.omega0_eV = em.omega0_eV;
      e.d0 = em.d0;
      config.emitters.items.push_back(e);
    }
  } else {
    throw config_error("unknown emitters.layout '" + em.layout +
                       "' (expected ring, polar, pair or list)");
  }
  return config;
}

void apply_param(Scenario& s, const std::string& path, double value) {
  const std::string& layout = s.emitters.layout;
  if (path == "sphere.radius_nm") {
    s.sphere.radius_nm = value;
  } else if (path == "sphere.eps_d") {
    s.sphere.eps_d = value;
  } else if (path == "metal.eps_inf") {
    s.sphere.metal.eps_inf = value;
  } else if (path == "metal.omega_p_eV") {
    s.sphere.metal.omega_p_eV = value;
  } else if (path == "metal.gamma_p_eV") {
    s.sphere.metal.gamma_p_eV = value;
  } else if (path == "emitters.count") {
    if (layout == "list") throw config_error("emitters.count is fixed for the list layout");
    s.emitters.count = static_cast<int>(std::lround(value));
  } else if (path == "emitters.h_nm") {
    if (layout == "list") throw config_error("emitters.h_nm does not apply to the list layout");
    s.emitters.h_nm = value;
  } else if (path == "emitters.theta_deg") {
    if (layout != "pair") throw config_error("emitters.theta_deg applies to the pair layout only");
    s.emitters.theta_deg = value;
  } else if (path == "emitters.offset_deg") {
    if (layout != "polar")
      throw config_error("emitters.offset_deg applies to the polar layout only");
    s.emitters.offset_deg = value;
  } else if (path == "emitters.omega0_eV") {
    s.emitters.omega0_eV = value;
  } else if (path == "emitters.d0") {
    s.emitters.d0 = value;
  } else if (path == "controls.max_multipole") {
    s.controls.max_multipole = static_cast<int>(std::lround(value));
  } else if (path == "controls.fit_window_eV") {
    s.controls.fit_window_eV = value;
  } else if (path == "controls.fit_samples") {
    s.controls.fit_samples = static_cast<int>(std::lround(value));
  } else if (path == "controls.time_step_factor") {
    s.controls.time_step_factor = value;
  } else if (path == "controls.eigen_tolerance") {
    s.controls.eigen_tolerance = value;
  } else if (path == "evolve.t_end_gamma1") {
    s.evolve.t_end_gamma1 = value;
  } else if (path == "evolve.samples") {
    s.evolve.samples = static_cast<int>(std::lround(value));
  } else {
    throw config_error("unknown or non-numeric parameter path: " + path);
  }
}

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> bad;
  if (s.tasks.empty()) bad.push_back("tasks must name at least one task");
  for (const auto& t : s.tasks) {
    if (std::find(known_tasks().begin(), known_tasks().end(), t) == known_tasks().end())
      bad.push_back("unknown task '" + t + "' (expected one of " + join(known_tasks(), ", ") + ")");
  }
  if (s.route != "green" && s.route != "modes" && s.route != "both")
    bad.push_back("route must be green, modes or both");
  if (has_task(s, "sweep") != s.sweep.has_value())
    bad.push_back("a sweep spec must be present exactly when the sweep task is requested");
  if (s.sweep) {
    if (s.sweep->steps < 1) bad.push_back("sweep.steps must be at least 1");
    if (s.sweep->param.empty()) bad.push_back("sweep.param must be set");
    Scenario probe = s;
    try {
      if (!s.sweep->param.empty()) apply_param(probe, s.sweep->param, s.sweep->from);
      for (const auto& v : s.sweep->variants)
        for (const auto& [path, value] : v.set) apply_param(probe, path, value);
    } catch (const config_error& e) {
      bad.push_back(e.what());
    }
  }
  if (has_task(s, "eigenstates")) {
    if (s.eigen_modes.empty()) bad.push_back("eigenstates.modes must name at least one mode");
    for (int m : s.eigen_modes)
      if (m < 0 || m > s.controls.max_multipole)
        bad.push_back("eigenstates mode " + std::to_string(m) +
                      " outside [0, controls.max_multipole]");
  }
  if (has_task(s, "evolve")) {
    if (s.evolve.samples < 2) bad.push_back("evolve.samples must be at least 2");
    if (!(s.evolve.t_end_gamma1 > 0.0)) bad.push_back("evolve.t_end_gamma1 must be positive");
  }
  if (has_task(s, "evolve") || has_task(s, "ladder")) {
    const int n = s.emitters.layout == "list" ? static_cast<int>(s.emitters.positions.size())
                                              : s.emitters.count;
    if (n > 10) bad.push_back("evolve and ladder tasks support at most 10 emitters");
  }
  try {
    const SystemConfig config = materialize(s);
    const auto geometry_bad = plasmodicke::validate(config);
    bad.insert(bad.end(), geometry_bad.begin(), geometry_bad.end());
  } catch (const std::exception& e) {  // geometry builders reject bad recipes
    bad.push_back(e.what());
  }
  return bad;
}

Scenario parse_config_text(const std::string& text, const std::string& ctx) {
  njson j;
  try {
    j = njson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(ctx + ": " + e.what());
  }
  Scenario s = scenario_from_json(j, ctx);
  const auto bad = validate(s);
  if (!bad.empty()) throw config_error(ctx + ": " + join(bad, "; "));
  return s;
}

Scenario parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, def] : presets()) names.push_back(name);
  return names;
}

std::string preset_summary(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end()) throw config_error("unknown preset '" + name + "'");
  return it->second.summary;
}

Scenario preset(const std::string& name) {
  const auto it = presets().find(name);
  if (it == presets().end())
    throw config_error("unknown preset '" + name + "' (see `plasmodicke presets`)");
  return it->second.scenario;
}

SweepTable run_sweep(const Scenario& s) {
  if (!s.sweep) throw config_error("run_sweep needs a sweep spec");
  const SweepSpec& sw = *s.sweep;
  std::vector<SweepVariant> variants = sw.variants;
  if (variants.empty()) variants.push_back(SweepVariant{});

  struct Job {
    Scenario point;
    double value = 0.0;
    std::string variant;
  };
  std::vector<Job> jobs;
  for (const auto& variant : variants) {
    for (int i = 0; i < sw.steps; ++i) {
      const double t = sw.steps == 1 ? 0.0 : static_cast<double>(i) / (sw.steps - 1);
      Job job;
      job.point = s;
      job.value = sw.from + (sw.to - sw.from) * t;
      job.variant = variant.name;
      for (const auto& [path, value] : variant.set) apply_param(job.point, path, value);
      apply_param(job.point, sw.param, job.value);
      jobs.push_back(std::move(job));
    }
  }

  SweepTable table;
  table.columns = {sw.param, "gamma1_over_gamma0", "gamma12_over_gamma1", "bright_over_gamma1",
                   "eta_bright"};
  table.rows.resize(jobs.size());
  table.variant_names.resize(jobs.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    while (true) {
      const std::size_t k = next.fetch_add(1);
      if (k >= jobs.size()) return;
      try {
        std::vector<double> summary = sweep_point_summary(jobs[k].point);
        std::vector<double> row;
        row.push_back(jobs[k].value);
        row.insert(row.end(), summary.begin(), summary.end());
        table.rows[k] = std::move(row);
        table.variant_names[k] = jobs[k].variant;
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int n_threads = resolve_threads(s.threads, static_cast<int>(jobs.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return table;
}

std::vector<OutputFile> emit_plot_data(const EmissionTrace& trace, const MatrixXd& gamma,
                                       double gamma1_over_gamma0, const PlotStyle& style,
                                       const std::string& dir) {
  if (trace.times.empty()) throw config_error("emit_plot_data needs a nonempty trace");
  const double g1 = gamma1_over_gamma0;
  const int n = static_cast<int>(gamma.rows());
  std::vector<OutputFile> files;

  std::string computed = "t_over_tau1,W_over_gamma1\n";
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    computed += num(trace.times[i] * g1) + "," + num(trace.total[i] / g1) + "\n";
  files.push_back(write_file(dir, "plot_computed.csv", computed));

  if (style.overlay_ideal) {
    const CascadeResult ideal = ideal_cascade(n, g1, trace.times);
    std::string body = "t_over_tau1,W_over_gamma1\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i)
      body += num(trace.times[i] * g1) + "," + num(ideal.emission[i] / g1) + "\n";
    files.push_back(write_file(dir, "plot_ideal.csv", body));
  }
  if (style.overlay_incoherent) {
    // Uncoupled reference: zero every cross rate, so each emitter decays on
    // its own diagonal rate and W(t) = sum_j gamma_jj exp(-gamma_jj t).
    std::string body = "t_over_tau1,W_over_gamma1\n";
    for (std::size_t i = 0; i < trace.times.size(); ++i) {
      double w = 0.0;
      for (int jj = 0; jj < n; ++jj)
        w += gamma(jj, jj) * std::exp(-gamma(jj, jj) * trace.times[i]);
      body += num(trace.times[i] * g1) + "," + num(w / g1) + "\n";
    }
    files.push_back(write_file(dir, "plot_incoherent.csv", body));
  }

  njson plot;
  plot["x"] = {{"column", "t_over_tau1"}, {"label", "t * Gamma_1"}};
  plot["y"] = {{"column", "W_over_gamma1"}, {"label", "W / Gamma_1"}, {"scale", "log"}};
  plot["normalization"] =
      "times in units of the single-emitter lifetime 1/Gamma_1, rates in units of Gamma_1";
  njson curves = njson::array();
  curves.push_back({{"name", "computed"}, {"file", "plot_computed.csv"}});
  if (style.overlay_ideal) curves.push_back({{"name", "ideal"}, {"file", "plot_ideal.csv"}});
  if (style.overlay_incoherent)
    curves.push_back({{"name", "incoherent"}, {"file", "plot_incoherent.csv"}});
  plot["curves"] = std::move(curves);
  files.push_back(write_file(dir, "plot.json", plot.dump(2) + "\n"));
  return files;
}

RunManifest run_scenario(const Scenario& input) {
  Scenario s = input;
  if (s.out_dir.empty()) s.out_dir = "out/" + s.name;
  {
    const auto bad = validate(s);
    if (!bad.empty()) throw config_error("scenario " + s.name + ": " + join(bad, "; "));
  }
  std::filesystem::create_directories(s.out_dir);

  RunManifest manifest;
  manifest.scenario = s.name;
  manifest.directory = s.out_dir;
  njson summary;
  summary["scenario"] = s.name;

  const SystemConfig config = materialize(s);
  const double omega0 = s.emitters.omega0_eV;
  const int n = config.emitters.size();
  summary["n_emitters"] = n;
  summary["omega0_eV"] = omega0;

  manifest.files.push_back(write_file(s.out_dir, "config.json", scenario_to_json(s).dump(2) + "\n"));

  if (has_task(s, "modes")) {
    const std::vector<ModeData> modes = mode_decomposition(config);
    std::string csv = "n,omega_n_eV,gamma_n_eV,residual";
    for (int j = 0; j < n; ++j) csv += ",g_" + std::to_string(j);
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) csv += ",mu_" + std::to_string(j) + "_" + std::to_string(k);
    csv += "\n";
    for (const ModeData& m : modes) {
      csv += std::to_string(m.mode.n) + "," + num(m.mode.omega_n_eV) + "," +
             num(m.mode.gamma_n_eV) + "," + num(m.mode.fit_residual);
      for (int j = 0; j < n; ++j) csv += "," + num(m.g(j));
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) csv += "," + num(m.mu(j, k));
      csv += "\n";
    }
    manifest.files.push_back(write_file(s.out_dir, "modes.csv", csv));

    std::string spectrum = "omega_eV,mode,re_projection,im_projection\n";
    for (const ModeData& m : modes) {
      const int samples = std::max(8, s.controls.fit_samples);
      for (int i = 0; i < samples; ++i) {
        const double omega = m.mode.omega_n_eV +
                             s.controls.fit_window_eV * (2.0 * i / (samples - 1) - 1.0);
        if (omega <= 0.0) continue;
        const Complex eps = drude_permittivity(s.sphere.metal, omega);
        const Complex delta_n = multipole_coefficient(m.mode.n, eps, s.sphere.eps_d);
        spectrum += num(omega) + "," + std::to_string(m.mode.n) + "," + num(delta_n.real()) +
                    "," + num(delta_n.imag()) + "\n";
      }
    }
    manifest.files.push_back(write_file(s.out_dir, "spectrum.csv", spectrum));
    summary["weak_coupling_ratio"] = weak_coupling_ratio(modes, omega0);
  }

  const bool needs_rates =
      has_task(s, "rates") || has_task(s, "evolve") || has_task(s, "ladder");
  RateMatrices rates;
  if (needs_rates) {
    rates = compute_rates(config, omega0, s.route);
    summary["gamma0_eV"] = rates.gamma0_eV;
    summary["gamma1_over_gamma0"] = rates.gamma(0, 0);
    summary["route"] = rates.route;
    summary["route_discrepancy"] = rates.route_discrepancy;
    summary["eta_bright"] = bright_state_yield(rates.gamma, rates.gamma_rad);
    if (n >= 2) summary["gamma12_over_gamma1"] = rates.gamma(0, 1) / rates.gamma(0, 0);
  }

  if (has_task(s, "rates")) {
    std::string csv;
    csv += "# omega0_eV = " + num(rates.omega0_eV) + "\n";
    csv += "# gamma0_eV = " + num(rates.gamma0_eV) + "\n";
    csv += "# route = " + rates.route + "\n";
    csv += "# route_discrepancy = " + num(rates.route_discrepancy) + "\n";
    csv += "# n_emitters = " + std::to_string(n) + "\n";
    csv += "matrix,row,col,value\n";
    auto dump_matrix = [&](const char* tag, const MatrixXd& m) {
      for (int j = 0; j < m.rows(); ++j)
        for (int k = 0; k < m.cols(); ++k)
          csv += std::string(tag) + "," + std::to_string(j) + "," + std::to_string(k) + "," +
                 num(m(j, k)) + "\n";
    };
    dump_matrix("gamma", rates.gamma);
    dump_matrix("delta", rates.delta);
    dump_matrix("gamma_rad", rates.gamma_rad);
    manifest.files.push_back(write_file(s.out_dir, "rates.csv", csv));
  }

  if (has_task(s, "eigenstates")) {
    std::string states = "mode,state,gamma_over_gamma0,delta_over_gamma0,gamma_over_gamma1\n";
    std::string vectors = "mode,state,emitter,re,im\n";
    njson brightest;
    for (int mode : s.eigen_modes) {
      // Single-mode pictures drop the free-space channel so the ratios probe
      // one plasmon resonance alone; the all-mode picture keeps it.
      const BrightnessReport report = brightness_report(config, omega0, mode, mode == 0);
      const std::string key = mode == 0 ? "all" : "lsp" + std::to_string(mode);
      brightest[key] = report.brightest_over_gamma1;
      summary["orientation_class"] = report.orientation_class;
      for (std::size_t k = 0; k < report.states.size(); ++k) {
        const CollectiveEigenstate& st = report.states[k];
        states += std::to_string(mode) + "," + std::to_string(k) + "," +
                  num(st.gamma_over_gamma0) + "," + num(st.delta_over_gamma0) + "," +
                  num(st.gamma_over_gamma0 / report.gamma1_over_gamma0) + "\n";
        for (int j = 0; j < st.amplitudes.size(); ++j)
          vectors += std::to_string(mode) + "," + std::to_string(k) + "," + std::to_string(j) +
                     "," + num(st.amplitudes(j).real()) + "," + num(st.amplitudes(j).imag()) +
                     "\n";
      }
    }
    summary["brightest_over_gamma1"] = std::move(brightest);
    manifest.files.push_back(write_file(s.out_dir, "eigenstates.csv", states));
    manifest.files.push_back(write_file(s.out_dir, "eigenvectors.csv", vectors));
  }

  if (has_task(s, "ladder")) {
    const OperatorSet ops = build_operators(n);
    const ExtendedDickeRates ladder = extended_dicke_rates(ops, rates.gamma);
    const double g1 = rates.gamma(0, 0);
    std::string csv =
        "step,two_m_from,ideal_over_gamma1,ladder_over_gamma1,diag_over_gamma1,"
        "leak_out_over_gamma1,feed_in_over_gamma1\n";
    for (int i = 0; i < ladder.ladder.size(); ++i) {
      const double ideal = static_cast<double>((n - i) * (i + 1));
      csv += std::to_string(i) + "," + std::to_string(n - 2 * i) + "," + num(ideal) + "," +
             num(ladder.ladder(i) / g1) + "," + num(ladder.diag(i) / g1) + "," +
             num(ladder.leak_out(i) / g1) + "," + num(ladder.feed_in(i) / g1) + "\n";
    }
    manifest.files.push_back(write_file(s.out_dir, "ladder.csv", csv));
    summary["ladder_peak_over_gamma1"] = ladder.ladder.maxCoeff() / g1;
  }

  if (has_task(s, "evolve")) {
    const OperatorSet ops = build_operators(n);
    const double g1 = rates.gamma(0, 0);
    MatrixXd delta = rates.delta;
    // A uniform diagonal shift only rotates a global phase of the coherences,
    // so removing the mean detuning changes nothing observable while keeping
    // the generator well scaled.
    delta.diagonal().array() -= delta.diagonal().mean();
    const Liouvillian liouvillian = build_liouvillian(ops, rates.gamma, delta);

    std::vector<double> times(static_cast<std::size_t>(s.evolve.samples));
    for (int i = 0; i < s.evolve.samples; ++i)
      times[static_cast<std::size_t>(i)] =
          s.evolve.t_end_gamma1 * i / double(s.evolve.samples - 1) / g1;

    MatrixXcd rho0 = MatrixXcd::Zero(ops.dim, ops.dim);
    rho0(0, 0) = 1.0;  // all emitters excited
    const Trajectory traj = evolve(liouvillian, rho0, times, config.controls);
    const EmissionTrace trace = emission_trace(ops, traj, rates.gamma, rates.gamma_rad);

    std::string csv = "t_over_tau1,W_over_gamma1,WP,WC,Wrad,eta";
    for (int k = 0; k <= n; ++k) csv += ",pop_exc_" + std::to_string(k);
    csv += "\n";
    std::vector<int> label_exc(ops.labels.size());
    for (std::size_t b = 0; b < ops.labels.size(); ++b)
      label_exc[b] = static_cast<int>(std::count(ops.labels[b].begin(), ops.labels[b].end(), 'e'));
    for (std::size_t i = 0; i < times.size(); ++i) {
      csv += num(times[i] * g1) + "," + num(trace.total[i] / g1) + "," +
             num(trace.population[i] / g1) + "," + num(trace.coherence[i] / g1) + "," +
             num(trace.radiated[i] / g1) + "," + num(trace.efficiency[i]);
      std::vector<double> pop(static_cast<std::size_t>(n) + 1, 0.0);
      for (std::size_t b = 0; b < ops.labels.size(); ++b)
        pop[static_cast<std::size_t>(label_exc[b])] += traj.rho[i](b, b).real();
      for (int k = 0; k <= n; ++k) csv += "," + num(pop[static_cast<std::size_t>(k)]);
      csv += "\n";
    }
    manifest.files.push_back(write_file(s.out_dir, "emission.csv", csv));

    const auto peak = std::max_element(trace.total.begin(), trace.total.end());
    const std::size_t peak_at = static_cast<std::size_t>(peak - trace.total.begin());
    summary["w0_over_gamma1"] = trace.total.front() / g1;
    summary["burst_peak_over_w0"] = *peak / trace.total.front();
    summary["t_peak_gamma1"] = times[peak_at] * g1;
    summary["eta_at_peak"] = trace.efficiency[peak_at];
    summary["quanta_end"] = trace.quanta.back();
    summary["refinements"] = traj.refinements;

    const PlotStyle style;
    const auto plot_files = emit_plot_data(trace, rates.gamma, g1, style, s.out_dir);
    manifest.files.insert(manifest.files.end(), plot_files.begin(), plot_files.end());
  }

  if (has_task(s, "sweep")) {
    const SweepTable table = run_sweep(s);
    std::string csv = "# param = " + s.sweep->param + "\n";
    csv += "variant";
    for (const auto& c : table.columns) csv += "," + c;
    csv += "\n";
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      csv += table.variant_names[r];
      for (double cell : table.rows[r]) csv += "," + num(cell);
      csv += "\n";
    }
    manifest.files.push_back(write_file(s.out_dir, "sweep.csv", csv));
    summary["sweep_points"] = table.rows.size();
  }

  manifest.files.push_back(write_file(s.out_dir, "summary.json", summary.dump(2) + "\n"));

  njson mj;
  mj["scenario"] = manifest.scenario;
  mj["directory"] = manifest.directory;
  njson files = njson::array();
  for (const auto& f : manifest.files) files.push_back({{"path", f.path}, {"digest", f.digest}});
  mj["files"] = std::move(files);
  write_file(s.out_dir, "manifest.json", mj.dump(2) + "\n");
  return manifest;
}

}  // namespace plasmodicke
