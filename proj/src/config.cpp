#include "inductherm/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <openssl/evp.h>

namespace inductherm {

using nlohmann::json;

namespace {

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : "\n") + x;
  return s;
}

enum class Type { Real, Int, String, Bool, Law, Rect, Inductors, Table };

constexpr double kNone = std::numeric_limits<double>::quiet_NaN();

struct Field {
  std::string path;
  Type type;
  std::string unit;  // "1" for dimensionless
  json def;
  double lo = kNone;  // lower bound
  bool lo_strict = false;
  double hi = kNone;
  std::vector<std::string> choices = {};
};

json law(const std::string& kind, std::initializer_list<std::pair<const char*, double>> params) {
  json j{{"kind", kind}};
  for (const auto& [k, v] : params) j[k] = v;
  return j;
}

// The bundled battery problem in scaled units: unit heat capacity and latent
// heat, O(1) conductivities and permeabilities.
const std::vector<Field>& schema() {
  static const std::vector<Field> s = {
      {"grid.lx", Type::Real, "m", 1.0, 0.0, true},
      {"grid.ly", Type::Real, "m", 1.0, 0.0, true},
      {"grid.nx", Type::Int, "1", 64, 3.0},
      {"grid.ny", Type::Int, "1", 64, 3.0},
      {"grid.workpiece", Type::Rect, "m", json::array({0.25, 0.75, 0.375, 0.625})},
      {"grid.inductors", Type::Inductors, "m",
       json::array({json{{"rect", {0.25, 0.75, 0.6875, 0.75}}, {"polarity", 1}},
                    json{{"rect", {0.25, 0.75, 0.25, 0.3125}}, {"polarity", -1}}})},
      {"grid.mask_file", Type::String, "", ""},

      {"materials.free_energy.z_eq_mid", Type::Real, "K", 900.0},
      {"materials.free_energy.z_eq_width", Type::Real, "K", 50.0, 0.0, true},
      {"materials.free_energy.z_sat", Type::Real, "1", 1.0, 0.0, true, 1.0},
      {"materials.free_energy.heat_capacity", Type::Real, "J/(m^3 K)", 1.0, 0.0, true},
      {"materials.free_energy.latent", Type::Real, "J/m^3", 1.0, 0.0},
      {"materials.box.theta_min", Type::Real, "K", 1.0, 0.0, true},
      {"materials.box.theta_max", Type::Real, "K", 2000.0, 0.0, true},
      {"materials.box.z_min", Type::Real, "1", 0.0},
      {"materials.box.z_max", Type::Real, "1", 1.0},
      {"materials.kappa_theta", Type::Law, "W/(m K)",
       law("rational_decay", {{"low", 0.03}, {"high", 0.06}, {"scale", 1000.0}})},
      {"materials.kappa_phase", Type::Law, "1", law("constant", {{"value", 1.0}})},
      {"materials.sigma_work", Type::Law, "S/m",
       law("rational_decay", {{"low", 0.5}, {"high", 1.0}, {"scale", 800.0}})},
      {"materials.sigma_cond", Type::Real, "S/m", 1.0, 0.0, true},
      {"materials.mu_work", Type::Law, "H/m",
       law("sqrt_quadratic", {{"scale", 1.0}, {"q0", 25.0}, {"q1", -16.0}, {"q2", -8.0}})},
      {"materials.mu_cond", Type::Real, "H/m", 1.0, 0.0, true},
      {"materials.mu_air", Type::Real, "H/m", 1.0, 0.0, true},
      {"materials.tau", Type::Law, "s",
       law("rational_decay", {{"low", 0.005}, {"high", 0.02}, {"scale", 800.0}})},

      {"source.kind", Type::String, "", "sinusoid", kNone, false, kNone,
       {"sinusoid", "ramped_sinusoid", "tabulated"}},
      {"source.frequency", Type::Real, "Hz", 5.0, 0.0},
      {"source.amplitude", Type::Real, "A/m^2", 600.0},
      {"source.phase", Type::Real, "rad", 0.0},
      {"source.ramp_time", Type::Real, "s", 0.0, 0.0},
      {"source.table", Type::Table, "A/m^2", json::array()},

      {"heat.theta0", Type::Real, "K", 300.0, 0.0, true},
      {"heat.theta0_perturbation", Type::Real, "1", 0.0, -0.5, false, 0.5},
      {"heat.eps_pos", Type::Real, "W K^2/m^3", 1e-3, 0.0},
      {"heat.eps_cond", Type::Real, "W/(m K^3)", 0.0, 0.0},
      {"heat.newton_rtol", Type::Real, "1", 1e-13, 0.0, true},
      {"heat.newton_atol", Type::Real, "J/m^3", 0.0, 0.0},
      {"heat.newton_max_iter", Type::Int, "1", 40, 1.0},
      {"heat.theta_floor", Type::Real, "K", 1e-8, 0.0, true},
      {"heat.linear_rtol", Type::Real, "1", 1e-13, 0.0, true},

      {"phase.z0", Type::Real, "1", 0.0},
      {"phase.delta", Type::Real, "m^2/s", 0.0, 0.0},
      {"phase.newton_tol", Type::Real, "1", 1e-14, 0.0, true},
      {"phase.newton_max_iter", Type::Int, "1", 60, 1.0},

      {"em.eps_air", Type::Real, "S/m", json(nullptr), 0.0, true},
      {"em.cg_rtol", Type::Real, "1", 1e-10, 0.0, true},
      {"em.cg_max_iter", Type::Int, "1", 0, 0.0},

      {"stepper.dt", Type::Real, "s", 2e-3, 0.0, true},
      {"stepper.t_final", Type::Real, "s", 0.4, 0.0},
      {"stepper.max_sweeps", Type::Int, "1", 3, 1.0},
      {"stepper.sweep_tol", Type::Real, "1", 1e-8, 0.0, true},
      {"stepper.relaxation", Type::Real, "1", 1.0, 0.0, true, 1.0},
      {"stepper.snapshot_every", Type::Int, "1", 0, 0.0},
      {"stepper.on_sweep_failure", Type::String, "", "accept", kNone, false, kNone,
       {"accept", "abort", "halve"}},
      {"stepper.max_halvings", Type::Int, "1", 4, 0.0},

      {"diagnostics.weight", Type::String, "", "cosine", kNone, false, kNone, {"uniform", "cosine"}},
      {"diagnostics.weight_amplitude", Type::Real, "1", 0.5, -0.99, false, 0.99},
      {"diagnostics.weight_growth", Type::Real, "1/s", 0.0, 0.0},
      {"diagnostics.tolerance", Type::Real, "1", 1e-8, 0.0, true},
      {"diagnostics.validation_grid", Type::Int, "1", 64, 2.0},
      {"diagnostics.validation_quasi_random", Type::Int, "1", 1000, 0.0},

      {"output.snapshots", Type::Bool, "", true},
  };
  return s;
}

const std::map<std::string, std::set<std::string>>& law_params() {
  static const std::map<std::string, std::set<std::string>> m = {
      {"constant", {"value"}},
      {"rational_decay", {"low", "high", "scale"}},
      {"sqrt_quadratic", {"scale", "q0", "q1", "q2"}},
      {"quadratic", {"c0", "c1", "c2"}},
      {"arctan", {"offset", "amplitude", "scale"}},
  };
  return m;
}

json::json_pointer pointer(const std::string& dotted) {
  std::string p;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) p += "/" + part;
  return json::json_pointer(p);
}

// Accepts a bare number or a "number unit" string whose unit must match.
bool parse_quantity(const json& v, const std::string& unit, double& out, std::string& err) {
  if (v.is_number()) {
    out = v.get<double>();
    return true;
  }
  if (!v.is_string()) {
    err = "expected a number";
    return false;
  }
  const std::string s = v.get<std::string>();
  const char* begin = s.c_str();
  char* end = nullptr;
  out = std::strtod(begin, &end);
  if (end == begin) {
    err = "cannot parse quantity '" + s + "'";
    return false;
  }
  std::string u(end);
  const auto b = u.find_first_not_of(" \t");
  u = b == std::string::npos ? "" : u.substr(b, u.find_last_not_of(" \t") - b + 1);
  if (u.empty()) return true;
  if (u != unit && !(unit == "1" && u == "-")) {
    err = "unit mismatch: got '" + u + "', expected '" + unit + "'";
    return false;
  }
  return true;
}

void collect_unknown(const json& node, const std::string& prefix, const std::set<std::string>& known,
                     const std::set<std::string>& owned_prefixes, std::vector<std::string>& out) {
  if (!node.is_object()) return;
  for (auto it = node.begin(); it != node.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (known.count(path)) continue;
    bool is_prefix = false;
    for (const auto& k : owned_prefixes)
      if (k.rfind(path + ".", 0) == 0) is_prefix = true;
    if (is_prefix && it.value().is_object()) {
      collect_unknown(it.value(), path, known, owned_prefixes, out);
      continue;
    }
    out.push_back(path);
  }
}

bool check_range(const Field& f, double v, std::vector<std::string>& errs) {
  if (!std::isfinite(v)) {
    errs.push_back(f.path + ": value must be finite");
    return false;
  }
  if (!std::isnan(f.lo) && (f.lo_strict ? !(v > f.lo) : !(v >= f.lo))) {
    errs.push_back(f.path + ": range error, value " + std::to_string(v) + " must be " +
                   (f.lo_strict ? "> " : ">= ") + std::to_string(f.lo));
    return false;
  }
  if (!std::isnan(f.hi) && !(v <= f.hi)) {
    errs.push_back(f.path + ": range error, value " + std::to_string(v) + " must be <= " +
                   std::to_string(f.hi));
    return false;
  }
  return true;
}

json normalize_field(const Field& f, const json& v, std::vector<std::string>& errs) {
  std::string err;
  switch (f.type) {
    case Type::Real: {
      if (v.is_null()) return v;
      double d = 0.0;
      if (!parse_quantity(v, f.unit, d, err)) {
        errs.push_back(f.path + ": " + err);
        return f.def;
      }
      check_range(f, d, errs);
      return d;
    }
    case Type::Int: {
      double d = 0.0;
      if (!parse_quantity(v, f.unit, d, err) || d != std::floor(d)) {
        errs.push_back(f.path + ": expected an integer");
        return f.def;
      }
      check_range(f, d, errs);
      return static_cast<long long>(d);
    }
    case Type::String:
      if (!v.is_string()) {
        errs.push_back(f.path + ": expected a string");
        return f.def;
      }
      if (!f.choices.empty() &&
          std::find(f.choices.begin(), f.choices.end(), v.get<std::string>()) == f.choices.end()) {
        std::string c;
        for (const auto& x : f.choices) c += (c.empty() ? "" : ", ") + x;
        errs.push_back(f.path + ": '" + v.get<std::string>() + "' is not one of " + c);
        return f.def;
      }
      return v;
    case Type::Bool:
      if (!v.is_boolean()) {
        errs.push_back(f.path + ": expected true or false");
        return f.def;
      }
      return v;
    case Type::Rect: {
      if (!v.is_array() || v.size() != 4) {
        errs.push_back(f.path + ": expected [x0, x1, y0, y1]");
        return f.def;
      }
      json out = json::array();
      for (const auto& x : v) {
        double d = 0.0;
        if (!parse_quantity(x, f.unit, d, err)) {
          errs.push_back(f.path + ": " + err);
          return f.def;
        }
        out.push_back(d);
      }
      if (!(out[0].get<double>() < out[1].get<double>()) || !(out[2].get<double>() < out[3].get<double>()))
        errs.push_back(f.path + ": rectangle must satisfy x0 < x1 and y0 < y1");
      return out;
    }
    case Type::Inductors: {
      if (!v.is_array()) {
        errs.push_back(f.path + ": expected a list of {rect, polarity}");
        return f.def;
      }
      json out = json::array();
      for (const auto& item : v) {
        if (!item.is_object() || !item.contains("rect")) {
          errs.push_back(f.path + ": each inductor needs a rect");
          continue;
        }
        for (auto it = item.begin(); it != item.end(); ++it)
          if (it.key() != "rect" && it.key() != "polarity")
            errs.push_back(f.path + ": unknown inductor key '" + it.key() + "'");
        Field rf{f.path + ".rect", Type::Rect, "m", json()};
        json r = normalize_field(rf, item.at("rect"), errs);
        const int pol = item.value("polarity", 1);
        if (pol != 1 && pol != -1) errs.push_back(f.path + ": polarity must be 1 or -1");
        out.push_back({{"rect", r}, {"polarity", pol}});
      }
      return out;
    }
    case Type::Table: {
      if (!v.is_array()) {
        errs.push_back(f.path + ": expected [[t, value], ...]");
        return f.def;
      }
      json out = json::array();
      for (const auto& row : v) {
        if (!row.is_array() || row.size() != 2 || !row[0].is_number() || !row[1].is_number()) {
          errs.push_back(f.path + ": rows must be [t, value] number pairs");
          return f.def;
        }
        out.push_back(row);
      }
      return out;
    }
    case Type::Law: {
      if (!v.is_object() || !v.contains("kind") || !v.at("kind").is_string()) {
        errs.push_back(f.path + ": law needs a string 'kind'");
        return f.def;
      }
      const std::string kind = v.at("kind").get<std::string>();
      const auto lp = law_params().find(kind);
      if (lp == law_params().end()) {
        errs.push_back(f.path + ": unknown law kind '" + kind + "'");
        return f.def;
      }
      json out{{"kind", kind}};
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (it.key() == "kind") continue;
        if (!lp->second.count(it.key())) {
          errs.push_back(f.path + "." + it.key() + ": unknown parameter for law '" + kind + "'");
          continue;
        }
        if (!it.value().is_number()) {
          errs.push_back(f.path + "." + it.key() + ": expected a number");
          continue;
        }
        out[it.key()] = it.value();
      }
      try {
        (void)CoefficientLaw::from_json(out);
      } catch (const std::exception& e) {
        errs.push_back(f.path + ": " + e.what());
        return f.def;
      }
      return out;
    }
  }
  return v;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : std::runtime_error("invalid configuration:\n" + join(violations)),
      violations_(std::move(violations)) {}

int StepperConfig::steps() const {
  if (!(dt > 0.0)) return 0;
  return static_cast<int>(std::llround(t_final / dt));
}

json default_config() {
  json doc = json::object();
  for (const auto& f : schema()) doc[pointer(f.path)] = f.def;
  doc[pointer("em.eps_air")] = 1e-6 * doc[pointer("materials.sigma_cond")].get<double>();
  return doc;
}

RunConfig config_from_json(const json& doc, bool strict) {
  std::vector<std::string> errs;
  RunConfig cfg;
  if (!doc.is_object()) throw ConfigError({"configuration root must be an object"});

  std::set<std::string> known;
  for (const auto& f : schema()) known.insert(f.path);
  std::vector<std::string> unknown;
  collect_unknown(doc, "", known, known, unknown);
  for (const auto& u : unknown) {
    if (strict) errs.push_back(u + ": unknown key");
    else cfg.warnings.push_back(u + ": unknown key ignored");
  }

  json norm = json::object();
  for (const auto& f : schema()) {
    const auto ptr = pointer(f.path);
    const bool present = doc.contains(ptr);
    norm[ptr] = present ? normalize_field(f, doc.at(ptr), errs) : f.def;
  }
  if (norm[pointer("em.eps_air")].is_null())
    norm[pointer("em.eps_air")] = 1e-6 * norm[pointer("materials.sigma_cond")].get<double>();
  if (!errs.empty()) throw ConfigError(errs);

  auto num = [&](const char* p) { return norm.at(pointer(p)).get<double>(); };
  auto integer = [&](const char* p) { return norm.at(pointer(p)).get<int>(); };
  auto str = [&](const char* p) { return norm.at(pointer(p)).get<std::string>(); };

  // Grid.
  cfg.grid.lx = num("grid.lx");
  cfg.grid.ly = num("grid.ly");
  cfg.grid.nx = integer("grid.nx");
  cfg.grid.ny = integer("grid.ny");
  const auto& wr = norm.at(pointer("grid.workpiece"));
  cfg.grid.workpiece = {wr[0], wr[1], wr[2], wr[3]};
  for (const auto& ind : norm.at(pointer("grid.inductors"))) {
    const auto& r = ind.at("rect");
    cfg.grid.inductors.push_back({{r[0], r[1], r[2], r[3]}, ind.at("polarity").get<int>()});
  }
  cfg.grid.mask_file = str("grid.mask_file");
  if (cfg.grid.mask_file.empty()) {
    const Rect& w = cfg.grid.workpiece;
    if (w.x0 <= 0.0 || w.y0 <= 0.0 || w.x1 >= cfg.grid.lx || w.y1 >= cfg.grid.ly)
      errs.push_back("grid.workpiece: consistency error, the workpiece must lie strictly inside D");
    for (const auto& ind : cfg.grid.inductors) {
      const Rect& r = ind.rect;
      if (r.x0 < 0.0 || r.y0 < 0.0 || r.x1 > cfg.grid.lx || r.y1 > cfg.grid.ly)
        errs.push_back("grid.inductors: consistency error, inductor outside D");
    }
  } else {
    std::ifstream probe(cfg.grid.mask_file);
    if (!probe) errs.push_back("grid.mask_file: file '" + cfg.grid.mask_file + "' does not exist");
  }

  // Materials.
  try {
    cfg.laws = materials_from_json(norm.at("materials"));
  } catch (const std::exception& e) {
    errs.push_back(std::string("materials: ") + e.what());
  }
  if (num("materials.box.theta_min") >= num("materials.box.theta_max"))
    errs.push_back("materials.box: theta_min must be below theta_max");
  if (num("materials.box.z_min") >= num("materials.box.z_max"))
    errs.push_back("materials.box: z_min must be below z_max");

  // Source.
  cfg.source = SourceModel::from_json(norm.at("source"));
  if (cfg.source.kind == SourceModel::Kind::Tabulated && cfg.source.table.empty())
    errs.push_back("source.table: tabulated source needs at least one row");

  // Heat, phase, em.
  cfg.theta0 = num("heat.theta0");
  cfg.theta0_perturbation = num("heat.theta0_perturbation");
  cfg.heat.eps_pos = num("heat.eps_pos");
  cfg.heat.eps_cond = num("heat.eps_cond");
  cfg.heat.newton_rtol = num("heat.newton_rtol");
  cfg.heat.newton_atol = num("heat.newton_atol");
  cfg.heat.newton_max_iter = integer("heat.newton_max_iter");
  cfg.heat.theta_floor = num("heat.theta_floor");
  cfg.heat.linear_rtol = num("heat.linear_rtol");
  const double th0 = cfg.theta0 * (1.0 + cfg.theta0_perturbation);
  if (th0 < num("materials.box.theta_min") || th0 > num("materials.box.theta_max"))
    errs.push_back("heat.theta0: consistency error, initial temperature outside materials.box");
  cfg.z0 = num("phase.z0");
  cfg.phase.delta = num("phase.delta");
  cfg.phase.newton_tol = num("phase.newton_tol");
  cfg.phase.newton_max_iter = integer("phase.newton_max_iter");
  cfg.em.eps_air = num("em.eps_air");
  cfg.em.cg_rtol = num("em.cg_rtol");
  cfg.em.cg_max_iter = integer("em.cg_max_iter");

  // Stepper.
  cfg.stepper.dt = num("stepper.dt");
  cfg.stepper.t_final = num("stepper.t_final");
  cfg.stepper.max_sweeps = integer("stepper.max_sweeps");
  cfg.stepper.sweep_tol = num("stepper.sweep_tol");
  cfg.stepper.relaxation = num("stepper.relaxation");
  cfg.stepper.snapshot_every = integer("stepper.snapshot_every");
  const std::string pol = str("stepper.on_sweep_failure");
  cfg.stepper.on_sweep_failure = pol == "abort"   ? SweepPolicy::Abort
                                 : pol == "halve" ? SweepPolicy::Halve
                                                  : SweepPolicy::Accept;
  cfg.stepper.max_halvings = integer("stepper.max_halvings");
  if (cfg.stepper.t_final > 0.0 && cfg.stepper.dt > cfg.stepper.t_final)
    errs.push_back("stepper.dt: consistency error, dt exceeds t_final");
  if (cfg.stepper.t_final > 0.0 &&
      std::abs(cfg.stepper.steps() * cfg.stepper.dt - cfg.stepper.t_final) > 1e-9 * cfg.stepper.t_final)
    errs.push_back("stepper.t_final: consistency error, t_final must be a multiple of dt");

  // Diagnostics and output.
  cfg.diagnostics.weight.kind =
      str("diagnostics.weight") == "uniform" ? WeightSpec::Kind::Uniform : WeightSpec::Kind::Cosine;
  cfg.diagnostics.weight.amplitude = num("diagnostics.weight_amplitude");
  cfg.diagnostics.weight.growth = num("diagnostics.weight_growth");
  cfg.diagnostics.tolerance = num("diagnostics.tolerance");
  cfg.diagnostics.sampling.grid_theta = integer("diagnostics.validation_grid");
  cfg.diagnostics.sampling.grid_z = integer("diagnostics.validation_grid");
  cfg.diagnostics.sampling.quasi_random = integer("diagnostics.validation_quasi_random");
  cfg.write_snapshots = norm.at(pointer("output.snapshots")).get<bool>();

  if (!errs.empty()) throw ConfigError(errs);
  cfg.normalized = norm;
  cfg.hash = sha256_hex(norm.dump());
  return cfg;
}

void apply_overrides(json& doc, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError({"override '" + o + "' is not of the form key=value"});
    const std::string key = o.substr(0, eq), raw = o.substr(eq + 1);
    json value = json::parse(raw, nullptr, false);
    if (value.is_discarded()) value = raw;
    doc[pointer(key)] = value;
  }
}

RunConfig parse_config(const std::string& path, bool strict, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
    doc = json::parse(in, nullptr, false, true);
    if (doc.is_discarded()) throw ConfigError({"config file '" + path + "' is not valid JSON"});
  }
  apply_overrides(doc, overrides);
  return config_from_json(doc, strict);
}

RegionGrid build_grid(const RunConfig& cfg) {
  if (!cfg.grid.mask_file.empty())
    return RegionGrid::from_mask_file(cfg.grid.mask_file, cfg.grid.lx, cfg.grid.ly);
  return RegionGrid::from_rects(cfg.grid.lx, cfg.grid.ly, cfg.grid.nx, cfg.grid.ny, cfg.grid.workpiece,
                                cfg.grid.inductors);
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

}  // namespace inductherm
