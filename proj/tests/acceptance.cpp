// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails. Reads configs from the source tree and writes run outputs
// under the build tree.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "inductherm/config.hpp"
#include "inductherm/convergence.hpp"
#include "inductherm/diagnostics.hpp"
#include "inductherm/stepper.hpp"
#include "inductherm/validation.hpp"

using namespace inductherm;

namespace {

const std::string kSource = INDUCTHERM_SOURCE_DIR;
const std::string kOut = INDUCTHERM_ACCEPTANCE_OUT;

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

RunConfig battery(const std::vector<std::string>& overrides = {}) {
  return parse_config(kSource + "/configs/battery.json", true, overrides);
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Shared between criteria 6, 7, 11 and 12.
struct BatteryRun {
  RunSummary summary;
  double seconds = 0.0;
  bool failed = false;
  std::string error;
};

BatteryRun& battery_run() {
  static BatteryRun r = [] {
    BatteryRun b;
    const auto t0 = Clock::now();
    try {
      b.summary = run(battery(), kOut + "/battery");
    } catch (const std::exception& e) {
      b.failed = true;
      b.error = e.what();
    }
    b.seconds = seconds_since(t0);
    return b;
  }();
  return r;
}

struct CompareRuns {
  CompareReport identical, perturbed;
  double seconds = 0.0;
};

CompareRuns& compare_runs() {
  static CompareRuns c = [] {
    CompareRuns r;
    const auto t0 = Clock::now();
    const RunConfig strong = battery();
    r.identical = weak_strong_compare(strong, strong, CompareOptions{}, kOut + "/compare_identical");
    r.perturbed = weak_strong_compare(battery({"heat.theta0_perturbation=0.01"}), strong, CompareOptions{},
                                      kOut + "/compare_perturbed");
    r.seconds = seconds_since(t0);
    return r;
  }();
  return c;
}

// 1. Material law suite.
Outcome material_suite() {
  const auto t0 = Clock::now();
  const RunConfig cfg = battery();
  const FreeEnergyLaw& law = cfg.laws.psi();
  const auto* steel = dynamic_cast<const DefaultSteelLaw*>(&law);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> ut(law.box.theta_min, law.box.theta_max), uz(law.box.z_min, law.box.z_max);

  // Derivatives: central differences at relative step 1e-5, with the
  // unavoidable round-off floor eps |parent| / step removed.
  int fd_bad = 0;
  double fd_worst = 0.0;
  auto rel = [&](double a, double b, double parent, double step) {
    const double floor = 1e-15 * std::abs(parent) / step;
    const double r = std::max(0.0, std::abs(a - b) - floor) / std::max({std::abs(a), std::abs(b), 1e-3});
    fd_worst = std::max(fd_worst, r);
    return r > 1e-6;
  };
  int fd_points = 0;
  while (fd_points < 1000) {
    const double th = ut(rng), z = uz(rng);
    if (steel && std::abs(steel->z_eq().value(th) - z) < 1e-3) continue;  // C^1 kink of the (.)_+^2 term
    ++fd_points;
    const double h = 1e-5, ht = 1e-5 * th;
    const double p = law.psi(th, z), pt = law.psi_theta(th, z), pz = law.psi_z(th, z);
    fd_bad += rel(pt, (law.psi(th + ht, z) - law.psi(th - ht, z)) / (2 * ht), p, ht);
    fd_bad += rel(pz, (law.psi(th, z + h) - law.psi(th, z - h)) / (2 * h), p, h);
    fd_bad += rel(law.psi_thetatheta(th, z), (law.psi_theta(th + ht, z) - law.psi_theta(th - ht, z)) / (2 * ht),
                  pt, ht);
    fd_bad += rel(law.psi_ztheta(th, z), (law.psi_z(th + ht, z) - law.psi_z(th - ht, z)) / (2 * ht), pz, ht);
    fd_bad += rel(law.psi_zz(th, z), (law.psi_z(th, z + h) - law.psi_z(th, z - h)) / (2 * h), pz, h);
  }

  double inv_e = 0.0, inv_s = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double th = ut(rng), z = uz(rng);
    inv_e = std::max(inv_e, std::abs(invert_energy(internal_energy(th, z, law), z, law) - th));
    inv_s = std::max(inv_s, std::abs(invert_entropy(entropy_density(th, z, law), z, law) - std::log(th)));
  }

  const ValidationReport rep = validate_assumptions(cfg.laws, AssumptionLevel::A1, cfg.diagnostics.sampling);
  const EmpiricalConstants& k = rep.constants;
  int bound_bad = 0;
  for (const auto& [th, z] : sample_points(law.box, cfg.diagnostics.sampling)) {
    const double e = internal_energy(th, z, law), s = entropy_density(th, z, law), lt = std::log(th);
    const double tol = 1e-12 * (1.0 + std::abs(e) + std::abs(s));
    bound_bad += !(k.energy_c * (th - 1.0) <= e + tol && e <= k.energy_C * (th + 1.0) + tol);
    bound_bad += !(k.entropy_c * (lt - 1.0) <= s + tol && s <= k.entropy_C * (lt + 1.0) + tol);
  }

  int hyst_bad = 0;
  if (steel) {
    for (int k2 = 0; k2 < 1000; ++k2) {
      const double th = ut(rng), zeq = steel->z_eq().value(th);
      const double z = zeq + (law.box.z_max - zeq) * uz(rng);
      hyst_bad += law.psi_z(th, z) != 0.0;
      hyst_bad += law.psi_z(th, uz(rng)) > 0.0;
    }
  } else {
    hyst_bad = 1;
  }

  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = fd_bad == 0 && inv_e <= 1e-10 && inv_s <= 1e-10 && bound_bad == 0 && hyst_bad == 0 && secs < 5.0;
  o.detail = "fd worst " + num(fd_worst) + ", inverse errors " + num(inv_e) + "/" + num(inv_s) +
             ", bound violations " + std::to_string(bound_bad) + ", hysteresis violations " +
             std::to_string(hyst_bad) + ", " + num(secs) + " s";
  return o;
}

// 2. Validator discrimination.
Outcome validator_discrimination() {
  const auto t0 = Clock::now();
  const RunConfig cfg = battery();
  const bool a1 = validate_assumptions(cfg.laws, AssumptionLevel::A1, cfg.diagnostics.sampling).passed(AssumptionLevel::A1);
  auto clause = [&](const std::string& fixture) {
    const RunConfig f = parse_config(kSource + "/configs/" + fixture);
    const ValidationReport r = validate_assumptions(f.laws, AssumptionLevel::A2, f.diagnostics.sampling);
    const ClauseResult* c = r.find("mu_squared_concave");
    return c && c->passed;
  };
  const bool convex_fails = !clause("mu_convex_fixture.json");
  const bool concave_passes = clause("mu_concave_fixture.json");
  const double secs = seconds_since(t0);
  return {a1 && convex_fails && concave_passes && secs < 5.0,
          std::string("A1 steel ") + (a1 ? "pass" : "fail") + ", convex mu^2 fixture " +
              (convex_fails ? "rejected" : "accepted") + ", concave fixture " +
              (concave_passes ? "accepted" : "rejected") + ", " + num(secs) + " s"};
}

// 3. Sampled coefficient inequalities.
Outcome coefficient_inequalities() {
  const auto t0 = Clock::now();
  const CoefficientChecks c = check_coefficient_inequalities(battery().laws, 50, 4);
  const double secs = seconds_since(t0);
  const std::size_t viol = c.sigma.violations + c.tau.violations + c.kappa.violations + c.mu.violations;
  return {c.passed() && viol == 0 && secs < 10.0,
          "constants sigma " + num(c.sigma.constant) + ", tau " + num(c.tau.constant) + ", kappa " +
              num(c.kappa.constant) + ", mu " + num(c.mu.constant) + "; violations " + std::to_string(viol) +
              ", " + num(secs) + " s"};
}

std::string orders(const ConvergenceStudy& s) {
  std::string o = s.name + " [";
  for (std::size_t k = 0; k < s.orders.size(); ++k) o += (k ? " " : "") + num(s.orders[k]);
  return o + "]";
}

// 4. Manufactured-solution convergence.
Outcome manufactured_convergence() {
  const auto t0 = Clock::now();
  const std::vector<ConvergenceStudy> st = {heat_spatial_study(), heat_temporal_study(), em_spatial_study(),
                                            em_temporal_study()};
  const double secs = seconds_since(t0);
  bool ok = secs < 60.0;
  std::string d;
  for (const auto& s : st) {
    ok = ok && s.passed();
    d += orders(s) + " ";
  }
  return {ok, d + num(secs) + " s"};
}

// 5. Phase ODE oracle.
Outcome phase_oracle() {
  const auto t0 = Clock::now();
  const ConvergenceStudy s = phase_ode_study();
  const double secs = seconds_since(t0);
  std::string ratios;
  for (std::size_t k = 0; k + 1 < s.errors.size(); ++k) ratios += (k ? " " : "") + num(s.errors[k] / s.errors[k + 1]);
  return {s.passed() && s.errors.size() == 4 && secs < 5.0, "error ratios " + ratios + ", " + num(secs) + " s"};
}

// 6. Energy inequality on the battery run.
Outcome energy_certificate() {
  const BatteryRun& b = battery_run();
  if (b.failed) return {false, "battery run failed: " + b.error};
  return {b.summary.energy_ok && b.summary.steps == 200 && b.seconds < 60.0,
          "worst slack/scale " + num(b.summary.worst_energy_margin) + " over " + std::to_string(b.summary.steps) +
              " steps, " + num(b.seconds) + " s"};
}

// 7. Entropy inequality, uniform and cosine weights.
Outcome entropy_certificate() {
  const BatteryRun& b = battery_run();
  if (b.failed) return {false, "battery run failed: " + b.error};
  return {b.summary.entropy_ok, "worst slack/scale over both weights " + num(b.summary.worst_entropy_margin)};
}

// 8. Weak-strong comparison.
Outcome weak_strong() {
  const CompareRuns& c = compare_runs();
  const bool same = c.identical.identical_initial && c.identical.max_e <= 1e-10 * c.identical.field_scale;
  const bool env = c.perturbed.gronwall_ok;
  return {same && env && c.seconds < 120.0,
          "identical max E " + num(c.identical.max_e) + " (scale " + num(c.identical.field_scale) +
              "), perturbed max E " + num(c.perturbed.max_e) + " within envelope: " + (env ? "yes" : "no") + ", " +
              num(c.seconds) + " s"};
}

// 9. Relative-energy lower bound.
Outcome lower_bound() {
  nlohmann::json doc = default_config();
  apply_overrides(doc, {"grid.nx=16", "grid.ny=16"});
  const RunConfig cfg = config_from_json(doc);
  const RegionGrid g = build_grid(cfg);
  const EmpiricalConstants k =
      validate_assumptions(cfg.laws, AssumptionLevel::A1, cfg.diagnostics.sampling).constants;
  const ThermoBox& box = cfg.laws.psi().box;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lt(std::log(box.theta_min), std::log(box.theta_max)),
      uz(box.z_min, box.z_max), ua(-1.0, 1.0), amp(0.0, 2.0);
  int viol = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 1000; ++trial) {
    SimState u = initial_state(g, cfg), v = u;
    const double scale_a = amp(rng);
    for (std::size_t i = 0; i < u.a.size(); ++i) {
      u.a[i] = scale_a * ua(rng);
      v.a[i] = scale_a * ua(rng);
    }
    for (int c : g.workpiece_cells()) {
      const auto i = static_cast<std::size_t>(c);
      u.theta[i] = std::exp(lt(rng));
      v.theta[i] = std::exp(lt(rng));
      u.z[i] = uz(rng);
      v.z[i] = uz(rng);
      u.e[i] = internal_energy(u.theta[i], u.z[i], cfg.laws.psi());
      v.e[i] = internal_energy(v.theta[i], v.z[i], cfg.laws.psi());
    }
    const double e = relative_energy(g, cfg.laws, u, v).total;
    const double b = relative_energy_lower_bound(g, cfg.laws, k, u, v).value;
    if (!(e >= b - 1e-12 * std::abs(e))) ++viol;
    if (e > 0.0) worst = std::min(worst, (e - b) / e);
  }
  const CompareRuns& c = compare_runs();
  const bool runs_ok = c.identical.lower_bound_ok && c.perturbed.lower_bound_ok;
  return {viol == 0 && runs_ok, "random pairs: " + std::to_string(viol) + " violations of 1000 (min (E-lb)/E " +
                                    num(worst) + "); compare rows " + (runs_ok ? "all above" : "violated")};
}

// 10. Skin effect.
Outcome skin_effect() {
  const RunConfig cfg = battery();
  const SkinDepthResult lo = skin_depth(cfg, 5.0), hi = skin_depth(cfg, 20.0);
  return {lo.reached && hi.reached && hi.depth < lo.depth,
          "1/e depth " + num(lo.depth) + " m at 5 Hz, " + num(hi.depth) + " m at 20 Hz"};
}

// 11. Conservation and positivity.
Outcome conservation_positivity() {
  const RunConfig cfg = battery({"source.amplitude=0", "heat.eps_pos=0", "stepper.t_final=0.04"});
  Simulation sim(cfg);
  SimState s = sim.state();
  const RegionGrid& g = sim.grid();
  for (int c : g.workpiece_cells()) {
    const auto i = static_cast<std::size_t>(c);
    s.theta[i] = 300.0 + 600.0 * std::pow(std::sin(3.0 * g.x(c)) * std::cos(2.0 * g.y(c)), 2);
    s.e[i] = internal_energy(s.theta[i], s.z[i], cfg.laws.psi());
  }
  sim.reset(s);
  while (!sim.done()) sim.advance();
  double drift = 0.0;
  const auto& rows = sim.energy().rows();
  for (std::size_t k = 1; k < rows.size(); ++k)
    drift = std::max(drift, std::abs(rows[k].internal_energy - rows[k - 1].internal_energy) /
                                std::abs(rows[k - 1].internal_energy));

  const BatteryRun& b = battery_run();
  const double floor = battery().heat.theta_floor;
  const bool eps_on = battery().heat.eps_pos > 0.0;
  const bool pos = !b.failed && eps_on && b.summary.positivity_ok && b.summary.min_theta > floor;
  return {drift <= 1e-10 && pos, "max relative drift of int e per step " + num(drift) + " over " +
                                     std::to_string(rows.size() - 1) + " steps; battery min theta " +
                                     num(b.summary.min_theta) + " K > floor " + num(floor) + " K"};
}

// 12. A priori norm boundedness across a two-level refinement.
Outcome norm_boundedness() {
  const RunSummary coarse =
      run(battery({"grid.nx=32", "grid.ny=32", "stepper.dt=0.004"}), kOut + "/battery_coarse");
  const BatteryRun& b = battery_run();
  if (b.failed) return {false, "battery run failed: " + b.error};
  const AprioriNorms& n1 = coarse.norms;
  const AprioriNorms& n2 = b.summary.norms;
  const std::pair<const char*, std::pair<double, double>> items[] = {
      {"theta Linf-L1", {n1.theta_linf_l1, n2.theta_linf_l1}},
      {"grad log theta L2-L2", {n1.grad_log_l2l2, n2.grad_log_l2l2}},
      {"z W1inf", {n1.z_w1inf_linf, n2.z_w1inf_linf}},
      {"A Linf-Hcurl", {n1.a_linf_hcurl, n2.a_linf_hcurl}}};
  bool ok = coarse.positivity_ok && coarse.min_theta > battery().heat.theta_floor;
  std::string d;
  for (const auto& [name, v] : items) {
    const double r = std::abs(v.first - v.second) / std::max(std::abs(v.first), std::abs(v.second));
    ok = ok && r < 0.10;
    d += std::string(name) + " " + num(v.first) + "->" + num(v.second) + " (" + num(100 * r) + "%) ";
  }
  return {ok, d};
}

}  // namespace

int main() {
  std::filesystem::create_directories(kOut);
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"material law suite", material_suite},
      {"assumption validator discrimination", validator_discrimination},
      {"sampled coefficient inequalities", coefficient_inequalities},
      {"manufactured-solution convergence", manufactured_convergence},
      {"phase ODE oracle", phase_oracle},
      {"energy inequality certificate", energy_certificate},
      {"entropy inequality certificate", entropy_certificate},
      {"weak-strong comparison", weak_strong},
      {"relative energy lower bound", lower_bound},
      {"skin effect", skin_effect},
      {"conservation and positivity", conservation_positivity},
      {"a priori norm boundedness", norm_boundedness}};
  int failed = 0, idx = 0;
  for (const auto& [name, fn] : criteria) {
    ++idx;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2d %-38s %s  %s\n", idx, name, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", idx - failed, idx);
  return failed ? 1 : 0;
}
