// inductherm: batch front end. Exit codes: 0 all certificates pass,
// 1 a certificate failed, 2 invalid configuration or usage, 3 solver failure.

#include <cstdlib>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "inductherm/config.hpp"
#include "inductherm/convergence.hpp"
#include "inductherm/io.hpp"
#include "inductherm/stepper.hpp"
#include "inductherm/validation.hpp"

using namespace inductherm;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  bool lenient = false;
};

void add_common(CLI::App* app, Common& c, bool with_out = true) {
  app->add_option("--config", c.config, "run configuration (JSON); defaults when omitted");
  if (with_out) app->add_option("--out", c.out, "output directory");
  app->add_option("--override", c.overrides, "dotted key=value override, repeatable")->take_all();
  app->add_option("--seed", c.seed, "seed for randomized sampling");
  app->add_flag("--lenient,!--strict", c.lenient, "warn on unknown config keys instead of failing");
}

std::string out_dir(const Common& c, const std::string& cmd) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("INDUCTHERM_OUT");
  return (root && *root ? std::string(root) : std::string("inductherm_out")) + "/" + cmd;
}

RunConfig load(const Common& c) {
  RunConfig cfg = parse_config(c.config, !c.lenient, c.overrides);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  cfg.diagnostics.sampling.seed = c.seed;
  return cfg;
}

const char* verdict(bool ok) { return ok ? "pass" : "FAIL"; }

int cmd_simulate(const Common& c, const std::string& restart) {
  const RunConfig cfg = load(c);
  const std::string dir = out_dir(c, "simulate");
  const RunSummary s = run(cfg, dir, restart);
  std::cout << "config hash " << cfg.hash << "\n"
            << "steps " << s.steps << ", t = " << s.t << ", theta in [" << s.min_theta << ", " << s.max_theta
            << "]\n"
            << "energy inequality: " << verdict(s.energy_ok) << " (worst margin " << s.worst_energy_margin << ")\n"
            << "entropy inequality: " << verdict(s.entropy_ok) << " (worst margin " << s.worst_entropy_margin
            << ")\n"
            << "comparison principle: " << verdict(s.comparison_ok) << "\n"
            << "positivity: " << verdict(s.positivity_ok) << "\n"
            << "outputs in " << dir << "\n";
  if (!s.energy_ok) std::cerr << "energy inequality violated (worst relative slack " << s.worst_energy_margin << ")\n";
  if (!s.entropy_ok)
    std::cerr << "entropy inequality violated (worst relative slack " << s.worst_entropy_margin << ")\n";
  return s.passed() ? 0 : 1;
}

int cmd_compare(const Common& c, const std::string& strong_path, const std::vector<std::string>& strong_over,
                const CompareOptions& opt) {
  const RunConfig weak = load(c);
  Common sc = c;
  if (!strong_path.empty()) sc.config = strong_path;
  sc.overrides = strong_over;
  const RunConfig strong = load(sc);
  const std::string dir = out_dir(c, "compare");
  const CompareReport r = weak_strong_compare(weak, strong, opt, dir);
  std::cout << "steps " << r.rows.size() - 1 << ", max relative energy " << r.max_e << ", field scale "
            << r.field_scale << "\n"
            << "relative energy inequality: " << verdict(r.gronwall_ok) << "\n"
            << "relative energy lower bound: " << verdict(r.lower_bound_ok) << "\n";
  if (r.identical_initial) std::cout << "uniqueness for identical data: " << verdict(r.identical_ok) << "\n";
  if (!r.passed() && r.first_violation_step >= 0)
    std::cerr << "relative energy certificate violated at t=" << r.rows[std::size_t(r.first_violation_step)].t
              << "\n";
  std::cout << "outputs in " << dir << "\n";
  return r.passed() ? 0 : 1;
}

int cmd_validate(const Common& c, const std::string& level) {
  const RunConfig cfg = load(c);
  const std::string dir = out_dir(c, "validate-materials");
  ensure_dir(dir);
  bool ok = true;
  std::string text;
  KeyValues kv;
  for (AssumptionLevel lv : {AssumptionLevel::A1, AssumptionLevel::A2}) {
    if (level == "A1" && lv == AssumptionLevel::A2) continue;
    const ValidationReport rep = validate_assumptions(cfg.laws, lv, cfg.diagnostics.sampling);
    ok = ok && rep.passed(lv);
    text += rep.to_text();
    kv.push_back({std::string("assumption.") + to_string(lv), rep.passed(lv) ? "pass" : "fail"});
    if (!rep.passed(lv)) std::cerr << "Assumption " << to_string(lv) << " violated\n";
    std::ofstream(dir + "/validation_" + to_string(lv) + ".kv") << "# config_hash " << cfg.hash << '\n'
                                                                << rep.to_kv();
  }
  const CoefficientChecks lem = check_coefficient_inequalities(cfg.laws);
  text += lem.to_text();
  kv.push_back({"coefficient_inequalities", lem.passed() ? "pass" : "fail"});
  ok = ok && lem.passed();
  std::cout << text;
  std::ofstream(dir + "/validation.txt") << text;
  write_kv(dir + "/validation.kv", cfg.hash, kv);
  return ok ? 0 : 1;
}

int cmd_audit(const Common& c, const std::string& run_dir) {
  const RunConfig cfg = load(c);
  const AuditReport r = audit_run(cfg, run_dir);
  std::cout << "steps rebuilt " << r.steps_checked << ", max relative difference " << r.max_rel_diff
            << (r.worst_column.empty() ? "" : " (" + r.worst_column + ")") << "\n"
            << "config hash matches: " << (r.hash_ok ? "yes" : "no") << "\n"
            << "audit: " << verdict(r.passed()) << "\n";
  if (r.steps_checked == 0)
    std::cerr << "no consecutive snapshot pairs found; rerun simulate with stepper.snapshot_every=1\n";
  return r.passed() ? 0 : 1;
}

int cmd_convergence(const Common& c) {
  const std::string dir = out_dir(c, "convergence");
  ensure_dir(dir);
  const auto suite = convergence_suite();
  bool ok = true;
  CsvWriter csv(dir + "/convergence.csv", "none", {"study", "level", "step", "error", "order"});
  for (std::size_t s = 0; s < suite.size(); ++s) {
    const ConvergenceStudy& st = suite[s];
    std::cout << st.name << " (" << st.parameter << "): ";
    for (std::size_t k = 0; k < st.errors.size(); ++k) {
      std::cout << (k ? ", " : "") << st.errors[k];
      csv.row({double(s), double(k), st.steps[k], st.errors[k], k ? st.orders[k - 1] : 0.0});
    }
    std::cout << "; orders";
    for (double p : st.orders) std::cout << ' ' << p;
    std::cout << " -> " << verdict(st.passed()) << "\n";
    ok = ok && st.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coupled induction-heating simulator with thermodynamic certificates"};
  app.require_subcommand(1);

  Common sim_c, cmp_c, val_c, aud_c, conv_c;
  std::string restart, strong_path, level = "both", run_dir;
  std::vector<std::string> strong_over;
  CompareOptions copt;

  auto* sim = app.add_subcommand("simulate", "run the coupled simulation and write ledgers");
  add_common(sim, sim_c);
  sim->add_option("--restart", restart, "resume from a snapshot prefix, e.g. RUN/snapshots/0100");

  auto* cmp = app.add_subcommand("compare", "lockstep weak-strong comparison of two runs");
  add_common(cmp, cmp_c);
  cmp->add_option("--strong", strong_path, "config of the strong run (default: --config)");
  cmp->add_option("--strong-override", strong_over, "override applied to the strong run only")->take_all();
  cmp->add_option("--refine", copt.refine, "grid refinement factor of the strong run");
  cmp->add_option("--substeps", copt.substeps, "strong steps per weak step");
  cmp->add_option("--tolerance", copt.tolerance, "relative tolerance of the inequality");

  auto* val = app.add_subcommand("validate-materials", "sampled checks of the material hypotheses");
  add_common(val, val_c);
  val->add_option("--level", level, "A1, A2 or both")->check(CLI::IsMember({"A1", "A2", "both"}));

  auto* aud = app.add_subcommand("audit", "recompute ledgers from a run's snapshots");
  add_common(aud, aud_c, false);
  aud->add_option("--run", run_dir, "run directory written by simulate")->required();

  auto* conv = app.add_subcommand("convergence", "manufactured-solution convergence studies");
  add_common(conv, conv_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*sim) return cmd_simulate(sim_c, restart);
    if (*cmp) return cmd_compare(cmp_c, strong_path, strong_over, copt);
    if (*val) return cmd_validate(val_c, level);
    if (*aud) return cmd_audit(aud_c, run_dir);
    if (*conv) return cmd_convergence(conv_c);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const GeometryError& e) {
    std::cerr << "invalid geometry: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}
