#pragma once

// Coupled time stepping (phase, then vector potential, then temperature),
// the run loop with its ledgers and snapshots, the lockstep comparison of two
// runs and the offline audit of a run directory.

#include <string>
#include <vector>

#include "inductherm/config.hpp"
#include "inductherm/diagnostics.hpp"
#include "inductherm/validation.hpp"

namespace inductherm {

class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StepReport {
  int sweeps = 0;
  bool converged = false;
  double mismatch = 0.0;               // relative change of (theta, z, A) in the last sweep
  std::vector<double> mismatch_history;
  PhaseStepReport phase;
  EmStepReport em;
  HeatStepReport heat;
  ScalarField joule;      // Joule power that entered the heat step
  ScalarField reg_power;  // explicit regularization heating (delta > 0 only)
  ScalarField theta_coef; // temperature at which the coefficients were frozen
};

/// One backward-Euler step of size dt from `old_s` with fixed-point sweeps.
/// Does not apply the sweep failure policy; check `converged`.
SimState coupled_step(const RegionGrid& g, const SimState& old_s, double dt, const RunConfig& cfg,
                      StepReport& report);

/// Initial state from the config: uniform theta0 (times 1 + perturbation) and
/// z0 on the workpiece, A = 0.
SimState initial_state(const RegionGrid& g, const RunConfig& cfg);

/// Per-step certificate outcome.
struct StepCheck {
  double energy_margin = 0.0;    // slack / scale, >= -tol passes
  double entropy_uniform_margin = 0.0;
  double entropy_weighted_margin = 0.0;
  bool comparison_ok = true;
  bool positivity_ok = true;
  double sub = 0.0, super = 0.0;  // comparison envelope after the step
  double theta_min = 0.0, theta_max = 0.0, z_min = 0.0, z_max = 0.0;
  double joule_total = 0.0;       // int_Omega P_joule
};

class Simulation {
 public:
  /// Empirical constants are measured on construction unless supplied.
  explicit Simulation(RunConfig cfg, const EmpiricalConstants* constants = nullptr);

  const RunConfig& config() const { return cfg_; }
  const RegionGrid& grid() const { return grid_; }
  const SimState& state() const { return state_; }
  const EmpiricalConstants& constants() const { return constants_; }
  /// Replaces the current state (before the first step, e.g. for custom
  /// initial data). Resets every ledger.
  void reset(const SimState& s);

  bool done() const;
  /// Advances by one macro step of the configured dt; halves it recursively
  /// when the sweep policy says so. Returns the sub-step reports.
  std::vector<StepReport> advance();

  const EnergyLedger& energy() const { return energy_; }
  const EntropyLedger& entropy_uniform() const { return ent_uniform_; }
  const EntropyLedger& entropy_weighted() const { return ent_weighted_; }
  const ComparisonTracker& comparison() const { return comparison_; }
  const NormTracker& norms() const { return norms_; }
  const std::vector<StepCheck>& checks() const { return checks_; }
  double min_theta() const { return min_theta_; }
  int sweep_failures() const { return sweep_failures_; }
  bool mismatch_monotone() const { return mismatch_monotone_; }
  int macro_step() const { return macro_step_; }

  /// All certificates of the run so far.
  bool energy_ok() const;
  bool entropy_ok() const;
  bool positivity_ok() const;
  double worst_energy_margin() const;
  double worst_entropy_margin() const;

  /// Writes the state and the ledger accumulators needed to resume.
  void write_snapshot(const std::string& dir) const;
  /// Resumes from a snapshot written by write_snapshot (prefix like
  /// ".../snapshots/0100"). Ledger rows before the snapshot are not restored,
  /// only the running totals.
  void restore_snapshot(const std::string& prefix);

 private:
  void substep(double dt, int depth, std::vector<StepReport>& out);
  void record(const SimState& old_s, const SimState& new_s, const StepReport& rep);

  RunConfig cfg_;
  RegionGrid grid_;
  EmpiricalConstants constants_;
  SimState state_;
  EnergyLedger energy_;
  EntropyLedger ent_uniform_, ent_weighted_;
  ComparisonTracker comparison_;
  NormTracker norms_;
  std::vector<StepCheck> checks_;
  double min_theta_ = 0.0;
  int sweep_failures_ = 0;
  bool mismatch_monotone_ = true;
  int macro_step_ = 0;
  ScalarField last_joule_, last_reg_;
};

struct RunSummary {
  int steps = 0;
  double t = 0.0;
  bool energy_ok = true, entropy_ok = true, comparison_ok = true, positivity_ok = true;
  double worst_energy_margin = 0.0, worst_entropy_margin = 0.0;
  double min_theta = 0.0, max_theta = 0.0;
  int sweep_failures = 0;
  AprioriNorms norms;
  bool passed() const { return energy_ok && entropy_ok && comparison_ok && positivity_ok; }
};

/// Runs the configured simulation and writes ledger.csv, entropy_*.csv,
/// report.kv and snapshots under out_dir (when non-empty).
RunSummary run(const RunConfig& cfg, const std::string& out_dir,
               const std::string& restart_prefix = "");

/// Column names of ledger.csv.
std::vector<std::string> ledger_columns();
std::vector<std::string> entropy_columns();

// ---------------------------------------------------------------------------
// Weak-strong comparison

struct CompareOptions {
  int refine = 1;       // strong run grid refinement factor
  int substeps = 1;     // strong run steps per weak step
  double tolerance = 1e-8;  // relative to the field scale
};

struct CompareRow {
  double t = 0.0;
  RelEnergy e;
  double lower_bound = 0.0;
  double dissipation = 0.0;  // W over the step
  GronwallTerms k;
  double integral_k = 0.0;   // int_0^t K
  double lhs = 0.0;          // E exp(-int K) + int W exp(-int_0^s K)
  double rhs = 0.0;          // E(0)
  double scale = 0.0;
};

struct CompareReport {
  std::vector<CompareRow> rows;
  double max_e = 0.0;
  double field_scale = 0.0;
  bool identical_initial = false;
  bool gronwall_ok = true;
  bool lower_bound_ok = true;
  bool identical_ok = true;  // only meaningful for identical initial data
  int first_violation_step = -1;
  bool passed() const { return gronwall_ok && lower_bound_ok && identical_ok; }
};

/// Runs weak and strong configs in lockstep. The strong grid must be an
/// integer refinement of the weak one with the same domain and regions.
/// Throws ConfigError for incompatible runs.
CompareReport weak_strong_compare(const RunConfig& weak, const RunConfig& strong,
                                  const CompareOptions& opt, const std::string& out_dir = "");

/// Averages r x r blocks of a fine field onto the coarse grid.
ScalarField restrict_field(const RegionGrid& fine, const RegionGrid& coarse, const ScalarField& f);

// ---------------------------------------------------------------------------
// Audit

struct AuditReport {
  int steps_checked = 0;
  double max_rel_diff = 0.0;
  std::string worst_column;
  bool hash_ok = true;
  bool passed(double tol = 1e-12) const { return hash_ok && steps_checked > 0 && max_rel_diff <= tol; }
};

/// Recomputes energy and entropy ledger rows from consecutive snapshots in
/// run_dir/snapshots and compares them with the stored CSV ledgers.
AuditReport audit_run(const RunConfig& cfg, const std::string& run_dir);

}  // namespace inductherm
