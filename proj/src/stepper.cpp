#include "inductherm/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "inductherm/io.hpp"

namespace inductherm {

namespace {

std::size_t at(int c) { return static_cast<std::size_t>(c); }

// max|a - b| / max(max|a|, floor).
double rel_change(const ScalarField& a, const ScalarField& b, const std::vector<int>* cells, double floor = 0.0) {
  double d = 0.0, m = floor;
  auto visit = [&](std::size_t i) {
    d = std::max(d, std::abs(a[i] - b[i]));
    m = std::max(m, std::abs(a[i]));
  };
  if (cells) {
    for (int c : *cells) visit(at(c));
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) visit(i);
  }
  return m > 0.0 ? d / m : d;
}

std::string step_tag(int step) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d", step);
  return buf;
}

// Explicit heating of the delta-regularized phase equation: the residue
// dz/dt (tau dz/dt + psi_z) that no longer cancels in energy form, plus
// delta^{3/2} tau |Laplace z|^2.
ScalarField phase_regularization_power(const RegionGrid& g, const SimState& old_s, const ScalarField& z_new,
                                       const ScalarField& theta_coef, double dt, const RunConfig& cfg) {
  ScalarField p(static_cast<std::size_t>(g.size()), 0.0);
  const double delta = cfg.phase.delta;
  if (delta <= 0.0) return p;
  const ScalarField lap = laplacian(g, g.workpiece_faces(), z_new);
  const FreeEnergyLaw& psi = cfg.laws.psi();
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    const double th = theta_coef[i];
    const double tau = cfg.laws.tau(th);
    const double rate = (z_new[i] - old_s.z[i]) / dt;
    p[i] = rate * (tau * rate + psi.psi_z(th, z_new[i])) + std::pow(delta, 1.5) * tau * lap[i] * lap[i];
  }
  return p;
}

}  // namespace

SimState initial_state(const RegionGrid& g, const RunConfig& cfg) {
  const auto n = static_cast<std::size_t>(g.size());
  SimState s;
  s.theta.assign(n, 0.0);
  s.z.assign(n, 0.0);
  s.a.assign(n, 0.0);
  s.e.assign(n, 0.0);
  const double th = cfg.theta0 * (1.0 + cfg.theta0_perturbation);
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    s.theta[i] = th;
    s.z[i] = cfg.z0;
    s.e[i] = internal_energy(th, cfg.z0, cfg.laws.psi());
  }
  return s;
}

SimState coupled_step(const RegionGrid& g, const SimState& old_s, double dt, const RunConfig& cfg,
                      StepReport& rep) {
  const auto& cells = g.workpiece_cells();
  const double t_new = old_s.t + dt;
  SimState s = old_s;
  s.t = t_new;
  s.step = old_s.step + 1;
  ScalarField theta_coef = old_s.theta;
  ScalarField z_prev, a_prev;
  rep = StepReport{};
  const double omega = cfg.stepper.relaxation;

  for (int sweep = 1; sweep <= cfg.stepper.max_sweeps; ++sweep) {
    rep.sweeps = sweep;
    rep.phase = phase_step(g, old_s.z, theta_coef, dt, cfg.laws, cfg.phase, s.z);
    rep.em = em_step(g, old_s.a, theta_coef, s.z, t_new, dt, cfg.laws, cfg.source, cfg.em, s.a);
    rep.reg_power = phase_regularization_power(g, old_s, s.z, theta_coef, dt, cfg);
    ScalarField power(rep.em.joule);
    for (int c : cells) power[at(c)] += rep.reg_power[at(c)];
    rep.heat = heat_step(g, old_s.e, s.z, power, dt, cfg.laws, cfg.heat, s.theta, s.e);
    rep.joule = rep.em.joule;
    rep.theta_coef = theta_coef;

    // Fixed-point residual of the map theta_coef -> theta, plus the change of
    // z and A between sweeps. z is a fraction, so its change is absolute.
    double mm = rel_change(s.theta, theta_coef, &cells);
    if (sweep > 1) mm = std::max({mm, rel_change(s.z, z_prev, &cells, 1.0), rel_change(s.a, a_prev, nullptr)});
    rep.mismatch = mm;
    rep.mismatch_history.push_back(mm);
    if (mm < cfg.stepper.sweep_tol) {
      rep.converged = true;
      break;
    }
    z_prev = s.z;
    a_prev = s.a;
    for (int c : cells) theta_coef[at(c)] += omega * (s.theta[at(c)] - theta_coef[at(c)]);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Simulation

Simulation::Simulation(RunConfig cfg, const EmpiricalConstants* constants)
    : cfg_(std::move(cfg)), grid_(build_grid(cfg_)) {
  constants_ = constants ? *constants
                         : validate_assumptions(cfg_.laws, AssumptionLevel::A1, cfg_.diagnostics.sampling).constants;
  reset(initial_state(grid_, cfg_));
}

void Simulation::reset(const SimState& s) {
  state_ = s;
  energy_ = EnergyLedger(grid_, cfg_.laws, s);
  ent_uniform_ = EntropyLedger(WeightSpec{WeightSpec::Kind::Uniform, 0.0, 0.0});
  ent_weighted_ = EntropyLedger(cfg_.diagnostics.weight);
  double tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  for (int c : grid_.workpiece_cells()) {
    tmin = std::min(tmin, s.theta[at(c)]);
    tmax = std::max(tmax, s.theta[at(c)]);
  }
  comparison_ = ComparisonTracker(constants_, tmin, tmax);
  norms_.start(grid_, s);
  checks_.clear();
  min_theta_ = tmin;
  sweep_failures_ = 0;
  mismatch_monotone_ = true;
  macro_step_ = 0;
  last_joule_.assign(s.theta.size(), 0.0);
  last_reg_.assign(s.theta.size(), 0.0);
}

bool Simulation::done() const { return macro_step_ >= cfg_.stepper.steps(); }

std::vector<StepReport> Simulation::advance() {
  std::vector<StepReport> out;
  substep(cfg_.stepper.dt, 0, out);
  ++macro_step_;
  return out;
}

void Simulation::substep(double dt, int depth, std::vector<StepReport>& out) {
  StepReport rep;
  SimState next = coupled_step(grid_, state_, dt, cfg_, rep);
  if (!rep.converged) {
    ++sweep_failures_;
    std::ostringstream msg;
    msg << "fixed-point sweeps did not converge at t=" << next.t << " (mismatch " << rep.mismatch << ")";
    switch (cfg_.stepper.on_sweep_failure) {
      case SweepPolicy::Abort: throw StepFailure(msg.str());
      case SweepPolicy::Halve:
        if (depth >= cfg_.stepper.max_halvings) throw StepFailure(msg.str() + " after halving");
        substep(0.5 * dt, depth + 1, out);
        substep(0.5 * dt, depth + 1, out);
        return;
      case SweepPolicy::Accept: break;
    }
  }
  record(state_, next, rep);
  state_ = std::move(next);
  out.push_back(std::move(rep));
}

void Simulation::record(const SimState& old_s, const SimState& new_s, const StepReport& rep) {
  const RegionGrid& g = grid_;
  const double dt = new_s.t - old_s.t;
  StepTerms terms;
  terms.dt = dt;
  terms.source = cfg_.source.density(g, new_s.t);
  terms.reg_power = rep.reg_power;
  terms.eps_air = cfg_.em.eps_air;
  terms.eps_pos = cfg_.heat.eps_pos;
  const EnergyRow& er = energy_.update(g, cfg_.laws, old_s, new_s, terms);
  const EntropyRow& eu =
      ent_uniform_.update(g, cfg_.laws, cfg_.heat, old_s, new_s, rep.joule, rep.reg_power).step;
  const EntropyRow& ew =
      ent_weighted_.update(g, cfg_.laws, cfg_.heat, old_s, new_s, rep.joule, rep.reg_power).step;
  ScalarField power(rep.joule);
  for (int c : g.workpiece_cells()) power[at(c)] += rep.reg_power[at(c)];

  StepCheck chk;
  chk.comparison_ok = comparison_.update(g, old_s, new_s, power, dt, cfg_.heat.eps_pos);
  norms_.update(g, old_s, new_s, dt);
  auto margin = [](double slack, double scale) {
    if (scale > 0.0) return slack / scale;
    return slack >= 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  };
  chk.energy_margin = margin(er.slack, er.scale);
  chk.entropy_uniform_margin = margin(eu.slack, eu.scale);
  chk.entropy_weighted_margin = margin(ew.slack, ew.scale);
  chk.sub = comparison_.sub();
  chk.super = comparison_.super();
  chk.theta_min = std::numeric_limits<double>::infinity();
  chk.z_min = std::numeric_limits<double>::infinity();
  chk.theta_max = -chk.theta_min;
  chk.z_max = -chk.z_min;
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    chk.theta_min = std::min(chk.theta_min, new_s.theta[i]);
    chk.theta_max = std::max(chk.theta_max, new_s.theta[i]);
    chk.z_min = std::min(chk.z_min, new_s.z[i]);
    chk.z_max = std::max(chk.z_max, new_s.z[i]);
  }
  chk.joule_total = integrate(g, rep.joule, Region::Workpiece);
  chk.positivity_ok = chk.theta_min > cfg_.heat.theta_floor;
  min_theta_ = std::min(min_theta_, chk.theta_min);

  // Contraction of the sweeps, ignoring values at round-off level.
  const auto& h = rep.mismatch_history;
  for (std::size_t k = 2; k < h.size(); ++k)
    if (h[k] > 1e-13 && h[k] > h[k - 1]) mismatch_monotone_ = false;

  checks_.push_back(chk);
  last_joule_ = rep.joule;
  last_reg_ = rep.reg_power;
}

bool Simulation::energy_ok() const { return worst_energy_margin() >= -cfg_.diagnostics.tolerance; }
bool Simulation::entropy_ok() const { return worst_entropy_margin() >= -cfg_.diagnostics.tolerance; }

bool Simulation::positivity_ok() const {
  return std::all_of(checks_.begin(), checks_.end(), [](const StepCheck& c) { return c.positivity_ok; });
}

double Simulation::worst_energy_margin() const {
  if (checks_.empty()) return 0.0;
  double w = std::numeric_limits<double>::infinity();
  for (const auto& c : checks_) w = std::min(w, c.energy_margin);
  return w;
}

double Simulation::worst_entropy_margin() const {
  if (checks_.empty()) return 0.0;
  double w = std::numeric_limits<double>::infinity();
  for (const auto& c : checks_) w = std::min({w, c.entropy_uniform_margin, c.entropy_weighted_margin});
  return w;
}

void Simulation::write_snapshot(const std::string& dir) const {
  ensure_dir(dir);
  const std::string prefix = dir + "/" + step_tag(macro_step_);
  const std::string& h = cfg_.hash;
  write_field(prefix + "_theta.field", h, grid_, state_.theta, "theta", state_.t);
  write_field(prefix + "_z.field", h, grid_, state_.z, "z", state_.t);
  write_field(prefix + "_a.field", h, grid_, state_.a, "a", state_.t);
  write_field(prefix + "_e.field", h, grid_, state_.e, "e", state_.t);
  write_field(prefix + "_joule.field", h, grid_, last_joule_, "joule", state_.t);
  write_field(prefix + "_reg.field", h, grid_, last_reg_, "reg", state_.t);

  const EnergyRow& f = energy_.rows().front();
  const EnergyRow& r = energy_.rows().back();
  const AprioriNorms n = norms_.norms();
  KeyValues kv = {
      {"t", fmt(state_.t)},
      {"substep", std::to_string(state_.step)},
      {"macro_step", std::to_string(macro_step_)},
      {"energy.first.t", fmt(f.t)},
      {"energy.first.internal_energy", fmt(f.internal_energy)},
      {"energy.first.magnetic_energy", fmt(f.magnetic_energy)},
      {"energy.internal_energy", fmt(r.internal_energy)},
      {"energy.magnetic_energy", fmt(r.magnetic_energy)},
      {"energy.mu_term", fmt(r.mu_term)},
      {"energy.dissipation_out", fmt(r.dissipation_out)},
      {"energy.source_work", fmt(r.source_work)},
      {"energy.regularization", fmt(r.regularization)},
      {"energy.slack", fmt(r.slack)},
      {"energy.step_slack", fmt(r.step_slack)},
      {"energy.scale", fmt(r.scale)},
      {"comparison.sub", fmt(comparison_.sub())},
      {"comparison.super", fmt(comparison_.super())},
      {"comparison.worst", fmt(comparison_.worst_margin())},
      {"comparison.ok", comparison_.ok() ? "1" : "0"},
      {"norms.theta_linf_l1", fmt(n.theta_linf_l1)},
      {"norms.grad_log_sq", fmt(norms_.grad_log_sq())},
      {"norms.z_w1inf_linf", fmt(n.z_w1inf_linf)},
      {"norms.a_linf_hcurl", fmt(n.a_linf_hcurl)},
      {"norms.dz_dt_max", fmt(n.dz_dt_max)},
      {"min_theta", fmt(min_theta_)},
  };
  write_kv(prefix + "_state.kv", h, kv);
}

void Simulation::restore_snapshot(const std::string& prefix) {
  auto load = [&](const char* name) {
    FieldFile ff = read_field(prefix + "_" + name + ".field");
    if (ff.nx != grid_.nx() || ff.ny != grid_.ny())
      throw ConfigError({"restart: snapshot grid " + std::to_string(ff.nx) + "x" + std::to_string(ff.ny) +
                         " does not match the configured grid"});
    if (ff.hash != cfg_.hash) throw ConfigError({"restart: snapshot was written with a different config"});
    return ff;
  };
  const FieldFile th = load("theta");
  SimState s;
  s.t = th.t;
  s.theta = th.values;
  s.z = load("z").values;
  s.a = load("a").values;
  s.e = load("e").values;
  const auto kv = read_kv(prefix + "_state.kv");
  auto num = [&](const std::string& k) {
    const auto it = kv.find(k);
    if (it == kv.end()) throw IoError("restart: missing key " + k);
    return std::stod(it->second);
  };
  s.step = static_cast<int>(num("substep"));
  reset(s);
  macro_step_ = static_cast<int>(num("macro_step"));
  last_joule_ = load("joule").values;
  last_reg_ = load("reg").values;

  EnergyRow first, cur;
  first.t = num("energy.first.t");
  first.internal_energy = num("energy.first.internal_energy");
  first.magnetic_energy = num("energy.first.magnetic_energy");
  cur.t = s.t;
  cur.internal_energy = num("energy.internal_energy");
  cur.magnetic_energy = num("energy.magnetic_energy");
  cur.mu_term = num("energy.mu_term");
  cur.dissipation_out = num("energy.dissipation_out");
  cur.source_work = num("energy.source_work");
  cur.regularization = num("energy.regularization");
  cur.slack = num("energy.slack");
  cur.step_slack = num("energy.step_slack");
  cur.scale = num("energy.scale");
  energy_.restore({first, cur});
  comparison_.restore(num("comparison.sub"), num("comparison.super"), num("comparison.worst"),
                      num("comparison.ok") != 0.0);
  AprioriNorms n;
  n.theta_linf_l1 = num("norms.theta_linf_l1");
  n.z_w1inf_linf = num("norms.z_w1inf_linf");
  n.a_linf_hcurl = num("norms.a_linf_hcurl");
  n.dz_dt_max = num("norms.dz_dt_max");
  const double gl = num("norms.grad_log_sq");
  n.grad_log_l2l2 = std::sqrt(gl);
  norms_.restore(n, gl);
  min_theta_ = num("min_theta");
}

// ---------------------------------------------------------------------------
// Run

std::vector<std::string> ledger_columns() {
  return {"step",          "t",
          "dt",            "sweeps",
          "converged",     "mismatch",
          "em_iterations", "em_residual",
          "heat_newton",   "heat_residual",
          "heat_cuts",     "phase_newton",
          "internal_energy", "magnetic_energy",
          "mu_term",       "dissipation_out",
          "source_work",   "regularization",
          "slack",         "step_slack",
          "scale",         "joule_total",
          "theta_min",     "theta_max",
          "z_min",         "z_max",
          "sub",           "super"};
}

std::vector<std::string> entropy_columns() {
  return {"step",       "t",         "entropy_change", "weight_rate", "conduction", "joule",
          "phase",      "positivity", "regularization", "cross",      "tau_rate",   "slack",
          "scale",      "total_entropy"};
}

namespace {

std::vector<double> entropy_values(int step, const EntropyLedgerRow& r) {
  const EntropyRow& e = r.step;
  return {double(step), r.t,          e.entropy_change, e.weight_rate, e.conduction,
          e.joule,      e.phase,      e.positivity,     e.regularization, e.cross,
          e.tau_rate,   e.slack,      e.scale,          r.total_entropy};
}

}  // namespace

RunSummary run(const RunConfig& cfg, const std::string& out_dir, const std::string& restart_prefix) {
  Simulation sim(cfg);
  if (!restart_prefix.empty()) sim.restore_snapshot(restart_prefix);
  const bool write = !out_dir.empty();
  const std::string snap_dir = out_dir + "/snapshots";
  CsvWriter ledger, ent_u, ent_w;
  if (write) {
    ensure_dir(out_dir);
    ledger = CsvWriter(out_dir + "/ledger.csv", cfg.hash, ledger_columns());
    ent_u = CsvWriter(out_dir + "/entropy_uniform.csv", cfg.hash, entropy_columns());
    ent_w = CsvWriter(out_dir + "/entropy_weighted.csv", cfg.hash, entropy_columns());
    const EnergyRow& r = sim.energy().rows().back();
    const SimState& s = sim.state();
    double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin, zmin = tmin, zmax = -tmin;
    for (int c : sim.grid().workpiece_cells()) {
      tmin = std::min(tmin, s.theta[at(c)]);
      tmax = std::max(tmax, s.theta[at(c)]);
      zmin = std::min(zmin, s.z[at(c)]);
      zmax = std::max(zmax, s.z[at(c)]);
    }
    ledger.row({double(s.step), s.t, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, r.internal_energy, r.magnetic_energy,
                r.mu_term, r.dissipation_out, r.source_work, r.regularization, r.slack, r.step_slack, r.scale,
                0, tmin, tmax, zmin, zmax, sim.comparison().sub(), sim.comparison().super()});
    if (cfg.write_snapshots && cfg.stepper.snapshot_every > 0 &&
        sim.macro_step() % cfg.stepper.snapshot_every == 0)
      sim.write_snapshot(snap_dir);
  }

  while (!sim.done()) {
    const std::vector<StepReport> reps = sim.advance();
    if (!write) continue;
    const auto& erows = sim.energy().rows();
    const auto& urows = sim.entropy_uniform().rows();
    const auto& wrows = sim.entropy_weighted().rows();
    const auto& checks = sim.checks();
    const std::size_t k0 = reps.size();
    for (std::size_t k = 0; k < reps.size(); ++k) {
      const StepReport& rp = reps[k];
      const EnergyRow& r = erows[erows.size() - k0 + k];
      const StepCheck& c = checks[checks.size() - k0 + k];
      const int step = sim.state().step - int(k0 - 1 - k);
      const double dt = r.t - erows[erows.size() - k0 + k - 1].t;
      ledger.row({double(step), r.t, dt, double(rp.sweeps), rp.converged ? 1.0 : 0.0, rp.mismatch,
                  double(rp.em.iterations), rp.em.residual, double(rp.heat.newton_iterations), rp.heat.residual,
                  double(rp.heat.line_search_cuts), double(rp.phase.newton_iterations), r.internal_energy,
                  r.magnetic_energy, r.mu_term, r.dissipation_out, r.source_work, r.regularization, r.slack,
                  r.step_slack, r.scale, c.joule_total, c.theta_min, c.theta_max, c.z_min, c.z_max, c.sub,
                  c.super});
      ent_u.row(entropy_values(step, urows[urows.size() - k0 + k]));
      ent_w.row(entropy_values(step, wrows[wrows.size() - k0 + k]));
    }
    const bool cadence = cfg.stepper.snapshot_every > 0 && sim.macro_step() % cfg.stepper.snapshot_every == 0;
    if (cfg.write_snapshots && (cadence || sim.done())) sim.write_snapshot(snap_dir);
  }

  RunSummary sum;
  sum.steps = sim.macro_step();
  sum.t = sim.state().t;
  sum.energy_ok = sim.energy_ok();
  sum.entropy_ok = sim.entropy_ok();
  sum.comparison_ok = sim.comparison().ok();
  sum.positivity_ok = sim.positivity_ok();
  sum.worst_energy_margin = sim.worst_energy_margin();
  sum.worst_entropy_margin = sim.worst_entropy_margin();
  sum.min_theta = sim.min_theta();
  sum.max_theta = 0.0;
  for (const auto& c : sim.checks()) sum.max_theta = std::max(sum.max_theta, c.theta_max);
  sum.sweep_failures = sim.sweep_failures();
  sum.norms = sim.norms().norms();

  if (write) {
    const EmpiricalConstants& k = sim.constants();
    auto b = [](bool v) { return std::string(v ? "pass" : "fail"); };
    KeyValues kv = {
        {"steps", std::to_string(sum.steps)},
        {"t_final", fmt(sum.t)},
        {"energy_inequality", b(sum.energy_ok)},
        {"entropy_inequality", b(sum.entropy_ok)},
        {"comparison_principle", b(sum.comparison_ok)},
        {"positivity", b(sum.positivity_ok)},
        {"worst_energy_margin", fmt(sum.worst_energy_margin)},
        {"worst_entropy_margin", fmt(sum.worst_entropy_margin)},
        {"worst_comparison_margin", fmt(sim.comparison().worst_margin())},
        {"min_theta", fmt(sum.min_theta)},
        {"max_theta", fmt(sum.max_theta)},
        {"sweep_failures", std::to_string(sum.sweep_failures)},
        {"sweep_mismatch_monotone", sim.mismatch_monotone() ? "1" : "0"},
        {"norm.theta_linf_l1", fmt(sum.norms.theta_linf_l1)},
        {"norm.grad_log_theta_l2l2", fmt(sum.norms.grad_log_l2l2)},
        {"norm.z_w1inf_linf", fmt(sum.norms.z_w1inf_linf)},
        {"norm.a_linf_hcurl", fmt(sum.norms.a_linf_hcurl)},
        {"norm.dz_dt_max", fmt(sum.norms.dz_dt_max)},
        {"norm.dz_dt_bound", fmt(k.psi_z_C / k.tau_min)},
        {"constant.heat_c", fmt(k.heat_c)},
        {"constant.heat_C", fmt(k.heat_C)},
        {"constant.e_z_C", fmt(k.e_z_C)},
        {"weight", cfg.diagnostics.weight.name()},
        {"tolerance", fmt(cfg.diagnostics.tolerance)},
    };
    write_kv(out_dir + "/report.kv", cfg.hash, kv);
  }
  return sum;
}

// ---------------------------------------------------------------------------
// Weak-strong comparison

ScalarField restrict_field(const RegionGrid& fine, const RegionGrid& coarse, const ScalarField& f) {
  const int r = fine.nx() / coarse.nx();
  if (r * coarse.nx() != fine.nx() || r * coarse.ny() != fine.ny())
    throw ConfigError({"restrict_field: grids are not integer refinements"});
  if (r == 1) return f;
  ScalarField out(static_cast<std::size_t>(coarse.size()), 0.0);
  const double w = 1.0 / (r * r);
  for (int j = 0; j < coarse.ny(); ++j)
    for (int i = 0; i < coarse.nx(); ++i) {
      double s = 0.0;
      for (int q = 0; q < r; ++q)
        for (int p = 0; p < r; ++p) s += f[at(fine.index(i * r + p, j * r + q))];
      out[at(coarse.index(i, j))] = w * s;
    }
  return out;
}

namespace {

SimState restrict_state(const RegionGrid& fine, const RegionGrid& coarse, const SimState& s,
                        const MaterialLaws& laws) {
  SimState c;
  c.t = s.t;
  c.step = s.step;
  c.theta = restrict_field(fine, coarse, s.theta);
  c.z = restrict_field(fine, coarse, s.z);
  c.a = restrict_field(fine, coarse, s.a);
  c.e.assign(c.theta.size(), 0.0);
  for (int k : coarse.workpiece_cells()) c.e[at(k)] = internal_energy(c.theta[at(k)], c.z[at(k)], laws.psi());
  return c;
}

void check_compatible(const RunConfig& weak, const RunConfig& strong, const CompareOptions& opt) {
  std::vector<std::string> errs;
  if (opt.refine < 1 || opt.substeps < 1) errs.push_back("compare: refine and substeps must be >= 1");
  const auto& a = weak.normalized;
  const auto& b = strong.normalized;
  for (const char* sec : {"materials", "source", "em"})
    if (a.at(sec) != b.at(sec)) errs.push_back(std::string("compare: runs differ in the ") + sec + " section");
  nlohmann::json ga = a.at("grid"), gb = b.at("grid");
  if (ga != gb) errs.push_back("compare: incompatible grids");
  if (weak.stepper.dt != strong.stepper.dt || weak.stepper.t_final != strong.stepper.t_final)
    errs.push_back("compare: runs differ in dt or t_final");
  if (!errs.empty()) throw ConfigError(errs);
}

}  // namespace

CompareReport weak_strong_compare(const RunConfig& weak, const RunConfig& strong_in,
                                  const CompareOptions& opt, const std::string& out_dir) {
  check_compatible(weak, strong_in, opt);
  RunConfig strong = strong_in;
  strong.grid.nx *= opt.refine;
  strong.grid.ny *= opt.refine;
  strong.stepper.dt /= opt.substeps;

  Simulation w(weak);
  Simulation s(strong, &w.constants());
  const RegionGrid& g = w.grid();
  if (opt.refine > 1) {
    const RegionGrid& fg = s.grid();
    for (int j = 0; j < fg.ny(); ++j)
      for (int i = 0; i < fg.nx(); ++i)
        if (fg.region(fg.index(i, j)) != g.region(g.index(i / opt.refine, j / opt.refine)))
          throw ConfigError({"compare: refined regions do not nest in the coarse grid"});
  }
  const MaterialLaws& laws = weak.laws;
  const EmpiricalConstants& k = w.constants();
  const double mult = k.gronwall_multiplier();

  CsvWriter csv;
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::vector<std::string> cols = {"step", "t"};
    for (const char* n : kRelEnergyGroupNames) cols.push_back(n);
    for (const char* n : {"total", "lower_bound", "dissipation", "K", "K_dlogtheta_dt", "K_dz_dt", "K_curl_dA_dt",
                          "K_grad_log_theta_sq", "K_div_kappa_grad_log_theta", "K_dlogmu_dt", "K_curl_A_sq",
                          "integral_K", "lhs", "rhs", "scale"})
      cols.push_back(n);
    csv = CsvWriter(out_dir + "/relenergy.csv", weak.hash, cols);
  }

  CompareReport rep;
  SimState ut = restrict_state(s.grid(), g, s.state(), laws);
  const SimState& u0 = w.state();
  rep.identical_initial = u0.theta == ut.theta && u0.z == ut.z && u0.a == ut.a;

  double integral_k = 0.0, acc_w = 0.0, e0 = 0.0;
  int step = 0;
  auto emit = [&](const SimState& u_old, const SimState& u, const SimState& ut_old, const SimState& ut_new,
                  double dt) {
    CompareRow row;
    row.t = u.t;
    row.e = relative_energy(g, laws, u, ut_new);
    row.lower_bound = relative_energy_lower_bound(g, laws, k, u, ut_new).value;
    row.scale = std::abs(row.e.groups[2]) + std::abs(row.e.groups[3]);
    rep.field_scale = std::max(rep.field_scale, row.scale);
    if (dt > 0.0) {
      row.dissipation = relative_dissipation(g, laws, weak.em.eps_air, weak.heat.eps_cond, u_old, u, ut_old,
                                             ut_new, dt);
      row.k = gronwall_coefficient(g, laws, weak.heat.eps_cond, mult, ut_old, ut_new, u_old, u, dt);
      integral_k += dt * row.k.value;
      acc_w += dt * row.dissipation * std::exp(-integral_k);
    } else {
      e0 = row.e.total;
    }
    row.integral_k = integral_k;
    // Discounted by exp(-int K) so large Gronwall exponents cannot overflow.
    const double decay = std::exp(-integral_k);
    row.lhs = row.e.total * decay + acc_w;
    row.rhs = e0;
    const double tol = opt.tolerance * row.scale;
    if (!(row.lhs <= row.rhs + tol * decay) && !(row.e.total <= tol)) {
      rep.gronwall_ok = false;
      if (rep.first_violation_step < 0) rep.first_violation_step = step;
    }
    if (!(row.e.total >= row.lower_bound - 1e-12 * row.scale)) {
      rep.lower_bound_ok = false;
      if (rep.first_violation_step < 0) rep.first_violation_step = step;
    }
    rep.max_e = std::max(rep.max_e, row.e.total);
    if (csv.is_open()) {
      std::vector<double> v = {double(step), row.t};
      for (double x : row.e.groups) v.push_back(x);
      v.insert(v.end(), {row.e.total, row.lower_bound, row.dissipation, row.k.value});
      for (double x : row.k.norms) v.push_back(x);
      v.insert(v.end(), {row.integral_k, row.lhs, row.rhs, row.scale});
      csv.row(v);
    }
    rep.rows.push_back(row);
  };

  emit(u0, u0, ut, ut, 0.0);
  while (!w.done()) {
    const SimState u_old = w.state();
    const SimState ut_old = ut;
    w.advance();
    for (int q = 0; q < opt.substeps; ++q) s.advance();
    ut = restrict_state(s.grid(), g, s.state(), laws);
    ++step;
    emit(u_old, w.state(), ut_old, ut, w.state().t - u_old.t);
  }
  if (rep.identical_initial) rep.identical_ok = rep.max_e <= 1e-10 * rep.field_scale;

  if (!out_dir.empty()) {
    auto b = [](bool v) { return std::string(v ? "pass" : "fail"); };
    write_kv(out_dir + "/compare.kv", weak.hash,
             {{"strong_config_hash", strong_in.hash},
              {"refine", std::to_string(opt.refine)},
              {"substeps", std::to_string(opt.substeps)},
              {"steps", std::to_string(step)},
              {"identical_initial_data", rep.identical_initial ? "1" : "0"},
              {"max_relative_energy", fmt(rep.max_e)},
              {"field_scale", fmt(rep.field_scale)},
              {"gronwall_inequality", b(rep.gronwall_ok)},
              {"lower_bound", b(rep.lower_bound_ok)},
              {"uniqueness", b(rep.identical_ok)},
              {"first_violation_step", std::to_string(rep.first_violation_step)},
              {"gronwall_multiplier", fmt(mult)}});
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Audit

AuditReport audit_run(const RunConfig& cfg, const std::string& run_dir) {
  namespace fs = std::filesystem;
  AuditReport rep;
  const RegionGrid g = build_grid(cfg);
  const CsvTable led = read_csv(run_dir + "/ledger.csv");
  const CsvTable ent[2] = {read_csv(run_dir + "/entropy_uniform.csv"), read_csv(run_dir + "/entropy_weighted.csv")};
  const WeightSpec weights[2] = {WeightSpec{WeightSpec::Kind::Uniform, 0.0, 0.0}, cfg.diagnostics.weight};
  if (led.hash != cfg.hash) rep.hash_ok = false;

  std::vector<int> steps;
  const std::string snap = run_dir + "/snapshots";
  if (fs::exists(snap))
    for (const auto& de : fs::directory_iterator(snap)) {
      const std::string name = de.path().filename().string();
      const std::string suffix = "_theta.field";
      if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
        steps.push_back(std::stoi(name.substr(0, name.size() - suffix.size())));
    }
  std::sort(steps.begin(), steps.end());

  auto load = [&](int step, SimState& s, ScalarField& joule, ScalarField& reg) {
    const std::string p = snap + "/" + step_tag(step);
    FieldFile th = read_field(p + "_theta.field");
    if (th.hash != cfg.hash) rep.hash_ok = false;
    if (th.nx != g.nx() || th.ny != g.ny()) throw ConfigError({"audit: snapshot grid does not match the config"});
    s.t = th.t;
    s.theta = th.values;
    s.z = read_field(p + "_z.field").values;
    s.a = read_field(p + "_a.field").values;
    s.e = read_field(p + "_e.field").values;
    joule = read_field(p + "_joule.field").values;
    reg = read_field(p + "_reg.field").values;
  };
  auto find_row = [](const CsvTable& t, double time) -> const std::vector<double>* {
    const std::size_t tc = t.column("t");
    for (const auto& r : t.rows)
      if (r[tc] == time) return &r;
    return nullptr;
  };
  auto compare = [&](const std::string& col, double recomputed, double stored, double scale) {
    const double d = std::abs(recomputed - stored) / std::max({std::abs(stored), scale, 1e-300});
    if (d > rep.max_rel_diff) {
      rep.max_rel_diff = d;
      rep.worst_column = col;
    }
  };

  for (std::size_t q = 1; q < steps.size(); ++q) {
    if (steps[q] != steps[q - 1] + 1) continue;
    SimState o, n;
    ScalarField j0, r0, joule, reg;
    load(steps[q - 1], o, j0, r0);
    load(steps[q], n, joule, reg);
    const auto* prev = find_row(led, o.t);
    const auto* cur = find_row(led, n.t);
    // Only single-substep macro steps can be rebuilt from two snapshots.
    if (!prev || !cur || (*cur)[led.column("step")] != (*prev)[led.column("step")] + 1) continue;

    auto row_of = [&](const std::vector<double>& r) {
      EnergyRow e;
      e.t = r[led.column("t")];
      e.internal_energy = r[led.column("internal_energy")];
      e.magnetic_energy = r[led.column("magnetic_energy")];
      e.mu_term = r[led.column("mu_term")];
      e.dissipation_out = r[led.column("dissipation_out")];
      e.source_work = r[led.column("source_work")];
      e.regularization = r[led.column("regularization")];
      return e;
    };
    EnergyLedger el;
    el.restore({row_of(led.rows.front()), row_of(*prev)});
    StepTerms terms;
    terms.dt = n.t - o.t;
    terms.source = cfg.source.density(g, n.t);
    terms.reg_power = reg;
    terms.eps_air = cfg.em.eps_air;
    terms.eps_pos = cfg.heat.eps_pos;
    const EnergyRow er = el.update(g, cfg.laws, o, n, terms);
    const double sc = er.scale;
    compare("internal_energy", er.internal_energy, (*cur)[led.column("internal_energy")], sc);
    compare("magnetic_energy", er.magnetic_energy, (*cur)[led.column("magnetic_energy")], sc);
    compare("mu_term", er.mu_term, (*cur)[led.column("mu_term")], sc);
    compare("dissipation_out", er.dissipation_out, (*cur)[led.column("dissipation_out")], sc);
    compare("source_work", er.source_work, (*cur)[led.column("source_work")], sc);
    compare("regularization", er.regularization, (*cur)[led.column("regularization")], sc);
    compare("slack", er.slack, (*cur)[led.column("slack")], sc);

    for (int w = 0; w < 2; ++w) {
      const auto* er2 = find_row(ent[w], n.t);
      if (!er2) continue;
      const EntropyRow row =
          entropy_production_step(g, n.theta, o.theta, n.z, o.z, joule, reg, n.t - o.t, cfg.laws, cfg.heat,
                                  weights[w].field(g, o.t), weights[w].field(g, n.t));
      const CsvTable& t = ent[w];
      const double s2 = row.scale;
      compare("entropy_change", row.entropy_change, (*er2)[t.column("entropy_change")], s2);
      compare("conduction", row.conduction, (*er2)[t.column("conduction")], s2);
      compare("joule", row.joule, (*er2)[t.column("joule")], s2);
      compare("phase", row.phase, (*er2)[t.column("phase")], s2);
      compare("positivity", row.positivity, (*er2)[t.column("positivity")], s2);
      compare("cross", row.cross, (*er2)[t.column("cross")], s2);
      compare("entropy_slack", row.slack, (*er2)[t.column("slack")], s2);
    }
    ++rep.steps_checked;
  }
  return rep;
}

}  // namespace inductherm
