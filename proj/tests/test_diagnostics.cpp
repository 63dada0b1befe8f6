#include <cmath>
#include <random>

#include <doctest.h>

#include "inductherm/config.hpp"
#include "inductherm/diagnostics.hpp"
#include "inductherm/stepper.hpp"

using namespace inductherm;

namespace {

struct Pair {
  RunConfig cfg;
  RegionGrid g;
  EmpiricalConstants k;
  Pair() {
    nlohmann::json doc = default_config();
    apply_overrides(doc, {"grid.nx=16", "grid.ny=16"});
    cfg = config_from_json(doc);
    g = build_grid(cfg);
    k = validate_assumptions(cfg.laws, AssumptionLevel::A1, cfg.diagnostics.sampling).constants;
  }
  SimState uniform(double theta, double z) const {
    SimState s = initial_state(g, cfg);
    for (int c : g.workpiece_cells()) {
      const auto i = static_cast<std::size_t>(c);
      s.theta[i] = theta;
      s.z[i] = z;
      s.e[i] = internal_energy(theta, z, cfg.laws.psi());
    }
    return s;
  }
  void refresh(SimState& s) const {
    for (int c : g.workpiece_cells()) {
      const auto i = static_cast<std::size_t>(c);
      s.e[i] = internal_energy(s.theta[i], s.z[i], cfg.laws.psi());
    }
  }
};

}  // namespace

TEST_CASE("relative energy vanishes on the diagonal") {
  Pair p;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ut(300.0, 1500.0), uz(0.0, 1.0), ua(-1.0, 1.0);
  SimState u = p.uniform(300.0, 0.0);
  for (std::size_t i = 0; i < u.a.size(); ++i) u.a[i] = ua(rng);
  for (int c : p.g.workpiece_cells()) {
    u.theta[static_cast<std::size_t>(c)] = ut(rng);
    u.z[static_cast<std::size_t>(c)] = uz(rng);
  }
  p.refresh(u);
  const RelEnergy e = relative_energy(p.g, p.cfg.laws, u, u);
  CHECK(e.total == 0.0);
  const LowerBound lb = relative_energy_lower_bound(p.g, p.cfg.laws, p.k, u, u);
  CHECK(lb.value == 0.0);
}

TEST_CASE("lower bound with a temperature perturbation only") {
  Pair p;
  const SimState ut = p.uniform(500.0, 0.2);
  SimState u = ut;
  for (int c : p.g.workpiece_cells()) u.theta[static_cast<std::size_t>(c)] = 500.0 * (1.0 + 0.05 * std::sin(c * 0.3));
  p.refresh(u);
  const RelEnergy e = relative_energy(p.g, p.cfg.laws, u, ut);
  const LowerBound lb = relative_energy_lower_bound(p.g, p.cfg.laws, p.k, u, ut);
  // Only the Bregman-log term survives.
  double breg = 0.0;
  for (int c : p.g.workpiece_cells()) {
    const double th = u.theta[static_cast<std::size_t>(c)], tt = 500.0;
    breg += p.g.cell_volume() * (th - tt - tt * std::log(th / tt));
  }
  CHECK(lb.value == doctest::Approx(lb.c_theta * breg).epsilon(1e-10));
  CHECK(e.total >= lb.value);
  CHECK(e.total > 0.0);
}

TEST_CASE("lower bound on randomized admissible pairs") {
  Pair p;
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> lt(std::log(50.0), std::log(1800.0)), uz(0.0, 1.0), ua(-0.2, 0.2);
  int violations = 0;
  for (int trial = 0; trial < 40; ++trial) {
    SimState u = p.uniform(300.0, 0.0), v = u;
    for (int c : p.g.workpiece_cells()) {
      const auto i = static_cast<std::size_t>(c);
      u.theta[i] = std::exp(lt(rng));
      v.theta[i] = std::exp(lt(rng));
      u.z[i] = uz(rng);
      v.z[i] = uz(rng);
    }
    for (std::size_t i = 0; i < u.a.size(); ++i) {
      u.a[i] = ua(rng);
      v.a[i] = ua(rng);
    }
    p.refresh(u);
    p.refresh(v);
    const RelEnergy e = relative_energy(p.g, p.cfg.laws, u, v);
    const LowerBound lb = relative_energy_lower_bound(p.g, p.cfg.laws, p.k, u, v);
    if (!(e.total >= lb.value - 1e-12 * std::abs(e.total))) ++violations;
  }
  CHECK(violations == 0);
}

TEST_CASE("relative energy scales with the square of small perturbations") {
  Pair p;
  const SimState ut = p.uniform(700.0, 0.3);
  auto perturbed = [&](double eta) {
    SimState u = ut;
    for (int c : p.g.workpiece_cells()) {
      const auto i = static_cast<std::size_t>(c);
      u.theta[i] = 700.0 * (1.0 + eta * std::cos(0.7 * c));
      u.z[i] = 0.3 + eta * std::sin(0.4 * c);
    }
    for (std::size_t i = 0; i < u.a.size(); ++i) u.a[i] = eta * std::cos(0.9 * double(i));
    p.refresh(u);
    return relative_energy(p.g, p.cfg.laws, u, ut).total;
  };
  const double e1 = perturbed(1e-3), e2 = perturbed(2e-3);
  CHECK(e2 / e1 == doctest::Approx(4.0).epsilon(1e-2));
}

TEST_CASE("gronwall coefficient") {
  Pair p;
  const SimState s = p.uniform(600.0, 0.4);
  const GronwallTerms k0 = gronwall_coefficient(p.g, p.cfg.laws, 0.0, 2.0, s, s, s, s, 1e-2);
  CHECK(k0.value == 0.0);

  SimState a1 = s, a2 = s;
  for (int c = 0; c < p.g.size(); ++c) {
    a1.a[static_cast<std::size_t>(c)] = std::sin(3.0 * p.g.x(c)) * std::sin(3.0 * p.g.y(c));
    a2.a[static_cast<std::size_t>(c)] = 2.0 * a1.a[static_cast<std::size_t>(c)];
  }
  const GronwallTerms k1 = gronwall_coefficient(p.g, p.cfg.laws, 0.0, 1.0, a1, a1, s, s, 1e-2);
  const GronwallTerms k2 = gronwall_coefficient(p.g, p.cfg.laws, 0.0, 1.0, a2, a2, s, s, 1e-2);
  CHECK(k2.norms[6] == doctest::Approx(4.0 * k1.norms[6]).epsilon(1e-12));
}

TEST_CASE("energy ledger on a frozen state") {
  Pair p;
  const SimState s = p.uniform(400.0, 0.1);
  EnergyLedger led(p.g, p.cfg.laws, s);
  StepTerms terms;
  terms.dt = 1e-2;
  terms.source.assign(static_cast<std::size_t>(p.g.size()), 0.0);
  terms.reg_power = terms.source;
  terms.eps_air = 1e-6;
  SimState s1 = s;
  s1.t = 1e-2;
  const EnergyRow& r = led.update(p.g, p.cfg.laws, s, s1, terms);
  CHECK(r.lhs(led.rows().front()) == 0.0);
  CHECK(r.source_work == 0.0);
  CHECK(r.slack == 0.0);
}

TEST_CASE("comparison tracker follows an unforced run") {
  Pair p;
  ComparisonTracker tr(p.k, 300.0, 300.0);
  const SimState s = p.uniform(300.0, 0.0);
  const ScalarField zero(static_cast<std::size_t>(p.g.size()), 0.0);
  CHECK(tr.update(p.g, s, s, zero, 1e-2, 0.0));
  CHECK(tr.sub() <= 300.0);
  CHECK(tr.super() >= 300.0);
}
