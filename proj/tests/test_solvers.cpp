#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "inductherm/config.hpp"
#include "inductherm/em_solver.hpp"
#include "inductherm/heat_solver.hpp"
#include "inductherm/phase_solver.hpp"

using namespace inductherm;

namespace {

struct Fixture {
  RunConfig cfg;
  RegionGrid g;
  std::size_t n;
  Fixture() {
    nlohmann::json doc = default_config();
    doc["grid"]["nx"] = 16;
    doc["grid"]["ny"] = 16;
    cfg = config_from_json(doc);
    g = build_grid(cfg);
    n = static_cast<std::size_t>(g.size());
  }
  ScalarField fill(double v) const { return ScalarField(n, v); }
  ScalarField energy(const ScalarField& th, const ScalarField& z) const {
    ScalarField e(n, 0.0);
    for (int c : g.workpiece_cells()) {
      const auto k = static_cast<std::size_t>(c);
      e[k] = internal_energy(th[k], z[k], cfg.laws.psi());
    }
    return e;
  }
};

}  // namespace

TEST_CASE("em: zero source keeps zero potential") {
  Fixture fx;
  SourceModel none;
  ScalarField a_new = fx.fill(0.0);
  em_step(fx.g, fx.fill(0.0), fx.fill(300.0), fx.fill(0.0), 0.1, 1e-3, fx.cfg.laws, none, fx.cfg.em, a_new);
  for (double v : a_new) CHECK(v == 0.0);
}

TEST_CASE("em: unforced step does not increase magnetic energy") {
  Fixture fx;
  SourceModel none;
  std::mt19937_64 rng(5);
  std::normal_distribution<double> nd;
  ScalarField a_old = fx.fill(0.0), z = fx.fill(0.3), th = fx.fill(500.0);
  for (auto& v : a_old) v = nd(rng);
  const ScalarField nu = reluctivity(fx.g, z, fx.cfg.laws);
  ScalarField a_new = a_old;
  EmStepOptions opt = fx.cfg.em;
  opt.eps_air = 1e-2;
  const EmStepReport r = em_step(fx.g, a_old, th, z, 0.0, 1e-2, fx.cfg.laws, none, opt, a_new);
  CHECK(magnetic_energy(fx.g, nu, a_new) <= magnetic_energy(fx.g, nu, a_old));
  CHECK(r.residual <= opt.cg_rtol);
}

TEST_CASE("em: joule power") {
  Fixture fx;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ut(300.0, 1500.0);
  ScalarField a0 = fx.fill(0.0), a1 = a0, th = a0;
  for (std::size_t k = 0; k < fx.n; ++k) {
    a0[k] = u(rng);
    a1[k] = u(rng);
    th[k] = ut(rng);
  }
  for (double v : joule_power(fx.g, a0, a0, 1e-3, th, fx.cfg.laws)) CHECK(v == 0.0);
  const ScalarField p1 = joule_power(fx.g, a1, a0, 1e-3, th, fx.cfg.laws);
  const ScalarField p2 = joule_power(fx.g, a1, a0, 2e-3, th, fx.cfg.laws);
  for (std::size_t k = 0; k < fx.n; ++k) {
    const int c = static_cast<int>(k);
    const double rate = (a1[k] - a0[k]) / 1e-3;
    const double want = fx.g.in_workpiece(c) ? fx.cfg.laws.sigma_work(th[k]) * rate * rate : 0.0;
    CHECK(p1[k] == doctest::Approx(want).epsilon(1e-14));
    CHECK(p2[k] == doctest::Approx(0.25 * p1[k]).epsilon(1e-14));
  }
}

TEST_CASE("heat: uniform state without sources is a fixed point") {
  Fixture fx;
  HeatStepConfig hc = fx.cfg.heat;
  hc.eps_pos = 0.0;
  const ScalarField z = fx.fill(0.0), th = fx.fill(700.0);
  const ScalarField e_old = fx.energy(th, z);
  ScalarField th_new = th, e_new;
  heat_step(fx.g, e_old, z, fx.fill(0.0), 1e-2, fx.cfg.laws, hc, th_new, e_new);
  for (int c : fx.g.workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    CHECK(e_new[k] == doctest::Approx(e_old[k]).epsilon(1e-14));
    CHECK(th_new[k] == doctest::Approx(700.0).epsilon(1e-13));
  }
}

TEST_CASE("heat: conservation and Newton tail") {
  Fixture fx;
  HeatStepConfig hc = fx.cfg.heat;
  hc.eps_pos = 0.0;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ut(300.0, 1300.0);
  ScalarField th = fx.fill(0.0), z = fx.fill(0.2);
  for (auto& v : th) v = ut(rng);
  const ScalarField e_old = fx.energy(th, z);
  ScalarField th_new = th, e_new;
  const HeatStepReport r = heat_step(fx.g, e_old, z, fx.fill(0.0), 1e-1, fx.cfg.laws, hc, th_new, e_new);
  const double before = integrate(fx.g, e_old, Region::Workpiece), after = integrate(fx.g, e_new, Region::Workpiece);
  CHECK(std::abs(after - before) <= 1e-10 * std::abs(before));
  // Quadratic tail: once small, each residual is bounded by C r^2.
  const auto& h = r.residual_history;
  for (std::size_t k = 1; k + 1 < h.size(); ++k)
    if (h[k] < 1e-3 * h[0] && h[k + 1] > 1e-13 * h[0]) CHECK(h[k + 1] <= 1e3 * h[k] * h[k] / h[0]);
}

TEST_CASE("heat: entropy row") {
  Fixture fx;
  const ScalarField th = fx.fill(600.0), z = fx.fill(0.1), zero = fx.fill(0.0), one = fx.fill(1.0);
  const EntropyRow frozen = entropy_production_step(fx.g, th, th, z, z, zero, zero, 1e-2, fx.cfg.laws,
                                                    HeatStepConfig{}, one, one);
  CHECK(frozen.lhs() == 0.0);
  CHECK(frozen.rhs() == 0.0);
  CHECK(frozen.slack == 0.0);
  WeightSpec w;
  w.kind = WeightSpec::Kind::Cosine;
  const ScalarField wf = w.field(fx.g, 0.0);
  const EntropyRow cross = entropy_production_step(fx.g, th, th, z, z, zero, zero, 1e-2, fx.cfg.laws,
                                                   HeatStepConfig{}, wf, wf);
  CHECK(cross.cross == 0.0);
}

TEST_CASE("phase: hysteresis, monotonicity, bounds") {
  Fixture fx;
  const RegionGrid& g = fx.g;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ut(700.0, 1100.0), uz(0.0, 1.0);
  ScalarField th = fx.fill(0.0), z_old = fx.fill(0.0);
  for (std::size_t k = 0; k < fx.n; ++k) {
    th[k] = ut(rng);
    z_old[k] = uz(rng);
  }
  ScalarField z_new = z_old;
  phase_step(g, z_old, th, 1e-2, fx.cfg.laws, fx.cfg.phase, z_new);
  const auto& zeq = dynamic_cast<const DefaultSteelLaw&>(fx.cfg.laws.psi()).z_eq();
  for (int c : g.workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    CHECK(z_new[k] >= z_old[k]);
    CHECK(z_new[k] <= std::max(z_old[k], zeq.value(th[k])) + 1e-14);
    if (z_old[k] >= zeq.value(th[k])) CHECK(z_new[k] == z_old[k]);
  }

  PhaseStepOptions po = fx.cfg.phase;
  po.delta = 1e-3;
  const ScalarField tu = fx.fill(950.0), zu = fx.fill(0.2);
  ScalarField zd = zu;
  phase_step(g, zu, tu, 1e-2, fx.cfg.laws, po, zd);
  const double z0 = zd[static_cast<std::size_t>(g.workpiece_cells().front())];
  CHECK(z0 > 0.2);
  for (int c : g.workpiece_cells()) CHECK(zd[static_cast<std::size_t>(c)] == doctest::Approx(z0).epsilon(1e-12));
}

TEST_CASE("phase: dissipation") {
  Fixture fx;
  const ScalarField th = fx.fill(800.0), z0 = fx.fill(0.1);
  for (double v : phase_dissipation(fx.g, z0, z0, th, 1e-2, fx.cfg.laws)) CHECK(v == 0.0);
  const ScalarField z1 = fx.fill(0.15), z2 = fx.fill(0.2);
  const ScalarField d1 = phase_dissipation(fx.g, z1, z0, th, 1e-2, fx.cfg.laws);
  const ScalarField d2 = phase_dissipation(fx.g, z2, z0, th, 1e-2, fx.cfg.laws);
  for (int c : fx.g.workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    const double rate = 0.05 / 1e-2;
    CHECK(d1[k] == doctest::Approx(fx.cfg.laws.tau(800.0) * rate * rate).epsilon(1e-12));
    CHECK(d2[k] == doctest::Approx(4.0 * d1[k]).epsilon(1e-12));
  }
}
