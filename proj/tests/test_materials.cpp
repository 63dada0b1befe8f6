#include <cmath>
#include <random>

#include <doctest.h>

#include "inductherm/config.hpp"
#include "inductherm/materials.hpp"
#include "inductherm/validation.hpp"

using namespace inductherm;

namespace {

// z_eq'(2) = 1 / (2 * 50) = 0.01 at the midpoint.
DefaultSteelLaw law_at_two() { return DefaultSteelLaw(EquilibriumPhase{2.0, 50.0, 1.0}, 1.0, 1.0); }

DefaultSteelLaw battery_law() { return DefaultSteelLaw(EquilibriumPhase{900.0, 50.0, 1.0}, 1.0, 1.0); }

}  // namespace

TEST_CASE("internal energy closed-form values") {
  const DefaultSteelLaw law = battery_law();
  CHECK(internal_energy(1.0, 1.0, law) == doctest::Approx(1.0).epsilon(1e-14));
  // Frozen branch far below the transition: e = theta.
  for (double th : {5.0, 120.0, 333.0}) CHECK(internal_energy(th, 1.0, law) == doctest::Approx(th).epsilon(1e-13));

  const DefaultSteelLaw l2 = law_at_two();
  const double z = l2.z_eq().value(2.0) - 0.1;
  CHECK(l2.z_eq().d1(2.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(internal_energy(2.0, z, l2) == doctest::Approx(2.006).epsilon(1e-13));
  CHECK_THROWS_AS(internal_energy(-1.0, 0.5, law), DomainError);
}

TEST_CASE("entropy closed-form values") {
  const DefaultSteelLaw law = battery_law();
  CHECK(std::abs(entropy_density(1.0, 1.0, law)) < 1e-14);
  CHECK(entropy_density(std::exp(1.0), 1.0, law) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(entropy_density(0.0, 0.5, law), DomainError);
  double prev = -1e300;
  for (double th = 10.0; th < 1990.0; th += 7.3) {
    const double s = entropy_density(th, 0.3, law);
    CHECK(s > prev);
    prev = s;
  }
}

TEST_CASE("inverse maps") {
  const DefaultSteelLaw law = battery_law();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ut(1.0, 2000.0), uz(0.0, 1.0);
  double worst_e = 0.0, worst_s = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double th = ut(rng), z = uz(rng);
    worst_e = std::max(worst_e, std::abs(invert_energy(internal_energy(th, z, law), z, law) - th));
    worst_s = std::max(worst_s, std::abs(invert_entropy(entropy_density(th, z, law), z, law) - std::log(th)));
  }
  CHECK(worst_e <= 1e-10);
  CHECK(worst_s <= 1e-10);
  CHECK(invert_energy(1.0, 1.0, law) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(invert_entropy(0.0, 1.0, law)) < 1e-12);
  CHECK_THROWS_AS(invert_energy(-1.0, 1.0, law), DomainError);
  CHECK_THROWS_AS(invert_entropy(50.0, 1.0, law), DomainError);
}

TEST_CASE("derivatives match central differences") {
  const DefaultSteelLaw law = battery_law();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(5.0, 1995.0), uz(0.0, 1.0);
  const double h = 1e-5;
  int bad = 0;
  // Relative error with a round-off floor: differencing a parent of size |p|
  // at step h cannot resolve better than about eps |p| / h.
  double worst = 0.0;
  auto rel = [&](double a, double b, double parent, double step) {
    const double floor = 1e-15 * std::abs(parent) / step;
    const double r = std::max(0.0, std::abs(a - b) - floor) / std::max({std::abs(a), std::abs(b), 1e-3});
    worst = std::max(worst, r);
    return r;
  };
  for (int k = 0; k < 1000; ++k) {
    const double th = ut(rng), z = uz(rng);
    if (std::abs(law.z_eq().value(th) - z) < 1e-3) continue;  // the kink is only C^1
    const double ht = h * th;
    const double p = law.psi(th, z), pt = law.psi_theta(th, z), pz = law.psi_z(th, z);
    if (rel(pt, (law.psi(th + ht, z) - law.psi(th - ht, z)) / (2 * ht), p, ht) > 1e-6) ++bad;
    if (rel(pz, (law.psi(th, z + h) - law.psi(th, z - h)) / (2 * h), p, h) > 1e-6) ++bad;
    if (rel(law.psi_thetatheta(th, z), (law.psi_theta(th + ht, z) - law.psi_theta(th - ht, z)) / (2 * ht), pt,
            ht) > 1e-6)
      ++bad;
    if (rel(law.psi_ztheta(th, z), (law.psi_z(th + ht, z) - law.psi_z(th - ht, z)) / (2 * ht), pz, ht) > 1e-6)
      ++bad;
    if (rel(law.psi_zz(th, z), (law.psi_z(th, z + h) - law.psi_z(th, z - h)) / (2 * h), pz, h) > 1e-6) ++bad;
  }
  CHECK(bad == 0);
  MESSAGE("worst relative derivative error ", worst);
}

TEST_CASE("irreversibility of the steel law") {
  const DefaultSteelLaw law = battery_law();
  for (double th = 10.0; th < 2000.0; th += 37.0) {
    for (double z = 0.0; z <= 1.0; z += 0.05) {
      CHECK(law.psi_z(th, z) <= 0.0);
      if (z >= law.z_eq().value(th)) CHECK(law.psi_z(th, z) == 0.0);
    }
  }
}

TEST_CASE("coefficient law derivatives") {
  const std::vector<CoefficientLaw> laws = {
      CoefficientLaw::rational_decay(0.5, 1.0, 800.0), CoefficientLaw::sqrt_quadratic(1.0, 25.0, -16.0, -8.0),
      CoefficientLaw::quadratic(1.0, 0.3, 2.0), CoefficientLaw::arctan(1.0, 0.5, 3.0)};
  for (const auto& f : laws) {
    for (double x : {0.1, 0.4, 0.9}) {
      const double h = 1e-6;
      CHECK(f.d1(x) == doctest::Approx((f(x + h) - f(x - h)) / (2 * h)).epsilon(1e-6));
      CHECK(f.d2(x) == doctest::Approx((f.d1(x + h) - f.d1(x - h)) / (2 * h)).epsilon(1e-5));
    }
    CHECK(CoefficientLaw::from_json(f.to_json())(0.37) == f(0.37));
  }
}

TEST_CASE("energy and entropy bounds with validator constants") {
  const RunConfig cfg = config_from_json(default_config());
  const ValidationReport rep = validate_assumptions(cfg.laws, AssumptionLevel::A1, cfg.diagnostics.sampling);
  REQUIRE(rep.passed(AssumptionLevel::A1));
  const auto& k = rep.constants;
  const FreeEnergyLaw& law = cfg.laws.psi();
  for (const auto& [th, z] : sample_points(law.box, cfg.diagnostics.sampling)) {
    const double e = internal_energy(th, z, law), s = entropy_density(th, z, law), lt = std::log(th);
    const double tol = 1e-12 * (1.0 + std::abs(e) + std::abs(s));
    CHECK(k.energy_c * (th - 1.0) <= e + tol);
    CHECK(e <= k.energy_C * (th + 1.0) + tol);
    CHECK(k.entropy_c * (lt - 1.0) <= s + tol);
    CHECK(s <= k.entropy_C * (lt + 1.0) + tol);
    const double cap = heat_capacity(th, z, law);
    CHECK(cap >= k.heat_c - 1e-12);
    CHECK(cap <= k.heat_C + 1e-12);
  }
}

TEST_CASE("validator discriminates mu fixtures") {
  MaterialLaws laws = config_from_json(default_config()).laws;
  laws.mu_work = CoefficientLaw::quadratic(1.0, 0.0, 1.0);
  const ValidationReport convex = validate_assumptions(laws, AssumptionLevel::A2);
  REQUIRE(convex.find("mu_squared_concave"));
  CHECK_FALSE(convex.find("mu_squared_concave")->passed);
  laws.mu_work = CoefficientLaw::sqrt_quadratic(1.0, 4.0, 0.0, -3.0);
  const ValidationReport concave = validate_assumptions(laws, AssumptionLevel::A2);
  CHECK(concave.find("mu_squared_concave")->passed);
}

TEST_CASE("sampled coefficient inequalities") {
  const auto c = check_sqrt_log_inequality(CoefficientLaw::constant(3.0), 1.0, 100.0, 20, 2);
  CHECK(c.passed);
  CHECK(c.constant == 0.0);
  const auto a = check_sqrt_log_inequality(CoefficientLaw::arctan(0.0, 1.0, 1.0), 0.01, 100.0, 30, 2);
  CHECK(a.passed);
  CHECK(std::isfinite(a.constant));
  CHECK(a.constant > 0.0);
  const auto f = check_fenchel_inequality(CoefficientLaw::constant(2.0), 0.0, 1.0, 10.0, 100.0, 10, 2);
  CHECK(f.passed);
  CHECK(f.constant == 0.0);
}
