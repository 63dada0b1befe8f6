#include "inductherm/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "inductherm/stepper.hpp"

namespace inductherm {

namespace {

constexpr double kPi = std::numbers::pi;

std::size_t at(int c) { return static_cast<std::size_t>(c); }

void fill_orders(ConvergenceStudy& s) {
  s.orders.clear();
  for (std::size_t k = 1; k < s.errors.size(); ++k)
    s.orders.push_back(std::log(s.errors[k - 1] / s.errors[k]) / std::log(s.steps[k - 1] / s.steps[k]));
}

MaterialLaws steel_laws(CoefficientLaw kappa) {
  MaterialLaws laws;
  laws.free_energy = std::make_shared<DefaultSteelLaw>(EquilibriumPhase{900.0, 50.0, 1.0}, 1.0, 1.0);
  laws.kappa_theta = kappa;
  laws.kappa_phase = CoefficientLaw::constant(1.0);
  laws.sigma_work = CoefficientLaw::constant(1.0);
  laws.mu_work = CoefficientLaw::constant(1.0);
  laws.tau = CoefficientLaw::constant(1.0);
  return laws;
}

}  // namespace

bool ConvergenceStudy::passed() const {
  if (orders.empty()) return false;
  return std::all_of(orders.begin(), orders.end(),
                     [&](double p) { return p >= min_order_required && p <= max_order_allowed; });
}

double ConvergenceStudy::min_order() const {
  double m = orders.empty() ? 0.0 : orders.front();
  for (double p : orders) m = std::min(m, p);
  return m;
}

ConvergenceStudy heat_spatial_study(const std::vector<int>& grids) {
  ConvergenceStudy st{"heat_spatial", "h", {}, {}, {}, 1.8};
  const MaterialLaws laws = steel_laws(CoefficientLaw::rational_decay(1.0, 2.0, 2.0));
  HeatStepConfig cfg;
  const double dt = 0.02, t_final = 0.1;
  for (int n : grids) {
    // The unit square is the workpiece, padded by one air cell on each side.
    const double h = 1.0 / n;
    const RegionGrid g = RegionGrid::from_rects((n + 2) * h, (n + 2) * h, n + 2, n + 2, {h, 1.0 + h, h, 1.0 + h}, {});
    const auto size = static_cast<std::size_t>(g.size());
    auto exact = [&](int c, double t) {
      const double x = g.x(c) - h, y = g.y(c) - h;
      return 2.0 + 0.5 * std::cos(kPi * x) * std::cos(kPi * y) * (1.0 + t);
    };
    ScalarField theta(size, 0.0), e(size, 0.0), z(size, 0.0), power(size, 0.0), e_new;
    for (int c : g.workpiece_cells()) {
      z[at(c)] = 1.0;  // no driving force: e = theta
      theta[at(c)] = exact(c, 0.0);
      e[at(c)] = internal_energy(theta[at(c)], 1.0, laws.psi());
    }
    const int steps = static_cast<int>(std::lround(t_final / dt));
    for (int k = 1; k <= steps; ++k) {
      const double t = k * dt;
      for (int c : g.workpiece_cells()) {
        const double x = g.x(c) - h, y = g.y(c) - h;
        const double cx = std::cos(kPi * x), cy = std::cos(kPi * y), sx = std::sin(kPi * x), sy = std::sin(kPi * y);
        const double th = exact(c, t);
        const double amp = 0.5 * (1.0 + t);
        const double grad2 = amp * amp * kPi * kPi * (sx * sx * cy * cy + cx * cx * sy * sy);
        const double lap = -2.0 * kPi * kPi * amp * cx * cy;
        power[at(c)] = 0.5 * cx * cy - laws.kappa_theta.d1(th) * grad2 - laws.kappa_theta(th) * lap;
      }
      heat_step(g, e, z, power, dt, laws, cfg, theta, e_new);
      e = e_new;
    }
    double err = 0.0;
    for (int c : g.workpiece_cells()) {
      const double d = theta[at(c)] - exact(c, t_final);
      err += g.cell_volume() * d * d;
    }
    st.steps.push_back(h);
    st.errors.push_back(std::sqrt(err));
  }
  fill_orders(st);
  return st;
}

ConvergenceStudy heat_temporal_study(const std::vector<double>& dts) {
  ConvergenceStudy st{"heat_temporal", "dt", {}, {}, {}, 0.9};
  const MaterialLaws laws = steel_laws(CoefficientLaw::constant(1.0));
  const FreeEnergyLaw& psi = laws.psi();
  HeatStepConfig cfg;
  const RegionGrid g = RegionGrid::from_rects(1.0, 1.0, 8, 8, {0.125, 0.875, 0.125, 0.875}, {});
  const auto size = static_cast<std::size_t>(g.size());
  const double t_final = 1.0;
  auto exact = [](double t) { return 900.0 + 100.0 * std::sin(2.0 * kPi * t); };
  auto rate = [](double t) { return 200.0 * kPi * std::cos(2.0 * kPi * t); };
  for (double dt : dts) {
    ScalarField theta(size, 0.0), e(size, 0.0), z(size, 0.0), power(size, 0.0), e_new;
    for (int c : g.workpiece_cells()) {
      theta[at(c)] = exact(0.0);
      e[at(c)] = internal_energy(exact(0.0), 0.0, psi);
    }
    double err = 0.0;
    const int steps = static_cast<int>(std::lround(t_final / dt));
    for (int k = 1; k <= steps; ++k) {
      const double t = k * dt;
      const double p = heat_capacity(exact(t), 0.0, psi) * rate(t);
      for (int c : g.workpiece_cells()) power[at(c)] = p;
      heat_step(g, e, z, power, dt, laws, cfg, theta, e_new);
      e = e_new;
      double l2 = 0.0;
      for (int c : g.workpiece_cells()) l2 += g.cell_volume() * std::pow(theta[at(c)] - exact(t), 2);
      err = std::max(err, std::sqrt(l2));
    }
    st.steps.push_back(dt);
    st.errors.push_back(err);
  }
  fill_orders(st);
  return st;
}

namespace {

// Unit sigma and mu everywhere: a small workpiece in the middle with
// constant laws, unit inductor/air values and eps_air = 1.
struct EmFixture {
  RegionGrid g;
  MaterialLaws laws = steel_laws(CoefficientLaw::constant(1.0));
  EmStepOptions opt;
  explicit EmFixture(int n) : g(RegionGrid::from_rects(1.0, 1.0, n, n, {0.4, 0.6, 0.4, 0.6}, {})) {
    opt.eps_air = 1.0;
    opt.cg_rtol = 1e-12;
  }
  double mode(int c) const { return std::sin(kPi * g.x(c)) * std::sin(kPi * g.y(c)); }
};

}  // namespace

ConvergenceStudy em_spatial_study(const std::vector<int>& grids) {
  ConvergenceStudy st{"em_spatial", "h", {}, {}, {}, 1.8};
  const double dt = 0.02, t_final = 0.1;
  SourceModel none;
  for (int n : grids) {
    EmFixture fx(n);
    const RegionGrid& g = fx.g;
    const auto size = static_cast<std::size_t>(g.size());
    ScalarField a(size), a_new, theta(size, 1.0), z(size, 0.0), f(size);
    for (int c = 0; c < g.size(); ++c) a[at(c)] = fx.mode(c);
    fx.opt.extra_source = &f;
    const int steps = static_cast<int>(std::lround(t_final / dt));
    for (int k = 1; k <= steps; ++k) {
      const double t = k * dt;
      for (int c = 0; c < g.size(); ++c) f[at(c)] = fx.mode(c) * (1.0 + 2.0 * kPi * kPi * (1.0 + t));
      a_new = a;
      em_step(g, a, theta, z, t, dt, fx.laws, none, fx.opt, a_new);
      a = a_new;
    }
    double err = 0.0;
    for (int c = 0; c < g.size(); ++c) err += g.cell_volume() * std::pow(a[at(c)] - fx.mode(c) * (1.0 + t_final), 2);
    st.steps.push_back(1.0 / n);
    st.errors.push_back(std::sqrt(err));
  }
  fill_orders(st);
  return st;
}

ConvergenceStudy em_temporal_study(const std::vector<double>& dts) {
  ConvergenceStudy st{"em_temporal", "dt", {}, {}, {}, 0.9};
  const int n = 32;
  const double t_final = 0.5, h = 1.0 / n;
  const double lambda_h = 2.0 * (2.0 - 2.0 * std::cos(kPi * h)) / (h * h);
  SourceModel none;
  for (double dt : dts) {
    EmFixture fx(n);
    const RegionGrid& g = fx.g;
    const auto size = static_cast<std::size_t>(g.size());
    ScalarField a(size), a_new, theta(size, 1.0), z(size, 0.0), f(size);
    for (int c = 0; c < g.size(); ++c) a[at(c)] = fx.mode(c);
    fx.opt.extra_source = &f;
    double err = 0.0;
    const int steps = static_cast<int>(std::lround(t_final / dt));
    for (int k = 1; k <= steps; ++k) {
      const double t = k * dt;
      const double gt = std::cos(2.0 * kPi * t), dg = -2.0 * kPi * std::sin(2.0 * kPi * t);
      for (int c = 0; c < g.size(); ++c) f[at(c)] = fx.mode(c) * (dg + lambda_h * gt);
      a_new = a;
      em_step(g, a, theta, z, t, dt, fx.laws, none, fx.opt, a_new);
      a = a_new;
      double l2 = 0.0;
      for (int c = 0; c < g.size(); ++c) l2 += g.cell_volume() * std::pow(a[at(c)] - fx.mode(c) * gt, 2);
      err = std::max(err, std::sqrt(l2));
    }
    st.steps.push_back(dt);
    st.errors.push_back(err);
  }
  fill_orders(st);
  return st;
}

ConvergenceStudy phase_ode_study(const std::vector<double>& dts) {
  ConvergenceStudy st{"phase_ode", "dt", {}, {}, {}, std::log2(1.6), std::log2(2.4)};
  const MaterialLaws laws = steel_laws(CoefficientLaw::constant(1.0));
  const auto* steel = dynamic_cast<const DefaultSteelLaw*>(laws.free_energy.get());
  const RegionGrid g = RegionGrid::from_rects(1.0, 1.0, 4, 4, {0.25, 0.75, 0.25, 0.75}, {});
  const auto size = static_cast<std::size_t>(g.size());
  const double theta0 = 900.0, t_final = 1.0, tau = laws.tau(theta0);
  const double zeq = steel->z_eq().value(theta0), rate = 2.0 * steel->latent() / tau;
  PhaseStepOptions opt;
  for (double dt : dts) {
    ScalarField z(size, 0.0), z_new, theta(size, theta0);
    double err = 0.0;
    const int steps = static_cast<int>(std::lround(t_final / dt));
    for (int k = 1; k <= steps; ++k) {
      z_new = z;
      phase_step(g, z, theta, dt, laws, opt, z_new);
      z = z_new;
      const double exact = zeq - zeq * std::exp(-rate * k * dt);
      for (int c : g.workpiece_cells()) err = std::max(err, std::abs(z[at(c)] - exact));
    }
    st.steps.push_back(dt);
    st.errors.push_back(err);
  }
  fill_orders(st);
  return st;
}

std::vector<ConvergenceStudy> convergence_suite() {
  return {heat_spatial_study(), heat_temporal_study(), em_spatial_study(), em_temporal_study(), phase_ode_study()};
}

SkinDepthResult skin_depth(const RunConfig& cfg_in, double frequency, int periods, int steps_per_period) {
  RunConfig cfg = cfg_in;
  cfg.source.frequency = frequency;
  const RegionGrid g = build_grid(cfg);
  const SimState s0 = initial_state(g, cfg);
  const double period = 1.0 / frequency, dt = period / steps_per_period;
  const auto size = static_cast<std::size_t>(g.size());
  ScalarField a = s0.a, a_new, avg(size, 0.0);
  const int total = periods * steps_per_period;
  for (int k = 1; k <= total; ++k) {
    a_new = a;
    const EmStepReport rep = em_step(g, a, s0.theta, s0.z, k * dt, dt, cfg.laws, cfg.source, cfg.em, a_new);
    if (k > total - steps_per_period)
      for (std::size_t i = 0; i < size; ++i) avg[i] += rep.joule[i] / steps_per_period;
    a = a_new;
  }
  // Row averages of the workpiece from its top row down to the middle.
  int top = -1, bottom = g.ny();
  for (int c : g.workpiece_cells()) {
    top = std::max(top, g.row(c));
    bottom = std::min(bottom, g.row(c));
  }
  SkinDepthResult r;
  r.frequency = frequency;
  for (int j = top; j >= (top + bottom + 1) / 2; --j) {
    double s = 0.0;
    int cnt = 0;
    for (int i = 0; i < g.nx(); ++i)
      if (g.in_workpiece(g.index(i, j))) {
        s += avg[at(g.index(i, j))];
        ++cnt;
      }
    r.profile.push_back(cnt ? s / cnt : 0.0);
  }
  const double target = r.profile.front() / std::numbers::e;
  r.depth = (r.profile.size() - 1) * g.hy();
  for (std::size_t k = 1; k < r.profile.size(); ++k)
    if (r.profile[k] <= target) {
      const double p0 = r.profile[k - 1], p1 = r.profile[k];
      r.depth = g.hy() * ((k - 1) + (p0 - target) / (p0 - p1));
      r.reached = true;
      break;
    }
  return r;
}

}  // namespace inductherm
