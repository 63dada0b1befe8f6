#include "inductherm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace inductherm {

namespace {

struct Sum {
  double s = 0.0, c = 0.0;
  void add(double v) {
    const double t = s + v;
    c += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

std::size_t at(int c) { return static_cast<std::size_t>(c); }

// d(1/mu)/dz for a cell; zero off the workpiece.
double reluctivity_slope(const RegionGrid& g, const MaterialLaws& laws, int c, double z) {
  if (!g.in_workpiece(c)) return 0.0;
  const double m = laws.mu_work(z);
  return -laws.mu_work.d1(z) / (m * m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Energy ledger

EnergyLedger::EnergyLedger(const RegionGrid& g, const MaterialLaws& laws, const SimState& s0) {
  EnergyRow r;
  r.t = s0.t;
  r.internal_energy = integrate(g, s0.e, Region::Workpiece);
  r.magnetic_energy = magnetic_energy(g, reluctivity(g, s0.z, laws), s0.a);
  r.scale = std::max(std::abs(r.internal_energy), std::abs(r.magnetic_energy));
  rows_.push_back(r);
}

const EnergyRow& EnergyLedger::update(const RegionGrid& g, const MaterialLaws& laws,
                                      const SimState& old_s, const SimState& new_s,
                                      const StepTerms& terms) {
  const EnergyRow& prev = rows_.back();
  const EnergyRow& first = rows_.front();
  const double vol = g.cell_volume();
  const double dt = terms.dt;
  EnergyRow r;
  r.t = new_s.t;
  r.internal_energy = integrate(g, new_s.e, Region::Workpiece);
  const ScalarField nu_new = reluctivity(g, new_s.z, laws);
  const ScalarField nu_old = reluctivity(g, old_s.z, laws);
  r.magnetic_energy = magnetic_energy(g, nu_new, new_s.a);

  // Chain-rule-consistent mu'(z) dz/dt term: the energy change from z alone.
  const auto& fs = g.domain_faces();
  const FaceField nf_new = face_reluctivity(g, nu_new), nf_old = face_reluctivity(g, nu_old);
  const FaceField g_old = grad(g, fs, old_s.a);
  Sum mu;
  for (std::size_t k = 0; k < fs.size(); ++k)
    mu.add(-0.5 * (nf_new[k] - nf_old[k]) * g_old[k] * g_old[k] * fs[k].area());

  Sum out, src, reg;
  for (int c = 0; c < g.size(); ++c) {
    const auto i = at(c);
    const double da = new_s.a[i] - old_s.a[i];
    switch (g.region(c)) {
      case Region::Workpiece: {
        const double th = new_s.theta[i];
        reg.add(vol * dt * (terms.eps_pos / (th * th) + terms.reg_power[i]));
        break;
      }
      case Region::Inductor:
        out.add(vol * laws.sigma_cond * da * da / dt);
        src.add(vol * terms.source[i] * da);
        break;
      case Region::Air:
        out.add(vol * terms.eps_air * da * da / dt);
        break;
    }
  }
  r.mu_term = prev.mu_term + mu.value();
  r.dissipation_out = prev.dissipation_out + out.value();
  r.source_work = prev.source_work + src.value();
  r.regularization = prev.regularization + reg.value();
  r.slack = r.source_work + r.regularization - r.lhs(first);
  r.step_slack = src.value() + reg.value() -
                 (r.internal_energy - prev.internal_energy + r.magnetic_energy - prev.magnetic_energy +
                  mu.value() + out.value());
  r.scale = std::max({std::abs(r.internal_energy), std::abs(r.magnetic_energy), std::abs(r.mu_term),
                      std::abs(r.dissipation_out), std::abs(r.source_work),
                      std::abs(r.regularization)});
  rows_.push_back(r);
  return rows_.back();
}

// ---------------------------------------------------------------------------
// Entropy ledger

std::string WeightSpec::name() const { return kind == Kind::Uniform ? "uniform" : "cosine"; }

ScalarField WeightSpec::field(const RegionGrid& g, double t) const {
  ScalarField w(static_cast<std::size_t>(g.size()), 0.0);
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (int c : g.workpiece_cells()) {
    x0 = std::min(x0, g.x(c) - 0.5 * g.hx());
    x1 = std::max(x1, g.x(c) + 0.5 * g.hx());
    y0 = std::min(y0, g.y(c) - 0.5 * g.hy());
    y1 = std::max(y1, g.y(c) + 0.5 * g.hy());
  }
  const double grow = 1.0 + growth * t;
  for (int c : g.workpiece_cells()) {
    double v = 1.0;
    if (kind == Kind::Cosine) {
      const double xh = (g.x(c) - x0) / (x1 - x0), yh = (g.y(c) - y0) / (y1 - y0);
      v = 1.0 + amplitude * std::cos(std::numbers::pi * xh) * std::cos(std::numbers::pi * yh);
    }
    w[at(c)] = v * grow;
  }
  return w;
}

const EntropyLedgerRow& EntropyLedger::update(const RegionGrid& g, const MaterialLaws& laws,
                                              const HeatStepConfig& heat, const SimState& old_s,
                                              const SimState& new_s, const ScalarField& joule,
                                              const ScalarField& reg_power) {
  const double dt = new_s.t - old_s.t;
  const ScalarField w_old = weight_.field(g, old_s.t), w_new = weight_.field(g, new_s.t);
  EntropyLedgerRow r;
  r.t = new_s.t;
  r.step = entropy_production_step(g, new_s.theta, old_s.theta, new_s.z, old_s.z, joule, reg_power,
                                   dt, laws, heat, w_old, w_new);
  Sum tot;
  for (int c : g.workpiece_cells())
    tot.add(g.cell_volume() * w_new[at(c)] * entropy_density(new_s.theta[at(c)], new_s.z[at(c)], laws.psi()));
  r.total_entropy = tot.value();
  rows_.push_back(r);
  return rows_.back();
}

// ---------------------------------------------------------------------------
// Relative energy

namespace {

// Visits every half face of D: callback(face index, cell, weight) where the
// weight is 1/2 for interior faces and 1 for boundary faces.
template <class F>
void for_half_faces(const RegionGrid& g, F&& f) {
  const auto& fs = g.domain_faces();
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (fs[k].b < 0) {
      f(k, fs[k].a, 1.0);
    } else {
      f(k, fs[k].a, 0.5);
      f(k, fs[k].b, 0.5);
    }
  }
}

}  // namespace

RelEnergy relative_energy(const RegionGrid& g, const MaterialLaws& laws, const SimState& u,
                          const SimState& ut) {
  if (u.theta.size() != ut.theta.size() || u.a.size() != ut.a.size() ||
      u.theta.size() != static_cast<std::size_t>(g.size()))
    throw GeometryError("relative_energy: states live on different grids");
  const FreeEnergyLaw& psi = laws.psi();
  const double vol = g.cell_volume();
  std::array<Sum, 7> grp;
  Sum total;
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    const double th = u.theta[i], z = u.z[i], tt = ut.theta[i], zt = ut.z[i];
    const double e = internal_energy(th, z, psi), et = internal_energy(tt, zt, psi);
    const double lin_z = -psi.psi_z(tt, zt) * (z - zt);
    const double lin_t = tt * (psi.psi_theta(th, z) - psi.psi_theta(tt, zt));
    grp[0].add(vol * e);
    grp[2].add(-vol * et);
    grp[4].add(vol * lin_z);
    grp[5].add(vol * lin_t);
    total.add(vol * ((e - et) + lin_z + lin_t));
  }
  const auto& fs = g.domain_faces();
  const FaceField ga = grad(g, fs, u.a), gt = grad(g, fs, ut.a);
  const ScalarField nu = reluctivity(g, u.z, laws), nut = reluctivity(g, ut.z, laws);
  for_half_faces(g, [&](std::size_t k, int c, double w) {
    const auto i = at(c);
    const double area = w * fs[k].area();
    const double b = ga[k], bt = gt[k];
    const double dz = g.in_workpiece(c) ? u.z[i] - ut.z[i] : 0.0;
    const double slope = reluctivity_slope(g, laws, c, ut.z[i]);
    const double m1 = 0.5 * nu[i] * b * b;
    const double m2 = -0.5 * nut[i] * bt * bt;
    // -[nu(zt) bt (b - bt) - mu'(zt)/(2 mu(zt)^2) bt^2 (z - zt)], with mu'/mu^2 = -slope.
    const double lin = -(nut[i] * bt * (b - bt) + 0.5 * slope * bt * bt * dz);
    grp[1].add(area * m1);
    grp[3].add(area * m2);
    grp[6].add(area * lin);
    // Combined per half face: a Bregman divergence, exactly zero when u == ut.
    const double breg = 0.5 * nu[i] * b * b - 0.5 * nut[i] * bt * bt - nut[i] * bt * (b - bt) -
                        0.5 * slope * bt * bt * dz;
    total.add(area * breg);
  });
  RelEnergy out;
  for (std::size_t k = 0; k < 7; ++k) out.groups[k] = grp[k].value();
  out.total = total.value();
  return out;
}

LowerBound relative_energy_lower_bound(const RegionGrid& g, const MaterialLaws& laws,
                                       const EmpiricalConstants& k, const SimState& u,
                                       const SimState& ut) {
  const FreeEnergyLaw& psi = laws.psi();
  const double vol = g.cell_volume();
  LowerBound lb;
  lb.c_theta = k.heat_c;
  lb.c_z = std::max(0.0, 0.5 * k.psi_zz_c);
  const bool mu_const = laws.mu_work.is_constant();
  const double c_b_work = mu_const ? 0.5 / laws.mu_work(0.0) : 1.0 / (6.0 * k.mu_max);
  Sum val;
  std::vector<double> margin(static_cast<std::size_t>(g.size()), 0.0);
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    const double th = u.theta[i], z = u.z[i], tt = ut.theta[i], zt = ut.z[i];
    const double u_rel = (th - tt) / tt;
    const double breg_log = tt * (u_rel - std::log1p(u_rel));
    const double bound = lb.c_theta * breg_log + lb.c_z * (z - zt) * (z - zt);
    const double integrand = internal_energy(th, z, psi) - internal_energy(tt, zt, psi) -
                             psi.psi_z(tt, zt) * (z - zt) +
                             tt * (psi.psi_theta(th, z) - psi.psi_theta(tt, zt));
    val.add(vol * bound);
    margin[i] += vol * (integrand - bound);
  }
  const auto& fs = g.domain_faces();
  const FaceField ga = grad(g, fs, u.a), gt = grad(g, fs, ut.a);
  const ScalarField nu = reluctivity(g, u.z, laws), nut = reluctivity(g, ut.z, laws);
  for_half_faces(g, [&](std::size_t kf, int c, double w) {
    const auto i = at(c);
    const double area = w * fs[kf].area();
    const double b = ga[kf], bt = gt[kf];
    const double dz = g.in_workpiece(c) ? u.z[i] - ut.z[i] : 0.0;
    const double slope = reluctivity_slope(g, laws, c, ut.z[i]);
    const double breg = 0.5 * nu[i] * b * b - 0.5 * nut[i] * bt * bt - nut[i] * bt * (b - bt) -
                        0.5 * slope * bt * bt * dz;
    const double cb = g.in_workpiece(c) ? c_b_work : 0.5 * nu[i];
    const double bound = cb * (b - bt) * (b - bt);
    val.add(area * bound);
    margin[i] += area * (breg - bound);
  });
  lb.value = val.value();
  lb.worst_margin = std::numeric_limits<double>::infinity();
  for (int c = 0; c < g.size(); ++c)
    if (margin[at(c)] < lb.worst_margin) {
      lb.worst_margin = margin[at(c)];
      lb.worst_cell = c;
    }
  return lb;
}

double relative_dissipation(const RegionGrid& g, const MaterialLaws& laws, double eps_air,
                            double eps_cond, const SimState& u_old, const SimState& u,
                            const SimState& ut_old, const SimState& ut, double dt) {
  const double vol = g.cell_volume();
  Sum w;
  for (int c = 0; c < g.size(); ++c) {
    const auto i = at(c);
    const double ra = (u.a[i] - u_old.a[i]) / dt, rat = (ut.a[i] - ut_old.a[i]) / dt;
    if (g.in_workpiece(c)) {
      const double th = u.theta[i], tt = ut.theta[i];
      const double p = std::sqrt(tt / th), q = std::sqrt(th / tt);
      const double da = p * ra - q * rat;
      const double rz = (u.z[i] - u_old.z[i]) / dt, rzt = (ut.z[i] - ut_old.z[i]) / dt;
      const double dzr = p * rz - q * rzt;
      w.add(vol * (0.5 * laws.sigma_work(th) * da * da + 0.5 * laws.tau(th) * dzr * dzr));
    } else {
      const double s = g.region(c) == Region::Inductor ? laws.sigma_cond : eps_air;
      w.add(vol * s * (ra - rat) * (ra - rat));
    }
  }
  const auto& fs = g.workpiece_faces();
  const FaceField kf = face_conductivity(g, regularized_conductivity(g, u.theta, u.z, laws, eps_cond));
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto a = at(fs[k].a), b = at(fs[k].b);
    const double gl = (std::log(u.theta[b]) - std::log(u.theta[a])) / fs[k].dist;
    const double glt = (std::log(ut.theta[b]) - std::log(ut.theta[a])) / fs[k].dist;
    const double tt = 0.5 * (ut.theta[a] + ut.theta[b]);
    w.add(fs[k].area() * 0.5 * tt * kf[k] * (gl - glt) * (gl - glt));
  }
  return w.value();
}

GronwallTerms gronwall_coefficient(const RegionGrid& g, const MaterialLaws& laws, double eps_cond,
                                   double multiplier, const SimState& ut_old, const SimState& ut,
                                   const SimState& u_old, const SimState& u, double dt) {
  GronwallTerms k;
  k.multiplier = multiplier;
  auto& n = k.norms;
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    n[0] = std::max(n[0], std::abs(std::log(ut.theta[i]) - std::log(ut_old.theta[i])) / dt);
    n[1] = std::max(n[1], std::abs(ut.z[i] - ut_old.z[i]) / dt);
    n[5] = std::max(n[5], std::abs(std::log(laws.mu_work(u.z[i])) - std::log(laws.mu_work(u_old.z[i]))) / dt);
  }
  const auto n_cells = static_cast<std::size_t>(g.size());
  ScalarField rate(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) rate[i] = (ut.a[i] - ut_old.a[i]) / dt;
  const CellVector cr = curl2d(g, rate), ca = curl2d(g, ut.a);
  for (std::size_t i = 0; i < n_cells; ++i) {
    n[2] = std::max(n[2], std::hypot(cr.x[i], cr.y[i]));
    n[6] = std::max(n[6], ca.x[i] * ca.x[i] + ca.y[i] * ca.y[i]);
  }
  ScalarField logt(n_cells, 0.0);
  for (int c : g.workpiece_cells()) logt[at(c)] = std::log(ut.theta[at(c)]);
  const CellVector gl = cell_gradient(g, logt, region_mask(g, Region::Workpiece));
  const auto& fs = g.workpiece_faces();
  const FaceField kf = face_conductivity(g, regularized_conductivity(g, ut.theta, ut.z, laws, eps_cond));
  FaceField flux = grad(g, fs, logt);
  for (std::size_t f = 0; f < fs.size(); ++f) flux[f] *= kf[f];
  const ScalarField dv = div(g, fs, flux);
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    n[3] = std::max(n[3], gl.x[i] * gl.x[i] + gl.y[i] * gl.y[i]);
    n[4] = std::max(n[4], std::abs(dv[i]));
  }
  double s = 0.0;
  for (double v : n) s += v;
  k.value = multiplier * s;
  return k;
}

// ---------------------------------------------------------------------------
// Trackers

ComparisonTracker::ComparisonTracker(const EmpiricalConstants& k, double theta_min0, double theta_max0)
    : heat_c_(k.heat_c), e_z_(k.e_z_C), sub_(theta_min0), sup_(theta_max0) {}

bool ComparisonTracker::update(const RegionGrid& g, const SimState& old_s, const SimState& new_s,
                               const ScalarField& power, double dt, double eps_pos) {
  double dz = 0.0, p = 0.0, p_neg = 0.0, tmin = std::numeric_limits<double>::infinity(), tmax = 0.0;
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    dz = std::max(dz, std::abs(new_s.z[i] - old_s.z[i]));
    p = std::max(p, power[i]);
    p_neg = std::max(p_neg, -power[i]);
    tmin = std::min(tmin, new_s.theta[i]);
    tmax = std::max(tmax, new_s.theta[i]);
  }
  sub_ -= (e_z_ * dz + dt * p_neg) / heat_c_;
  const double pos = sub_ > 0.0 ? eps_pos / (sub_ * sub_) : std::numeric_limits<double>::infinity();
  sup_ += (dt * (p + pos) + e_z_ * dz) / heat_c_;
  const double tol = 1e-9 * std::max(1.0, sup_);
  const double margin = std::min(tmin - sub_, sup_ - tmax);
  worst_ = std::min(worst_, margin);
  if (margin < -tol) ok_ = false;
  return margin >= -tol;
}

void NormTracker::start(const RegionGrid& g, const SimState& s0) {
  n_ = {};
  grad_log_sq_ = 0.0;
  update(g, s0, s0, 0.0);
}

void NormTracker::update(const RegionGrid& g, const SimState& old_s, const SimState& new_s, double dt) {
  n_.theta_linf_l1 = std::max(n_.theta_linf_l1, integrate(g, new_s.theta, Region::Workpiece));
  double zmax = 0.0, rate = 0.0;
  for (int c : g.workpiece_cells()) {
    const auto i = at(c);
    zmax = std::max(zmax, std::abs(new_s.z[i]));
    if (dt > 0.0) rate = std::max(rate, std::abs(new_s.z[i] - old_s.z[i]) / dt);
  }
  n_.dz_dt_max = std::max(n_.dz_dt_max, rate);
  n_.z_w1inf_linf = std::max({n_.z_w1inf_linf, zmax, rate});
  const auto& fd = g.domain_faces();
  const FaceField ga = grad(g, fd, new_s.a);
  FaceField sq(fd.size());
  for (std::size_t k = 0; k < fd.size(); ++k) sq[k] = ga[k] * ga[k];
  ScalarField a2(new_s.a.size());
  for (std::size_t i = 0; i < a2.size(); ++i) a2[i] = new_s.a[i] * new_s.a[i];
  n_.a_linf_hcurl = std::max(n_.a_linf_hcurl, std::sqrt(integrate(g, a2) + integrate_faces(fd, sq)));
  if (dt > 0.0) {
    const auto& fw = g.workpiece_faces();
    ScalarField logt(new_s.theta.size(), 0.0);
    for (int c : g.workpiece_cells()) logt[at(c)] = std::log(new_s.theta[at(c)]);
    const FaceField gl = grad(g, fw, logt);
    FaceField gl2(fw.size());
    for (std::size_t k = 0; k < fw.size(); ++k) gl2[k] = gl[k] * gl[k];
    grad_log_sq_ += dt * integrate_faces(fw, gl2);
  }
  n_.grad_log_l2l2 = std::sqrt(grad_log_sq_);
}

AprioriNorms NormTracker::norms() const { return n_; }

}  // namespace inductherm
