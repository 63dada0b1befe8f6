#include "inductherm/phase_solver.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "inductherm/linear_solver.hpp"

namespace inductherm {

namespace {

// Root of r(z) = z - z0 + k psi_z(theta, z), increasing in z whenever
// psi is convex in z. Bracket by doubling, then safeguarded Newton.
double solve_cell(double z0, double theta, double k, const FreeEnergyLaw& psi, double tol,
                  int max_iter, int& iters) {
  auto r = [&](double z) { return z - z0 + k * psi.psi_z(theta, z); };
  const double r0 = r(z0);
  iters = 0;
  if (r0 == 0.0) return z0;
  double lo = z0, hi = z0;
  double step = std::max(std::abs(r0), 1e-12);
  const double dir = r0 < 0.0 ? 1.0 : -1.0;
  for (int k2 = 0; k2 < 200; ++k2) {
    const double probe = z0 + dir * step;
    if ((r(probe) < 0.0) != (r0 < 0.0) || r(probe) == 0.0) {
      if (dir > 0) hi = probe;
      else lo = probe;
      break;
    }
    if (dir > 0) lo = probe;
    else hi = probe;
    step *= 2.0;
    if (k2 == 199) throw SolverError("phase_step: could not bracket the implicit update");
  }
  double z = z0;
  for (int it = 1; it <= max_iter; ++it) {
    iters = it;
    const double rv = r(z);
    if (std::abs(rv) <= tol * (1.0 + std::abs(z))) return z;
    if (rv < 0.0) lo = z;
    else hi = z;
    const double d = 1.0 + k * psi.psi_zz(theta, z);
    double zn = d > 0.0 ? z - rv / d : 0.5 * (lo + hi);
    if (!(zn > lo && zn < hi)) zn = 0.5 * (lo + hi);
    if (zn == z || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(z)))
      return zn;
    z = zn;
  }
  throw SolverError("phase_step: Newton did not converge in " + std::to_string(max_iter) +
                    " iterations");
}

}  // namespace

PhaseStepReport phase_step(const RegionGrid& g, const ScalarField& z_old, const ScalarField& theta,
                           double dt, const MaterialLaws& laws, const PhaseStepOptions& opt,
                           ScalarField& z_new) {
  if (!(dt > 0.0)) throw std::invalid_argument("phase_step: dt must be positive");
  if (opt.delta < 0.0) throw std::invalid_argument("phase_step: delta must be non-negative");
  const FreeEnergyLaw& psi = laws.psi();
  z_new = z_old;
  PhaseStepReport rep;
  for (int c : g.workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    if (!(theta[k] > 0.0)) throw DomainError("phase_step: non-positive temperature");
  }

  if (opt.delta == 0.0) {
    for (int c : g.workpiece_cells()) {
      const auto k = static_cast<std::size_t>(c);
      int iters = 0;
      z_new[k] = solve_cell(z_old[k], theta[k], dt / laws.tau(theta[k]), psi, opt.newton_tol,
                            opt.newton_max_iter, iters);
      rep.newton_iterations = std::max(rep.newton_iterations, iters);
      const double res = z_new[k] - z_old[k] + dt / laws.tau(theta[k]) * psi.psi_z(theta[k], z_new[k]);
      rep.residual = std::max(rep.residual, std::abs(res));
    }
    return rep;
  }

  // Coupled Newton with the Neumann Laplacian on the workpiece faces.
  const auto n = static_cast<std::size_t>(g.size());
  const double vol = g.cell_volume();
  const auto& faces = g.workpiece_faces();
  DiffusionOperator jac;
  jac.faces = &faces;
  jac.active = region_mask(g, Region::Workpiece);
  jac.trans.resize(faces.size());
  for (std::size_t f = 0; f < faces.size(); ++f) jac.trans[f] = dt * opt.delta * faces[f].transmissibility();
  jac.mass.assign(n, 0.0);

  ScalarField res(n, 0.0), flux(n), delta_z(n, 0.0), neg(n, 0.0);
  for (int it = 1; it <= opt.newton_max_iter; ++it) {
    DiffusionOperator lap = jac;
    lap.mass.assign(n, 0.0);
    lap.apply(z_new, flux);
    double rmax = 0.0;
    for (int c : g.workpiece_cells()) {
      const auto k = static_cast<std::size_t>(c);
      const double kk = dt / laws.tau(theta[k]);
      res[k] = vol * (z_new[k] - z_old[k] + kk * psi.psi_z(theta[k], z_new[k])) + flux[k];
      rmax = std::max(rmax, std::abs(res[k]) / vol);
      jac.mass[k] = vol * (1.0 + kk * psi.psi_zz(theta[k], z_new[k]));
      neg[k] = -res[k];
    }
    rep.newton_iterations = it;
    rep.residual = rmax;
    if (rmax <= opt.newton_tol) return rep;
    std::fill(delta_z.begin(), delta_z.end(), 0.0);
    pcg_solve(jac, neg, delta_z, opt.cg_rtol);
    double dmax = 0.0;
    for (int c : g.workpiece_cells()) {
      const auto k = static_cast<std::size_t>(c);
      z_new[k] += delta_z[k];
      dmax = std::max(dmax, std::abs(delta_z[k]));
    }
    if (dmax <= 1e-15) return rep;
  }
  throw SolverError("phase_step: coupled Newton did not converge");
}

ScalarField phase_dissipation(const RegionGrid& g, const ScalarField& z_new, const ScalarField& z_old,
                              const ScalarField& theta, double dt, const MaterialLaws& laws) {
  ScalarField p(static_cast<std::size_t>(g.size()), 0.0);
  for (int c : g.workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    const double rate = (z_new[k] - z_old[k]) / dt;
    p[k] = laws.tau(theta[k]) * rate * rate;
  }
  return p;
}

}  // namespace inductherm
