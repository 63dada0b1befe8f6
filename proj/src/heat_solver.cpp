#include "inductherm/heat_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "inductherm/linear_solver.hpp"

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

}  // namespace

ScalarField regularized_conductivity(const RegionGrid& g, const ScalarField& theta,
                                     const ScalarField& z, const MaterialLaws& laws, double eps_cond) {
  ScalarField k(static_cast<std::size_t>(g.size()), 0.0);
  for (int c : g.workpiece_cells()) {
    const auto i = static_cast<std::size_t>(c);
    k[i] = laws.kappa(theta[i], z[i]) + eps_cond * theta[i] * theta[i];
  }
  return k;
}

FaceField face_conductivity(const RegionGrid& g, const ScalarField& kappa_cells) {
  const auto& fs = g.workpiece_faces();
  FaceField f(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const double a = kappa_cells[static_cast<std::size_t>(fs[k].a)];
    const double b = kappa_cells[static_cast<std::size_t>(fs[k].b)];
    f[k] = 2.0 * a * b / (a + b);
  }
  return f;
}

HeatStepReport heat_step(const RegionGrid& g, const ScalarField& e_old, const ScalarField& z_new,
                         const ScalarField& power, double dt, const MaterialLaws& laws,
                         const HeatStepConfig& cfg, ScalarField& theta_new, ScalarField& e_new) {
  if (!(dt > 0.0)) throw std::invalid_argument("heat_step: dt must be positive");
  const FreeEnergyLaw& psi = laws.psi();
  const auto n = static_cast<std::size_t>(g.size());
  const double vol = g.cell_volume();
  const auto& cells = g.workpiece_cells();
  const auto& faces = g.workpiece_faces();

  if (theta_new.size() != n) theta_new.assign(n, 0.0);
  e_new.assign(n, 0.0);
  for (int c : cells) {
    const auto i = static_cast<std::size_t>(c);
    if (!(theta_new[i] > cfg.theta_floor)) theta_new[i] = invert_energy(e_old[i], z_new[i], psi);
    e_new[i] = internal_energy(theta_new[i], z_new[i], psi);
  }

  double scale = 0.0;
  for (int c : cells) {
    const auto i = static_cast<std::size_t>(c);
    scale = std::max(scale, std::abs(e_old[i]) + dt * std::abs(power[i]));
  }
  const double tol = cfg.newton_atol + cfg.newton_rtol * std::max(scale, 1e-300);

  DiffusionOperator jac;
  jac.faces = &faces;
  jac.active = region_mask(g, Region::Workpiece);
  jac.mass.assign(n, 0.0);
  jac.trans.resize(faces.size());
  ScalarField flux(n), res(n, 0.0), rhs(n, 0.0), dtheta(n, 0.0), cap(n, 0.0);

  HeatStepReport rep;
  auto residual = [&](const ScalarField& theta, const ScalarField& e, ScalarField& out) {
    DiffusionOperator lap;
    lap.faces = &faces;
    lap.active = jac.active;
    lap.mass.assign(n, 0.0);
    lap.trans = jac.trans;
    lap.apply(theta, flux);
    double rmax = 0.0;
    for (int c : cells) {
      const auto i = static_cast<std::size_t>(c);
      const double src = power[i] + cfg.eps_pos / (theta[i] * theta[i]);
      out[i] = vol * (e[i] - e_old[i] - dt * src) + flux[i];  // trans already carries dt
      rmax = std::max(rmax, std::abs(out[i]) / vol);
    }
    return rmax;
  };
  // dk_a[f], dk_b[f]: derivative of dt T_f kappa_f in theta_a, theta_b.
  FaceField dk_a(faces.size()), dk_b(faces.size());
  auto update_transmissibility = [&](const ScalarField& theta) {
    const ScalarField kc = regularized_conductivity(g, theta, z_new, laws, cfg.eps_cond);
    const FaceField kf = face_conductivity(g, kc);
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const auto a = static_cast<std::size_t>(faces[k].a), b = static_cast<std::size_t>(faces[k].b);
      const double w = dt * faces[k].transmissibility();
      jac.trans[k] = w * kf[k];
      const double den = (kc[a] + kc[b]) * (kc[a] + kc[b]);
      auto dkappa = [&](std::size_t i) {
        return laws.kappa_theta.d1(theta[i]) * laws.kappa_phase(z_new[i]) + 2.0 * cfg.eps_cond * theta[i];
      };
      dk_a[k] = w * 2.0 * kc[b] * kc[b] / den * dkappa(a);
      dk_b[k] = w * 2.0 * kc[a] * kc[a] / den * dkappa(b);
    }
  };
  // Full Jacobian: the lagged operator plus the conductivity derivative.
  auto full_jacobian = [&](const ScalarField& x, ScalarField& y) {
    jac.apply(x, y);
    for (std::size_t k = 0; k < faces.size(); ++k) {
      const auto a = static_cast<std::size_t>(faces[k].a), b = static_cast<std::size_t>(faces[k].b);
      const double dq = (theta_new[a] - theta_new[b]) * (dk_a[k] * x[a] + dk_b[k] * x[b]);
      y[a] += dq;
      y[b] -= dq;
    }
  };

  ScalarField theta_trial(theta_new), e_trial(e_new), res_trial(n, 0.0);
  for (int it = 0; it <= cfg.newton_max_iter; ++it) {
    // Conductivity and its derivative at the current iterate.
    update_transmissibility(theta_new);
    const double r = residual(theta_new, e_new, res);
    rep.residual = r;
    rep.residual_history.push_back(r);
    if (r <= tol) return rep;
    if (it == cfg.newton_max_iter) break;
    rep.newton_iterations = it + 1;

    // (V diag(c + 2 dt eps / theta^3) + dt L_T + dt N_T) dtheta = -R, then de = c dtheta.
    for (int c : cells) {
      const auto i = static_cast<std::size_t>(c);
      cap[i] = heat_capacity(theta_new[i], z_new[i], psi);
      jac.mass[i] = vol * (cap[i] + 2.0 * dt * cfg.eps_pos / std::pow(theta_new[i], 3));
      rhs[i] = -res[i];
    }
    std::fill(dtheta.begin(), dtheta.end(), 0.0);
    const CgReport lin = bicgstab_solve(full_jacobian, jac.diagonal(), jac.active, rhs, dtheta, cfg.linear_rtol);
    if (!lin.converged) {
      // Picard step with the symmetric part.
      std::fill(dtheta.begin(), dtheta.end(), 0.0);
      pcg_solve(jac, rhs, dtheta, cfg.linear_rtol);
    }

    double lambda = 1.0;
    bool accepted = false;
    for (int cut = 0; cut < 40 && !accepted; ++cut) {
      accepted = true;
      for (int c : cells) {
        const auto i = static_cast<std::size_t>(c);
        e_trial[i] = e_new[i] + lambda * cap[i] * dtheta[i];
        try {
          theta_trial[i] = invert_energy(e_trial[i], z_new[i], psi);
        } catch (const DomainError&) {
          accepted = false;
          break;
        }
        if (!(theta_trial[i] > cfg.theta_floor)) {
          accepted = false;
          break;
        }
      }
      if (accepted && lambda < 1.0) {
        // Backtrack on the residual once the full step was rejected.
        const double rt = residual(theta_trial, e_trial, res_trial);
        if (!(rt < r)) accepted = false;
      }
      if (!accepted) {
        lambda *= 0.5;
        ++rep.line_search_cuts;
      }
    }
    if (!accepted) throw SolverError("heat_step: line search failed to keep theta above the floor");
    double dmax = 0.0;
    for (int c : cells) {
      const auto i = static_cast<std::size_t>(c);
      dmax = std::max(dmax, std::abs(theta_trial[i] - theta_new[i]) / theta_new[i]);
      theta_new[i] = theta_trial[i];
      e_new[i] = e_trial[i];
    }
    if (dmax <= 4e-16) {
      update_transmissibility(theta_new);
      rep.residual = residual(theta_new, e_new, res);
      rep.residual_history.push_back(rep.residual);
      if (rep.residual <= 1e3 * tol) return rep;
      break;
    }
  }
  std::string hist;
  for (double r : rep.residual_history) hist += " " + std::to_string(r * 1e12);
  throw SolverError("heat_step: Newton did not converge (residual history x1e12:" + hist + ", residual " + std::to_string(rep.residual) +
                    ", tolerance " + std::to_string(tol) + ")");
}

EntropyRow entropy_production_step(const RegionGrid& g, const ScalarField& theta_new,
                                   const ScalarField& theta_old, const ScalarField& z_new,
                                   const ScalarField& z_old, const ScalarField& joule,
                                   const ScalarField& reg_power, double dt, const MaterialLaws& laws,
                                   const HeatStepConfig& cfg, const ScalarField& weight_old,
                                   const ScalarField& weight_new) {
  const FreeEnergyLaw& psi = laws.psi();
  const double vol = g.cell_volume();
  Sum ds, wr, joule_s, phase_s, pos_s, reg_s, tau_s;
  for (int c : g.workpiece_cells()) {
    const auto i = static_cast<std::size_t>(c);
    const double s1 = entropy_density(theta_new[i], z_new[i], psi);
    const double s0 = entropy_density(theta_old[i], z_old[i], psi);
    const double w = weight_new[i];
    ds.add(vol * (w * s1 - weight_old[i] * s0));
    wr.add(vol * s0 * (w - weight_old[i]));
    const double th = theta_new[i];
    const double dz = z_new[i] - z_old[i];
    joule_s.add(vol * dt * w * joule[i] / th);
    reg_s.add(vol * dt * w * reg_power[i] / th);
    pos_s.add(vol * dt * w * cfg.eps_pos / (th * th * th));
    phase_s.add(vol * w * (-psi.psi_z(th, z_new[i])) * dz / th);
    tau_s.add(vol * w * laws.tau(th) * dz * dz / (dt * th));
  }
  const auto& faces = g.workpiece_faces();
  const FaceField kf = face_conductivity(g, regularized_conductivity(g, theta_new, z_new, laws, cfg.eps_cond));
  Sum cond, cross;
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto a = static_cast<std::size_t>(faces[k].a), b = static_cast<std::size_t>(faces[k].b);
    const double ta = theta_new[a], tb = theta_new[b];
    const double t_f = kf[k] * faces[k].transmissibility();
    const double dth = tb - ta;
    cond.add(dt * t_f * 0.5 * (weight_new[a] + weight_new[b]) * dth * dth / (ta * tb));
    cross.add(dt * t_f * dth * (weight_new[b] - weight_new[a]) * 0.5 * (1.0 / ta + 1.0 / tb));
  }
  EntropyRow row;
  row.entropy_change = ds.value();
  row.weight_rate = wr.value();
  row.conduction = cond.value();
  row.joule = joule_s.value();
  row.phase = phase_s.value();
  row.positivity = pos_s.value();
  row.regularization = reg_s.value();
  row.cross = cross.value();
  row.tau_rate = tau_s.value();
  row.slack = row.lhs() - row.rhs();
  row.scale = std::max({std::abs(row.entropy_change), std::abs(row.weight_rate), row.conduction,
                        row.joule, std::abs(row.phase), row.positivity, row.regularization,
                        std::abs(row.cross)});
  return row;
}

}  // namespace inductherm
