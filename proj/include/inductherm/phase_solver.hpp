#pragma once

// Backward-Euler step for tau(theta) dz/dt - delta tau Laplace z + psi_z(theta, z) = 0
// on the workpiece (homogeneous Neumann for delta > 0).

#include "inductherm/geometry.hpp"
#include "inductherm/materials.hpp"

namespace inductherm {

struct PhaseStepOptions {
  double delta = 0.0;        // diffusion regularization, m^2/s
  double newton_tol = 1e-14;
  int newton_max_iter = 60;
  double cg_rtol = 1e-12;
};

struct PhaseStepReport {
  int newton_iterations = 0;  // max over cells for delta = 0
  double residual = 0.0;
};

/// Reads theta on workpiece cells; z_new receives the workpiece update and
/// keeps z_old elsewhere. Throws SolverError on Newton failure.
PhaseStepReport phase_step(const RegionGrid& g, const ScalarField& z_old, const ScalarField& theta,
                           double dt, const MaterialLaws& laws, const PhaseStepOptions& opt,
                           ScalarField& z_new);

/// tau(theta) ((z_new - z_old)/dt)^2 on workpiece cells, 0 elsewhere.
ScalarField phase_dissipation(const RegionGrid& g, const ScalarField& z_new, const ScalarField& z_old,
                              const ScalarField& theta, double dt, const MaterialLaws& laws);

}  // namespace inductherm
