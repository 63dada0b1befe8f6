#pragma once

// Implicit energy balance on the workpiece in conservative form
//   (e_new - e_old)/dt - div(kappa_eps grad theta_new) = P + eps_pos / theta_new^2,
// theta_new = e_hat(e_new, z_new), homogeneous Neumann on the workpiece boundary,
// plus the discrete entropy ledger of a step.

#include <vector>

#include "inductherm/geometry.hpp"
#include "inductherm/materials.hpp"

namespace inductherm {

struct HeatStepConfig {
  double eps_pos = 0.0;    // coefficient of the eps / theta^2 positivity source
  double eps_cond = 0.0;   // conductivity augmentation kappa + eps theta^2
  double newton_rtol = 1e-13;
  double newton_atol = 0.0;
  int newton_max_iter = 40;
  double theta_floor = 1e-8;  // K
  double linear_rtol = 1e-13;
};

struct HeatStepReport {
  int newton_iterations = 0;
  int line_search_cuts = 0;
  double residual = 0.0;                 // final max-norm residual per unit volume
  std::vector<double> residual_history;  // max-norm residual before each update
};

/// kappa(theta, z) + eps_cond theta^2 per workpiece cell.
ScalarField regularized_conductivity(const RegionGrid& g, const ScalarField& theta,
                                     const ScalarField& z, const MaterialLaws& laws, double eps_cond);
/// Harmonic mean of the cell conductivities on workpiece faces.
FaceField face_conductivity(const RegionGrid& g, const ScalarField& kappa_cells);

/// Solves the step for e_new (and theta_new = e_hat(e_new, z_new)). `power` is
/// the explicit volumetric heating (Joule and regularization terms); theta_new
/// on entry is the initial Newton guess. Throws SolverError / DomainError.
HeatStepReport heat_step(const RegionGrid& g, const ScalarField& e_old, const ScalarField& z_new,
                         const ScalarField& power, double dt, const MaterialLaws& laws,
                         const HeatStepConfig& cfg, ScalarField& theta_new, ScalarField& e_new);

/// One row of the discrete entropy balance with test weight vartheta.
/// With vartheta >= 0 the scheme guarantees slack >= 0 up to round-off.
struct EntropyRow {
  double entropy_change = 0.0;  // sum V (vartheta^{n+1} s^{n+1} - vartheta^n s^n)
  double weight_rate = 0.0;     // sum V s^n (vartheta^{n+1} - vartheta^n)
  double conduction = 0.0;      // dt int vartheta kappa |grad log theta|^2
  double joule = 0.0;           // dt int vartheta P_joule / theta
  double phase = 0.0;           // dt int vartheta (-psi_z) dz/dt / theta
  double positivity = 0.0;      // dt int vartheta eps / theta^3
  double regularization = 0.0;  // dt int vartheta P_reg / theta
  double cross = 0.0;           // dt int kappa grad log theta . grad vartheta
  double tau_rate = 0.0;        // dt int vartheta tau |dz/dt|^2 / theta (informational)
  double slack = 0.0;           // lhs - rhs, >= 0 for the discrete inequality
  double scale = 0.0;           // largest term magnitude

  double lhs() const { return entropy_change - weight_rate; }
  double rhs() const { return conduction + joule + phase + positivity + regularization - cross; }
};

EntropyRow entropy_production_step(const RegionGrid& g, const ScalarField& theta_new,
                                   const ScalarField& theta_old, const ScalarField& z_new,
                                   const ScalarField& z_old, const ScalarField& joule,
                                   const ScalarField& reg_power, double dt, const MaterialLaws& laws,
                                   const HeatStepConfig& cfg, const ScalarField& weight_old,
                                   const ScalarField& weight_new);

}  // namespace inductherm
