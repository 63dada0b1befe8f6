#pragma once

// Backward-Euler step for the out-of-plane vector potential
//   sigma_eff dA/dt - div(mu(z)^-1 grad A) = J_s   on D,  A = 0 on the edge of D.

#include <utility>
#include <vector>

#include <json.hpp>

#include "inductherm/geometry.hpp"
#include "inductherm/materials.hpp"

namespace inductherm {

/// Source current density waveform, applied with each inductor cell's polarity.
struct SourceModel {
  enum class Kind { Sinusoid, RampedSinusoid, Tabulated };
  Kind kind = Kind::Sinusoid;
  double frequency = 0.0;  // Hz
  double amplitude = 0.0;  // A/m^2
  double phase = 0.0;      // rad
  double ramp_time = 0.0;  // s, ramped kind only
  std::vector<std::pair<double, double>> table;  // (t, amplitude), tabulated kind only

  double waveform(double t) const;
  /// J_s on D: waveform(t) times polarity on inductor cells, 0 elsewhere.
  ScalarField density(const RegionGrid& g, double t) const;

  static SourceModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// sigma(theta) on the workpiece, sigma_cond on the inductor, eps_air in air.
ScalarField effective_conductivity(const RegionGrid& g, const ScalarField& theta,
                                   const MaterialLaws& laws, double eps_air);
/// 1/mu per cell: mu_work(z) on the workpiece, constants elsewhere.
ScalarField reluctivity(const RegionGrid& g, const ScalarField& z, const MaterialLaws& laws);
/// Face reluctivity: the arithmetic mean of the two cells' 1/mu, i.e. the
/// harmonic mean of mu. Boundary faces take the cell value.
FaceField face_reluctivity(const RegionGrid& g, const ScalarField& nu);

/// Magnetic energy sum_f nu_f |grad A|_f^2 / 2 times the face weight.
double magnetic_energy(const RegionGrid& g, const ScalarField& nu, const ScalarField& a);

struct EmStepOptions {
  double eps_air = 1e-6;
  double cg_rtol = 1e-10;
  int cg_max_iter = 0;  // 0: 10 * cells
  const ScalarField* extra_source = nullptr;  // added to J_s (manufactured solutions)
};

struct EmStepReport {
  int iterations = 0;
  double residual = 0.0;
  ScalarField joule;           // sigma(theta) |dA/dt|^2 on the workpiece, 0 elsewhere
  double magnetic_energy = 0.0;
};

/// Advances a_old to a_new. theta and z are read on workpiece cells only.
/// Throws DomainError for non-positive theta and SolverError when CG fails.
EmStepReport em_step(const RegionGrid& g, const ScalarField& a_old, const ScalarField& theta,
                     const ScalarField& z, double t_new, double dt, const MaterialLaws& laws,
                     const SourceModel& source, const EmStepOptions& opt, ScalarField& a_new);

/// sigma(theta) ((a_new - a_old)/dt)^2 on workpiece cells, 0 elsewhere.
ScalarField joule_power(const RegionGrid& g, const ScalarField& a_new, const ScalarField& a_old,
                        double dt, const ScalarField& theta, const MaterialLaws& laws);

}  // namespace inductherm
