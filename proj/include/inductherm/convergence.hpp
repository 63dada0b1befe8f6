#pragma once

// Manufactured-solution studies for the heat and vector-potential solvers,
// the closed-form phase ODE oracle and the skin-depth probe.

#include <string>
#include <vector>

#include "inductherm/config.hpp"

namespace inductherm {

struct ConvergenceStudy {
  std::string name;
  std::string parameter;        // "h" or "dt"
  std::vector<double> steps;    // h or dt per level, coarse to fine
  std::vector<double> errors;   // discrete L2 error per level
  std::vector<double> orders;   // log2-type observed orders between levels
  double min_order_required = 0.0;
  double max_order_allowed = 1e300;
  bool passed() const;
  double min_order() const;
};

/// theta* = 2 + cos(pi x) cos(pi y)(1 + t)/2 on the unit square with nonlinear
/// conductivity; linear in t so the error is purely spatial.
ConvergenceStudy heat_spatial_study(const std::vector<int>& grids = {32, 64, 128});
/// Spatially uniform theta*(t) on the transforming branch (nonlinear e).
ConvergenceStudy heat_temporal_study(const std::vector<double>& dts = {0.05, 0.025, 0.0125});
/// A* = sin(pi x) sin(pi y)(1 + t) with unit sigma and mu.
ConvergenceStudy em_spatial_study(const std::vector<int>& grids = {32, 64, 128});
/// A* = sin(pi x) sin(pi y) cos(2 pi t); forcing uses the discrete eigenvalue
/// so only the time error remains.
ConvergenceStudy em_temporal_study(const std::vector<double>& dts = {0.02, 0.01, 0.005});
/// Backward-Euler error of the phase ODE against z_eq - (z_eq - z0) exp(-2 L t / tau);
/// the error ratio per halving must lie in [1.6, 2.4].
ConvergenceStudy phase_ode_study(const std::vector<double>& dts = {0.1, 0.05, 0.025, 0.0125});

std::vector<ConvergenceStudy> convergence_suite();

struct SkinDepthResult {
  double frequency = 0.0;
  double depth = 0.0;            // distance from the surface cell where power falls to 1/e
  bool reached = false;          // false when the power never drops that far
  std::vector<double> profile;   // period-averaged Joule power per row from the top surface
};

/// Runs the vector-potential equation alone at the config's initial
/// temperature and phase for `periods` source periods and measures the depth
/// of the period-averaged Joule power below the top of the workpiece.
SkinDepthResult skin_depth(const RunConfig& cfg, double frequency, int periods = 3, int steps_per_period = 40);

}  // namespace inductherm
