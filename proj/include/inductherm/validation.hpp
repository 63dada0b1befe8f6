#pragma once

// Sampled checks of the structural hypotheses on the material laws.

#include <cstdint>
#include <string>
#include <vector>

#include "inductherm/materials.hpp"

namespace inductherm {

enum class AssumptionLevel { A1, A2 };

/// One clause of the validator with its empirical extremal value.
struct ClauseResult {
  std::string name;
  AssumptionLevel level = AssumptionLevel::A1;
  bool passed = true;
  double value = 0.0;  // extremal value that decided the clause
  double theta = 0.0;  // location of the extremum (NaN when not applicable)
  double z = 0.0;
  std::string detail;
};

/// Empirical constants measured on the sample set. The analysis only asserts
/// that such constants exist; these are the numbers the diagnostics use.
struct EmpiricalConstants {
  double heat_c = 0.0, heat_C = 0.0;  // c <= -theta psi_thetatheta <= C
  double psi_z_C = 0.0;               // |psi_z| <= C
  double psi_zz_C = 0.0;              // |psi_zz| <= C
  double psi_zz_c = 0.0;              // min psi_zz (convexity in z)
  double psi_ztheta_C = 0.0;          // |(1 + theta) psi_ztheta| <= C
  double e_z_C = 0.0;                 // |psi_z - theta psi_ztheta| <= C
  double energy_c = 0.0, energy_C = 0.0;    // c(theta-1) <= e <= C(theta+1)
  double entropy_c = 0.0, entropy_C = 0.0;  // c(log theta-1) <= -psi_theta <= C(log theta+1)
  double kappa_min = 0.0, kappa_max = 0.0;
  double tau_min = 0.0, tau_max = 0.0;
  double sigma_min = 0.0, sigma_max = 0.0;
  double mu_min = 0.0, mu_max = 0.0;  // over the workpiece law and the constants

  /// Ratio of the largest upper constant to the smallest lower one; used as
  /// the multiplier of the Gronwall coefficient.
  double gronwall_multiplier() const;
};

struct ValidationReport {
  AssumptionLevel level = AssumptionLevel::A1;
  std::vector<ClauseResult> clauses;
  EmpiricalConstants constants;
  std::size_t samples = 0;

  bool passed() const;
  bool passed(AssumptionLevel level) const;
  const ClauseResult* find(const std::string& name) const;
  std::string to_text() const;
  std::string to_kv() const;
};

struct SamplingSpec {
  int grid_theta = 64;
  int grid_z = 64;
  int quasi_random = 1000;
  std::uint64_t seed = 0;  // shifts the quasi-random sequence
};

/// Sample points: a log-spaced tensor grid in theta times a uniform grid in z,
/// plus a Halton sequence, all inside the law's admissible box.
std::vector<std::pair<double, double>> sample_points(const ThermoBox& box, const SamplingSpec& spec);

ValidationReport validate_assumptions(const MaterialLaws& laws, AssumptionLevel level,
                                      const SamplingSpec& spec = {});

/// Result of a brute-force calibrated inequality check.
struct InequalityCheck {
  double constant = 0.0;        // calibrated constant
  bool passed = true;
  std::size_t violations = 0;   // on the fine grid
  std::size_t evaluated = 0;
  double worst_ratio = 0.0;     // largest lhs/rhs found on the fine grid
};

/// |f(x)-f(y)|^2 (1 + |log x - log y|) <= (c/y)(x - y - y(log x - log y)),
/// calibrated on a coarse log-spaced grid over [lo, hi]^2 (polished by a
/// local pattern search) and then asserted on a grid `refine` times finer.
InequalityCheck check_sqrt_log_inequality(const CoefficientLaw& f, double lo, double hi,
                                          int coarse = 50, int refine = 4);

/// (f(z)-f(zt))(theta-thetat) <= C((z-zt)^2 + theta - thetat - thetat log(theta/thetat)),
/// calibrated on a coarse tensor grid over ([z_lo,z_hi] x [t_lo,t_hi])^2 and
/// asserted on a grid `refine` times finer.
InequalityCheck check_fenchel_inequality(const CoefficientLaw& f, double z_lo, double z_hi,
                                         double t_lo, double t_hi, int coarse = 50,
                                         int refine = 4);

/// The sqrt-log inequality for sigma_work, tau and kappa_theta over the
/// temperature range of the box and the Fenchel-type inequality for mu_work
/// over the whole box.
struct CoefficientChecks {
  InequalityCheck sigma, tau, kappa, mu;
  bool passed() const { return sigma.passed && tau.passed && kappa.passed && mu.passed; }
  std::string to_text() const;
};

CoefficientChecks check_coefficient_inequalities(const MaterialLaws& laws, int coarse = 50, int refine = 4);

const char* to_string(AssumptionLevel level);

}  // namespace inductherm
