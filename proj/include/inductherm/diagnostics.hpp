#pragma once

// Runtime certificates: energy and entropy ledgers, relative energy and
// dissipation, the Gronwall coefficient, the positivity lower bound, the
// comparison-principle envelope and the a priori norm tracker.

#include <array>
#include <string>
#include <vector>

#include "inductherm/em_solver.hpp"
#include "inductherm/geometry.hpp"
#include "inductherm/heat_solver.hpp"
#include "inductherm/materials.hpp"
#include "inductherm/validation.hpp"

namespace inductherm {

/// Solution triple at one time level with cached internal energy.
struct SimState {
  double t = 0.0;
  int step = 0;
  ScalarField theta, z, a, e;
};

// ---------------------------------------------------------------------------
// Energy ledger

struct EnergyRow {
  double t = 0.0;
  double internal_energy = 0.0;     // int_Omega e
  double magnetic_energy = 0.0;     // int_D |grad A|^2 / (2 mu(z))
  double mu_term = 0.0;             // accumulated mu'(z) dz/dt |curl A|^2 / (2 mu^2)
  double dissipation_out = 0.0;     // accumulated sigma_out |dA/dt|^2 on D minus Omega
  double source_work = 0.0;         // accumulated J_s . dA/dt on the inductor
  double regularization = 0.0;      // accumulated eps/theta^2 and delta heating
  double slack = 0.0;               // rhs - lhs, >= 0 for the inequality
  double step_slack = 0.0;          // the same for this step's increments alone
  double scale = 0.0;               // largest term magnitude

  double lhs(const EnergyRow& first) const {
    return internal_energy - first.internal_energy + magnetic_energy - first.magnetic_energy + mu_term +
           dissipation_out;
  }
};

/// Inputs of one ledger step beyond the two states.
struct StepTerms {
  double dt = 0.0;
  ScalarField source;     // J_s(t_new) on D
  ScalarField reg_power;  // explicit regularization heating on Omega
  double eps_air = 0.0;
  double eps_pos = 0.0;
};

class EnergyLedger {
 public:
  EnergyLedger() = default;
  EnergyLedger(const RegionGrid& g, const MaterialLaws& laws, const SimState& s0);
  const EnergyRow& update(const RegionGrid& g, const MaterialLaws& laws, const SimState& old_s,
                          const SimState& new_s, const StepTerms& terms);
  const std::vector<EnergyRow>& rows() const { return rows_; }
  /// Restores accumulators after a restart.
  void restore(const std::vector<EnergyRow>& rows) { rows_ = rows; }

 private:
  std::vector<EnergyRow> rows_;
};

// ---------------------------------------------------------------------------
// Entropy ledger

/// Smooth test weight vartheta(x, t) >= 0 on the workpiece.
struct WeightSpec {
  enum class Kind { Uniform, Cosine };
  Kind kind = Kind::Uniform;
  double amplitude = 0.5;  // cosine: 1 + a cos(pi xh) cos(pi yh), |a| < 1
  double growth = 0.0;     // multiplied by (1 + growth t)
  std::string name() const;
  ScalarField field(const RegionGrid& g, double t) const;
};

struct EntropyLedgerRow {
  double t = 0.0;
  EntropyRow step;
  double total_entropy = 0.0;  // int vartheta s at t
};

class EntropyLedger {
 public:
  EntropyLedger() = default;
  explicit EntropyLedger(WeightSpec w) : weight_(w) {}
  const EntropyLedgerRow& update(const RegionGrid& g, const MaterialLaws& laws,
                                 const HeatStepConfig& heat, const SimState& old_s,
                                 const SimState& new_s, const ScalarField& joule,
                                 const ScalarField& reg_power);
  const std::vector<EntropyLedgerRow>& rows() const { return rows_; }
  const WeightSpec& weight() const { return weight_; }

 private:
  WeightSpec weight_;
  std::vector<EntropyLedgerRow> rows_;
};

// ---------------------------------------------------------------------------
// Relative energy

inline constexpr std::array<const char*, 7> kRelEnergyGroupNames = {
    "energy",            // int e(theta, z)
    "magnetic",          // int |curl A|^2 / (2 mu(z))
    "energy_strong",     // - int e(thetat, zt)
    "magnetic_strong",   // - int |curl At|^2 / (2 mu(zt))
    "phase_linear",      // - int psi_z(thetat, zt)(z - zt)
    "entropy_linear",    // int thetat (psi_theta(theta, z) - psi_theta(thetat, zt))
    "curl_linear"};      // - int [curl At . (curl A - curl At) / mu(zt) - mu'(zt) |curl At|^2 (z - zt) / (2 mu(zt)^2)]

struct RelEnergy {
  std::array<double, 7> groups{};
  double total = 0.0;  // assembled cell/face-wise so that u = ut gives exactly 0
};

RelEnergy relative_energy(const RegionGrid& g, const MaterialLaws& laws, const SimState& u,
                          const SimState& ut);

struct LowerBound {
  double value = 0.0;
  double c_theta = 0.0, c_z = 0.0;
  int worst_cell = -1;       // cell with the smallest local margin
  double worst_margin = 0.0; // local integrand minus local bound there
};

/// c int Bregman_log(theta, thetat) + c_z int |z - zt|^2 + c_B int |curl A - curl At|^2,
/// with c from the validator's constants.
LowerBound relative_energy_lower_bound(const RegionGrid& g, const MaterialLaws& laws,
                                       const EmpiricalConstants& k, const SimState& u,
                                       const SimState& ut);

/// Relative dissipation over one step, with rates by backward differences.
double relative_dissipation(const RegionGrid& g, const MaterialLaws& laws, double eps_air,
                            double eps_cond, const SimState& u_old, const SimState& u,
                            const SimState& ut_old, const SimState& ut, double dt);

struct GronwallTerms {
  std::array<double, 7> norms{};  // the seven sup norms in the order of the coefficient
  double multiplier = 0.0;
  double value = 0.0;
};

GronwallTerms gronwall_coefficient(const RegionGrid& g, const MaterialLaws& laws, double eps_cond,
                                   double multiplier, const SimState& ut_old, const SimState& ut,
                                   const SimState& u_old, const SimState& u, double dt);

// ---------------------------------------------------------------------------
// Trackers

/// Spatially constant sub/super solutions of the discrete energy balance.
class ComparisonTracker {
 public:
  ComparisonTracker() = default;
  ComparisonTracker(const EmpiricalConstants& k, double theta_min0, double theta_max0);
  /// Advances the bounds and checks min/max theta of new_s against them.
  bool update(const RegionGrid& g, const SimState& old_s, const SimState& new_s,
              const ScalarField& power, double dt, double eps_pos);
  double sub() const { return sub_; }
  double super() const { return sup_; }
  bool ok() const { return ok_; }
  double worst_margin() const { return worst_; }
  void restore(double sub, double super, double worst, bool ok) {
    sub_ = sub;
    sup_ = super;
    worst_ = worst;
    ok_ = ok;
  }

 private:
  double heat_c_ = 1.0, e_z_ = 0.0;
  double sub_ = 0.0, sup_ = 0.0;
  double worst_ = 0.0;
  bool ok_ = true;
};

struct AprioriNorms {
  double theta_linf_l1 = 0.0;    // max_t int theta
  double grad_log_l2l2 = 0.0;    // (sum dt int |grad log theta|^2)^(1/2)
  double z_w1inf_linf = 0.0;     // max(|z|, |dz/dt|)
  double a_linf_hcurl = 0.0;     // max_t (int A^2 + |curl A|^2)^(1/2)
  double dz_dt_max = 0.0;        // max |dz/dt|
};

class NormTracker {
 public:
  void start(const RegionGrid& g, const SimState& s0);
  void update(const RegionGrid& g, const SimState& old_s, const SimState& new_s, double dt);
  AprioriNorms norms() const;
  double grad_log_sq() const { return grad_log_sq_; }
  void restore(const AprioriNorms& n, double grad_log_sq) {
    n_ = n;
    grad_log_sq_ = grad_log_sq;
  }

 private:
  AprioriNorms n_;
  double grad_log_sq_ = 0.0;
};

}  // namespace inductherm
