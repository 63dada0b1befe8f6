#pragma once

// Free energy, material coefficient laws and the thermodynamic potentials
// derived from them.

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace inductherm {

/// Raised when a material evaluation leaves its domain (negative temperature,
/// energy outside the invertible range, ...).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Admissible (theta, z) box used for sampling and for the inverse maps.
struct ThermoBox {
  double theta_min = 1.0;     // K
  double theta_max = 2000.0;  // K
  double z_min = 0.0;
  double z_max = 1.0;
};

/// psi(theta, z) together with its first and second partial derivatives.
class FreeEnergyLaw {
 public:
  virtual ~FreeEnergyLaw() = default;

  virtual double psi(double theta, double z) const = 0;
  virtual double psi_theta(double theta, double z) const = 0;
  virtual double psi_z(double theta, double z) const = 0;
  virtual double psi_thetatheta(double theta, double z) const = 0;
  virtual double psi_ztheta(double theta, double z) const = 0;
  virtual double psi_zz(double theta, double z) const = 0;

  /// False where psi is not three times continuously differentiable in a
  /// neighbourhood reachable by the phase kinetics.
  virtual bool c3_smooth_at(double /*theta*/, double /*z*/) const { return true; }

  /// Lower bound on the heat capacity used for the inverse-map initial guess.
  virtual double heat_capacity_hint() const { return 1.0; }

  ThermoBox box;
};

/// Tanh-shaped equilibrium phase fraction,
/// z_eq(theta) = z_sat (1 + tanh((theta - mid) / width)) / 2.
struct EquilibriumPhase {
  double mid = 900.0;    // K
  double width = 50.0;   // K
  double saturation = 1.0;

  double value(double theta) const;
  double d1(double theta) const;
  double d2(double theta) const;
};

/// psi = -c_v theta (log theta - 1) + L (z_eq(theta) - z)_+^2.
///
/// Only C^{1,1}: second derivatives at the kink z = z_eq(theta) are taken
/// from the transforming branch z < z_eq, so psi_zz = 2L there.
class DefaultSteelLaw final : public FreeEnergyLaw {
 public:
  DefaultSteelLaw() = default;
  DefaultSteelLaw(EquilibriumPhase zeq, double heat_capacity, double latent);

  double psi(double theta, double z) const override;
  double psi_theta(double theta, double z) const override;
  double psi_z(double theta, double z) const override;
  double psi_thetatheta(double theta, double z) const override;
  double psi_ztheta(double theta, double z) const override;
  double psi_zz(double theta, double z) const override;
  bool c3_smooth_at(double theta, double z) const override;
  double heat_capacity_hint() const override;

  const EquilibriumPhase& z_eq() const { return zeq_; }
  double heat_capacity() const { return cv_; }
  double latent() const { return latent_; }

 private:
  // (z_eq - z)_+ and the branch indicator (1 on z <= z_eq).
  double gap(double theta, double z) const;
  double branch(double theta, double z) const;

  EquilibriumPhase zeq_{};
  double cv_ = 1.0;
  double latent_ = 1.0;
};

/// Scalar coefficient law f(x) with first and second derivatives.
///
/// Kinds:
///   constant        f = value
///   rational_decay  f = low + (high - low) / (1 + (x/scale)^2)
///   sqrt_quadratic  f = scale * sqrt(q0 + q1 x + q2 x^2)
///   quadratic       f = c0 + c1 x + c2 x^2
///   arctan          f = offset + amplitude * atan(x / scale)
class CoefficientLaw {
 public:
  enum class Kind { Constant, RationalDecay, SqrtQuadratic, Quadratic, Arctan };

  static CoefficientLaw constant(double value);
  static CoefficientLaw rational_decay(double low, double high, double scale);
  static CoefficientLaw sqrt_quadratic(double scale, double q0, double q1, double q2);
  static CoefficientLaw quadratic(double c0, double c1, double c2);
  static CoefficientLaw arctan(double offset, double amplitude, double scale);
  static CoefficientLaw from_json(const nlohmann::json& j);

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  double d1(double x) const;
  double d2(double x) const;

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  nlohmann::json to_json() const;

 private:
  CoefficientLaw(Kind kind, double a, double b, double c, double d)
      : kind_(kind), a_(a), b_(b), c_(c), d_(d) {}
  Kind kind_ = Kind::Constant;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0, d_ = 0.0;
};

/// Every material function of the model. Immutable after construction.
struct MaterialLaws {
  std::shared_ptr<const FreeEnergyLaw> free_energy;
  CoefficientLaw kappa_theta = CoefficientLaw::constant(1.0);  // W/(m K)
  CoefficientLaw kappa_phase = CoefficientLaw::constant(1.0);  // dimensionless
  CoefficientLaw sigma_work = CoefficientLaw::constant(1.0);   // S/m
  double sigma_cond = 1.0;                                      // S/m
  CoefficientLaw mu_work = CoefficientLaw::constant(1.0);      // H/m
  double mu_cond = 1.0;                                         // H/m
  double mu_air = 1.0;                                          // H/m
  CoefficientLaw tau = CoefficientLaw::constant(1.0);          // s

  const FreeEnergyLaw& psi() const { return *free_energy; }
  double kappa(double theta, double z) const {
    return kappa_theta(theta) * kappa_phase(z);
  }
};

/// e = psi - theta psi_theta. Throws DomainError for theta < 0.
double internal_energy(double theta, double z, const FreeEnergyLaw& law);

/// s = -psi_theta. Throws DomainError for theta <= 0.
double entropy_density(double theta, double z, const FreeEnergyLaw& law);

/// Heat capacity -theta psi_thetatheta, the derivative of e in theta.
double heat_capacity(double theta, double z, const FreeEnergyLaw& law);

/// Temperature with internal_energy(theta, z) == e_val on [0, box.theta_max].
/// Safeguarded Newton with bisection fallback; throws DomainError when e_val
/// has no preimage.
double invert_energy(double e_val, double z, const FreeEnergyLaw& law);

/// log theta with entropy_density(theta, z) == s_val on
/// [log box.theta_min, log box.theta_max].
double invert_entropy(double s_val, double z, const FreeEnergyLaw& law);

/// Builds the material set from the `materials` config section.
MaterialLaws materials_from_json(const nlohmann::json& section);

}  // namespace inductherm
