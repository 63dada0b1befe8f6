#include "inductherm/materials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace inductherm {

namespace {

constexpr double kInverseAtol = 1e-12;
constexpr int kInverseMaxIter = 100;

double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

}  // namespace

// ---------------------------------------------------------------------------
// EquilibriumPhase

double EquilibriumPhase::value(double theta) const {
  return 0.5 * saturation * (1.0 + std::tanh((theta - mid) / width));
}

double EquilibriumPhase::d1(double theta) const {
  return 0.5 * saturation * sech2((theta - mid) / width) / width;
}

double EquilibriumPhase::d2(double theta) const {
  const double u = (theta - mid) / width;
  return -saturation * sech2(u) * std::tanh(u) / (width * width);
}

// ---------------------------------------------------------------------------
// DefaultSteelLaw

DefaultSteelLaw::DefaultSteelLaw(EquilibriumPhase zeq, double heat_capacity, double latent)
    : zeq_(zeq), cv_(heat_capacity), latent_(latent) {}

double DefaultSteelLaw::gap(double theta, double z) const {
  return std::max(0.0, zeq_.value(theta) - z);
}

double DefaultSteelLaw::branch(double theta, double z) const {
  return z <= zeq_.value(theta) ? 1.0 : 0.0;
}

double DefaultSteelLaw::psi(double theta, double z) const {
  const double g = gap(theta, z);
  const double thermal = theta > 0.0 ? -cv_ * theta * (std::log(theta) - 1.0) : 0.0;
  return thermal + latent_ * g * g;
}

double DefaultSteelLaw::psi_theta(double theta, double z) const {
  return -cv_ * std::log(theta) + 2.0 * latent_ * gap(theta, z) * zeq_.d1(theta);
}

double DefaultSteelLaw::psi_z(double theta, double z) const {
  return -2.0 * latent_ * gap(theta, z);
}

double DefaultSteelLaw::psi_thetatheta(double theta, double z) const {
  const double d1 = zeq_.d1(theta);
  return -cv_ / theta +
         2.0 * latent_ * (branch(theta, z) * d1 * d1 + gap(theta, z) * zeq_.d2(theta));
}

double DefaultSteelLaw::psi_ztheta(double theta, double z) const {
  return -2.0 * latent_ * branch(theta, z) * zeq_.d1(theta);
}

double DefaultSteelLaw::psi_zz(double theta, double z) const {
  return 2.0 * latent_ * branch(theta, z);
}

bool DefaultSteelLaw::c3_smooth_at(double theta, double z) const {
  return z >= zeq_.value(theta);
}

double DefaultSteelLaw::heat_capacity_hint() const { return cv_; }

// ---------------------------------------------------------------------------
// CoefficientLaw

CoefficientLaw CoefficientLaw::constant(double value) {
  return {Kind::Constant, value, 0.0, 0.0, 0.0};
}

CoefficientLaw CoefficientLaw::rational_decay(double low, double high, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("rational_decay: scale must be positive");
  return {Kind::RationalDecay, low, high, scale, 0.0};
}

CoefficientLaw CoefficientLaw::sqrt_quadratic(double scale, double q0, double q1, double q2) {
  return {Kind::SqrtQuadratic, scale, q0, q1, q2};
}

CoefficientLaw CoefficientLaw::quadratic(double c0, double c1, double c2) {
  return {Kind::Quadratic, c0, c1, c2, 0.0};
}

CoefficientLaw CoefficientLaw::arctan(double offset, double amplitude, double scale) {
  if (scale <= 0.0) throw std::invalid_argument("arctan: scale must be positive");
  return {Kind::Arctan, offset, amplitude, scale, 0.0};
}

double CoefficientLaw::value(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return a_;
    case Kind::RationalDecay: {
      const double u = x / c_;
      return a_ + (b_ - a_) / (1.0 + u * u);
    }
    case Kind::SqrtQuadratic: {
      const double q = b_ + c_ * x + d_ * x * x;
      if (q <= 0.0) throw DomainError("sqrt_quadratic law evaluated outside its positive range");
      return a_ * std::sqrt(q);
    }
    case Kind::Quadratic:
      return a_ + b_ * x + c_ * x * x;
    case Kind::Arctan:
      return a_ + b_ * std::atan(x / c_);
  }
  return 0.0;
}

double CoefficientLaw::d1(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::RationalDecay: {
      const double u = x / c_;
      const double den = 1.0 + u * u;
      return -(b_ - a_) * 2.0 * u / (c_ * den * den);
    }
    case Kind::SqrtQuadratic: {
      const double q = b_ + c_ * x + d_ * x * x;
      if (q <= 0.0) throw DomainError("sqrt_quadratic law evaluated outside its positive range");
      return a_ * (c_ + 2.0 * d_ * x) / (2.0 * std::sqrt(q));
    }
    case Kind::Quadratic:
      return b_ + 2.0 * c_ * x;
    case Kind::Arctan: {
      const double u = x / c_;
      return b_ / (c_ * (1.0 + u * u));
    }
  }
  return 0.0;
}

double CoefficientLaw::d2(double x) const {
  switch (kind_) {
    case Kind::Constant:
      return 0.0;
    case Kind::RationalDecay: {
      const double u = x / c_;
      const double den = 1.0 + u * u;
      return (b_ - a_) * (6.0 * u * u - 2.0) / (c_ * c_ * den * den * den);
    }
    case Kind::SqrtQuadratic: {
      const double q = b_ + c_ * x + d_ * x * x;
      if (q <= 0.0) throw DomainError("sqrt_quadratic law evaluated outside its positive range");
      const double qp = c_ + 2.0 * d_ * x;
      return a_ * (2.0 * d_ / (2.0 * std::sqrt(q)) - qp * qp / (4.0 * q * std::sqrt(q)));
    }
    case Kind::Quadratic:
      return 2.0 * c_;
    case Kind::Arctan: {
      const double u = x / c_;
      const double den = 1.0 + u * u;
      return -2.0 * b_ * u / (c_ * c_ * den * den);
    }
  }
  return 0.0;
}

CoefficientLaw CoefficientLaw::from_json(const nlohmann::json& j) {
  if (j.is_number()) return constant(j.get<double>());
  const std::string kind = j.at("kind").get<std::string>();
  auto num = [&](const char* key, double fallback) {
    return j.contains(key) ? j.at(key).get<double>() : fallback;
  };
  if (kind == "constant") return constant(j.at("value").get<double>());
  if (kind == "rational_decay")
    return rational_decay(j.at("low").get<double>(), j.at("high").get<double>(),
                          j.at("scale").get<double>());
  if (kind == "sqrt_quadratic")
    return sqrt_quadratic(j.at("scale").get<double>(), num("q0", 1.0), num("q1", 0.0),
                          num("q2", 0.0));
  if (kind == "quadratic") return quadratic(num("c0", 0.0), num("c1", 0.0), num("c2", 0.0));
  if (kind == "arctan")
    return arctan(num("offset", 0.0), num("amplitude", 1.0), num("scale", 1.0));
  throw std::invalid_argument("unknown coefficient law kind '" + kind + "'");
}

nlohmann::json CoefficientLaw::to_json() const {
  switch (kind_) {
    case Kind::Constant:
      return {{"kind", "constant"}, {"value", a_}};
    case Kind::RationalDecay:
      return {{"kind", "rational_decay"}, {"low", a_}, {"high", b_}, {"scale", c_}};
    case Kind::SqrtQuadratic:
      return {{"kind", "sqrt_quadratic"}, {"scale", a_}, {"q0", b_}, {"q1", c_}, {"q2", d_}};
    case Kind::Quadratic:
      return {{"kind", "quadratic"}, {"c0", a_}, {"c1", b_}, {"c2", c_}};
    case Kind::Arctan:
      return {{"kind", "arctan"}, {"offset", a_}, {"amplitude", b_}, {"scale", c_}};
  }
  return {};
}

// ---------------------------------------------------------------------------
// Thermodynamic potentials

double internal_energy(double theta, double z, const FreeEnergyLaw& law) {
  if (!(theta >= 0.0)) throw DomainError("internal_energy: negative temperature");
  if (theta == 0.0) return law.psi(0.0, z);
  return law.psi(theta, z) - theta * law.psi_theta(theta, z);
}

double entropy_density(double theta, double z, const FreeEnergyLaw& law) {
  if (!(theta > 0.0)) throw DomainError("entropy_density: non-positive temperature");
  return -law.psi_theta(theta, z);
}

double heat_capacity(double theta, double z, const FreeEnergyLaw& law) {
  return -theta * law.psi_thetatheta(theta, z);
}

namespace {

// Root of an increasing function f on [lo, hi] with f(lo) <= 0 <= f(hi).
template <class F, class DF>
double safeguarded_newton(F f, DF df, double lo, double hi, double x) {
  for (int it = 0; it < kInverseMaxIter; ++it) {
    const double r = f(x);
    if (std::abs(r) <= kInverseAtol) return x;
    if (r < 0.0) lo = x; else hi = x;
    const double slope = df(x);
    double next = slope > 0.0 ? x - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return next;
    x = next;
  }
  throw DomainError("inverse map: no convergence within the iteration budget");
}

}  // namespace

double invert_energy(double e_val, double z, const FreeEnergyLaw& law) {
  const double theta_hi = law.box.theta_max;
  const double e_lo = internal_energy(0.0, z, law);
  const double e_hi = internal_energy(theta_hi, z, law);
  if (!(e_val >= e_lo - kInverseAtol) || !(e_val <= e_hi + kInverseAtol))
    throw DomainError("invert_energy: energy " + std::to_string(e_val) +
                      " outside the invertible range");
  if (e_val <= e_lo) return 0.0;
  if (e_val >= e_hi) return theta_hi;
  const double guess = std::clamp(e_val / law.heat_capacity_hint(), 0.5 * theta_hi * 1e-12, theta_hi);
  return safeguarded_newton(
      [&](double t) { return internal_energy(t, z, law) - e_val; },
      [&](double t) { return heat_capacity(t, z, law); }, 0.0, theta_hi,
      std::min(guess, std::nextafter(theta_hi, 0.0)));
}

double invert_entropy(double s_val, double z, const FreeEnergyLaw& law) {
  const double zeta_lo = std::log(law.box.theta_min);
  const double zeta_hi = std::log(law.box.theta_max);
  const double s_lo = entropy_density(law.box.theta_min, z, law);
  const double s_hi = entropy_density(law.box.theta_max, z, law);
  if (!(s_val >= s_lo - kInverseAtol) || !(s_val <= s_hi + kInverseAtol))
    throw DomainError("invert_entropy: entropy " + std::to_string(s_val) +
                      " has no preimage in the admissible temperature range");
  if (s_val <= s_lo) return zeta_lo;
  if (s_val >= s_hi) return zeta_hi;
  const double guess = std::clamp(s_val / law.heat_capacity_hint(), zeta_lo, zeta_hi);
  return safeguarded_newton(
      [&](double zeta) { return entropy_density(std::exp(zeta), z, law) - s_val; },
      [&](double zeta) { return heat_capacity(std::exp(zeta), z, law); }, zeta_lo, zeta_hi,
      guess);
}

// ---------------------------------------------------------------------------

MaterialLaws materials_from_json(const nlohmann::json& m) {
  MaterialLaws laws;
  const auto& fe = m.at("free_energy");
  EquilibriumPhase zeq;
  zeq.mid = fe.at("z_eq_mid").get<double>();
  zeq.width = fe.at("z_eq_width").get<double>();
  zeq.saturation = fe.at("z_sat").get<double>();
  auto psi = std::make_shared<DefaultSteelLaw>(zeq, fe.at("heat_capacity").get<double>(),
                                               fe.at("latent").get<double>());
  const auto& box = m.at("box");
  psi->box = {box.at("theta_min").get<double>(), box.at("theta_max").get<double>(),
              box.at("z_min").get<double>(), box.at("z_max").get<double>()};
  laws.free_energy = psi;
  laws.kappa_theta = CoefficientLaw::from_json(m.at("kappa_theta"));
  laws.kappa_phase = CoefficientLaw::from_json(m.at("kappa_phase"));
  laws.sigma_work = CoefficientLaw::from_json(m.at("sigma_work"));
  laws.sigma_cond = m.at("sigma_cond").get<double>();
  laws.mu_work = CoefficientLaw::from_json(m.at("mu_work"));
  laws.mu_cond = m.at("mu_cond").get<double>();
  laws.mu_air = m.at("mu_air").get<double>();
  laws.tau = CoefficientLaw::from_json(m.at("tau"));
  return laws;
}

}  // namespace inductherm
