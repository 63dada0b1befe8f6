#include "inductherm/validation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace inductherm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
  v.front() = lo;
  v.back() = hi;
  return v;
}

std::vector<double> lin_spaced(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return v;
}

// Tracks an extremum and where it occurred.
struct Extremum {
  double value;
  double theta = kNaN, z = kNaN;
  bool is_max;
  explicit Extremum(bool maximize)
      : value(maximize ? -std::numeric_limits<double>::infinity()
                       : std::numeric_limits<double>::infinity()),
        is_max(maximize) {}
  void offer(double v, double t, double zz) {
    if (!std::isfinite(v)) {
      if (std::isfinite(value) || std::isnan(theta)) {
        value = v;
        theta = t;
        z = zz;
      }
      return;
    }
    if ((is_max && v > value) || (!is_max && v < value)) {
      value = v;
      theta = t;
      z = zz;
    }
  }
};

ClauseResult clause(std::string name, AssumptionLevel level, bool ok, const Extremum& ex,
                    std::string detail) {
  ClauseResult c;
  c.name = std::move(name);
  c.level = level;
  c.passed = ok;
  c.value = ex.value;
  c.theta = ex.theta;
  c.z = ex.z;
  c.detail = std::move(detail);
  return c;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

}  // namespace

const char* to_string(AssumptionLevel level) {
  return level == AssumptionLevel::A1 ? "A1" : "A2";
}

double EmpiricalConstants::gronwall_multiplier() const {
  double m = 1.0;
  auto ratio = [&](double hi, double lo) {
    if (lo > 0.0 && std::isfinite(hi)) m = std::max(m, hi / lo);
  };
  ratio(heat_C, heat_c);
  ratio(kappa_max, kappa_min);
  ratio(sigma_max, sigma_min);
  ratio(tau_max, tau_min);
  ratio(mu_max, mu_min);
  return m;
}

std::vector<std::pair<double, double>> sample_points(const ThermoBox& box, const SamplingSpec& spec) {
  std::vector<std::pair<double, double>> pts;
  const auto thetas = log_spaced(box.theta_min, box.theta_max, spec.grid_theta);
  const auto zs = lin_spaced(box.z_min, box.z_max, spec.grid_z);
  pts.reserve(thetas.size() * zs.size() + static_cast<std::size_t>(spec.quasi_random));
  for (double t : thetas)
    for (double z : zs) pts.emplace_back(t, z);
  const double la = std::log(box.theta_min), lb = std::log(box.theta_max);
  for (int k = 0; k < spec.quasi_random; ++k) {
    const std::uint64_t idx = spec.seed + static_cast<std::uint64_t>(k) + 1;
    const double u = radical_inverse(idx, 2), v = radical_inverse(idx, 3);
    pts.emplace_back(std::exp(la + (lb - la) * u), box.z_min + (box.z_max - box.z_min) * v);
  }
  return pts;
}

ValidationReport validate_assumptions(const MaterialLaws& laws, AssumptionLevel level,
                                      const SamplingSpec& spec) {
  const FreeEnergyLaw& psi = laws.psi();
  const ThermoBox& box = psi.box;
  const auto pts = sample_points(box, spec);
  const auto zs = lin_spaced(box.z_min, box.z_max, spec.grid_z);
  const auto thetas = log_spaced(box.theta_min, box.theta_max, spec.grid_theta);

  ValidationReport rep;
  rep.level = level;
  rep.samples = pts.size();
  auto& K = rep.constants;
  using L = AssumptionLevel;

  // psi(0, z) >= 0
  Extremum psi0(false);
  for (double z : zs) psi0.offer(psi.psi(0.0, z), 0.0, z);
  rep.clauses.push_back(clause("psi_at_zero_nonnegative", L::A1, psi0.value >= 0.0, psi0,
                               "min psi(0,z)"));

  Extremum hc_min(false), hc_max(true), pz(true), pzz(true), pzz_min(false), pzt(true), ez(true);
  Extremum e_min(false), e_lo(false), e_hi(true), s_hi(true), s_lo(false);
  bool e_nonneg = true;
  for (auto [t, z] : pts) {
    const double hc = heat_capacity(t, z, psi);
    hc_min.offer(hc, t, z);
    hc_max.offer(hc, t, z);
    pz.offer(std::abs(psi.psi_z(t, z)), t, z);
    pzz.offer(std::abs(psi.psi_zz(t, z)), t, z);
    pzz_min.offer(psi.psi_zz(t, z), t, z);
    pzt.offer(std::abs((1.0 + t) * psi.psi_ztheta(t, z)), t, z);
    ez.offer(std::abs(psi.psi_z(t, z) - t * psi.psi_ztheta(t, z)), t, z);
    const double e = internal_energy(t, z, psi);
    const double s = entropy_density(t, z, psi);
    e_min.offer(e, t, z);
    if (e < 0.0) e_nonneg = false;
    if (t > 1.0) e_lo.offer(e / (t - 1.0), t, z);
    e_hi.offer(e / (t + 1.0), t, z);
    const double lt = std::log(t);
    if (lt + 1.0 > 0.0) s_hi.offer(s / (lt + 1.0), t, z);
    if (lt - 1.0 > 0.0) s_lo.offer(s / (lt - 1.0), t, z);
  }
  K.heat_c = hc_min.value;
  K.heat_C = hc_max.value;
  K.psi_z_C = pz.value;
  K.psi_zz_C = pzz.value;
  K.psi_zz_c = pzz_min.value;
  K.psi_ztheta_C = pzt.value;
  K.e_z_C = ez.value;

  rep.clauses.push_back(clause("heat_capacity_bounds", L::A1,
                               hc_min.value > 0.0 && std::isfinite(hc_max.value), hc_min,
                               "c=" + fmt(hc_min.value) + " C=" + fmt(hc_max.value)));
  rep.clauses.push_back(clause("psi_z_bounded", L::A1, std::isfinite(pz.value), pz, "max |psi_z|"));
  rep.clauses.push_back(clause("psi_zz_bounded", L::A1, std::isfinite(pzz.value), pzz, "max |psi_zz|"));
  rep.clauses.push_back(clause("psi_ztheta_bounded", L::A1, std::isfinite(pzt.value), pzt,
                               "max |(1+theta) psi_ztheta|"));

  // Energy and entropy growth bounds.
  K.energy_c = std::isfinite(e_lo.value) ? e_lo.value : K.heat_c;
  K.energy_C = e_hi.value;
  rep.clauses.push_back(clause("internal_energy_nonnegative", L::A1, e_nonneg, e_min, "min e"));
  rep.clauses.push_back(clause("energy_growth_bounds", L::A1,
                               K.energy_c > 0.0 && std::isfinite(K.energy_C), e_lo,
                               "c=" + fmt(K.energy_c) + " C=" + fmt(K.energy_C)));
  K.entropy_C = s_hi.value;
  K.entropy_c = std::isfinite(s_lo.value) ? s_lo.value : K.heat_c;
  bool s_ok = K.entropy_c > 0.0 && std::isfinite(K.entropy_C);
  Extremum s_slack(false);
  for (auto [t, z] : pts) {
    const double s = entropy_density(t, z, psi), lt = std::log(t);
    const double lower = s - K.entropy_c * (lt - 1.0);
    const double upper = K.entropy_C * (lt + 1.0) - s;
    s_slack.offer(std::min(lower, upper), t, z);
  }
  if (s_slack.value < -1e-12 * std::max(1.0, std::abs(K.entropy_C))) s_ok = false;
  rep.clauses.push_back(clause("entropy_growth_bounds", L::A1, s_ok, s_slack,
                               "c=" + fmt(K.entropy_c) + " C=" + fmt(K.entropy_C)));

  // Coefficient bounds.
  Extremum kap_min(false), kap_max(true), tau_min(false), tau_max(true), dtau(true);
  Extremum sig_min(false), sig_max(true), mu_min(false), mu_max(true), dmu(true);
  std::vector<double> theta_line = thetas;
  theta_line.insert(theta_line.begin(), 0.0);
  for (double t : theta_line) {
    for (double z : zs) {
      const double k = laws.kappa(t, z);
      kap_min.offer(k, t, z);
      kap_max.offer(k, t, z);
    }
    const double ta = laws.tau(t);
    tau_min.offer(ta, t, kNaN);
    tau_max.offer(ta, t, kNaN);
    dtau.offer(std::abs(t * laws.tau.d1(t)), t, kNaN);
    const double sg = laws.sigma_work(t);
    sig_min.offer(sg, t, kNaN);
    sig_max.offer(sg, t, kNaN);
  }
  for (double z : zs) {
    const double m = laws.mu_work(z);
    mu_min.offer(m, kNaN, z);
    mu_max.offer(m, kNaN, z);
    dmu.offer(std::abs(laws.mu_work.d1(z)), kNaN, z);
  }
  K.kappa_min = kap_min.value;
  K.kappa_max = kap_max.value;
  K.tau_min = tau_min.value;
  K.tau_max = tau_max.value;
  K.sigma_min = std::min(sig_min.value, laws.sigma_cond);
  K.sigma_max = std::max(sig_max.value, laws.sigma_cond);
  K.mu_min = std::min({mu_min.value, laws.mu_cond, laws.mu_air});
  K.mu_max = std::max({mu_max.value, laws.mu_cond, laws.mu_air});

  rep.clauses.push_back(clause("kappa_bounds", L::A1,
                               kap_min.value > 0.0 && std::isfinite(kap_max.value), kap_min,
                               "min=" + fmt(kap_min.value) + " max=" + fmt(kap_max.value)));
  rep.clauses.push_back(clause("tau_bounds", L::A1,
                               tau_min.value > 0.0 && std::isfinite(tau_max.value), tau_min,
                               "min=" + fmt(tau_min.value) + " max=" + fmt(tau_max.value)));
  rep.clauses.push_back(clause("tau_derivative_bounded", L::A1, std::isfinite(dtau.value), dtau,
                               "max |theta tau'|"));
  rep.clauses.push_back(clause("mu_bounds", L::A1,
                               K.mu_min > 0.0 && std::isfinite(K.mu_max), mu_min,
                               "min=" + fmt(K.mu_min) + " max=" + fmt(K.mu_max)));
  rep.clauses.push_back(clause("mu_derivative_bounded", L::A1, std::isfinite(dmu.value), dmu,
                               "max |mu'|"));
  rep.clauses.push_back(clause("sigma_positive", L::A1,
                               sig_min.value > 0.0 && laws.sigma_cond > 0.0, sig_min,
                               "min sigma_work=" + fmt(sig_min.value) +
                                   " sigma_cond=" + fmt(laws.sigma_cond)));

  if (level == AssumptionLevel::A2) {
    rep.clauses.push_back(clause("psi_zz_positive", L::A2, pzz_min.value > 0.0, pzz_min,
                                 "min psi_zz (convexity in z)"));
    Extremum kink(false);
    bool smooth = true;
    for (auto [t, z] : pts) {
      if (!psi.c3_smooth_at(t, z)) {
        if (smooth) kink.offer(0.0, t, z);
        smooth = false;
      }
    }
    if (smooth) kink.value = 1.0;
    rep.clauses.push_back(clause("psi_c3_smooth", L::A2, smooth, kink,
                                 smooth ? "no kink in the sampled box"
                                        : "psi has a (.)_+^2 kink reachable in the box"));

    Extremum mu2(true);
    for (double z : zs) {
      const double m = laws.mu_work(z), d1 = laws.mu_work.d1(z), d2 = laws.mu_work.d2(z);
      mu2.offer(2.0 * (m * d2 + d1 * d1), kNaN, z);
    }
    const double mu_scale = K.mu_max * K.mu_max;
    rep.clauses.push_back(clause("mu_squared_concave", L::A2, mu2.value <= 1e-12 * mu_scale, mu2,
                                 "max (mu^2)''"));

    auto decay = [&](double t, double z) {
      const double grad_k = std::abs(laws.kappa_theta.d1(t) * laws.kappa_phase(z)) +
                            std::abs(laws.kappa_theta(t) * laws.kappa_phase.d1(z));
      return (grad_k + std::abs(laws.sigma_work.d1(t)) + std::abs(laws.tau.d1(t))) *
             (t * t * t + t + 1.0);
    };
    Extremum dec(true);
    for (auto [t, z] : pts) dec.offer(decay(t, z), t, z);
    // Probe the tail: the weighted derivative must not keep growing.
    bool tail_ok = std::isfinite(dec.value);
    double prev = 0.0;
    for (double z : {box.z_min, box.z_max}) prev = std::max(prev, decay(box.theta_max, z));
    for (int k = 1; k <= 3 && tail_ok; ++k) {
      double cur = 0.0;
      const double t = box.theta_max * std::pow(10.0, k);
      for (double z : {box.z_min, box.z_max}) cur = std::max(cur, decay(t, z));
      if (cur > 2.0 * std::max(prev, dec.value)) tail_ok = false;
      prev = cur;
    }
    rep.clauses.push_back(clause("derivative_decay", L::A2, tail_ok, dec,
                                 "sup (|grad kappa|+|sigma'|+|tau'|)(theta^3+theta+1)"));
  }
  return rep;
}

bool ValidationReport::passed() const {
  return std::all_of(clauses.begin(), clauses.end(), [](const auto& c) { return c.passed; });
}

bool ValidationReport::passed(AssumptionLevel lvl) const {
  return std::all_of(clauses.begin(), clauses.end(),
                     [&](const auto& c) { return c.level != lvl || c.passed; });
}

const ClauseResult* ValidationReport::find(const std::string& name) const {
  for (const auto& c : clauses)
    if (c.name == name) return &c;
  return nullptr;
}

std::string ValidationReport::to_text() const {
  std::ostringstream os;
  os << "Material assumption validation (level " << to_string(level) << ", " << samples
     << " samples)\n";
  for (const auto& c : clauses) {
    os << "  [" << (c.passed ? "PASS" : "FAIL") << "] Assumption " << to_string(c.level) << " "
       << c.name << ": value=" << fmt(c.value);
    if (!std::isnan(c.theta)) os << " theta=" << fmt(c.theta);
    if (!std::isnan(c.z)) os << " z=" << fmt(c.z);
    os << " (" << c.detail << ")\n";
  }
  os << "  overall: " << (passed() ? "PASS" : "FAIL") << "\n";
  return os.str();
}

std::string ValidationReport::to_kv() const {
  std::ostringstream os;
  os.precision(17);
  os << "validation.level = " << to_string(level) << "\n";
  os << "validation.samples = " << samples << "\n";
  os << "validation.passed = " << (passed() ? "true" : "false") << "\n";
  for (const auto& c : clauses) {
    os << "clause." << c.name << ".assumption = " << to_string(c.level) << "\n";
    os << "clause." << c.name << ".passed = " << (c.passed ? "true" : "false") << "\n";
    os << "clause." << c.name << ".value = " << c.value << "\n";
    os << "clause." << c.name << ".theta = " << c.theta << "\n";
    os << "clause." << c.name << ".z = " << c.z << "\n";
  }
  const auto& k = constants;
  os << "constants.heat_c = " << k.heat_c << "\n"
     << "constants.heat_C = " << k.heat_C << "\n"
     << "constants.psi_z_C = " << k.psi_z_C << "\n"
     << "constants.psi_zz_C = " << k.psi_zz_C << "\n"
     << "constants.psi_zz_c = " << k.psi_zz_c << "\n"
     << "constants.psi_ztheta_C = " << k.psi_ztheta_C << "\n"
     << "constants.e_z_C = " << k.e_z_C << "\n"
     << "constants.energy_c = " << k.energy_c << "\n"
     << "constants.energy_C = " << k.energy_C << "\n"
     << "constants.entropy_c = " << k.entropy_c << "\n"
     << "constants.entropy_C = " << k.entropy_C << "\n"
     << "constants.kappa_min = " << k.kappa_min << "\n"
     << "constants.kappa_max = " << k.kappa_max << "\n"
     << "constants.tau_min = " << k.tau_min << "\n"
     << "constants.tau_max = " << k.tau_max << "\n"
     << "constants.sigma_min = " << k.sigma_min << "\n"
     << "constants.sigma_max = " << k.sigma_max << "\n"
     << "constants.mu_min = " << k.mu_min << "\n"
     << "constants.mu_max = " << k.mu_max << "\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Brute-force calibrated inequalities

namespace {

// Coordinate pattern search maximizing `f` inside the box [lo, hi]^n.
template <std::size_t N>
double pattern_search(const std::function<double(const std::array<double, N>&)>& f,
                      std::array<double, N> x, const std::array<double, N>& lo,
                      const std::array<double, N>& hi, std::array<double, N> step) {
  double best = f(x);
  for (int round = 0; round < 60; ++round) {
    bool improved = false;
    for (std::size_t d = 0; d < N; ++d) {
      for (double sgn : {1.0, -1.0}) {
        auto y = x;
        y[d] = std::clamp(y[d] + sgn * step[d], lo[d], hi[d]);
        const double v = f(y);
        if (v > best) {
          best = v;
          x = y;
          improved = true;
        }
      }
    }
    if (!improved)
      for (auto& s : step) s *= 0.5;
  }
  return best;
}

// Bregman divergence of exp at log y, evaluated stably:
// x - y - y (log x - log y) = y (u - log1p(u)), u = x/y - 1.
double log_bregman(double x, double y) {
  const double u = (x - y) / y;
  return y * (u - std::log1p(u));
}

}  // namespace

InequalityCheck check_sqrt_log_inequality(const CoefficientLaw& f, double lo, double hi,
                                          int coarse, int refine) {
  InequalityCheck out;
  auto ratio = [&](double x, double y) {
    const double rhs = log_bregman(x, y);
    if (!(rhs > 0.0)) return 0.0;
    const double df = f(x) - f(y);
    return df * df * (1.0 + std::abs(std::log(x) - std::log(y))) * y / rhs;
  };

  const auto cg = log_spaced(lo, hi, coarse);
  struct Cand { double r, lx, ly; };
  std::vector<Cand> cands;
  for (double x : cg)
    for (double y : cg)
      if (x != y) cands.push_back({ratio(x, y), std::log(x), std::log(y)});
  std::partial_sort(cands.begin(), cands.begin() + std::min<std::ptrdiff_t>(5, static_cast<std::ptrdiff_t>(cands.size())),
                    cands.end(), [](const Cand& a, const Cand& b) { return a.r > b.r; });
  double c = cands.empty() ? 0.0 : cands.front().r;

  const double la = std::log(lo), lb = std::log(hi);
  const double h = (lb - la) / std::max(1, coarse - 1);
  std::function<double(const std::array<double, 2>&)> obj = [&](const std::array<double, 2>& p) {
    return ratio(std::exp(p[0]), std::exp(p[1]));
  };
  for (std::size_t k = 0; k < std::min<std::size_t>(5, cands.size()); ++k)
    c = std::max(c, pattern_search<2>(obj, {cands[k].lx, cands[k].ly}, {la, la}, {lb, lb}, {h, h}));

  // Diagonal limit x -> y: the ratio tends to 2 y^2 f'(y)^2.
  std::function<double(const std::array<double, 1>&)> diag = [&](const std::array<double, 1>& p) {
    const double y = std::exp(p[0]);
    const double d = f.d1(y);
    return 2.0 * y * y * d * d;
  };
  double best_diag = 0.0, best_ly = la;
  for (double y : cg) {
    const double v = diag({std::log(y)});
    if (v > best_diag) {
      best_diag = v;
      best_ly = std::log(y);
    }
  }
  c = std::max(c, pattern_search<1>(diag, {best_ly}, {la}, {lb}, {h}));
  out.constant = c * (1.0 + 1e-9);

  const auto fg = log_spaced(lo, hi, coarse * refine);
  for (double x : fg) {
    for (double y : fg) {
      if (x == y) continue;
      ++out.evaluated;
      const double rhs = log_bregman(x, y);
      const double df = f(x) - f(y);
      const double lhs = df * df * (1.0 + std::abs(std::log(x) - std::log(y))) * y;
      if (rhs > 0.0) out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
      if (lhs > out.constant * rhs) ++out.violations;
    }
  }
  out.passed = out.violations == 0;
  return out;
}

InequalityCheck check_fenchel_inequality(const CoefficientLaw& f, double z_lo, double z_hi,
                                         double t_lo, double t_hi, int coarse, int refine) {
  InequalityCheck out;
  auto ratio = [&](double z, double zt, double t, double tt) {
    const double lhs = (f(z) - f(zt)) * (t - tt);
    if (!(lhs > 0.0)) return 0.0;
    const double rhs = (z - zt) * (z - zt) + log_bregman(t, tt);
    return rhs > 0.0 ? lhs / rhs : 0.0;
  };

  // Pair tables: (delta f, delta z^2) over z pairs, (delta theta, Bregman) over theta pairs.
  struct ZPair { double df, dz2, z, zt; };
  struct TPair { double dt, breg, t, tt; };
  auto z_pairs = [&](int n) {
    std::vector<ZPair> v;
    const auto g = lin_spaced(z_lo, z_hi, n);
    for (double a : g)
      for (double b : g) v.push_back({f(a) - f(b), (a - b) * (a - b), a, b});
    return v;
  };
  auto t_pairs = [&](int n) {
    std::vector<TPair> v;
    const auto g = log_spaced(t_lo, t_hi, n);
    for (double a : g)
      for (double b : g) v.push_back({a - b, log_bregman(a, b), a, b});
    return v;
  };

  const auto zc = z_pairs(coarse);
  const auto tc = t_pairs(coarse);
  struct Cand { double r; std::array<double, 4> p; };
  std::vector<Cand> top;
  for (const auto& zp : zc) {
    if (zp.df == 0.0) continue;
    for (const auto& tp : tc) {
      const double lhs = zp.df * tp.dt;
      if (!(lhs > 0.0)) continue;
      const double r = lhs / (zp.dz2 + tp.breg);
      if (top.size() < 5 || r > top.back().r) {
        top.push_back({r, {zp.z, zp.zt, std::log(tp.t), std::log(tp.tt)}});
        std::sort(top.begin(), top.end(), [](const Cand& a, const Cand& b) { return a.r > b.r; });
        if (top.size() > 5) top.pop_back();
      }
    }
  }
  double c = top.empty() ? 0.0 : top.front().r;
  const double la = std::log(t_lo), lb = std::log(t_hi);
  const double hz = (z_hi - z_lo) / std::max(1, coarse - 1), ht = (lb - la) / std::max(1, coarse - 1);
  std::function<double(const std::array<double, 4>&)> obj = [&](const std::array<double, 4>& p) {
    return ratio(p[0], p[1], std::exp(p[2]), std::exp(p[3]));
  };
  for (const auto& cand : top)
    c = std::max(c, pattern_search<4>(obj, cand.p, {z_lo, z_lo, la, la}, {z_hi, z_hi, lb, lb},
                                      {hz, hz, ht, ht}));

  // Diagonal limit: increments -> 0 along the best ray gives |f'(z)| sqrt(thetat / 2).
  std::function<double(const std::array<double, 2>&)> diag = [&](const std::array<double, 2>& p) {
    return std::abs(f.d1(p[0])) * std::sqrt(0.5 * std::exp(p[1]));
  };
  double best = 0.0;
  std::array<double, 2> best_p{z_lo, la};
  for (double z : lin_spaced(z_lo, z_hi, coarse))
    for (double t : log_spaced(t_lo, t_hi, coarse)) {
      const double v = diag({z, std::log(t)});
      if (v > best) {
        best = v;
        best_p = {z, std::log(t)};
      }
    }
  c = std::max(c, pattern_search<2>(diag, best_p, {z_lo, la}, {z_hi, lb}, {hz, ht}));
  out.constant = c * (1.0 + 1e-9);

  // Fine-grid assertion, written to vectorize: lhs > C dz2 + C breg.
  const auto zf = z_pairs(coarse * refine);
  const auto tf = t_pairs(coarse * refine);
  std::vector<double> dts(tf.size()), cbreg(tf.size());
  for (std::size_t q = 0; q < tf.size(); ++q) {
    dts[q] = tf[q].dt;
    cbreg[q] = out.constant * tf[q].breg;
  }
  std::size_t violations = 0;
  for (const auto& zp : zf) {
    if (zp.df == 0.0) continue;
    const double a = zp.df, b = out.constant * zp.dz2;
    std::size_t local = 0;
    for (std::size_t q = 0; q < dts.size(); ++q) local += (a * dts[q] > b + cbreg[q]) ? 1u : 0u;
    violations += local;
  }
  out.evaluated = zf.size() * tf.size();
  out.violations = violations;
  out.worst_ratio = kNaN;
  out.passed = violations == 0;
  return out;
}

CoefficientChecks check_coefficient_inequalities(const MaterialLaws& laws, int coarse, int refine) {
  const ThermoBox& b = laws.psi().box;
  CoefficientChecks r;
  r.sigma = check_sqrt_log_inequality(laws.sigma_work, b.theta_min, b.theta_max, coarse, refine);
  r.tau = check_sqrt_log_inequality(laws.tau, b.theta_min, b.theta_max, coarse, refine);
  r.kappa = check_sqrt_log_inequality(laws.kappa_theta, b.theta_min, b.theta_max, coarse, refine);
  r.mu = check_fenchel_inequality(laws.mu_work, b.z_min, b.z_max, b.theta_min, b.theta_max, coarse, refine);
  return r;
}

std::string CoefficientChecks::to_text() const {
  std::ostringstream os;
  auto line = [&](const char* what, const char* name, const InequalityCheck& c) {
    os << (c.passed ? "[PASS] " : "[FAIL] ") << what << " for " << name << ": constant " << c.constant << ", "
       << c.violations << " violations in " << c.evaluated << " fine-grid pairs\n";
  };
  line("sqrt-log inequality", "sigma_work", sigma);
  line("sqrt-log inequality", "tau", tau);
  line("sqrt-log inequality", "kappa_theta", kappa);
  line("Fenchel-Young inequality", "mu_work", mu);
  return os.str();
}

}  // namespace inductherm
