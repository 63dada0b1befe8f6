#include "inductherm/em_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "inductherm/linear_solver.hpp"

namespace inductherm {

double SourceModel::waveform(double t) const {
  const double w = 2.0 * std::numbers::pi * frequency;
  switch (kind) {
    case Kind::Sinusoid:
      return amplitude * std::sin(w * t + phase);
    case Kind::RampedSinusoid: {
      const double ramp = ramp_time > 0.0 ? std::min(1.0, t / ramp_time) : 1.0;
      return ramp * amplitude * std::sin(w * t + phase);
    }
    case Kind::Tabulated: {
      if (table.empty()) return 0.0;
      if (t <= table.front().first) return table.front().second;
      if (t >= table.back().first) return table.back().second;
      auto it = std::upper_bound(table.begin(), table.end(), t,
                                 [](double v, const auto& p) { return v < p.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double s = (t - lo.first) / (hi.first - lo.first);
      return lo.second + s * (hi.second - lo.second);
    }
  }
  return 0.0;
}

ScalarField SourceModel::density(const RegionGrid& g, double t) const {
  ScalarField j(static_cast<std::size_t>(g.size()), 0.0);
  const double w = waveform(t);
  for (int c = 0; c < g.size(); ++c)
    if (g.region(c) == Region::Inductor) j[static_cast<std::size_t>(c)] = w * g.polarity(c);
  return j;
}

SourceModel SourceModel::from_json(const nlohmann::json& j) {
  SourceModel s;
  const std::string kind = j.value("kind", std::string("sinusoid"));
  if (kind == "sinusoid") s.kind = Kind::Sinusoid;
  else if (kind == "ramped_sinusoid") s.kind = Kind::RampedSinusoid;
  else if (kind == "tabulated") s.kind = Kind::Tabulated;
  else throw std::invalid_argument("unknown source kind '" + kind + "'");
  s.frequency = j.value("frequency", 0.0);
  s.amplitude = j.value("amplitude", 0.0);
  s.phase = j.value("phase", 0.0);
  s.ramp_time = j.value("ramp_time", 0.0);
  if (j.contains("table"))
    for (const auto& row : j.at("table")) s.table.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
  for (std::size_t i = 1; i < s.table.size(); ++i)
    if (!(s.table[i].first > s.table[i - 1].first))
      throw std::invalid_argument("source table times must increase strictly");
  return s;
}

nlohmann::json SourceModel::to_json() const {
  static const char* names[] = {"sinusoid", "ramped_sinusoid", "tabulated"};
  nlohmann::json j{{"kind", names[static_cast<int>(kind)]},
                   {"frequency", frequency},
                   {"amplitude", amplitude},
                   {"phase", phase},
                   {"ramp_time", ramp_time}};
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [a, b] : table) t.push_back({a, b});
  j["table"] = t;
  return j;
}

ScalarField effective_conductivity(const RegionGrid& g, const ScalarField& theta,
                                   const MaterialLaws& laws, double eps_air) {
  ScalarField s(static_cast<std::size_t>(g.size()), eps_air);
  for (int c = 0; c < g.size(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    switch (g.region(c)) {
      case Region::Workpiece:
        if (!(theta[k] > 0.0)) throw DomainError("em_step: non-positive temperature in the workpiece");
        s[k] = laws.sigma_work(theta[k]);
        break;
      case Region::Inductor: s[k] = laws.sigma_cond; break;
      case Region::Air: break;
    }
  }
  return s;
}

ScalarField reluctivity(const RegionGrid& g, const ScalarField& z, const MaterialLaws& laws) {
  ScalarField nu(static_cast<std::size_t>(g.size()), 1.0 / laws.mu_air);
  for (int c = 0; c < g.size(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    if (g.region(c) == Region::Workpiece) nu[k] = 1.0 / laws.mu_work(z[k]);
    else if (g.region(c) == Region::Inductor) nu[k] = 1.0 / laws.mu_cond;
  }
  return nu;
}

FaceField face_reluctivity(const RegionGrid& g, const ScalarField& nu) {
  const auto& fs = g.domain_faces();
  FaceField f(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const double na = nu[static_cast<std::size_t>(fs[k].a)];
    f[k] = fs[k].b < 0 ? na : 0.5 * (na + nu[static_cast<std::size_t>(fs[k].b)]);
  }
  return f;
}

double magnetic_energy(const RegionGrid& g, const ScalarField& nu, const ScalarField& a) {
  const auto& fs = g.domain_faces();
  const FaceField nf = face_reluctivity(g, nu);
  const FaceField gr = grad(g, fs, a);
  FaceField w(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) w[k] = 0.5 * nf[k] * gr[k] * gr[k];
  return integrate_faces(fs, w);
}

EmStepReport em_step(const RegionGrid& g, const ScalarField& a_old, const ScalarField& theta,
                     const ScalarField& z, double t_new, double dt, const MaterialLaws& laws,
                     const SourceModel& source, const EmStepOptions& opt, ScalarField& a_new) {
  if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
  if (!(opt.eps_air > 0.0)) throw std::invalid_argument("em_step: eps_air must be positive");
  const auto n = static_cast<std::size_t>(g.size());
  const double vol = g.cell_volume();
  const ScalarField sigma = effective_conductivity(g, theta, laws, opt.eps_air);
  const ScalarField nu = reluctivity(g, z, laws);
  const FaceField nf = face_reluctivity(g, nu);

  DiffusionOperator op;
  op.faces = &g.domain_faces();
  op.active.assign(n, 1);
  op.mass.resize(n);
  op.trans.resize(nf.size());
  for (std::size_t k = 0; k < nf.size(); ++k) op.trans[k] = nf[k] * (*op.faces)[k].transmissibility();
  ScalarField rhs(n);
  const ScalarField js = source.density(g, t_new);
  for (std::size_t c = 0; c < n; ++c) {
    op.mass[c] = sigma[c] * vol / dt;
    double j = js[c];
    if (opt.extra_source) j += (*opt.extra_source)[c];
    rhs[c] = op.mass[c] * a_old[c] + vol * j;
  }
  if (a_new.size() != n) a_new = a_old;
  const CgReport cg = pcg_solve(op, rhs, a_new, opt.cg_rtol, opt.cg_max_iter);

  EmStepReport rep;
  rep.iterations = cg.iterations;
  rep.residual = cg.rhs_norm > 0.0 ? cg.residual / cg.rhs_norm : 0.0;
  rep.joule = joule_power(g, a_new, a_old, dt, theta, laws);
  rep.magnetic_energy = magnetic_energy(g, nu, a_new);
  return rep;
}

ScalarField joule_power(const RegionGrid& g, const ScalarField& a_new, const ScalarField& a_old,
                        double dt, const ScalarField& theta, const MaterialLaws& laws) {
  ScalarField p(static_cast<std::size_t>(g.size()), 0.0);
  for (int c : g.workpiece_cells()) {
    const auto k = static_cast<std::size_t>(c);
    const double rate = (a_new[k] - a_old[k]) / dt;
    p[k] = laws.sigma_work(theta[k]) * rate * rate;
  }
  return p;
}

}  // namespace inductherm
