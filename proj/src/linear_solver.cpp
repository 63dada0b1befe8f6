#include "inductherm/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace inductherm {

void DiffusionOperator::apply(const ScalarField& x, ScalarField& y) const {
  const std::size_t n = mass.size();
  y.assign(n, 0.0);
  for (std::size_t c = 0; c < n; ++c)
    if (active[c]) y[c] = mass[c] * x[c];
  const auto& fs = *faces;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto a = static_cast<std::size_t>(fs[k].a);
    if (fs[k].b < 0) {
      y[a] += trans[k] * x[a];
      continue;
    }
    const auto b = static_cast<std::size_t>(fs[k].b);
    const double q = trans[k] * (x[a] - x[b]);
    y[a] += q;
    y[b] -= q;
  }
}

ScalarField DiffusionOperator::diagonal() const {
  ScalarField d(mass.size(), 0.0);
  for (std::size_t c = 0; c < mass.size(); ++c)
    if (active[c]) d[c] = mass[c];
  const auto& fs = *faces;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    d[static_cast<std::size_t>(fs[k].a)] += trans[k];
    if (fs[k].b >= 0) d[static_cast<std::size_t>(fs[k].b)] += trans[k];
  }
  return d;
}

namespace {

double dot(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

CgReport pcg_solve(const DiffusionOperator& op, const ScalarField& b, ScalarField& x, double rtol,
                   int max_iter) {
  const std::size_t n = b.size();
  int n_active = 0;
  for (char a : op.active) n_active += a != 0;
  if (max_iter <= 0) max_iter = 10 * std::max(1, n_active);

  const ScalarField diag = op.diagonal();
  ScalarField inv_d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!op.active[i]) {
      x[i] = 0.0;
      continue;
    }
    if (!(diag[i] > 0.0)) throw SolverError("CG: operator diagonal not positive");
    inv_d[i] = 1.0 / diag[i];
  }

  CgReport rep;
  rep.rhs_norm = std::sqrt(dot(b, b));
  ScalarField r(n), ax(n);
  op.apply(x, ax);
  for (std::size_t i = 0; i < n; ++i) r[i] = op.active[i] ? b[i] - ax[i] : 0.0;
  double rnorm = std::sqrt(dot(r, r));
  const double target = rtol * rep.rhs_norm;
  if (rnorm <= target || rep.rhs_norm == 0.0) {
    if (rep.rhs_norm == 0.0) std::fill(x.begin(), x.end(), 0.0);
    rep.residual = rep.rhs_norm == 0.0 ? 0.0 : rnorm;
    rep.converged = true;
    return rep;
  }
  ScalarField zv(n), p(n), ap(n);
  for (std::size_t i = 0; i < n; ++i) zv[i] = inv_d[i] * r[i];
  p = zv;
  double rz = dot(r, zv);
  for (int it = 1; it <= max_iter; ++it) {
    op.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) throw SolverError("CG: operator is not positive definite");
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    rnorm = std::sqrt(dot(r, r));
    rep.iterations = it;
    if (rnorm <= target) {
      rep.residual = rnorm;
      rep.converged = true;
      return rep;
    }
    for (std::size_t i = 0; i < n; ++i) zv[i] = inv_d[i] * r[i];
    const double rz_new = dot(r, zv);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = zv[i] + beta * p[i];
  }
  rep.residual = rnorm;
  throw SolverError("CG did not converge in " + std::to_string(max_iter) +
                    " iterations (residual " + std::to_string(rnorm / rep.rhs_norm) + ")");
}

CgReport bicgstab_solve(const LinearMap& apply, const ScalarField& diag, const std::vector<char>& active,
                        const ScalarField& b, ScalarField& x, double rtol, int max_iter) {
  const std::size_t n = b.size();
  int n_active = 0;
  for (char a : active) n_active += a != 0;
  if (max_iter <= 0) max_iter = 10 * std::max(1, n_active);
  ScalarField inv_d(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) x[i] = 0.0;
    else if (diag[i] != 0.0) inv_d[i] = 1.0 / diag[i];
    else return {};
  }
  auto mask = [&](ScalarField& v) {
    for (std::size_t i = 0; i < n; ++i)
      if (!active[i]) v[i] = 0.0;
  };

  CgReport rep;
  rep.rhs_norm = std::sqrt(dot(b, b));
  if (rep.rhs_norm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  ScalarField r(n), ax(n);
  apply(x, ax);
  for (std::size_t i = 0; i < n; ++i) r[i] = active[i] ? b[i] - ax[i] : 0.0;
  const ScalarField r0 = r;
  const double target = rtol * rep.rhs_norm;
  ScalarField p(n, 0.0), v(n, 0.0), ph(n), s(n), sh(n), t(n);
  double rho = 1.0, alpha = 1.0, omega = 1.0;
  rep.residual = std::sqrt(dot(r, r));
  if (rep.residual <= target) {
    rep.converged = true;
    return rep;
  }
  for (int it = 1; it <= max_iter; ++it) {
    const double rho_new = dot(r0, r);
    if (rho_new == 0.0 || omega == 0.0) return rep;
    const double beta = (rho_new / rho) * (alpha / omega);
    rho = rho_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * (p[i] - omega * v[i]);
    for (std::size_t i = 0; i < n; ++i) ph[i] = inv_d[i] * p[i];
    apply(ph, v);
    mask(v);
    const double r0v = dot(r0, v);
    if (r0v == 0.0) return rep;
    alpha = rho / r0v;
    for (std::size_t i = 0; i < n; ++i) s[i] = r[i] - alpha * v[i];
    rep.iterations = it;
    if (std::sqrt(dot(s, s)) <= target) {
      for (std::size_t i = 0; i < n; ++i) x[i] += alpha * ph[i];
      rep.residual = std::sqrt(dot(s, s));
      rep.converged = true;
      return rep;
    }
    for (std::size_t i = 0; i < n; ++i) sh[i] = inv_d[i] * s[i];
    apply(sh, t);
    mask(t);
    const double tt = dot(t, t);
    if (tt == 0.0) return rep;
    omega = dot(t, s) / tt;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * ph[i] + omega * sh[i];
      r[i] = s[i] - omega * t[i];
    }
    rep.residual = std::sqrt(dot(r, r));
    if (!std::isfinite(rep.residual)) return rep;
    if (rep.residual <= target) {
      rep.converged = true;
      return rep;
    }
  }
  return rep;
}

}  // namespace inductherm
