#pragma once

// Matrix-free SPD diffusion operators and Jacobi-preconditioned CG.

#include <functional>
#include <stdexcept>
#include <vector>

#include "inductherm/geometry.hpp"

namespace inductherm {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// y = diag(mass) x + sum_f T_f (x_a - x_b) jump terms. Boundary faces
/// (b = -1) act as Dirichlet with ghost value 0. Only cells with
/// active[c] != 0 take part; inactive entries of x and y are zero.
struct DiffusionOperator {
  const std::vector<Face>* faces = nullptr;
  FaceField trans;      // T_f per face
  ScalarField mass;     // per-cell diagonal
  std::vector<char> active;

  void apply(const ScalarField& x, ScalarField& y) const;
  ScalarField diagonal() const;
};

struct CgReport {
  int iterations = 0;
  double residual = 0.0;     // final ||b - Ax||_2
  double rhs_norm = 0.0;
  bool converged = false;
};

/// Solves A x = b starting from x (warm start) until ||r|| <= rtol ||b||.
/// max_iter <= 0 means 10 * number of active cells.
CgReport pcg_solve(const DiffusionOperator& op, const ScalarField& b, ScalarField& x, double rtol,
                   int max_iter = 0);

/// Jacobi-preconditioned BiCGStab for a general matrix-free operator on the
/// active cells. Returns converged = false instead of throwing on breakdown.
using LinearMap = std::function<void(const ScalarField&, ScalarField&)>;
CgReport bicgstab_solve(const LinearMap& apply, const ScalarField& diag, const std::vector<char>& active,
                        const ScalarField& b, ScalarField& x, double rtol, int max_iter = 0);

}  // namespace inductherm
