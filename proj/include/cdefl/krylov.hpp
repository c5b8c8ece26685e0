#ifndef CDEFL_KRYLOV_HPP
#define CDEFL_KRYLOV_HPP

#include <cdefl/sparse.hpp>

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace cdefl
{

/// A square linear map given by its action. `apply_adjoint` may be empty;
/// BiCG requires it. `real` marks operators whose matrix has real entries,
/// which lets the contour quadrature pair conjugate nodes.
struct LinearOperator
{
  std::function<Vector(Vector const &)> apply;
  std::function<Vector(Vector const &)> apply_adjoint;
  Index dim = 0;
  bool real = false;

  Vector operator()(Vector const &x) const { return apply(x); }
  bool has_adjoint() const { return static_cast<bool>(apply_adjoint); }
};

/// Wraps a sparse matrix. The matrix is captured by reference and must
/// outlive the operator.
LinearOperator make_operator(SparseMatrix const &A);
LinearOperator make_operator(DenseMatrix const &A);
LinearOperator identity_operator(Index n);

/// Dense expansion of an operator by applying it to the unit vectors.
DenseMatrix to_dense(LinearOperator const &op);

struct SolverConfig
{
  Real tol = 1e-7;
  long maxit = 1000;
  int restart = 50;
  bool record_history = false;

  void validate() const;
};

struct SolveReport
{
  long iterations = 0;
  Real final_relres = 0.0;
  bool converged = false;
  bool breakdown = false;
  long matvecs = 0;
  std::vector<Real> residual_history; // ||r_j|| / ||r_0||, length iterations+1
  std::optional<Real> true_error;
  Real wall_time_s = 0.0;
};

/// Restarted GMRES (modified Gram-Schmidt Arnoldi with selective
/// reorthogonalization, Givens least squares). One iteration is one Arnoldi
/// step. `final_relres` is recomputed from the returned iterate.
std::pair<Vector, SolveReport> gmres(LinearOperator const &op, Vector const &b,
                                     Vector const &x0, SolverConfig const &cfg);

/// Biconjugate gradients. One iteration costs one product with the operator
/// and one with its adjoint. The shadow residual defaults to conj(r0).
std::pair<Vector, SolveReport> bicg(LinearOperator const &op, Vector const &b,
                                    Vector const &x0, SolverConfig const &cfg,
                                    std::optional<Vector> const &shadow = std::nullopt);

/// Solves (z I - A) x = y with BiCG.
std::pair<Vector, SolveReport> solve_shifted(SparseMatrix const &A, Complex z,
                                             Vector const &y, SolverConfig const &cfg);
std::pair<Vector, SolveReport> solve_shifted(LinearOperator const &A, Complex z,
                                             Vector const &y, SolverConfig const &cfg);

/// ||b - op x|| / ||b|| (0 when b = 0 and op x = 0).
Real relative_residual(LinearOperator const &op, Vector const &b, Vector const &x);

} // namespace cdefl

#endif
