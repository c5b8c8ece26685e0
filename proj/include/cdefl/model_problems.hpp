#ifndef CDEFL_MODEL_PROBLEMS_HPP
#define CDEFL_MODEL_PROBLEMS_HPP

#include <cdefl/sparse.hpp>

#include <cstdint>
#include <functional>
#include <utility>

namespace cdefl
{

using Field2D = std::function<Real(Real, Real)>;

/// -[u_xx + u_yy + Re (p u_x + q u_y)] = f on the unit square with Dirichlet
/// data g, discretized by the 5-point stencil on an n x n interior grid,
/// h = 1/(n+1). Unknown (i, j) (x index i, y index j, both 0-based) has
/// global index j n + i (lexicographic, row by row in y).
struct ConvDiffSpec
{
  int n = 31;
  Real reynolds = 0.0;
  Field2D p = [](Real, Real) { return 1.0; };
  Field2D q = [](Real, Real) { return 1.0; };
  Field2D f = [](Real, Real) { return 0.0; };
  Field2D g = [](Real, Real) { return 0.0; };
  bool upwind = false;

  void validate() const;
  Real h() const { return 1.0 / (n + 1); }
};

/// Returns the matrix and the right-hand side with boundary values folded in.
std::pair<SparseMatrix, Vector> convdiff_matrix(ConvDiffSpec const &spec);

namespace detail
{
// no size check; multigrid coarse levels may be 1 x 1
std::pair<SparseMatrix, Vector> convdiff_assemble(ConvDiffSpec const &spec);
} // namespace detail

/// Spec whose exact solution is u = sin(pi x) sin(pi y), with p = q = 1.
ConvDiffSpec manufactured_spec(int n, Real reynolds, bool upwind = false);
Real manufactured_solution(Real x, Real y);

/// Samples u on the interior grid points in the matrix ordering.
Vector grid_sample(int n, Field2D const &u);

struct SyntheticSpec
{
  Vector eigenvalues;
  Real conditioning_of_V = 1.0;
  std::uint64_t seed = 0;
};

struct SyntheticSystem
{
  SparseMatrix A;
  DenseMatrix V;    // A = V diag(eigenvalues) V^{-1}
  DenseMatrix Vinv;
};

inline constexpr Index synthetic_dense_cap = 500;

/// A = V Lambda V^{-1} with V = Q1 diag(s) Q2^T, Q1, Q2 random orthogonal and
/// s log-spaced in [1, kappa]. kappa = 1 gives a normal matrix.
SyntheticSystem synthetic_system(SyntheticSpec const &spec);
SparseMatrix synthetic_matrix(SyntheticSpec const &spec);

/// `small` eigenvalues evenly spaced on the circle |z| = small_mag, the
/// remaining n - small evenly spaced on the real segment [1, 2].
Vector clustered_spectrum(Index n, Index small, Real small_mag);

/// Random real orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
DenseMatrix random_orthogonal(Index n, std::uint64_t seed);

} // namespace cdefl

#endif
