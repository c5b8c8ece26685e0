#ifndef CDEFL_DEFLATION_HPP
#define CDEFL_DEFLATION_HPP

#include <cdefl/contour.hpp>
#include <cdefl/krylov.hpp>
#include <cdefl/quadrature.hpp>
#include <cdefl/sparse.hpp>

#include <Eigen/LU>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace cdefl
{

//-----------------------------------------------------------------------------
// Contour quadrature
//
// With z(theta) = c + r e^{i pi theta}, the spectral projector onto the
// invariant subspace of the eigenvalues inside the circle is
//
//   P_G = (r/2) int_{-1}^{1} e^{i pi theta} (z(theta) I - A)^{-1} d theta,
//
// and Z = P_G Y is approximated with a q-point Gauss-Legendre rule. Every
// node costs one shifted solve per column of Y.

struct ContourOptions
{
  SolverConfig inner{1e-10, 0, 50, false}; // maxit <= 0 means N
  bool exploit_conjugate_pairs = true;
  bool dense_fallback = true;
  Index dense_fallback_cap = 2000;
};

struct NodeSolve
{
  int node = 0;   // index into the quadrature rule
  int column = 0; // column of Y
  Complex shift;
  long iterations = 0;
  Real relres = 0.0;
  bool converged = false;
  bool dense_fallback = false;
};

struct ContourDiagnostics
{
  std::vector<NodeSolve> solves;
  std::vector<int> inaccurate_nodes; // nodes with an unconverged solve and no fallback
  bool conjugate_pairs = false;
  long total_iterations = 0;
  long total_matvecs = 0;

  bool all_converged() const { return inaccurate_nodes.empty(); }
};

struct ContourResult
{
  DenseMatrix Zraw;
  ContourDiagnostics diagnostics;
};

ContourResult contour_subspace(LinearOperator const &A, DenseMatrix const &Y,
                               ContourSpec const &contour,
                               ContourOptions const &options = {});
ContourResult contour_subspace(SparseMatrix const &A, DenseMatrix const &Y,
                               ContourSpec const &contour,
                               ContourOptions const &options = {});

//-----------------------------------------------------------------------------
// Deflation subspace and projectors

/// Orthonormal Z together with A Z and the LU factors of Z^H A Z.
struct DeflationSubspace
{
  DenseMatrix Z;
  DenseMatrix AZ;
  DenseMatrix coarse; // Z^H A Z
  Eigen::PartialPivLU<DenseMatrix> coarse_lu;
  Real coarse_rcond = 0.0;
  bool rank_deficient = false;
  Index numerical_rank = 0;

  Index n() const { return Z.rows(); }
  Index m() const { return Z.cols(); }
  Vector coarse_solve(Vector const &v) const { return coarse_lu.solve(v); }
  Vector coarse_solve_adjoint(Vector const &v) const
  {
    return coarse_lu.adjoint().solve(v);
  }
};

/// Orthonormalizes Zraw (thin QR, Z = Q) and factors Z^H A Z. Throws
/// std::runtime_error when Z^H A Z has a condition estimate above 1e14.
DeflationSubspace build_subspace(LinearOperator const &A, DenseMatrix const &Zraw);

/// Same, for a Z whose columns are already orthonormal (no QR).
DeflationSubspace subspace_from_orthonormal(LinearOperator const &A, DenseMatrix Z);

/// P = I - A Z (Z^H A Z)^{-1} Z^H and P~ = I - Z (Z^H A Z)^{-1} Z^H A, applied
/// without forming either matrix. Holds references to A and D.
class ProjectorPair
{
public:
  ProjectorPair(LinearOperator const &A, DeflationSubspace const &D);

  Vector apply_P(Vector const &v) const;
  Vector apply_P_adjoint(Vector const &v) const;
  Vector apply_Ptilde(Vector const &v) const;
  /// (I - P~) applied through b = A x:  Z (Z^H A Z)^{-1} Z^H b.
  Vector coarse_correction(Vector const &b) const;

  /// v -> P A v, with adjoint v -> A^H P^H v when A has one.
  LinearOperator deflated_operator() const;

private:
  LinearOperator const &_A;
  DeflationSubspace const &_D;
};

enum class KrylovMethod
{
  gmres,
  bicg
};

/// Deflated solve: x1 = Z (Z^H A Z)^{-1} Z^H b, x# from the Krylov solve of
/// P A x = P b (x0 = 0, residual measured against P b), x2 = P~ x#,
/// x = x1 + x2. The report's final_relres is ||Pb - PAx#|| / ||Pb|| and
/// true_error is ||b - A x|| / ||b||.
std::pair<Vector, SolveReport> deflated_solve(LinearOperator const &A, Vector const &b,
                                              DeflationSubspace const &D,
                                              SolverConfig const &cfg,
                                              KrylovMethod method = KrylovMethod::bicg);

struct EigSubspace
{
  DeflationSubspace subspace;
  std::size_t inside = 0; // eigenvalues strictly inside the contour
  std::vector<std::string> warnings;
};

/// Z = orthonormalized [v_1 .. v_s] M for a random real s x m matrix M,
/// where v_i are the eigenvectors with eigenvalues inside the contour.
/// Dense eigendecomposition, N capped by `cap`.
EigSubspace exact_eigvec_subspace(LinearOperator const &A, ContourSpec const &contour,
                                  Index m, std::uint64_t seed, Index cap = 4096);

//-----------------------------------------------------------------------------
// Persistence: raw column-major complex doubles plus a JSON sidecar
// (path + ".json") with {n, m, seed, contour, q}.

struct SubspaceMeta
{
  Index n = 0;
  Index m = 0;
  std::uint64_t seed = 0;
  std::string contour;
  int q = 0;
};

void save_subspace(std::filesystem::path const &path, DenseMatrix const &Z,
                   SubspaceMeta const &meta);
DenseMatrix load_subspace(std::filesystem::path const &path, SubspaceMeta *meta = nullptr);

} // namespace cdefl

#endif
