#ifndef CDEFL_MULTIGRID_HPP
#define CDEFL_MULTIGRID_HPP

#include <cdefl/deflation.hpp>
#include <cdefl/krylov.hpp>
#include <cdefl/model_problems.hpp>

#include <Eigen/LU>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cdefl
{

/// Geometric multigrid for the convection-diffusion model problem on nested
/// grids n_{j+1} = 2 n_j + 1. Coarse operators are rediscretized, transfers
/// are bilinear prolongation and full weighting (R = P^T / 4).

enum class CycleKind
{
  V,
  W
};

enum class SmootherKind
{
  jacobi,
  gauss_seidel,
  deflated_krylov
};

struct CycleSpec
{
  CycleKind kind = CycleKind::V;
  int pre_smooth = 2;
  int post_smooth = 2;
  SmootherKind smoother = SmootherKind::jacobi;
  Real jacobi_weight = 0.8;
  int krylov_steps = 3; // GMRES iterations per deflated-Krylov smoothing step

  int recursions() const { return kind == CycleKind::V ? 1 : 2; }
};

/// How the per-level deflation subspace of the deflated-Krylov smoother is
/// built: contour quadrature around the eigenvalues with
/// |lambda| < radius_fraction * (Gershgorin bound of A_j).
struct LevelDeflationSetup
{
  Real radius_fraction = 0.02;
  Index m = 16;
  int quad_order = 64;
  std::uint64_t seed = 7;
};

struct GridLevel
{
  int n = 0;
  SparseMatrix A;
  Vector inv_diag;
  SparseMatrix prolongation; // from the next coarser level; empty on level 0
  SparseMatrix restriction;
  std::optional<DeflationSubspace> deflation;
  Real work_weight = 1.0; // nnz(A_j) / nnz(A_finest)
};

struct GridHierarchy
{
  std::vector<GridLevel> levels; // coarsest first
  Eigen::PartialPivLU<DenseMatrix> coarse_lu;

  std::size_t depth() const { return levels.size(); }
  GridLevel const &finest() const { return levels.back(); }
  std::vector<int> sizes() const; // finest first
  /// Levels whose contour found something to deflate; the others smooth
  /// with plain GMRES.
  int deflated_levels() const;
};

/// Finest sizes n that admit `levels` 2:1 coarsenings, for coarsest n = 1..count.
std::vector<int> admissible_sizes(int levels, int count = 4);

GridHierarchy build_hierarchy(ConvDiffSpec const &spec, int levels,
                              std::optional<LevelDeflationSetup> deflation = std::nullopt);

/// Bilinear prolongation from an nc x nc grid to (2nc+1) x (2nc+1).
SparseMatrix bilinear_prolongation(int nc);

struct CycleStats
{
  Real work_units = 0.0; // matvec equivalents on the finest grid
};

/// One cycle. Throws std::runtime_error naming the level if a smoothing pass
/// grows the residual by more than 10x.
Vector mg_cycle(GridHierarchy const &H, CycleSpec const &spec, Vector const &b,
                Vector const &x, CycleStats *stats = nullptr);

struct MultigridReport
{
  SolveReport solve; // iterations = cycles, residual_history = ||r_k|| / ||r_0||
  std::vector<Real> reduction_factors;
  Real work_units_per_cycle = 0.0;
};

std::pair<Vector, MultigridReport> mg_solve(GridHierarchy const &H, CycleSpec const &spec,
                                            Vector const &b, Real tol, int max_cycles,
                                            std::optional<Vector> const &x0 = std::nullopt);

CycleKind parse_cycle_kind(std::string const &text);
SmootherKind parse_smoother(std::string const &text);

} // namespace cdefl

#endif
