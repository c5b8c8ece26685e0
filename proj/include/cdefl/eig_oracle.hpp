#ifndef CDEFL_EIG_ORACLE_HPP
#define CDEFL_EIG_ORACLE_HPP

#include <cdefl/contour.hpp>
#include <cdefl/sparse.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <vector>

namespace cdefl
{

/// Dense validation oracle. Everything here is O(N^3) and guarded by a size
/// cap; none of it is used on the solver path except for eigenvector-based
/// deflation subspaces.

inline constexpr Index default_dense_cap = 4096;

struct SpectrumReport
{
  Vector eigenvalues;
  std::optional<DenseMatrix> eigenvectors; // unit-norm columns
  std::size_t count_inside = 0;
  std::size_t near_boundary = 0; // within 1e-8 r of the contour
  std::optional<Real> kappa2_V;
  std::optional<Real> kappa2_R22;
};

SpectrumReport dense_eig(DenseMatrix const &A, bool vectors = true,
                         Index cap = default_dense_cap);

/// Number of eigenvalues with |lambda - c| < r, plus those within 1e-8 r of
/// the circle (reported, not excluded).
void count_inside(SpectrumReport &report, ContourSpec const &contour);

/// P = V diag(1_inside) V^{-1}. Throws if an eigenvalue lies within 1e-8 r
/// of the contour.
DenseMatrix true_spectral_projector(DenseMatrix const &A, ContourSpec const &contour,
                                    Index cap = default_dense_cap);

/// Canonical angles between range(U) and range(W), ascending, in radians.
/// Inputs need orthonormal columns. Small angles come from the sines and
/// large ones from the cosines so both ends keep full relative accuracy.
std::vector<Real> principal_angles(DenseMatrix const &U, DenseMatrix const &W);

/// Ellipse with foci c - d and c + d on a horizontal line and semi-major
/// axis a.
struct EllipseSpec
{
  Complex center{0.0, 0.0};
  Real focal = 0.0;
  Real semi_major = 0.0;

  void validate() const;
  bool contains(Complex z) const;
};

struct ChebyshevBound
{
  Real exact;      // kappa C_j(a/d) / |C_j(c/d)|
  Real asymptotic; // kappa delta^j
  Real delta;
};

ChebyshevBound chebyshev_bound(EllipseSpec const &E, long j, Real kappa = 1.0);

/// |C_j(x)| for complex x, C_j the Chebyshev polynomial of the first kind.
Real chebyshev_abs(Complex x, long j);

/// kappa_2 of the trailing (N-m) x (N-m) block of R in V = QR.
Real kappa2_r22(DenseMatrix const &V, Index m);

Real kappa2(DenseMatrix const &M);

void write_eigenvalues_csv(std::filesystem::path const &path, Vector const &eigenvalues);

} // namespace cdefl

#endif
