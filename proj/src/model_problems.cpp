#include <cdefl/model_problems.hpp>
#include <cdefl/random.hpp>

#include <Eigen/QR>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdefl
{

void ConvDiffSpec::validate() const
{
  if (n < 2)
    throw std::invalid_argument("ConvDiffSpec: n must be >= 2");
  if (!p || !q || !f || !g)
    throw std::invalid_argument("ConvDiffSpec: coefficient functions must be set");
}

std::pair<SparseMatrix, Vector> convdiff_matrix(ConvDiffSpec const &spec)
{
  spec.validate();
  return detail::convdiff_assemble(spec);
}

std::pair<SparseMatrix, Vector> detail::convdiff_assemble(ConvDiffSpec const &spec)
{
  int const n = spec.n;
  Real const h = spec.h();
  Real const h2 = h * h;
  Index const N = static_cast<Index>(n) * n;

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(5 * N));
  Vector rhs(N);

  auto index = [n](int i, int j) { return j * n + i; };

  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
    {
      Real const x = (i + 1) * h;
      Real const y = (j + 1) * h;
      // -Re p u_x - Re q u_y: velocity (bx, by) = -Re (p, q)
      Real const bx = -spec.reynolds * spec.p(x, y);
      Real const by = -spec.reynolds * spec.q(x, y);

      Real west = -1.0 / h2, east = -1.0 / h2, south = -1.0 / h2, north = -1.0 / h2;
      Real center = 4.0 / h2;
      if (spec.upwind)
      {
        if (bx >= 0.0)
        {
          center += bx / h;
          west -= bx / h;
        }
        else
        {
          center -= bx / h;
          east += bx / h;
        }
        if (by >= 0.0)
        {
          center += by / h;
          south -= by / h;
        }
        else
        {
          center -= by / h;
          north += by / h;
        }
      }
      else
      {
        east += bx / (2.0 * h);
        west -= bx / (2.0 * h);
        north += by / (2.0 * h);
        south -= by / (2.0 * h);
      }

      int const row = index(i, j);
      Real b = spec.f(x, y);
      entries.emplace_back(row, row, center);
      auto couple = [&](int ii, int jj, Real coef) {
        if (ii < 0 || ii >= n || jj < 0 || jj >= n)
          b -= coef * spec.g((ii + 1) * h, (jj + 1) * h);
        else
          entries.emplace_back(row, index(ii, jj), coef);
      };
      couple(i - 1, j, west);
      couple(i + 1, j, east);
      couple(i, j - 1, south);
      couple(i, j + 1, north);
      rhs[row] = b;
    }

  SparseMatrix A(N, N);
  A.setFromTriplets(entries.begin(), entries.end());
  A.makeCompressed();
  return {std::move(A), std::move(rhs)};
}

Real manufactured_solution(Real x, Real y)
{
  return std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * y);
}

ConvDiffSpec manufactured_spec(int n, Real reynolds, bool upwind)
{
  ConvDiffSpec spec;
  spec.n = n;
  spec.reynolds = reynolds;
  spec.upwind = upwind;
  spec.f = [reynolds](Real x, Real y) {
    Real const pi = std::numbers::pi;
    Real const sx = std::sin(pi * x), sy = std::sin(pi * y);
    Real const cx = std::cos(pi * x), cy = std::cos(pi * y);
    // -lap u - Re (u_x + u_y)
    return 2.0 * pi * pi * sx * sy - reynolds * pi * (cx * sy + sx * cy);
  };
  return spec;
}

Vector grid_sample(int n, Field2D const &u)
{
  Real const h = 1.0 / (n + 1);
  Vector v(static_cast<Index>(n) * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      v[j * n + i] = u((i + 1) * h, (j + 1) * h);
  return v;
}

DenseMatrix random_orthogonal(Index n, std::uint64_t seed)
{
  Eigen::MatrixXd G = gaussian_matrix(n, n, seed).real();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  Eigen::MatrixXd Q = qr.householderQ();
  Eigen::MatrixXd R = qr.matrixQR();
  for (Index k = 0; k < n; ++k)
    if (R(k, k) < 0.0)
      Q.col(k) *= -1.0;
  return Q.cast<Complex>();
}

SyntheticSystem synthetic_system(SyntheticSpec const &spec)
{
  Index const n = spec.eigenvalues.size();
  if (n < 1)
    throw std::invalid_argument("synthetic_matrix: need at least one eigenvalue");
  if (!(spec.conditioning_of_V >= 1.0))
    throw std::invalid_argument("synthetic_matrix: conditioning of V must be >= 1");
  if (n > synthetic_dense_cap)
    throw std::invalid_argument("synthetic_matrix: N = " + std::to_string(n) +
                                " exceeds the dense-as-sparse cap of " +
                                std::to_string(synthetic_dense_cap));

  SyntheticSystem out;
  DenseMatrix const Q1 = random_orthogonal(n, stream_seed(spec.seed, "V.left"));
  if (spec.conditioning_of_V == 1.0)
  {
    out.V = Q1;
    out.Vinv = Q1.adjoint();
  }
  else
  {
    DenseMatrix const Q2 = random_orthogonal(n, stream_seed(spec.seed, "V.right"));
    RealVector s(n);
    for (Index k = 0; k < n; ++k)
      s[k] = n == 1 ? 1.0
                    : std::pow(spec.conditioning_of_V,
                               static_cast<Real>(k) / static_cast<Real>(n - 1));
    out.V = Q1 * s.cast<Complex>().asDiagonal() * Q2.adjoint();
    out.Vinv = Q2 * s.cwiseInverse().cast<Complex>().asDiagonal() * Q1.adjoint();
  }
  DenseMatrix const A = out.V * spec.eigenvalues.asDiagonal() * out.Vinv;
  out.A = to_sparse(A);
  return out;
}

SparseMatrix synthetic_matrix(SyntheticSpec const &spec) { return synthetic_system(spec).A; }

Vector clustered_spectrum(Index n, Index small, Real small_mag)
{
  if (small < 0 || small > n)
    throw std::invalid_argument("clustered_spectrum: need 0 <= small <= n");
  Vector lambda(n);
  Real const pi = std::numbers::pi;
  for (Index k = 0; k < small; ++k)
    lambda[k] = std::polar(small_mag, 2.0 * pi * (static_cast<Real>(k) + 0.5) /
                                          static_cast<Real>(small));
  Index const rest = n - small;
  for (Index k = 0; k < rest; ++k)
    lambda[small + k] =
        rest == 1 ? 1.5 : 1.0 + static_cast<Real>(k) / static_cast<Real>(rest - 1);
  return lambda;
}

} // namespace cdefl
