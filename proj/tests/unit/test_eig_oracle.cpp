#include "test_util.hpp"

#include <cdefl/eig_oracle.hpp>

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>

using namespace cdefl;

namespace
{

// Companion matrix of the monic polynomial with the given roots; the
// coefficients come from expanding the product by hand.
DenseMatrix companion(std::vector<Complex> const &roots)
{
  std::vector<Complex> c{1.0}; // c[k] multiplies z^k, highest last
  for (Complex r : roots)
  {
    std::vector<Complex> next(c.size() + 1, 0.0);
    for (std::size_t k = 0; k < c.size(); ++k)
    {
      next[k + 1] += c[k];
      next[k] -= r * c[k];
    }
    c = next;
  }
  auto const n = static_cast<Index>(roots.size());
  DenseMatrix C = DenseMatrix::Zero(n, n);
  for (Index i = 1; i < n; ++i)
    C(i, i - 1) = 1.0;
  for (Index i = 0; i < n; ++i)
    C(i, n - 1) = -c[static_cast<std::size_t>(i)];
  return C;
}

// C_j(x) by the three-term recurrence.
Real chebyshev_recurrence(Real x, long j)
{
  if (j == 0)
    return 1.0;
  Real t0 = 1.0, t1 = x;
  for (long k = 2; k <= j; ++k)
  {
    Real const t2 = 2.0 * x * t1 - t0;
    t0 = t1;
    t1 = t2;
  }
  return t1;
}

DenseMatrix diag_matrix(std::vector<Complex> const &d)
{
  DenseMatrix D = DenseMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  for (std::size_t i = 0; i < d.size(); ++i)
    D(static_cast<Index>(i), static_cast<Index>(i)) = d[i];
  return D;
}

// Random diagonalizable matrix V diag(lambda) V^{-1}.
DenseMatrix random_diagonalizable(Vector const &lambda, std::uint64_t seed)
{
  DenseMatrix const V = testutil::random_dense(lambda.size(), lambda.size(), seed);
  return V * lambda.asDiagonal() * testutil::naive_inverse(V);
}

} // namespace

TEST_SUITE("eig_oracle")
{
  TEST_CASE("dense_eig on a diagonal matrix")
  {
    SpectrumReport const r = dense_eig(diag_matrix({1.0, 2.0, 3.0}));
    REQUIRE(r.eigenvectors);
    for (Index i = 0; i < 3; ++i)
    {
      Complex const lambda = r.eigenvalues[i];
      Index k = 0;
      for (; k < 3; ++k)
        if (std::abs(lambda - Complex(static_cast<Real>(k + 1), 0.0)) <= 1e-14)
          break;
      REQUIRE(k < 3);
      // eigenvector is the k-th axis up to a unimodular factor
      CHECK(std::abs(std::abs((*r.eigenvectors)(k, i)) - 1.0) <= 1e-14);
    }
  }

  TEST_CASE("dense_eig recovers companion-matrix roots")
  {
    std::vector<Complex> roots;
    for (int k = 0; k < 5; ++k)
    {
      roots.push_back(std::polar(1.0, 2.0 * std::numbers::pi * k / 5.0));
      roots.push_back(std::polar(2.0, 2.0 * std::numbers::pi * (k + 0.5) / 5.0));
    }
    SpectrumReport const r = dense_eig(companion(roots));
    Vector expect(10);
    for (Index i = 0; i < 10; ++i)
      expect[i] = roots[static_cast<std::size_t>(i)];
    CHECK(testutil::hausdorff(r.eigenvalues, expect) <= 1e-8);
  }

  TEST_CASE("dense_eig residuals")
  {
    Vector lambda = testutil::random_vector(40, 1);
    DenseMatrix const A = random_diagonalizable(lambda, 2);
    SpectrumReport const r = dense_eig(A);
    Real const normA = A.operatorNorm();
    for (Index i = 0; i < 40; ++i)
    {
      Vector const v = r.eigenvectors->col(i);
      CHECK((A * v - r.eigenvalues[i] * v).norm() <= 1e-10 * normA);
    }
    CHECK(testutil::hausdorff(r.eigenvalues, lambda) <= 1e-8);

    DenseMatrix const H = A + A.adjoint();
    SpectrumReport const h = dense_eig(H);
    CHECK(h.eigenvalues.imag().cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("skew-symmetric 2x2 has +-i")
  {
    DenseMatrix S(2, 2);
    S << 0.0, 1.0, -1.0, 0.0;
    SpectrumReport const r = dense_eig(S);
    Vector expect(2);
    expect << Complex(0.0, 1.0), Complex(0.0, -1.0);
    CHECK(testutil::hausdorff(r.eigenvalues, expect) <= 1e-14);
  }

  TEST_CASE("dense cap")
  {
    CHECK_THROWS_AS(dense_eig(DenseMatrix::Identity(10, 10), true, 5), std::invalid_argument);
  }

  TEST_CASE("count_inside")
  {
    SpectrumReport r = dense_eig(diag_matrix({0.5, Complex(0.0, 0.99), 1.0, 2.0, -0.999999999999}));
    count_inside(r, ContourSpec{0.0, 1.0, 32});
    CHECK(r.count_inside == 3);
    CHECK(r.near_boundary == 2);
  }

  TEST_CASE("true spectral projector")
  {
    DenseMatrix const D = diag_matrix({0.5, 2.0});
    DenseMatrix expect = DenseMatrix::Zero(2, 2);
    expect(0, 0) = 1.0;
    CHECK((true_spectral_projector(D, {0.0, 1.0, 32}) - expect).norm() <= 1e-14);
    CHECK((true_spectral_projector(D, {0.0, 10.0, 32}) - DenseMatrix::Identity(2, 2)).norm() <=
          1e-14);
    CHECK(true_spectral_projector(D, {Complex(5.0, 5.0), 1.0, 32}).norm() == 0.0);
    CHECK_THROWS_AS(true_spectral_projector(D, {0.0, 2.0, 32}), std::invalid_argument);

    Vector lambda(30);
    for (Index i = 0; i < 30; ++i)
      lambda[i] = std::polar(0.2 + 0.1 * static_cast<Real>(i), 0.7 * static_cast<Real>(i));
    DenseMatrix const A = random_diagonalizable(lambda, 3);
    ContourSpec const G{0.0, 1.25, 32};
    DenseMatrix const P = true_spectral_projector(A, G);
    CHECK((P * P - P).norm() <= 1e-9 * P.norm());
    CHECK((P * A - A * P).norm() <= 1e-9 * A.norm());
    Eigen::JacobiSVD<DenseMatrix> svd(P);
    RealVector const sv = svd.singularValues();
    Index rank = 0;
    for (Index i = 0; i < sv.size(); ++i)
      rank += sv[i] > 1e-8 * sv[0] ? 1 : 0;
    SpectrumReport rep = dense_eig(A, false);
    count_inside(rep, G);
    CHECK(rank == static_cast<Index>(rep.count_inside));
    CHECK(rep.count_inside == 11);
  }

  TEST_CASE("principal angles")
  {
    DenseMatrix const U = thin_qr(testutil::random_dense(10, 3, 4)).Q;
    for (Real a : principal_angles(U, U))
      CHECK(a <= 1e-7);

    DenseMatrix E1 = DenseMatrix::Zero(4, 2), E2 = DenseMatrix::Zero(4, 2);
    E1(0, 0) = E1(1, 1) = 1.0;
    E2(2, 0) = E2(3, 1) = 1.0;
    for (Real a : principal_angles(E1, E2))
      CHECK(std::abs(a - std::numbers::pi / 2) <= 1e-14);

    DenseMatrix A = DenseMatrix::Zero(3, 2), B = DenseMatrix::Zero(3, 2);
    A(0, 0) = A(1, 0) = 1.0 / std::sqrt(2.0);
    A(2, 1) = 1.0;
    B(0, 0) = 1.0;
    B(2, 1) = 1.0;
    auto const ang = principal_angles(A, B);
    REQUIRE(ang.size() == 2);
    CHECK(ang[0] <= 1e-15);
    CHECK(std::abs(ang[1] - std::numbers::pi / 4) <= 1e-14);

    // a tiny angle keeps its relative accuracy
    Real const t = 1e-10;
    DenseMatrix a(2, 1), b(2, 1);
    a << 1.0, 0.0;
    b << std::cos(t), std::sin(t);
    auto const tiny = principal_angles(a, b);
    CHECK(std::abs(tiny[0] - t) <= 1e-6 * t);

    CHECK_THROWS_AS(principal_angles(DenseMatrix::Zero(3, 1), DenseMatrix::Zero(4, 1)),
                    std::invalid_argument);
  }

  TEST_CASE("chebyshev bound")
  {
    EllipseSpec const E{Complex(4.0, 0.0), 1.0, 2.0};
    CHECK(chebyshev_bound(E, 0, 3.5).exact == doctest::Approx(3.5).epsilon(1e-15));

    EllipseSpec const seg{Complex(2.0, 0.0), 1.0, 1.0};
    CHECK(std::abs(chebyshev_bound(seg, 1).exact - 0.5) <= 1e-15);

    auto const b10 = chebyshev_bound(E, 10);
    Real const oracle = chebyshev_recurrence(2.0, 10) / chebyshev_recurrence(4.0, 10);
    CHECK(std::abs(b10.exact - oracle) <= 1e-12 * oracle);
    CHECK(std::abs(b10.exact - b10.asymptotic) <= 0.05 * b10.asymptotic);
    Real const delta = (2.0 + std::sqrt(3.0)) / (4.0 + std::sqrt(15.0));
    CHECK(std::abs(b10.delta - delta) <= 1e-15);

    for (long j = 1; j <= 40; ++j)
    {
      Real const ref = chebyshev_recurrence(2.0, j) / chebyshev_recurrence(4.0, j);
      CHECK(std::abs(chebyshev_bound(E, j).exact - ref) <= 1e-12 * ref);
    }

    auto const big = chebyshev_bound(E, 800);
    CHECK(std::isfinite(big.exact));
    CHECK(big.exact > 0.0);
    // far past the underflow point the bound is zero, not NaN
    CHECK(chebyshev_bound(E, 5000).exact == 0.0);
    CHECK(std::isfinite(chebyshev_bound(E, 5000).delta));

    CHECK_THROWS_AS(chebyshev_bound({Complex(0.5, 0.0), 1.0, 2.0}, 3), std::invalid_argument);
    CHECK_THROWS_AS(chebyshev_bound({Complex(4.0, 0.0), 2.0, 1.0}, 3), std::invalid_argument);

    // complex argument off the real segment
    Complex const x(0.3, 0.4);
    Complex c0 = 1.0, c1 = x;
    for (int k = 2; k <= 7; ++k)
    {
      Complex const c2 = 2.0 * x * c1 - c0;
      c0 = c1;
      c1 = c2;
    }
    CHECK(std::abs(chebyshev_abs(x, 7) - std::abs(c1)) <= 1e-12 * std::abs(c1));
  }

  TEST_CASE("kappa2_r22")
  {
    DenseMatrix const Q = thin_qr(testutil::random_dense(12, 12, 5)).Q;
    CHECK(std::abs(kappa2_r22(Q, 4) - 1.0) <= 1e-10);
    DenseMatrix const V = testutil::random_dense(20, 20, 6);
    CHECK(kappa2_r22(V, 19) == doctest::Approx(1.0));
    CHECK(kappa2_r22(V, 5) <= kappa2(V) * (1.0 + 1e-10));
    DenseMatrix S = V;
    S.col(3) = S.col(2);
    CHECK_THROWS(kappa2_r22(S, 5));
    CHECK_THROWS_AS(kappa2_r22(V, 0), std::invalid_argument);
    CHECK_THROWS_AS(kappa2_r22(V, 20), std::invalid_argument);
  }

  TEST_CASE("eigenvalue csv")
  {
    auto const path = std::filesystem::temp_directory_path() / "cdefl_eigs.csv";
    Vector ev(3);
    ev << 1.0, 2.0, 3.0;
    write_eigenvalues_csv(path, ev);
    std::ifstream in(path);
    std::string line;
    int rows = 0;
    std::getline(in, line);
    CHECK(line == "re,im");
    while (std::getline(in, line))
      ++rows;
    CHECK(rows == 3);
    std::filesystem::remove(path);
  }
}
