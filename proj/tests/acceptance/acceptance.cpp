// Acceptance checks, one line per criterion:
//   acceptance [criterion ...]      (default: all of 1..9)
// Exit status is 1 if any selected criterion fails, 0 otherwise (SKIP counts
// as success).

#include <cdefl/deflation.hpp>
#include <cdefl/eig_oracle.hpp>
#include <cdefl/model_problems.hpp>
#include <cdefl/multigrid.hpp>
#include <cdefl/quadrature.hpp>
#include <cdefl/random.hpp>

#include <cli_app.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <Eigen/SparseLU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace cdefl;

namespace
{

enum class Verdict
{
  pass,
  fail,
  skip
};

struct Outcome
{
  Verdict verdict = Verdict::pass;
  std::string detail;
};

Outcome verdict(bool ok, std::string detail)
{
  return {ok ? Verdict::pass : Verdict::fail, std::move(detail)};
}

std::string sci(Real v)
{
  std::ostringstream s;
  s << std::setprecision(3) << std::scientific << v;
  return s.str();
}

Real norm2(DenseMatrix const &M)
{
  DenseMatrix const G = M.adjoint() * M;
  return std::sqrt(Eigen::SelfAdjointEigenSolver<DenseMatrix>(G, Eigen::EigenvaluesOnly)
                       .eigenvalues()
                       .maxCoeff());
}

// max over each point of the distance to the nearest point of the other set
Real hausdorff(Vector const &a, Vector const &b)
{
  auto one_way = [](Vector const &x, Vector const &y) {
    Real worst = 0.0;
    for (Index i = 0; i < x.size(); ++i)
    {
      Real best = std::numeric_limits<Real>::infinity();
      for (Index j = 0; j < y.size(); ++j)
        best = std::min(best, std::abs(x[i] - y[j]));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(one_way(a, b), one_way(b, a));
}

Vector dense_eigenvalues(DenseMatrix const &M)
{
  return Eigen::ComplexEigenSolver<DenseMatrix>(M, false).eigenvalues();
}

// orthonormal basis of the leading k left singular vectors
DenseMatrix leading_basis(DenseMatrix const &M, Index k)
{
  Eigen::JacobiSVD<DenseMatrix> svd(M, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(k);
}

DenseMatrix orthonormal(DenseMatrix const &M) { return leading_basis(M, M.cols()); }

//---------------------------------------------------------------------------

Outcome criterion1()
{
  std::mt19937_64 gen(101);
  Real worst_p = 0.0, worst_pt = 0.0, worst_comm = 0.0;
  for (int trial = 0; trial < 100; ++trial)
  {
    Index const N = std::uniform_int_distribution<Index>(20, 200)(gen);
    Index const m = std::uniform_int_distribution<Index>(1, 20)(gen);
    std::uint64_t const seed = gen();
    // dense random matrix shifted away from singularity
    DenseMatrix Ad = complex_gaussian_matrix(N, N, seed) / std::sqrt(static_cast<Real>(N));
    Ad.diagonal().array() += Complex(3.0, 1.0);
    LinearOperator const A = make_operator(Ad);
    DeflationSubspace const D =
        build_subspace(A, complex_gaussian_matrix(N, m, stream_seed(seed, "Z")));
    ProjectorPair const pp(A, D);
    Real const Anorm = norm2(Ad);
    for (int k = 0; k < 3; ++k)
    {
      Vector const v = complex_gaussian_matrix(N, 1, stream_seed(seed, "v" + std::to_string(k)));
      Real const vn = v.norm();
      Vector const Pv = pp.apply_P(v);
      Vector const Ptv = pp.apply_Ptilde(v);
      worst_p = std::max(worst_p, (pp.apply_P(Pv) - Pv).norm() / vn);
      worst_pt = std::max(worst_pt, (pp.apply_Ptilde(Ptv) - Ptv).norm() / vn);
      worst_comm = std::max(worst_comm, (pp.apply_P(A(v)) - A(Ptv)).norm() / (Anorm * vn));
    }
  }
  bool const ok = worst_p <= 1e-10 && worst_pt <= 1e-10 && worst_comm <= 1e-10;
  return verdict(ok, "max |P^2 v - P v| = " + sci(worst_p) + ", |P~^2 v - P~ v| = " +
                         sci(worst_pt) + ", |PAv - AP~v|/|A| = " + sci(worst_comm) +
                         " over 100 pairs (bound 1e-10)");
}

Outcome criterion2()
{
  std::mt19937_64 gen(202);
  Real worst = 0.0;
  for (int trial = 0; trial < 20; ++trial)
  {
    Index const N = std::uniform_int_distribution<Index>(20, 100)(gen);
    Index const m = std::uniform_int_distribution<Index>(1, 10)(gen);
    std::uint64_t const seed = gen();
    Vector const lambda = complex_gaussian_matrix(N, 1, stream_seed(seed, "lambda")).col(0);
    SyntheticSystem const sys = synthetic_system({lambda, 10.0, seed});
    LinearOperator const A = make_operator(sys.A);

    // deflate the eigenvectors of m eigenvalues chosen at random
    std::vector<Index> order(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i)
      order[static_cast<std::size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), gen);
    DenseMatrix Vm(N, m);
    Vector expected(N);
    for (Index k = 0; k < N; ++k)
    {
      Index const i = order[static_cast<std::size_t>(k)];
      if (k < m)
      {
        Vm.col(k) = sys.V.col(i);
        expected[k] = 0.0;
      }
      else
        expected[k] = lambda[i];
    }
    DeflationSubspace const D = build_subspace(A, Vm);
    ProjectorPair const pp(A, D);
    Vector const got = dense_eigenvalues(to_dense(pp.deflated_operator()));
    worst = std::max(worst, hausdorff(got, expected) / norm2(to_dense(sys.A)));
  }
  return verdict(worst <= 1e-7, "max Hausdorff(sigma(PA), {0 x m} + rest) / |A| = " +
                                    sci(worst) + " over 20 matrices (bound 1e-7)");
}

Outcome criterion3()
{
  Index const N = 100, s = 8, m = 10;
  Vector lambda(N);
  Real const pi = std::numbers::pi;
  for (Index k = 0; k < s; ++k)
    lambda[k] = std::polar(0.3 + 0.02 * static_cast<Real>(k), 2.0 * pi * static_cast<Real>(k) / s);
  for (Index k = s; k < N; ++k)
    lambda[k] = std::polar(3.0 + 2.0 * static_cast<Real>(k - s) / static_cast<Real>(N - s),
                           0.37 * static_cast<Real>(k));
  SyntheticSystem const sys = synthetic_system({lambda, 10.0, 303});
  LinearOperator const A = make_operator(sys.A);
  DenseMatrix const truth = orthonormal(sys.V.leftCols(s));
  DenseMatrix const Y = gaussian_matrix(N, m, stream_seed(303, "Y"));

  std::vector<Real> errors;
  for (int q : {8, 16, 32, 64})
  {
    ContourResult const cr = contour_subspace(A, Y, {0.0, 1.0, q});
    std::vector<Real> const angles = principal_angles(leading_basis(cr.Zraw, s), truth);
    errors.push_back(*std::max_element(angles.begin(), angles.end()));
  }
  bool monotone = true;
  for (std::size_t k = 1; k < errors.size(); ++k)
    monotone = monotone && errors[k] < errors[k - 1];
  std::string detail = "max principal angle at q = 8,16,32,64:";
  for (Real e : errors)
    detail += " " + sci(e);
  detail += " (q = 64 bound 1e-6, monotone)";
  return verdict(monotone && errors.back() <= 1e-6, detail);
}

Outcome criterion4()
{
  Real worst = 0.0, worst_sum = 0.0;
  for (int q : {1, 2, 4, 8, 16, 32})
  {
    auto const rule = legendre_gauss<Real>(q);
    Real sum = 0.0;
    for (Real w : rule.weights)
      sum += w;
    worst_sum = std::max(worst_sum, std::abs(sum - 2.0));
    for (int k = 0; k <= 2 * q - 1; ++k)
    {
      Real integral = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        integral += rule.weights[i] * std::pow(rule.nodes[i], k);
      Real const exact = k % 2 == 1 ? 0.0 : 2.0 / (k + 1);
      worst = std::max(worst, std::abs(integral - exact));
    }
  }
  return verdict(worst <= 1e-12 && worst_sum <= 1e-14,
                 "max monomial error " + sci(worst) + " (bound 1e-12), max |sum w - 2| " +
                     sci(worst_sum) + " (bound 1e-14)");
}

// uniform sample of the interior of the ellipse, scaled by 0.98 to stay
// strictly inside
Vector ellipse_points(EllipseSpec const &E, Index count, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<Real> u(0.0, 1.0);
  Real const b = std::sqrt(E.semi_major * E.semi_major - E.focal * E.focal);
  Vector out(count);
  for (Index k = 0; k < count; ++k)
  {
    Real const rho = 0.98 * std::sqrt(u(gen));
    Real const phi = 2.0 * std::numbers::pi * u(gen);
    out[k] = E.center + Complex(rho * E.semi_major * std::cos(phi), rho * b * std::sin(phi));
  }
  return out;
}

// largest amount by which the residual history exceeds the bound
Real bound_excess(std::vector<Real> const &history, EllipseSpec const &E)
{
  Real excess = -std::numeric_limits<Real>::infinity();
  for (std::size_t j = 0; j < history.size(); ++j)
    excess = std::max(excess, history[j] - chebyshev_bound(E, static_cast<long>(j)).exact);
  return excess;
}

Outcome criterion5()
{
  EllipseSpec const E{{4.0, 0.0}, 1.0, 2.0};
  Index const N = 60;
  SolverConfig cfg;
  cfg.tol = 1e-14;
  cfg.maxit = N;
  cfg.restart = static_cast<int>(N);
  cfg.record_history = true;

  // all eigenvalues in the ellipse, normal matrix
  Vector const inside = ellipse_points(E, N, 505);
  SparseMatrix const A1 = synthetic_matrix({inside, 1.0, 505});
  LinearOperator const op1 = make_operator(A1);
  Vector const b1 = matvec(A1, Vector::Ones(N));
  Real const excess1 = bound_excess(gmres(op1, b1, Vector::Zero(N), cfg).second.residual_history, E);

  // 55 in the ellipse plus 5 outliers near the origin; deflate their eigenvectors
  Index const outliers = 5;
  Vector lambda(N);
  lambda.head(N - outliers) = ellipse_points(E, N - outliers, 506);
  for (Index k = 0; k < outliers; ++k)
    lambda[N - outliers + k] = std::polar(0.05 + 0.05 * static_cast<Real>(k),
                                          2.0 * std::numbers::pi * static_cast<Real>(k) / outliers);
  SyntheticSystem const sys = synthetic_system({lambda, 1.0, 506});
  LinearOperator const op2 = make_operator(sys.A);
  DeflationSubspace const D = build_subspace(op2, sys.V.rightCols(outliers));
  Real const kappa_r22 = kappa2_r22(sys.V, outliers);
  Vector const b2 = matvec(sys.A, Vector::Ones(N));
  auto const rep2 = deflated_solve(op2, b2, D, cfg, KrylovMethod::gmres).second;
  Real excess2 = -std::numeric_limits<Real>::infinity();
  for (std::size_t j = 0; j < rep2.residual_history.size(); ++j)
    excess2 = std::max(excess2, rep2.residual_history[j] -
                                    chebyshev_bound(E, static_cast<long>(j), kappa_r22).exact);

  // the undeflated run on the second matrix is expected to break the bound
  auto const rep_plain = gmres(op2, b2, Vector::Zero(N), cfg).second;
  std::ostringstream detail;
  detail << "plain GMRES max excess over the ellipse bound " << sci(excess1) << ", deflated "
         << sci(excess2) << " (kappa(R22) = " << std::setprecision(4) << kappa_r22
         << ", slack 1e-10); deflated " << rep2.iterations << " vs plain "
         << rep_plain.iterations << " iterations";
  return verdict(excess1 <= 1e-10 && excess2 <= 1e-10 && std::abs(kappa_r22 - 1.0) <= 1e-8,
                 detail.str());
}

Outcome criterion6()
{
  Index const N = 500;
  SparseMatrix const A = synthetic_matrix({clustered_spectrum(N, 10, 1e-6), 1.0, 606});
  LinearOperator const op = make_operator(A);
  Vector const b = matvec(A, Vector::Ones(N));
  SolverConfig cfg;
  cfg.tol = 1e-7;
  cfg.maxit = 10 * N;
  auto const plain = bicg(op, b, Vector::Zero(N), cfg).second;

  DenseMatrix const Y = gaussian_matrix(N, 15, stream_seed(606, "Y"));
  ContourResult const cr = contour_subspace(op, Y, {0.0, 0.5, 32});
  DeflationSubspace const D = build_subspace(op, cr.Zraw);
  auto const defl = deflated_solve(op, b, D, cfg).second;

  long const budget = static_cast<long>(0.05 * static_cast<Real>(cfg.maxit));
  bool const plain_fails = !plain.converged;
  bool const defl_fast = defl.converged && defl.iterations <= budget;
  std::ostringstream detail;
  detail << "plain BiCG " << (plain.converged ? "converged" : "did not converge") << " in "
         << plain.iterations << " its (relres " << sci(plain.final_relres)
         << ", must fail within " << cfg.maxit << "); deflated " << defl.iterations
         << " its (relres " << sci(defl.final_relres) << ", true " << sci(*defl.true_error)
         << ", budget " << budget << ")";
  return verdict(plain_fails && defl_fast, detail.str());
}

Outcome criterion7()
{
  char const *dir = std::getenv("CDEFL_DATA_DIR");
  std::filesystem::path const root = dir ? dir : "";
  std::filesystem::path const bcs = root / "bcsstm27.mtx";
  std::filesystem::path const mah = root / "mahindas.mtx";
  if (!dir || !std::filesystem::exists(bcs) || !std::filesystem::exists(mah))
    return {Verdict::skip, "set CDEFL_DATA_DIR to a directory holding bcsstm27.mtx and "
                           "mahindas.mtx (see README)"};

  struct Row
  {
    std::filesystem::path path;
    std::string precond, contour;
    long m;
    std::size_t eig_expected;
  };
  std::vector<Row> const rows = {{bcs, "none", "0,0,5", 400, 363},
                                 {mah, "ilu0", "-1,0,1", 50, 31}};
  bool ok = true;
  std::ostringstream detail;
  for (Row const &row : rows)
  {
    auto run = [&](std::string const &computation) {
      cli::RunConfig cfg;
      cfg.matrix = row.path.string();
      cfg.precond = row.precond;
      cfg.computation = computation;
      cfg.contour = row.contour;
      if (computation != "plain")
        cfg.m = row.m;
      cfg.q = 128;
      return cli::run_pipeline(cfg);
    };
    auto const plain = run("plain");
    auto const contour = run("contour-deflate");
    auto const eig = run("eig-deflate");
    auto iters = [](cli::RunOutcome const &o) { return o.report["solve"]["iterations"].get<long>(); };
    std::size_t const inside = contour.report["row"]["eig_inside"].get<std::size_t>();
    Real const err_c = contour.report["err"].get<Real>();
    Real const err_e = eig.report["err"].get<Real>();
    bool row_ok = inside == row.eig_expected && contour.converged && eig.converged &&
                  err_c <= 1e-7 && err_e <= 1e-7 && iters(eig) <= iters(contour) &&
                  (!plain.converged || iters(contour) < iters(plain));
    if (row.path == mah)
      row_ok = row_ok && !plain.converged;
    ok = ok && row_ok;
    detail << row.path.filename().string() << ": #eig " << inside << "/" << row.eig_expected
           << ", its plain/contour/eig " << iters(plain) << "/" << iters(contour) << "/"
           << iters(eig) << ", Err " << sci(err_c) << "/" << sci(err_e) << "; ";
  }
  return verdict(ok, detail.str());
}

Outcome criterion8()
{
  // Poisson, weighted Jacobi V(2,2)
  ConvDiffSpec const poisson = manufactured_spec(63, 0.0);
  GridHierarchy const Hp = build_hierarchy(poisson, 5);
  auto const rp = mg_solve(Hp, CycleSpec{}, convdiff_matrix(poisson).second, 1e-8, 12).second;
  Real const worst_factor =
      *std::max_element(rp.reduction_factors.begin(), rp.reduction_factors.end());

  // convection-diffusion with the deflated GMRES rougher, 5 GMRES steps per pass
  ConvDiffSpec const cd = manufactured_spec(31, 100.0);
  GridHierarchy const Hc = build_hierarchy(cd, 4, LevelDeflationSetup{});
  Vector const b = convdiff_matrix(cd).second;
  CycleSpec v;
  v.smoother = SmootherKind::deflated_krylov;
  v.krylov_steps = 5;
  CycleSpec w = v;
  w.kind = CycleKind::W;
  auto const rv = mg_solve(Hc, v, b, 1e-6, 4).second;
  auto const rw = mg_solve(Hc, w, b, 1e-6, 2).second;

  bool const ok = worst_factor <= 0.2 && rp.solve.converged &&
                  (rv.solve.converged || rw.solve.converged);
  std::ostringstream detail;
  detail << "Poisson n=63: " << rp.solve.iterations << " V-cycles, worst factor "
         << std::setprecision(3) << worst_factor << "; Re=100 n=31: V " << rv.solve.iterations
         << " cycles to " << sci(rv.solve.final_relres) << ", W " << rw.solve.iterations
         << " cycles to " << sci(rw.solve.final_relres) << " (deflated levels "
         << Hc.deflated_levels() << ")";
  return verdict(ok, detail.str());
}

Real manufactured_error(int n, Real re)
{
  auto const [A, b] = convdiff_matrix(manufactured_spec(n, re));
  Eigen::SparseMatrix<Complex> const Ac = A;
  Eigen::SparseLU<Eigen::SparseMatrix<Complex>> lu(Ac);
  Vector const x = lu.solve(b);
  return (x - grid_sample(n, manufactured_solution)).cwiseAbs().maxCoeff();
}

Outcome criterion9()
{
  Real worst_eig = 0.0;
  for (int n : {3, 7, 15})
  {
    SparseMatrix const A = convdiff_matrix(manufactured_spec(n, 0.0)).first;
    Real const h = 1.0 / (n + 1);
    Vector analytic(static_cast<Index>(n) * n);
    for (int j = 1; j <= n; ++j)
      for (int k = 1; k <= n; ++k)
      {
        Real const sj = std::sin(j * std::numbers::pi * h / 2.0);
        Real const sk = std::sin(k * std::numbers::pi * h / 2.0);
        analytic[(j - 1) * n + (k - 1)] = 4.0 / (h * h) * (sj * sj + sk * sk);
      }
    worst_eig = std::max(worst_eig, hausdorff(dense_eigenvalues(to_dense(A)), analytic));
  }

  bool ratios_ok = true;
  std::ostringstream detail;
  detail << "max eigenvalue deviation " << sci(worst_eig) << " (bound 1e-8); error ratios";
  for (Real re : {0.0, 10.0})
  {
    detail << " Re=" << re << ":";
    Real previous = manufactured_error(7, re);
    for (int n : {15, 31, 63})
    {
      Real const e = manufactured_error(n, re);
      Real const ratio = previous / e;
      ratios_ok = ratios_ok && ratio >= 3.5 && ratio <= 4.5;
      detail << " " << std::setprecision(3) << std::fixed << ratio;
      previous = e;
    }
    detail << std::defaultfloat;
  }
  detail << " (in [3.5, 4.5])";
  return verdict(worst_eig <= 1e-8 && ratios_ok, detail.str());
}

} // namespace

int main(int argc, char **argv)
{
  std::vector<std::function<Outcome()>> const criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9};

  std::set<int> selected;
  for (int i = 1; i < argc; ++i)
    selected.insert(std::atoi(argv[i]));
  if (selected.empty())
    for (int c = 1; c <= 9; ++c)
      selected.insert(c);

  bool any_fail = false;
  for (int c : selected)
  {
    if (c < 1 || c > 9)
    {
      std::cerr << "unknown criterion " << c << '\n';
      return 2;
    }
    auto const t0 = std::chrono::steady_clock::now();
    Outcome out;
    try
    {
      out = criteria[static_cast<std::size_t>(c - 1)]();
    }
    catch (std::exception const &e)
    {
      out = {Verdict::fail, std::string("exception: ") + e.what()};
    }
    Real const secs =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
    char const *tag = out.verdict == Verdict::pass ? "PASS"
                      : out.verdict == Verdict::fail ? "FAIL"
                                                      : "SKIP";
    any_fail = any_fail || out.verdict == Verdict::fail;
    std::cout << "criterion " << c << ": " << tag << "  " << out.detail << "  ["
              << std::fixed << std::setprecision(1) << secs << " s]" << std::defaultfloat
              << std::endl;
  }
  return any_fail ? 1 : 0;
}
