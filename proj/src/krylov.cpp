#include <cdefl/krylov.hpp>

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cdefl
{

namespace
{

using Clock = std::chrono::steady_clock;

Real seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<Real>(Clock::now() - t0).count();
}

void check_system(LinearOperator const &op, Vector const &b, Vector const &x0,
                  char const *who)
{
  if (!op.apply)
    throw std::invalid_argument(std::string(who) + ": operator has no apply");
  if (b.size() != op.dim || x0.size() != op.dim)
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
}

// Complex Givens rotation zeroing b in (a, b): [c s; -conj(s) c].
void make_givens(Complex a, Complex b, Real &c, Complex &s)
{
  Real const abs_a = std::abs(a);
  if (abs_a == 0.0)
  {
    c = 0.0;
    s = Complex(1.0, 0.0);
    return;
  }
  Real const t = std::hypot(abs_a, std::abs(b));
  c = abs_a / t;
  s = (a / abs_a) * std::conj(b) / t;
}

// Reorthogonalize when the first MGS pass leaves components above this level.
constexpr Real reorth_threshold = 1e-8;
constexpr Real breakdown_eps = 1e-24;

} // namespace

void SolverConfig::validate() const
{
  if (!(tol > 0.0))
    throw std::invalid_argument("SolverConfig: tol must be positive");
  if (maxit < 1)
    throw std::invalid_argument("SolverConfig: maxit must be >= 1");
  if (restart < 1)
    throw std::invalid_argument("SolverConfig: restart must be >= 1");
}

LinearOperator make_operator(SparseMatrix const &A)
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("make_operator: matrix must be square");
  LinearOperator op;
  op.apply = [&A](Vector const &x) { return matvec(A, x); };
  op.apply_adjoint = [&A](Vector const &x) { return matvec_adjoint(A, x); };
  op.dim = A.rows();
  op.real = is_real(A);
  return op;
}

LinearOperator make_operator(DenseMatrix const &A)
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("make_operator: matrix must be square");
  LinearOperator op;
  op.apply = [&A](Vector const &x) -> Vector { return A * x; };
  op.apply_adjoint = [&A](Vector const &x) -> Vector { return A.adjoint() * x; };
  op.dim = A.rows();
  op.real = is_real(A);
  return op;
}

LinearOperator identity_operator(Index n)
{
  LinearOperator op;
  op.apply = [](Vector const &x) { return x; };
  op.apply_adjoint = [](Vector const &x) { return x; };
  op.dim = n;
  op.real = true;
  return op;
}

DenseMatrix to_dense(LinearOperator const &op)
{
  DenseMatrix M(op.dim, op.dim);
  Vector e = Vector::Zero(op.dim);
  for (Index j = 0; j < op.dim; ++j)
  {
    e[j] = 1.0;
    M.col(j) = op(e);
    e[j] = 0.0;
  }
  return M;
}

Real relative_residual(LinearOperator const &op, Vector const &b, Vector const &x)
{
  Real const bnorm = b.norm();
  Real const rnorm = (b - op(x)).norm();
  if (bnorm == 0.0)
    return rnorm;
  return rnorm / bnorm;
}

std::pair<Vector, SolveReport> gmres(LinearOperator const &op, Vector const &b,
                                     Vector const &x0, SolverConfig const &cfg)
{
  cfg.validate();
  check_system(op, b, x0, "gmres");
  auto const t0 = Clock::now();
  Index const n = op.dim;
  SolveReport rep;

  Real const bnorm = b.norm();
  if (bnorm == 0.0)
  {
    rep.converged = true;
    if (cfg.record_history)
      rep.residual_history.push_back(1.0);
    rep.wall_time_s = seconds_since(t0);
    return {Vector::Zero(n), rep};
  }

  Vector x = x0;
  Vector r = b - op(x);
  ++rep.matvecs;
  Real const r0norm = r.norm();
  Real relres = r0norm / bnorm;
  if (cfg.record_history)
    rep.residual_history.push_back(1.0);

  int const k_max = static_cast<int>(std::min<Index>(cfg.restart, n));
  DenseMatrix V(n, k_max + 1);
  DenseMatrix H = DenseMatrix::Zero(k_max + 1, k_max);
  Vector g(k_max + 1);
  std::vector<Real> cs(static_cast<std::size_t>(k_max));
  std::vector<Complex> sn(static_cast<std::size_t>(k_max));

  while (relres > cfg.tol && rep.iterations < cfg.maxit)
  {
    Real const beta = r.norm();
    V.col(0) = r / beta;
    H.setZero();
    g.setZero();
    g[0] = beta;

    int k = 0;
    bool happy = false;
    for (int j = 0; j < k_max && rep.iterations < cfg.maxit; ++j)
    {
      Vector w = op(V.col(j));
      ++rep.matvecs;
      Real const wnorm0 = w.norm();

      for (int i = 0; i <= j; ++i)
      {
        Complex const h = V.col(i).dot(w);
        H(i, j) += h;
        w -= h * V.col(i);
      }
      Real wnorm = w.norm();
      Vector c = V.leftCols(j + 1).adjoint() * w;
      if (c.cwiseAbs().maxCoeff() > reorth_threshold * wnorm)
      {
        w -= V.leftCols(j + 1) * c;
        H.col(j).head(j + 1) += c;
        wnorm = w.norm();
      }
      H(j + 1, j) = wnorm;

      for (int i = 0; i < j; ++i)
      {
        auto const ui = static_cast<std::size_t>(i);
        Complex const hi = H(i, j);
        Complex const hi1 = H(i + 1, j);
        H(i, j) = cs[ui] * hi + sn[ui] * hi1;
        H(i + 1, j) = -std::conj(sn[ui]) * hi + cs[ui] * hi1;
      }
      auto const uj = static_cast<std::size_t>(j);
      make_givens(H(j, j), H(j + 1, j), cs[uj], sn[uj]);
      H(j, j) = cs[uj] * H(j, j) + sn[uj] * H(j + 1, j);
      H(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[uj]) * g[j];
      g[j] = cs[uj] * g[j];

      ++rep.iterations;
      k = j + 1;
      Real const est = std::abs(g[j + 1]);
      if (cfg.record_history)
        rep.residual_history.push_back(est / r0norm);

      happy = wnorm <= 1e-14 * wnorm0 || wnorm == 0.0;
      if (happy || est / bnorm <= cfg.tol)
        break;
      V.col(j + 1) = w / wnorm;
    }

    Vector y = H.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    x += V.leftCols(k) * y;
    r = b - op(x);
    ++rep.matvecs;
    Real const new_relres = r.norm() / bnorm;
    bool const stalled = !(new_relres < relres);
    relres = new_relres;
    if (stalled && happy)
      break; // invariant subspace found without progress; restarting cannot help
  }

  rep.final_relres = relres;
  rep.converged = relres <= cfg.tol;
  rep.wall_time_s = seconds_since(t0);
  return {x, rep};
}

std::pair<Vector, SolveReport> bicg(LinearOperator const &op, Vector const &b,
                                    Vector const &x0, SolverConfig const &cfg,
                                    std::optional<Vector> const &shadow)
{
  cfg.validate();
  check_system(op, b, x0, "bicg");
  if (!op.has_adjoint())
    throw std::invalid_argument("bicg: operator must provide apply_adjoint");
  auto const t0 = Clock::now();
  Index const n = op.dim;
  SolveReport rep;

  Real const bnorm = b.norm();
  if (bnorm == 0.0)
  {
    rep.converged = true;
    if (cfg.record_history)
      rep.residual_history.push_back(1.0);
    rep.wall_time_s = seconds_since(t0);
    return {Vector::Zero(n), rep};
  }

  Vector x = x0;
  Vector r = b - op(x);
  ++rep.matvecs;
  Real const r0norm = r.norm();
  if (cfg.record_history)
    rep.residual_history.push_back(1.0);

  Vector best_x = x;
  Real best_res = r0norm;
  bool converged = r0norm / bnorm <= cfg.tol;

  if (shadow && shadow->size() != n)
    throw std::invalid_argument("bicg: shadow residual has wrong size");
  Vector rt = shadow ? *shadow : Vector(r.conjugate());
  Vector p = r;
  Vector pt = rt;
  Complex rho = rt.dot(r);
  int replacements = 0;

  while (!converged && rep.iterations < cfg.maxit)
  {
    if (!(std::abs(rho) > breakdown_eps * rt.norm() * r.norm()))
    {
      rep.breakdown = true;
      break;
    }
    Vector const q = op(p);
    Vector const qt = op.apply_adjoint(pt);
    rep.matvecs += 2;
    Complex const sigma = pt.dot(q);
    if (!(std::abs(sigma) > breakdown_eps * pt.norm() * q.norm()))
    {
      rep.breakdown = true;
      break;
    }
    Complex const alpha = rho / sigma;
    x += alpha * p;
    r -= alpha * q;
    rt -= std::conj(alpha) * qt;
    ++rep.iterations;

    Real const rn = r.norm();
    if (cfg.record_history)
      rep.residual_history.push_back(rn / r0norm);
    if (!std::isfinite(rn))
    {
      rep.breakdown = true;
      break;
    }
    if (rn < best_res)
    {
      best_res = rn;
      best_x = x;
    }

    if (rn / bnorm <= cfg.tol)
    {
      Vector const r_true = b - op(x);
      ++rep.matvecs;
      if (r_true.norm() / bnorm <= cfg.tol)
      {
        converged = true;
        break;
      }
      if (++replacements > 10)
        break;
      // residual replacement: restart the recurrences from the true residual
      r = r_true;
      rt = r.conjugate();
      p = r;
      pt = rt;
      rho = rt.dot(r);
      continue;
    }

    Complex const rho_new = rt.dot(r);
    Complex const beta = rho_new / rho;
    rho = rho_new;
    p = r + beta * p;
    pt = rt + std::conj(beta) * pt;
  }

  Vector const &result = converged ? x : best_x;
  rep.final_relres = (b - op(result)).norm() / bnorm;
  ++rep.matvecs;
  rep.converged = rep.final_relres <= cfg.tol;
  rep.wall_time_s = seconds_since(t0);
  return {result, rep};
}

std::pair<Vector, SolveReport> solve_shifted(LinearOperator const &A, Complex z,
                                             Vector const &y, SolverConfig const &cfg)
{
  LinearOperator shifted;
  shifted.apply = [&A, z](Vector const &x) -> Vector { return z * x - A(x); };
  if (A.has_adjoint())
    shifted.apply_adjoint = [&A, z](Vector const &x) -> Vector {
      return std::conj(z) * x - A.apply_adjoint(x);
    };
  shifted.dim = A.dim;
  shifted.real = A.real && z.imag() == 0.0;
  return bicg(shifted, y, Vector::Zero(A.dim), cfg);
}

std::pair<Vector, SolveReport> solve_shifted(SparseMatrix const &A, Complex z,
                                             Vector const &y, SolverConfig const &cfg)
{
  SparseMatrix const S = shifted_matrix(A, z);
  return bicg(make_operator(S), y, Vector::Zero(A.rows()), cfg);
}

} // namespace cdefl
