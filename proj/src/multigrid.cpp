#include <cdefl/multigrid.hpp>
#include <cdefl/random.hpp>

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace cdefl
{

namespace
{

// A LinearOperator over a level matrix without the realness scan of
// make_operator; the matrix must outlive the operator.
LinearOperator level_operator(SparseMatrix const &A, bool real)
{
  LinearOperator op;
  op.apply = [&A](Vector const &x) { return matvec(A, x); };
  op.apply_adjoint = [&A](Vector const &x) { return matvec_adjoint(A, x); };
  op.dim = A.rows();
  op.real = real;
  return op;
}

Real gershgorin_bound(SparseMatrix const &A)
{
  Real bound = 0.0;
  for (Index i = 0; i < A.outerSize(); ++i)
  {
    Real row = 0.0;
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      row += std::abs(it.value());
    bound = std::max(bound, row);
  }
  return bound;
}

void build_level_deflation(GridLevel &level, LevelDeflationSetup const &setup)
{
  LinearOperator const op = level_operator(level.A, is_real(level.A));
  Index const m = std::min<Index>(setup.m, op.dim);
  ContourSpec const contour{Complex(0.0, 0.0),
                            setup.radius_fraction * gershgorin_bound(level.A),
                            setup.quad_order};
  DenseMatrix const Y =
      gaussian_matrix(op.dim, m, stream_seed(setup.seed, "Y.level" + std::to_string(level.n)));
  ContourResult const cr = contour_subspace(op, Y, contour);
  // keep the numerically nonzero part; columns beyond the eigencount are noise
  ThinQr const qr = thin_qr(cr.Zraw, 1e-8);
  if (cr.Zraw.norm() <= 1e-8 * Y.norm() || qr.numerical_rank == 0)
    return; // nothing inside the contour on this level
  level.deflation = subspace_from_orthonormal(op, qr.Q.leftCols(qr.numerical_rank));
}

class Cycler
{
public:
  Cycler(GridHierarchy const &H, CycleSpec const &spec, CycleStats *stats)
      : _H(H), _spec(spec), _stats(stats)
  {
  }

  Vector cycle(std::size_t k, Vector const &b, Vector x) const
  {
    GridLevel const &L = _H.levels[k];
    if (k == 0)
    {
      charge(L, 1.0);
      return _H.coarse_lu.solve(b);
    }
    x = smooth(k, b, std::move(x), _spec.pre_smooth);
    Vector const r = b - matvec(L.A, x);
    charge(L, 1.0);
    Vector const rc = L.restriction * r;
    Vector ec = Vector::Zero(rc.size());
    for (int p = 0; p < _spec.recursions(); ++p)
      ec = cycle(k - 1, rc, std::move(ec));
    x += L.prolongation * ec;
    return smooth(k, b, std::move(x), _spec.post_smooth);
  }

private:
  void charge(GridLevel const &L, Real units) const
  {
    if (_stats)
      _stats->work_units += units * L.work_weight;
  }

  Vector smooth(std::size_t k, Vector const &b, Vector x, int sweeps) const
  {
    if (sweeps <= 0)
      return x;
    GridLevel const &L = _H.levels[k];
    Real const before = (b - matvec(L.A, x)).norm();
    charge(L, 1.0);

    for (int s = 0; s < sweeps; ++s)
    {
      switch (_spec.smoother)
      {
      case SmootherKind::jacobi:
        x += _spec.jacobi_weight * L.inv_diag.cwiseProduct(b - matvec(L.A, x));
        charge(L, 1.0);
        break;
      case SmootherKind::gauss_seidel:
        gauss_seidel_sweep(L, b, x);
        charge(L, 1.0);
        break;
      case SmootherKind::deflated_krylov:
        x += krylov_correction(L, b - matvec(L.A, x));
        break;
      }
    }

    Real const after = (b - matvec(L.A, x)).norm();
    charge(L, 1.0);
    if (after > 10.0 * before && after > 0.0)
    {
      std::ostringstream msg;
      msg << "multigrid: smoother diverged on level " << k << " (n = " << L.n
          << "): residual " << before << " -> " << after;
      throw std::runtime_error(msg.str());
    }
    return x;
  }

  static void gauss_seidel_sweep(GridLevel const &L, Vector const &b, Vector &x)
  {
    for (Index i = 0; i < L.A.outerSize(); ++i)
    {
      Complex sum = b[i];
      Complex diag{0.0, 0.0};
      for (SparseMatrix::InnerIterator it(L.A, i); it; ++it)
      {
        if (it.col() == i)
          diag = it.value();
        else
          sum -= it.value() * x[it.col()];
      }
      x[i] = sum / diag;
    }
  }

  Vector krylov_correction(GridLevel const &L, Vector const &r) const
  {
    LinearOperator const op = level_operator(L.A, false);
    SolverConfig cfg;
    cfg.tol = 1e-14;
    cfg.maxit = _spec.krylov_steps;
    cfg.restart = _spec.krylov_steps;
    if (L.deflation)
    {
      auto [e, rep] = deflated_solve(op, r, *L.deflation, cfg, KrylovMethod::gmres);
      charge(L, static_cast<Real>(rep.matvecs));
      return e;
    }
    auto [e, rep] = gmres(op, r, Vector::Zero(r.size()), cfg);
    charge(L, static_cast<Real>(rep.matvecs));
    return e;
  }

  GridHierarchy const &_H;
  CycleSpec const &_spec;
  CycleStats *_stats;
};

} // namespace

std::vector<int> GridHierarchy::sizes() const
{
  std::vector<int> out;
  for (auto it = levels.rbegin(); it != levels.rend(); ++it)
    out.push_back(it->n);
  return out;
}

int GridHierarchy::deflated_levels() const
{
  int count = 0;
  for (auto const &L : levels)
    count += L.deflation.has_value() ? 1 : 0;
  return count;
}

std::vector<int> admissible_sizes(int levels, int count)
{
  std::vector<int> out;
  for (int nc = 1; nc <= count; ++nc)
    out.push_back((nc + 1) * (1 << (levels - 1)) - 1);
  return out;
}

SparseMatrix bilinear_prolongation(int nc)
{
  int const nf = 2 * nc + 1;
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(9 * nc * nc));
  for (int J = 0; J < nc; ++J)
    for (int I = 0; I < nc; ++I)
    {
      int const ci = 2 * I + 1;
      int const cj = 2 * J + 1;
      for (int dj = -1; dj <= 1; ++dj)
        for (int di = -1; di <= 1; ++di)
        {
          Real const w = (di == 0 ? 1.0 : 0.5) * (dj == 0 ? 1.0 : 0.5);
          entries.emplace_back((cj + dj) * nf + (ci + di), J * nc + I, w);
        }
    }
  SparseMatrix P(static_cast<Index>(nf) * nf, static_cast<Index>(nc) * nc);
  P.setFromTriplets(entries.begin(), entries.end());
  P.makeCompressed();
  return P;
}

GridHierarchy build_hierarchy(ConvDiffSpec const &spec, int levels,
                              std::optional<LevelDeflationSetup> deflation)
{
  spec.validate();
  if (levels < 1)
    throw std::invalid_argument("build_hierarchy: need at least one level");
  int const factor = 1 << (levels - 1);
  if ((spec.n + 1) % factor != 0 || (spec.n + 1) / factor - 1 < 1)
  {
    std::ostringstream msg;
    msg << "build_hierarchy: n = " << spec.n << " does not admit " << levels
        << " levels; admissible sizes:";
    for (int s : admissible_sizes(levels))
      msg << ' ' << s;
    msg << " ...";
    throw std::invalid_argument(msg.str());
  }

  GridHierarchy H;
  H.levels.resize(static_cast<std::size_t>(levels));
  int n = (spec.n + 1) / factor - 1;
  for (int j = 0; j < levels; ++j, n = 2 * n + 1)
  {
    GridLevel &L = H.levels[static_cast<std::size_t>(j)];
    ConvDiffSpec level_spec = spec;
    level_spec.n = n;
    L.n = n;
    L.A = detail::convdiff_assemble(level_spec).first;
    L.inv_diag = L.A.diagonal().cwiseInverse();
    if (j > 0)
    {
      L.prolongation = bilinear_prolongation(H.levels[static_cast<std::size_t>(j - 1)].n);
      L.restriction = SparseMatrix(0.25 * SparseMatrix(L.prolongation.transpose()));
    }
  }
  Real const fine_nnz = static_cast<Real>(H.levels.back().A.nonZeros());
  for (auto &L : H.levels)
    L.work_weight = static_cast<Real>(L.A.nonZeros()) / fine_nnz;

  H.coarse_lu.compute(DenseMatrix(H.levels.front().A));
  if (deflation)
    for (std::size_t j = 1; j < H.levels.size(); ++j)
      build_level_deflation(H.levels[j], *deflation);
  return H;
}

Vector mg_cycle(GridHierarchy const &H, CycleSpec const &spec, Vector const &b,
                Vector const &x, CycleStats *stats)
{
  if (H.levels.empty())
    throw std::invalid_argument("mg_cycle: empty hierarchy");
  if (b.size() != H.finest().A.rows() || x.size() != b.size())
    throw std::invalid_argument("mg_cycle: dimension mismatch");
  Cycler const cycler(H, spec, stats);
  return cycler.cycle(H.levels.size() - 1, b, x);
}

std::pair<Vector, MultigridReport> mg_solve(GridHierarchy const &H, CycleSpec const &spec,
                                            Vector const &b, Real tol, int max_cycles,
                                            std::optional<Vector> const &x0)
{
  auto const t0 = std::chrono::steady_clock::now();
  SparseMatrix const &A = H.finest().A;
  Vector x = x0 ? *x0 : Vector::Zero(b.size());
  if (x.size() != A.rows() || b.size() != A.rows())
    throw std::invalid_argument("mg_solve: dimension mismatch");

  MultigridReport rep;
  Real const bnorm = b.norm();
  auto relres_of = [&](Vector const &v) {
    Real const rn = (b - matvec(A, v)).norm();
    return bnorm == 0.0 ? rn : rn / bnorm;
  };
  Real relres = relres_of(x);
  Real const r0 = relres;
  rep.solve.residual_history.push_back(1.0);
  CycleStats stats;

  while (relres > tol && rep.solve.iterations < max_cycles)
  {
    x = mg_cycle(H, spec, b, x, &stats);
    ++rep.solve.iterations;
    Real const next = relres_of(x);
    rep.reduction_factors.push_back(relres > 0.0 ? next / relres : 0.0);
    relres = next;
    rep.solve.residual_history.push_back(r0 > 0.0 ? relres / r0 : 0.0);
  }
  rep.solve.final_relres = relres;
  rep.solve.converged = relres <= tol;
  rep.solve.matvecs = static_cast<long>(std::ceil(stats.work_units));
  rep.work_units_per_cycle =
      rep.solve.iterations > 0 ? stats.work_units / static_cast<Real>(rep.solve.iterations)
                               : 0.0;
  rep.solve.wall_time_s =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(x), rep};
}

CycleKind parse_cycle_kind(std::string const &text)
{
  if (text == "V" || text == "v")
    return CycleKind::V;
  if (text == "W" || text == "w")
    return CycleKind::W;
  throw std::invalid_argument("unknown cycle kind '" + text + "' (expected V or W)");
}

SmootherKind parse_smoother(std::string const &text)
{
  if (text == "jacobi")
    return SmootherKind::jacobi;
  if (text == "gauss-seidel")
    return SmootherKind::gauss_seidel;
  if (text == "deflated-krylov")
    return SmootherKind::deflated_krylov;
  throw std::invalid_argument("unknown smoother '" + text +
                              "' (expected jacobi, gauss-seidel or deflated-krylov)");
}

} // namespace cdefl
