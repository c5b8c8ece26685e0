#include <cdefl/deflation.hpp>
#include <cdefl/eig_oracle.hpp>
#include <cdefl/random.hpp>

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

namespace cdefl
{

namespace
{

constexpr Real singular_coarse_cond = 1e14;

bool has_zero_imag(DenseMatrix const &M) { return (M.imag().array() == 0.0).all(); }

} // namespace

ContourResult contour_subspace(LinearOperator const &A, DenseMatrix const &Y,
                               ContourSpec const &contour, ContourOptions const &options)
{
  contour.validate();
  Index const n = A.dim;
  if (Y.rows() != n)
    throw std::invalid_argument("contour_subspace: Y has the wrong number of rows");

  SolverConfig inner = options.inner;
  if (inner.maxit <= 0)
    inner.maxit = static_cast<long>(n);

  auto const rule = legendre_gauss<Real>(contour.quad_order);
  bool const pairs = options.exploit_conjugate_pairs && A.real &&
                     contour.center.imag() == 0.0 && has_zero_imag(Y);

  ContourResult out;
  out.Zraw = DenseMatrix::Zero(n, Y.cols());
  out.diagnostics.conjugate_pairs = pairs;

  DenseMatrix dense_A; // built on first fallback
  Real const pi = std::numbers::pi;

  for (std::size_t k = 0; k < rule.nodes.size(); ++k)
  {
    Real const theta = rule.nodes[k];
    if (pairs && theta < 0.0)
      continue; // the conjugate node theta > 0 accounts for it
    Complex const e = std::polar(1.0, pi * theta);
    Complex const z = contour.center + contour.radius * e;
    Complex const factor = 0.5 * contour.radius * rule.weights[k] * e;

    Eigen::PartialPivLU<DenseMatrix> node_lu;
    bool node_lu_ready = false;
    bool node_inaccurate = false;

    for (Index j = 0; j < Y.cols(); ++j)
    {
      Vector const y = Y.col(j);
      auto [x, rep] = solve_shifted(A, z, y, inner);
      NodeSolve info{static_cast<int>(k), static_cast<int>(j), z, rep.iterations,
                     rep.final_relres, rep.converged, false};
      out.diagnostics.total_iterations += rep.iterations;
      out.diagnostics.total_matvecs += rep.matvecs;

      if (!rep.converged)
      {
        if (options.dense_fallback && n <= options.dense_fallback_cap)
        {
          if (!node_lu_ready)
          {
            if (dense_A.size() == 0)
              dense_A = to_dense(A);
            DenseMatrix S = -dense_A;
            S.diagonal().array() += z;
            node_lu.compute(S);
            node_lu_ready = true;
          }
          x = node_lu.solve(y);
          info.dense_fallback = true;
          info.converged = true;
          info.relres = 0.0;
        }
        else
          node_inaccurate = true;
      }

      if (pairs && theta > 0.0)
        out.Zraw.col(j) += (2.0 * (factor * x).real()).cast<Complex>();
      else if (pairs)
        out.Zraw.col(j) += (factor * x).real().cast<Complex>();
      else
        out.Zraw.col(j) += factor * x;
      out.diagnostics.solves.push_back(info);
    }
    if (node_inaccurate)
      out.diagnostics.inaccurate_nodes.push_back(static_cast<int>(k));
  }
  return out;
}

ContourResult contour_subspace(SparseMatrix const &A, DenseMatrix const &Y,
                               ContourSpec const &contour, ContourOptions const &options)
{
  return contour_subspace(make_operator(A), Y, contour, options);
}

DeflationSubspace subspace_from_orthonormal(LinearOperator const &A, DenseMatrix Z)
{
  if (Z.rows() != A.dim)
    throw std::invalid_argument("deflation subspace: Z has the wrong number of rows");
  if (Z.cols() == 0)
    throw std::invalid_argument("deflation subspace: Z has no columns");
  DeflationSubspace D;
  D.Z = std::move(Z);
  D.AZ.resize(D.Z.rows(), D.Z.cols());
  for (Index j = 0; j < D.Z.cols(); ++j)
    D.AZ.col(j) = A(D.Z.col(j));
  D.coarse = D.Z.adjoint() * D.AZ;
  D.coarse_lu.compute(D.coarse);
  D.coarse_rcond = D.coarse_lu.rcond();
  D.numerical_rank = D.Z.cols();
  if (!(D.coarse_rcond * singular_coarse_cond > 1.0))
    throw std::runtime_error(
        "Z^H A Z is numerically singular (condition estimate " +
        std::to_string(1.0 / D.coarse_rcond) +
        "); try a larger quadrature order or a different contour");
  return D;
}

DeflationSubspace build_subspace(LinearOperator const &A, DenseMatrix const &Zraw)
{
  if (Zraw.rows() < Zraw.cols())
    throw std::invalid_argument("build_subspace: need N >= m");
  ThinQr qr = thin_qr(Zraw);
  DeflationSubspace D = subspace_from_orthonormal(A, std::move(qr.Q));
  D.rank_deficient = qr.rank_deficient;
  D.numerical_rank = qr.numerical_rank;
  return D;
}

ProjectorPair::ProjectorPair(LinearOperator const &A, DeflationSubspace const &D)
    : _A(A), _D(D)
{
  if (D.n() != A.dim)
    throw std::invalid_argument("ProjectorPair: subspace and operator sizes differ");
}

Vector ProjectorPair::apply_P(Vector const &v) const
{
  return v - _D.AZ * _D.coarse_solve(_D.Z.adjoint() * v);
}

Vector ProjectorPair::apply_P_adjoint(Vector const &v) const
{
  return v - _D.Z * _D.coarse_solve_adjoint(_D.AZ.adjoint() * v);
}

Vector ProjectorPair::apply_Ptilde(Vector const &v) const
{
  return v - _D.Z * _D.coarse_solve(_D.Z.adjoint() * _A(v));
}

Vector ProjectorPair::coarse_correction(Vector const &b) const
{
  return _D.Z * _D.coarse_solve(_D.Z.adjoint() * b);
}

LinearOperator ProjectorPair::deflated_operator() const
{
  LinearOperator op;
  op.apply = [this](Vector const &v) { return apply_P(_A(v)); };
  if (_A.has_adjoint())
    op.apply_adjoint = [this](Vector const &v) {
      return _A.apply_adjoint(apply_P_adjoint(v));
    };
  op.dim = _A.dim;
  op.real = _A.real && has_zero_imag(_D.Z);
  return op;
}

std::pair<Vector, SolveReport> deflated_solve(LinearOperator const &A, Vector const &b,
                                              DeflationSubspace const &D,
                                              SolverConfig const &cfg, KrylovMethod method)
{
  cfg.validate();
  if (b.size() != A.dim)
    throw std::invalid_argument("deflated_solve: rhs size mismatch");
  auto const t0 = std::chrono::steady_clock::now();
  ProjectorPair const pp(A, D);

  Vector const x1 = pp.coarse_correction(b);
  Vector const Pb = pp.apply_P(b);
  Real const bnorm = b.norm();

  Vector xsharp = Vector::Zero(A.dim);
  SolveReport rep;
  if (Pb.norm() <= 1e-14 * bnorm)
  {
    // b lies in range(AZ): the coarse part is the whole solution
    rep.converged = true;
    if (cfg.record_history)
      rep.residual_history.push_back(1.0);
  }
  else
  {
    LinearOperator const PA = pp.deflated_operator();
    auto result = method == KrylovMethod::gmres ? gmres(PA, Pb, xsharp, cfg)
                                                : bicg(PA, Pb, xsharp, cfg);
    xsharp = std::move(result.first);
    rep = std::move(result.second);
  }

  Vector x = x1 + pp.apply_Ptilde(xsharp);
  rep.matvecs += 2;
  rep.true_error = bnorm == 0.0 ? 0.0 : (b - A(x)).norm() / bnorm;
  rep.wall_time_s =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  return {std::move(x), rep};
}

EigSubspace exact_eigvec_subspace(LinearOperator const &A, ContourSpec const &contour,
                                  Index m, std::uint64_t seed, Index cap)
{
  if (m < 1)
    throw std::invalid_argument("exact_eigvec_subspace: m must be >= 1");
  if (A.dim > cap)
    throw std::invalid_argument("exact_eigvec_subspace: N = " + std::to_string(A.dim) +
                                " exceeds the dense cap of " + std::to_string(cap));
  DenseMatrix const dense = to_dense(A);
  SpectrumReport spec = dense_eig(dense, true, cap);
  count_inside(spec, contour);

  EigSubspace out;
  out.inside = spec.count_inside;
  if (spec.count_inside == 0)
    throw std::invalid_argument("exact_eigvec_subspace: no eigenvalues inside the "
                                "contour, nothing to deflate");
  if (spec.near_boundary > 0)
    out.warnings.push_back(std::to_string(spec.near_boundary) +
                           " eigenvalue(s) within 1e-8 r of the contour");
  Index const s = static_cast<Index>(spec.count_inside);
  if (m < s)
    out.warnings.push_back("m = " + std::to_string(m) + " < s = " + std::to_string(s) +
                           ": deflation is incomplete");

  DenseMatrix Vs(A.dim, s);
  Index col = 0;
  for (Index i = 0; i < spec.eigenvalues.size(); ++i)
    if (contour.inside(spec.eigenvalues[i]))
      Vs.col(col++) = spec.eigenvectors->col(i);

  DenseMatrix const M = gaussian_matrix(s, m, stream_seed(seed, "M"));
  out.subspace = build_subspace(A, Vs * M);
  return out;
}

namespace
{
constexpr char subspace_magic[8] = {'C', 'D', 'E', 'F', 'L', 'Z', '0', '1'};
}

void save_subspace(std::filesystem::path const &path, DenseMatrix const &Z,
                   SubspaceMeta const &meta)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  std::int64_t const dims[2] = {Z.rows(), Z.cols()};
  out.write(subspace_magic, sizeof subspace_magic);
  out.write(reinterpret_cast<char const *>(dims), sizeof dims);
  out.write(reinterpret_cast<char const *>(Z.data()),
            static_cast<std::streamsize>(sizeof(Complex) * static_cast<std::size_t>(Z.size())));
  if (!out)
    throw std::runtime_error("short write to " + path.string());

  nlohmann::json sidecar = {{"n", Z.rows()},        {"m", Z.cols()},
                            {"seed", meta.seed},     {"contour", meta.contour},
                            {"q", meta.q}};
  std::ofstream js(path.string() + ".json");
  js << sidecar.dump(2) << '\n';
}

DenseMatrix load_subspace(std::filesystem::path const &path, SubspaceMeta *meta)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  char magic[8];
  std::int64_t dims[2];
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char *>(dims), sizeof dims);
  if (!in || std::memcmp(magic, subspace_magic, sizeof magic) != 0 || dims[0] < 0 ||
      dims[1] < 0)
    throw std::runtime_error(path.string() + ": not a subspace file");
  DenseMatrix Z(dims[0], dims[1]);
  in.read(reinterpret_cast<char *>(Z.data()),
          static_cast<std::streamsize>(sizeof(Complex) * static_cast<std::size_t>(Z.size())));
  if (!in)
    throw std::runtime_error(path.string() + ": truncated subspace file");

  if (meta)
  {
    std::ifstream js(path.string() + ".json");
    if (!js)
      throw std::runtime_error("missing sidecar " + path.string() + ".json");
    auto const j = nlohmann::json::parse(js);
    meta->n = j.at("n").get<Index>();
    meta->m = j.at("m").get<Index>();
    meta->seed = j.at("seed").get<std::uint64_t>();
    meta->contour = j.at("contour").get<std::string>();
    meta->q = j.at("q").get<int>();
  }
  return Z;
}

} // namespace cdefl
