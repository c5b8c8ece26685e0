#include <cdefl/eig_oracle.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cdefl
{

namespace
{

bool exactly_hermitian(DenseMatrix const &A)
{
  for (Index j = 0; j < A.cols(); ++j)
    for (Index i = 0; i <= j; ++i)
      if (A(i, j) != std::conj(A(j, i)))
        return false;
  return true;
}

void require_cap(DenseMatrix const &A, Index cap, char const *who)
{
  if (A.rows() != A.cols())
    throw std::invalid_argument(std::string(who) + ": matrix must be square");
  if (A.rows() > cap)
    throw std::invalid_argument(std::string(who) + ": N = " + std::to_string(A.rows()) +
                                " exceeds the dense cap of " + std::to_string(cap));
}

// Chebyshev log-magnitude: log|C_j(x)| = j log|w| + log(|1 + w^{-2j}| / 2),
// w + 1/w = 2x, |w| >= 1.
Real chebyshev_log_abs(Complex x, long j)
{
  if (j == 0)
    return 0.0;
  Complex w = x + std::sqrt(x - 1.0) * std::sqrt(x + 1.0);
  if (std::abs(w) < 1.0)
    w = 1.0 / w;
  Real const logw = std::log(std::abs(w));
  Complex const tail = std::pow(w, -2.0 * static_cast<Real>(j));
  return static_cast<Real>(j) * logw + std::log(std::abs(1.0 + tail) / 2.0);
}

Complex joukowski(Complex x)
{
  Complex w = x + std::sqrt(x - 1.0) * std::sqrt(x + 1.0);
  if (std::abs(w) < 1.0)
    w = 1.0 / w;
  return w;
}

} // namespace

SpectrumReport dense_eig(DenseMatrix const &A, bool vectors, Index cap)
{
  require_cap(A, cap, "dense_eig");
  SpectrumReport rep;
  Index const n = A.rows();
  if (n == 0)
  {
    rep.eigenvalues.resize(0);
    if (vectors)
      rep.eigenvectors = DenseMatrix(0, 0);
    return rep;
  }

  if (exactly_hermitian(A))
  {
    if (is_real(A))
    {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
          A.real(), vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("dense_eig: symmetric eigensolver did not converge");
      rep.eigenvalues = es.eigenvalues().cast<Complex>();
      if (vectors)
        rep.eigenvectors = es.eigenvectors().cast<Complex>();
    }
    else
    {
      Eigen::SelfAdjointEigenSolver<DenseMatrix> es(
          A, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
      if (es.info() != Eigen::Success)
        throw std::runtime_error("dense_eig: Hermitian eigensolver did not converge");
      rep.eigenvalues = es.eigenvalues().cast<Complex>();
      if (vectors)
        rep.eigenvectors = es.eigenvectors();
    }
  }
  else
  {
    Eigen::ComplexEigenSolver<DenseMatrix> es(A, vectors);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("dense_eig: QR iteration did not converge");
    rep.eigenvalues = es.eigenvalues();
    if (vectors)
    {
      DenseMatrix V = es.eigenvectors();
      V.colwise().normalize();
      rep.eigenvectors = std::move(V);
    }
  }

  if (vectors)
  {
    DenseMatrix const &V = *rep.eigenvectors;
    Real const anorm = A.norm();
    DenseMatrix const resid = A * V - V * rep.eigenvalues.asDiagonal();
    Real const worst = resid.colwise().norm().maxCoeff();
    if (worst > 1e-10 * std::max(anorm, std::numeric_limits<Real>::min()))
      throw std::runtime_error("dense_eig: eigenpair residual " + std::to_string(worst) +
                               " exceeds 1e-10 ||A||");
  }
  return rep;
}

void count_inside(SpectrumReport &report, ContourSpec const &contour)
{
  report.count_inside = 0;
  report.near_boundary = 0;
  for (Index i = 0; i < report.eigenvalues.size(); ++i)
  {
    Complex const lam = report.eigenvalues[i];
    if (contour.inside(lam))
      ++report.count_inside;
    if (contour.boundary_distance(lam) < 1e-8)
      ++report.near_boundary;
  }
}

DenseMatrix true_spectral_projector(DenseMatrix const &A, ContourSpec const &contour,
                                    Index cap)
{
  SpectrumReport rep = dense_eig(A, true, cap);
  count_inside(rep, contour);
  if (rep.near_boundary > 0)
    throw std::invalid_argument("true_spectral_projector: eigenvalue on the contour");
  DenseMatrix const &V = *rep.eigenvectors;
  Index const n = A.rows();
  Eigen::VectorXcd indicator(n);
  for (Index i = 0; i < n; ++i)
    indicator[i] = contour.inside(rep.eigenvalues[i]) ? 1.0 : 0.0;
  Eigen::PartialPivLU<DenseMatrix> lu(V);
  return (V * indicator.asDiagonal()) * lu.inverse();
}

std::vector<Real> principal_angles(DenseMatrix const &U_in, DenseMatrix const &W_in)
{
  if (U_in.rows() != W_in.rows())
    throw std::invalid_argument("principal_angles: dimension mismatch");
  bool const swap = W_in.cols() > U_in.cols();
  DenseMatrix const &U = swap ? W_in : U_in;
  DenseMatrix const &W = swap ? U_in : W_in;
  Index const k = W.cols();
  std::vector<Real> angles;
  if (k == 0)
    return angles;

  DenseMatrix const C = U.adjoint() * W;
  Eigen::JacobiSVD<DenseMatrix> svd_cos(C);
  RealVector cosines = svd_cos.singularValues(); // descending
  DenseMatrix const S = W - U * C;
  Eigen::JacobiSVD<DenseMatrix> svd_sin(S);
  RealVector sines = svd_sin.singularValues(); // descending
  std::sort(sines.data(), sines.data() + sines.size());

  angles.resize(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i)
  {
    Real const c = std::clamp(i < cosines.size() ? cosines[i] : 0.0, 0.0, 1.0);
    Real const s = std::clamp(i < sines.size() ? sines[i] : 1.0, 0.0, 1.0);
    angles[static_cast<std::size_t>(i)] = c * c >= 0.5 ? std::asin(s) : std::acos(c);
  }
  std::sort(angles.begin(), angles.end());
  return angles;
}

void EllipseSpec::validate() const
{
  if (!(focal >= 0.0) || !(semi_major >= focal))
    throw std::invalid_argument("ellipse requires a >= d >= 0");
}

bool EllipseSpec::contains(Complex z) const
{
  return std::abs(z - (center - focal)) + std::abs(z - (center + focal)) <=
         2.0 * semi_major;
}

Real chebyshev_abs(Complex x, long j) { return std::exp(chebyshev_log_abs(x, j)); }

ChebyshevBound chebyshev_bound(EllipseSpec const &E, long j, Real kappa)
{
  E.validate();
  if (j < 0)
    throw std::invalid_argument("chebyshev_bound: j must be >= 0");
  if (E.contains(Complex(0.0, 0.0)))
    throw std::invalid_argument("chebyshev_bound: origin lies in the ellipse");

  ChebyshevBound out{};
  Real const jr = static_cast<Real>(j);
  if (E.focal == 0.0)
  {
    // disk limit: C_j(a/d)/C_j(c/d) -> (a/|c|)^j
    out.delta = E.semi_major / std::abs(E.center);
    out.exact = kappa * std::pow(out.delta, jr);
    out.asymptotic = out.exact;
    return out;
  }
  Complex const xa(E.semi_major / E.focal, 0.0);
  Complex const xc = E.center / E.focal;
  out.exact = kappa * std::exp(chebyshev_log_abs(xa, j) - chebyshev_log_abs(xc, j));
  out.delta = std::abs(joukowski(xa)) / std::abs(joukowski(xc));
  out.asymptotic = kappa * std::pow(out.delta, jr);
  return out;
}

Real kappa2(DenseMatrix const &M)
{
  if (M.size() == 0)
    return 1.0;
  Eigen::BDCSVD<DenseMatrix> svd(M);
  RealVector const s = svd.singularValues();
  Real const smin = s[s.size() - 1];
  if (smin == 0.0)
    return std::numeric_limits<Real>::infinity();
  return s[0] / smin;
}

Real kappa2_r22(DenseMatrix const &V, Index m)
{
  Index const n = V.rows();
  if (V.cols() != n)
    throw std::invalid_argument("kappa2_r22: V must be square");
  if (m < 1 || m >= n)
    throw std::invalid_argument("kappa2_r22: need 1 <= m < N");
  Eigen::HouseholderQR<DenseMatrix> qr(V);
  DenseMatrix const R = qr.matrixQR().triangularView<Eigen::Upper>();
  Real const dmax = R.diagonal().cwiseAbs().maxCoeff();
  Real const dmin = R.diagonal().cwiseAbs().minCoeff();
  if (dmax == 0.0 || dmin <= 1e-14 * dmax)
    throw std::invalid_argument("kappa2_r22: V is singular");
  return kappa2(R.bottomRightCorner(n - m, n - m));
}

void write_eigenvalues_csv(std::filesystem::path const &path, Vector const &eigenvalues)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << "re,im\n" << std::setprecision(17);
  for (Index i = 0; i < eigenvalues.size(); ++i)
    out << eigenvalues[i].real() << ',' << eigenvalues[i].imag() << '\n';
}

} // namespace cdefl
