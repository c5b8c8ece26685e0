#include <cdefl/sparse.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <string>

namespace cdefl
{

namespace
{
void require_dims(bool ok, char const *what, Index expected, Index got)
{
  if (!ok)
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (expected " +
                                std::to_string(expected) + ", got " +
                                std::to_string(got) + ")");
}
} // namespace

Vector matvec(SparseMatrix const &A, Vector const &x)
{
  require_dims(A.cols() == x.size(), "matvec", A.cols(), x.size());
  Vector y(A.rows());
  for (Index i = 0; i < A.outerSize(); ++i)
  {
    Complex sum{0.0, 0.0};
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      sum += it.value() * x[it.col()];
    y[i] = sum;
  }
  return y;
}

Vector matvec_adjoint(SparseMatrix const &A, Vector const &x)
{
  require_dims(A.rows() == x.size(), "matvec_adjoint", A.rows(), x.size());
  Vector y = Vector::Zero(A.cols());
  for (Index i = 0; i < A.outerSize(); ++i)
  {
    Complex const xi = x[i];
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      y[it.col()] += std::conj(it.value()) * xi;
  }
  return y;
}

SparseMatrix shifted_matrix(SparseMatrix const &A, Complex z)
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("shifted_matrix: matrix must be square");
  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(A.nonZeros() + A.rows()));
  for (Index i = 0; i < A.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
      entries.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                           -it.value());
  for (Index i = 0; i < A.rows(); ++i)
    entries.emplace_back(static_cast<int>(i), static_cast<int>(i), z);
  SparseMatrix S(A.rows(), A.cols());
  S.setFromTriplets(entries.begin(), entries.end());
  S.makeCompressed();
  return S;
}

DenseMatrix to_dense(SparseMatrix const &A) { return DenseMatrix(A); }

SparseMatrix to_sparse(DenseMatrix const &M, Real drop_tol)
{
  std::vector<Triplet> entries;
  for (Index j = 0; j < M.cols(); ++j)
    for (Index i = 0; i < M.rows(); ++i)
      if (std::abs(M(i, j)) > drop_tol || (drop_tol == 0.0 && M(i, j) != Complex{}))
        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), M(i, j));
  SparseMatrix S(M.rows(), M.cols());
  S.setFromTriplets(entries.begin(), entries.end());
  S.makeCompressed();
  return S;
}

bool is_real(SparseMatrix const &A)
{
  for (Index k = 0; k < A.nonZeros(); ++k)
    if (A.valuePtr()[k].imag() != 0.0)
      return false;
  return true;
}

bool is_real(DenseMatrix const &M) { return (M.imag().array() == 0.0).all(); }

bool csr_well_formed(SparseMatrix const &A)
{
  if (!A.isCompressed())
    return false;
  int const *row_ptr = A.outerIndexPtr();
  int const *col_idx = A.innerIndexPtr();
  if (row_ptr[0] != 0 || row_ptr[A.rows()] != A.nonZeros())
    return false;
  for (Index i = 0; i < A.rows(); ++i)
  {
    if (row_ptr[i + 1] < row_ptr[i])
      return false;
    for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
    {
      if (col_idx[k] < 0 || col_idx[k] >= A.cols())
        return false;
      if (k > row_ptr[i] && col_idx[k] <= col_idx[k - 1])
        return false;
    }
  }
  return true;
}

ThinQr thin_qr(DenseMatrix const &M, Real rank_tol)
{
  Index const n = M.rows();
  Index const m = M.cols();
  if (n < m)
    throw std::invalid_argument("thin_qr: need rows >= cols");

  Eigen::HouseholderQR<DenseMatrix> qr(M);
  ThinQr out;
  out.Q = qr.householderQ() * DenseMatrix::Identity(n, m);
  out.R = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();

  for (Index k = 0; k < m; ++k)
  {
    Real const mag = std::abs(out.R(k, k));
    if (mag == 0.0)
      continue;
    Complex const phase = out.R(k, k) / mag;
    out.R.row(k) *= std::conj(phase);
    out.Q.col(k) *= phase;
    out.R(k, k) = Complex(mag, 0.0);
  }

  Real const rmax = m > 0 ? out.R.diagonal().cwiseAbs().maxCoeff() : 0.0;
  out.numerical_rank = 0;
  for (Index k = 0; k < m; ++k)
    if (std::abs(out.R(k, k)) > rank_tol * rmax)
      ++out.numerical_rank;
  out.rank_deficient = out.numerical_rank < m;
  return out;
}

std::uint64_t checksum(SparseMatrix const &A)
{
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](void const *data, std::size_t bytes) {
    auto const *p = static_cast<unsigned char const *>(data);
    for (std::size_t i = 0; i < bytes; ++i)
    {
      h ^= p[i];
      h *= 1099511628211ull;
    }
  };
  std::int64_t dims[2] = {A.rows(), A.cols()};
  mix(dims, sizeof dims);
  SparseMatrix C = A;
  C.makeCompressed();
  mix(C.outerIndexPtr(), sizeof(int) * static_cast<std::size_t>(C.rows() + 1));
  mix(C.innerIndexPtr(), sizeof(int) * static_cast<std::size_t>(C.nonZeros()));
  mix(C.valuePtr(), sizeof(Complex) * static_cast<std::size_t>(C.nonZeros()));
  return h;
}

} // namespace cdefl
