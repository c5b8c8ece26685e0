#ifndef CDEFL_SPARSE_HPP
#define CDEFL_SPARSE_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstdint>

namespace cdefl
{

/// All arithmetic is carried out in complex double precision. Real inputs
/// are promoted on load because contour shifts are complex.
using Real = double;
using Complex = std::complex<Real>;
using Index = Eigen::Index;

/// Compressed sparse row storage (row_ptr = outerIndexPtr, col_idx =
/// innerIndexPtr, values = valuePtr once compressed).
using SparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor, int>;
using DenseMatrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Triplet = Eigen::Triplet<Complex, int>;

/// y = A x. Throws std::invalid_argument on dimension mismatch.
Vector matvec(SparseMatrix const &A, Vector const &x);

/// y = A^H x, computed by a transposed traversal of the CSR arrays (no
/// second matrix is stored).
Vector matvec_adjoint(SparseMatrix const &A, Vector const &x);

/// Returns z I - A. Diagonal entries missing from A are inserted.
SparseMatrix shifted_matrix(SparseMatrix const &A, Complex z);

DenseMatrix to_dense(SparseMatrix const &A);
SparseMatrix to_sparse(DenseMatrix const &M, Real drop_tol = 0.0);

/// True when every stored value has zero imaginary part.
bool is_real(SparseMatrix const &A);
bool is_real(DenseMatrix const &M);

/// Checks the CSR structural invariants (monotone row pointers, strictly
/// increasing in-range column indices per row).
bool csr_well_formed(SparseMatrix const &A);

struct ThinQr
{
  DenseMatrix Q; // N x m, orthonormal columns
  DenseMatrix R; // m x m, upper triangular, nonnegative real diagonal
  Index numerical_rank = 0;
  bool rank_deficient = false;
};

/// Householder thin QR with the sign convention diag(R) >= 0.
/// A diagonal entry |R_kk| <= rank_tol * max_j |R_jj| marks rank deficiency;
/// the factorization is still returned.
ThinQr thin_qr(DenseMatrix const &M, Real rank_tol = 1e-12);

/// 64-bit FNV-1a over the CSR arrays; used as a matrix checksum in reports.
std::uint64_t checksum(SparseMatrix const &A);

} // namespace cdefl

#endif
