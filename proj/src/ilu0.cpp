#include <cdefl/ilu0.hpp>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace cdefl
{

namespace
{

constexpr Real pivot_patch_tol = 1e-14;

std::vector<int> static_row_pivot(SparseMatrix const &A)
{
  int const n = static_cast<int>(A.rows());
  Eigen::SparseMatrix<Complex, Eigen::ColMajor, int> C = A; // column access
  std::vector<int> perm(static_cast<std::size_t>(n), -1);
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  for (int j = 0; j < n; ++j)
  {
    int best = -1;
    Real best_mag = -1.0;
    for (decltype(C)::InnerIterator it(C, j); it; ++it)
    {
      int const r = static_cast<int>(it.row());
      if (taken[static_cast<std::size_t>(r)])
        continue;
      if (std::abs(it.value()) > best_mag)
      {
        best_mag = std::abs(it.value());
        best = r;
      }
    }
    if (best >= 0)
    {
      perm[static_cast<std::size_t>(j)] = best;
      taken[static_cast<std::size_t>(best)] = 1;
    }
  }
  int next = 0;
  for (auto &p : perm)
  {
    if (p >= 0)
      continue;
    while (taken[static_cast<std::size_t>(next)])
      ++next;
    p = next;
    taken[static_cast<std::size_t>(next)] = 1;
  }
  return perm;
}

} // namespace

Ilu0Factor ilu0(SparseMatrix const &A, bool pivot)
{
  if (A.rows() != A.cols())
    throw std::invalid_argument("ilu0: matrix must be square");
  int const n = static_cast<int>(A.rows());
  for (int i = 0; i < n; ++i)
    if (A.outerIndexPtr()[i + 1] == A.outerIndexPtr()[i] && A.isCompressed())
      throw std::invalid_argument("ilu0: row " + std::to_string(i) +
                                  " is structurally empty");

  Ilu0Factor F;
  if (pivot)
    F.perm = static_row_pivot(A);
  else
  {
    F.perm.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      F.perm[static_cast<std::size_t>(i)] = i;
  }

  // Rows of P A with the diagonal forced into the pattern.
  std::vector<std::vector<int>> cols(static_cast<std::size_t>(n));
  std::vector<std::vector<Complex>> vals(static_cast<std::size_t>(n));
  std::vector<int> diag_pos(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
  {
    auto &c = cols[static_cast<std::size_t>(i)];
    auto &v = vals[static_cast<std::size_t>(i)];
    bool has_diag = false;
    int nnz_row = 0;
    for (SparseMatrix::InnerIterator it(A, F.perm[static_cast<std::size_t>(i)]); it; ++it)
    {
      ++nnz_row;
      int const j = static_cast<int>(it.col());
      if (!has_diag && j > i)
      {
        c.push_back(i);
        v.push_back(0.0);
        has_diag = true;
      }
      if (j == i)
        has_diag = true;
      c.push_back(j);
      v.push_back(it.value());
    }
    if (nnz_row == 0)
      throw std::invalid_argument("ilu0: row " +
                                  std::to_string(F.perm[static_cast<std::size_t>(i)]) +
                                  " is structurally empty");
    if (!has_diag)
    {
      c.push_back(i);
      v.push_back(0.0);
    }
    diag_pos[static_cast<std::size_t>(i)] = static_cast<int>(
        std::find(c.begin(), c.end(), i) - c.begin());
  }

  std::vector<int> where(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i)
  {
    auto const ui = static_cast<std::size_t>(i);
    auto &ci = cols[ui];
    auto &vi = vals[ui];
    for (std::size_t p = 0; p < ci.size(); ++p)
      where[static_cast<std::size_t>(ci[p])] = static_cast<int>(p);

    for (std::size_t p = 0; p < ci.size() && ci[p] < i; ++p)
    {
      auto const k = static_cast<std::size_t>(ci[p]);
      auto const &ck = cols[k];
      auto const &vk = vals[k];
      auto const dk = static_cast<std::size_t>(diag_pos[k]);
      Complex const lik = vi[p] / vk[dk];
      vi[p] = lik;
      for (std::size_t q = dk + 1; q < ck.size(); ++q)
      {
        int const w = where[static_cast<std::size_t>(ck[q])];
        if (w >= 0)
          vi[static_cast<std::size_t>(w)] -= lik * vk[q];
      }
    }

    auto const di = static_cast<std::size_t>(diag_pos[ui]);
    Real row_max = 0.0;
    for (std::size_t p = di; p < ci.size(); ++p)
      row_max = std::max(row_max, std::abs(vi[p]));
    if (std::abs(vi[di]) <= pivot_patch_tol * row_max)
    {
      vi[di] = 1.0;
      F.patched_pivots.push_back(i);
    }

    for (int c : ci)
      where[static_cast<std::size_t>(c)] = -1;
  }

  std::vector<Triplet> lower, upper;
  for (int i = 0; i < n; ++i)
  {
    auto const ui = static_cast<std::size_t>(i);
    lower.emplace_back(i, i, Complex(1.0, 0.0));
    for (std::size_t p = 0; p < cols[ui].size(); ++p)
    {
      int const j = cols[ui][p];
      if (j < i)
        lower.emplace_back(i, j, vals[ui][p]);
      else
        upper.emplace_back(i, j, vals[ui][p]);
    }
  }
  F.L.resize(n, n);
  F.L.setFromTriplets(lower.begin(), lower.end());
  F.L.makeCompressed();
  F.U.resize(n, n);
  F.U.setFromTriplets(upper.begin(), upper.end());
  F.U.makeCompressed();
  return F;
}

// The diagonal is the first stored entry of each U row and the last of each
// L row, since columns are sorted.

Vector Ilu0Factor::solve_lower(Vector const &v) const
{
  Vector y = v;
  for (Index i = 0; i < L.rows(); ++i)
  {
    Complex s = y[i];
    for (SparseMatrix::InnerIterator it(L, i); it && it.col() < i; ++it)
      s -= it.value() * y[it.col()];
    y[i] = s;
  }
  return y;
}

Vector Ilu0Factor::solve_upper(Vector const &v) const
{
  Vector y = v;
  for (Index i = U.rows() - 1; i >= 0; --i)
  {
    SparseMatrix::InnerIterator it(U, i);
    Complex const d = it.value();
    Complex s = y[i];
    for (++it; it; ++it)
      s -= it.value() * y[it.col()];
    y[i] = s / d;
  }
  return y;
}

Vector Ilu0Factor::solve_lower_adjoint(Vector const &v) const
{
  Vector y = v;
  for (Index i = L.rows() - 1; i >= 0; --i)
  {
    Complex const yi = y[i];
    for (SparseMatrix::InnerIterator it(L, i); it && it.col() < i; ++it)
      y[it.col()] -= std::conj(it.value()) * yi;
  }
  return y;
}

Vector Ilu0Factor::solve_upper_adjoint(Vector const &v) const
{
  Vector y = v;
  for (Index i = 0; i < U.rows(); ++i)
  {
    SparseMatrix::InnerIterator it(U, i);
    Complex const yi = y[i] / std::conj(it.value());
    y[i] = yi;
    for (++it; it; ++it)
      y[it.col()] -= std::conj(it.value()) * yi;
  }
  return y;
}

Vector Ilu0Factor::permute(Vector const &v) const
{
  Vector out(v.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out[static_cast<Index>(i)] = v[perm[i]];
  return out;
}

Vector Ilu0Factor::permute_transpose(Vector const &v) const
{
  Vector out(v.size());
  for (std::size_t i = 0; i < perm.size(); ++i)
    out[perm[i]] = v[static_cast<Index>(i)];
  return out;
}

LinearOperator apply_ilu0(Ilu0Factor const &F, SparseMatrix const &A)
{
  if (A.rows() != A.cols() || A.rows() != F.L.rows())
    throw std::invalid_argument("apply_ilu0: dimension mismatch");
  LinearOperator op;
  op.apply = [&F, &A](Vector const &x) {
    return F.solve_lower(F.permute(matvec(A, F.solve_upper(x))));
  };
  op.apply_adjoint = [&F, &A](Vector const &x) {
    return F.solve_upper_adjoint(
        matvec_adjoint(A, F.permute_transpose(F.solve_lower_adjoint(x))));
  };
  op.dim = A.rows();
  op.real = is_real(A) && is_real(F.L) && is_real(F.U);
  return op;
}

PreconditionedSystem precondition(Ilu0Factor const &F, SparseMatrix const &A,
                                  Vector const &b)
{
  if (b.size() != A.rows())
    throw std::invalid_argument("precondition: rhs size mismatch");
  PreconditionedSystem sys;
  sys.op = apply_ilu0(F, A);
  sys.rhs = F.solve_lower(F.permute(b));
  sys.factor = &F;
  return sys;
}

} // namespace cdefl
