#ifndef CDEFL_ILU0_HPP
#define CDEFL_ILU0_HPP

#include <cdefl/krylov.hpp>
#include <cdefl/sparse.hpp>

#include <vector>

namespace cdefl
{

/// Zero fill-in incomplete factorization P A ~= L U.
struct Ilu0Factor
{
  SparseMatrix L;        // unit lower triangular, unit diagonal stored
  SparseMatrix U;        // upper triangular, diagonal always stored
  std::vector<int> perm; // row i of P A is row perm[i] of A
  std::vector<int> patched_pivots; // rows whose U diagonal was replaced by 1

  Vector solve_lower(Vector const &v) const;         // L^{-1} v
  Vector solve_upper(Vector const &v) const;         // U^{-1} v
  Vector solve_lower_adjoint(Vector const &v) const; // L^{-H} v
  Vector solve_upper_adjoint(Vector const &v) const; // U^{-H} v
  Vector permute(Vector const &v) const;             // P v
  Vector permute_transpose(Vector const &v) const;   // P^T v
};

/// ILU(0) on the pattern of P A. With `pivot`, P is a static row
/// permutation choosing, column by column, the largest-magnitude entry among
/// unassigned rows that have a structural entry in that column. U diagonals
/// with |u_ii| <= 1e-14 max_j |u_ij| (including structurally missing ones)
/// are replaced by 1. Throws std::invalid_argument for a structurally empty
/// row.
Ilu0Factor ilu0(SparseMatrix const &A, bool pivot);

/// The two-sided preconditioned system  A~ = L^{-1} P A U^{-1},
/// b~ = L^{-1} P b, with solution recovery x = U^{-1} u.
struct PreconditionedSystem
{
  LinearOperator op;
  Vector rhs;

  Ilu0Factor const *factor = nullptr;
  Vector recover(Vector const &u) const { return factor->solve_upper(u); }
};

/// Operator x -> L^{-1} P A U^{-1} x with its adjoint. A and F are held by
/// reference.
LinearOperator apply_ilu0(Ilu0Factor const &F, SparseMatrix const &A);

PreconditionedSystem precondition(Ilu0Factor const &F, SparseMatrix const &A,
                                  Vector const &b);

} // namespace cdefl

#endif
