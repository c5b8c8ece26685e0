#ifndef CDEFL_QUADRATURE_HPP
#define CDEFL_QUADRATURE_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cdefl
{

template <typename RealType = double>
struct QuadratureRule
{
  std::vector<RealType> nodes;   // ascending, in (-1, 1)
  std::vector<RealType> weights; // positive, sum to 2
};

/// Gauss-Legendre rule with q points on [-1, 1]. Roots of P_q are found by
/// Newton iteration from Chebyshev-like initial guesses; the rule is
/// symmetrized so nodes are exactly antisymmetric and weights symmetric.
template <typename RealType = double>
QuadratureRule<RealType> legendre_gauss(int q)
{
  if (q < 1)
    throw std::invalid_argument("legendre_gauss: q must be >= 1");
  QuadratureRule<RealType> rule;
  rule.nodes.assign(static_cast<std::size_t>(q), RealType(0));
  rule.weights.assign(static_cast<std::size_t>(q), RealType(0));
  RealType const pi = std::numbers::pi_v<RealType>;

  // (P_q(x), P_{q-1}(x)) by the three-term recurrence
  auto legendre = [q](RealType x) {
    RealType p0 = 1, p1 = x;
    for (int j = 2; j <= q; ++j)
    {
      RealType const p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    return std::pair<RealType, RealType>{p1, p0};
  };

  int const half = (q + 1) / 2;
  for (int k = 1; k <= half; ++k)
  {
    // k-th largest root
    RealType x = std::cos(pi * (RealType(k) - RealType(0.25)) / (RealType(q) + RealType(0.5)));
    for (int it = 0; it < 100; ++it)
    {
      auto const [pq, pqm1] = legendre(x);
      RealType const dp = q * (x * pq - pqm1) / (x * x - 1);
      RealType const dx = pq / dp;
      x -= dx;
      if (std::abs(dx) <= 2 * std::numeric_limits<RealType>::epsilon())
        break;
    }
    auto const [pq, pqm1] = legendre(x);
    RealType const dp = q * (x * pq - pqm1) / (x * x - 1);
    RealType const w = 2 / ((1 - x * x) * dp * dp);
    auto const hi = static_cast<std::size_t>(q - k);
    auto const lo = static_cast<std::size_t>(k - 1);
    rule.nodes[hi] = x;
    rule.nodes[lo] = -x;
    rule.weights[hi] = w;
    rule.weights[lo] = w;
  }
  if (q % 2 == 1)
    rule.nodes[static_cast<std::size_t>(q / 2)] = 0;
  return rule;
}

} // namespace cdefl

#endif
