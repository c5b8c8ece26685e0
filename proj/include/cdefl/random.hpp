#ifndef CDEFL_RANDOM_HPP
#define CDEFL_RANDOM_HPP

#include <cdefl/sparse.hpp>

#include <cstdint>
#include <random>
#include <string_view>

namespace cdefl
{

/// Derives an independent seed for the named stream ("Y", "M", ...) from a
/// single run seed: splitmix64(seed ^ fnv1a(name)).
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view name)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : name)
  {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Real standard-normal entries, stored as complex.
inline DenseMatrix gaussian_matrix(Index rows, Index cols, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<Real> normal(0.0, 1.0);
  DenseMatrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
      M(i, j) = Complex(normal(gen), 0.0);
  return M;
}

inline DenseMatrix complex_gaussian_matrix(Index rows, Index cols, std::uint64_t seed)
{
  std::mt19937_64 gen(seed);
  std::normal_distribution<Real> normal(0.0, 1.0);
  DenseMatrix M(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i)
    {
      Real const re = normal(gen);
      M(i, j) = Complex(re, normal(gen));
    }
  return M;
}

} // namespace cdefl

#endif
