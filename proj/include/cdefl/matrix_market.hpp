#ifndef CDEFL_MATRIX_MARKET_HPP
#define CDEFL_MATRIX_MARKET_HPP

#include <cdefl/sparse.hpp>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace cdefl
{

class ParseError : public std::runtime_error
{
public:
  ParseError(std::size_t line, std::string const &what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), _line(line)
  {
  }
  std::size_t line() const { return _line; }

private:
  std::size_t _line;
};

struct MatrixMarketInfo
{
  std::string field;         // real | integer | complex | pattern
  std::string symmetry;      // general | symmetric | skew-symmetric | hermitian
  std::size_t file_entries;  // coordinate lines in the file
  std::size_t stored_nonzeros; // after symmetric expansion and duplicate merge
};

struct MatrixMarketData
{
  SparseMatrix A;
  MatrixMarketInfo info;
};

/// Reads a coordinate Matrix Market file. Symmetric, skew-symmetric and
/// Hermitian storage is expanded to general storage, duplicates are summed,
/// and rows come out sorted. Indices are 1-based on disk.
MatrixMarketData mm_read_with_info(std::istream &in);
MatrixMarketData mm_read_with_info(std::filesystem::path const &path);
SparseMatrix mm_read(std::filesystem::path const &path);

/// Reads a dense column vector in Matrix Market array format.
Vector mm_read_vector(std::filesystem::path const &path);

/// Writes general coordinate storage; the field is `real` when every value
/// has zero imaginary part and `complex` otherwise.
void mm_write(std::ostream &out, SparseMatrix const &A);
void mm_write(std::filesystem::path const &path, SparseMatrix const &A);
void mm_write_vector(std::filesystem::path const &path, Vector const &v);

} // namespace cdefl

#endif
