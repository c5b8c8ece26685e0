#include <cdefl/matrix_market.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace cdefl
{

namespace
{

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> tokens(std::string const &line)
{
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok)
    out.push_back(tok);
  return out;
}

bool blank_or_comment(std::string const &line)
{
  auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '%';
}

long long parse_index(std::string const &tok, std::size_t line_no)
{
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(line_no, "non-integer index '" + tok + "'");
  return v;
}

Real parse_real(std::string const &tok, std::size_t line_no)
{
  try
  {
    std::size_t used = 0;
    Real v = std::stod(tok, &used);
    if (used != tok.size())
      throw ParseError(line_no, "non-numeric entry '" + tok + "'");
    return v;
  }
  catch (std::logic_error const &)
  {
    throw ParseError(line_no, "non-numeric entry '" + tok + "'");
  }
}

struct Header
{
  std::string format;
  std::string field;
  std::string symmetry;
};

Header read_header(std::istream &in, std::size_t &line_no)
{
  std::string line;
  if (!std::getline(in, line))
    throw ParseError(1, "empty file");
  line_no = 1;
  auto t = tokens(line);
  if (t.size() != 5 || t[0] != "%%MatrixMarket" || lower(t[1]) != "matrix")
    throw ParseError(line_no, "malformed header");
  Header h{lower(t[2]), lower(t[3]), lower(t[4])};
  if (h.format != "coordinate" && h.format != "array")
    throw ParseError(line_no, "unsupported format '" + h.format + "'");
  if (h.field != "real" && h.field != "integer" && h.field != "complex" &&
      h.field != "pattern")
    throw ParseError(line_no, "unsupported field '" + h.field + "'");
  if (h.symmetry != "general" && h.symmetry != "symmetric" &&
      h.symmetry != "skew-symmetric" && h.symmetry != "hermitian")
    throw ParseError(line_no, "unsupported symmetry '" + h.symmetry + "'");
  return h;
}

std::vector<std::string> next_data_line(std::istream &in, std::size_t &line_no)
{
  std::string line;
  while (std::getline(in, line))
  {
    ++line_no;
    if (!blank_or_comment(line))
      return tokens(line);
  }
  return {};
}

} // namespace

MatrixMarketData mm_read_with_info(std::istream &in)
{
  std::size_t line_no = 0;
  Header const h = read_header(in, line_no);
  if (h.format != "coordinate")
    throw ParseError(line_no, "expected coordinate format for a sparse matrix");

  auto size_tok = next_data_line(in, line_no);
  if (size_tok.size() != 3)
    throw ParseError(line_no, "malformed size line");
  long long const nrows = parse_index(size_tok[0], line_no);
  long long const ncols = parse_index(size_tok[1], line_no);
  long long const nnz = parse_index(size_tok[2], line_no);
  if (nrows < 0 || ncols < 0 || nnz < 0)
    throw ParseError(line_no, "negative size");
  if (h.symmetry != "general" && nrows != ncols)
    throw ParseError(line_no, "symmetric storage requires a square matrix");

  std::size_t const values_per_entry =
      h.field == "complex" ? 2 : (h.field == "pattern" ? 0 : 1);

  std::vector<Triplet> entries;
  entries.reserve(static_cast<std::size_t>(nnz) * (h.symmetry == "general" ? 1 : 2));
  for (long long k = 0; k < nnz; ++k)
  {
    auto t = next_data_line(in, line_no);
    if (t.empty())
      throw ParseError(line_no + 1, "unexpected end of file (" + std::to_string(k) +
                                        " of " + std::to_string(nnz) + " entries read)");
    if (t.size() != 2 + values_per_entry)
      throw ParseError(line_no, "wrong number of fields");
    long long const i = parse_index(t[0], line_no);
    long long const j = parse_index(t[1], line_no);
    if (i < 1 || i > nrows || j < 1 || j > ncols)
      throw ParseError(line_no, "index (" + t[0] + "," + t[1] + ") out of declared bounds");
    Complex v{1.0, 0.0};
    if (values_per_entry == 1)
      v = Complex(parse_real(t[2], line_no), 0.0);
    else if (values_per_entry == 2)
      v = Complex(parse_real(t[2], line_no), parse_real(t[3], line_no));

    int const r = static_cast<int>(i - 1);
    int const c = static_cast<int>(j - 1);
    entries.emplace_back(r, c, v);
    if (r != c)
    {
      if (h.symmetry == "symmetric")
        entries.emplace_back(c, r, v);
      else if (h.symmetry == "skew-symmetric")
        entries.emplace_back(c, r, -v);
      else if (h.symmetry == "hermitian")
        entries.emplace_back(c, r, std::conj(v));
    }
  }

  MatrixMarketData out;
  out.A.resize(static_cast<Index>(nrows), static_cast<Index>(ncols));
  out.A.setFromTriplets(entries.begin(), entries.end());
  out.A.makeCompressed();
  out.info = MatrixMarketInfo{h.field, h.symmetry, static_cast<std::size_t>(nnz),
                              static_cast<std::size_t>(out.A.nonZeros())};
  return out;
}

MatrixMarketData mm_read_with_info(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  return mm_read_with_info(in);
}

SparseMatrix mm_read(std::filesystem::path const &path)
{
  return mm_read_with_info(path).A;
}

Vector mm_read_vector(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  std::size_t line_no = 0;
  Header const h = read_header(in, line_no);
  if (h.format != "array" || h.field == "pattern" || h.symmetry != "general")
    throw ParseError(line_no, "expected a general real/complex array");
  auto size_tok = next_data_line(in, line_no);
  if (size_tok.size() != 2)
    throw ParseError(line_no, "malformed size line");
  long long const nrows = parse_index(size_tok[0], line_no);
  long long const ncols = parse_index(size_tok[1], line_no);
  if (ncols != 1 || nrows < 0)
    throw ParseError(line_no, "expected a single column");
  Vector v(nrows);
  for (long long i = 0; i < nrows; ++i)
  {
    auto t = next_data_line(in, line_no);
    std::size_t const want = h.field == "complex" ? 2 : 1;
    if (t.size() != want)
      throw ParseError(line_no + (t.empty() ? 1 : 0), "wrong number of fields");
    v[i] = Complex(parse_real(t[0], line_no), want == 2 ? parse_real(t[1], line_no) : 0.0);
  }
  return v;
}

void mm_write(std::ostream &out, SparseMatrix const &A)
{
  bool const real = is_real(A);
  out << "%%MatrixMarket matrix coordinate " << (real ? "real" : "complex")
      << " general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < A.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(A, i); it; ++it)
    {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value().real();
      if (!real)
        out << ' ' << it.value().imag();
      out << '\n';
    }
}

void mm_write(std::filesystem::path const &path, SparseMatrix const &A)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  mm_write(out, A);
}

void mm_write_vector(std::filesystem::path const &path, Vector const &v)
{
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  bool const real = (v.imag().array() == 0.0).all();
  out << "%%MatrixMarket matrix array " << (real ? "real" : "complex") << " general\n";
  out << v.size() << " 1\n" << std::setprecision(17);
  for (Index i = 0; i < v.size(); ++i)
  {
    out << v[i].real();
    if (!real)
      out << ' ' << v[i].imag();
    out << '\n';
  }
}

} // namespace cdefl
