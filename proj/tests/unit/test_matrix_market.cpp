#include "test_util.hpp"

#include <cdefl/matrix_market.hpp>

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

using namespace cdefl;

namespace
{

MatrixMarketData read_text(std::string const &text)
{
  std::istringstream in(text);
  return mm_read_with_info(in);
}

std::size_t error_line(std::string const &text)
{
  try
  {
    read_text(text);
  }
  catch (ParseError const &e)
  {
    return e.line();
  }
  return 0;
}

std::filesystem::path data_file(char const *name)
{
  char const *dir = std::getenv("CDEFL_DATA_DIR");
  if (!dir)
    return {};
  std::filesystem::path p = std::filesystem::path(dir) / name;
  return std::filesystem::exists(p) ? p : std::filesystem::path{};
}

} // namespace

TEST_SUITE("matrix_market")
{
  TEST_CASE("symmetric storage is expanded")
  {
    auto const d = read_text("%%MatrixMarket matrix coordinate real symmetric\n"
                             "% comment\n"
                             "2 2 3\n"
                             "1 1 2\n"
                             "2 1 3\n"
                             "2 2 2\n");
    DenseMatrix expect(2, 2);
    expect << 2.0, 3.0, 3.0, 2.0;
    CHECK((to_dense(d.A) - expect).norm() == 0.0);
    CHECK(d.info.file_entries == 3);
    CHECK(d.info.stored_nonzeros == 4);
    CHECK(d.info.symmetry == "symmetric");
  }

  TEST_CASE("skew-symmetric, hermitian, complex and pattern fields")
  {
    auto const skew = read_text("%%MatrixMarket matrix coordinate real skew-symmetric\n"
                                "2 2 1\n2 1 5\n");
    CHECK(skew.A.coeff(1, 0) == Complex(5.0, 0.0));
    CHECK(skew.A.coeff(0, 1) == Complex(-5.0, 0.0));

    auto const herm = read_text("%%MatrixMarket matrix coordinate complex hermitian\n"
                                "2 2 2\n1 1 1 0\n2 1 2 3\n");
    CHECK(herm.A.coeff(1, 0) == Complex(2.0, 3.0));
    CHECK(herm.A.coeff(0, 1) == Complex(2.0, -3.0));

    auto const cplx = read_text("%%MatrixMarket matrix coordinate complex general\n"
                                "1 2 1\n1 2 -1.5 0.25\n");
    CHECK(cplx.A.rows() == 1);
    CHECK(cplx.A.cols() == 2);
    CHECK(cplx.A.coeff(0, 1) == Complex(-1.5, 0.25));

    auto const pat = read_text("%%MatrixMarket matrix coordinate pattern general\n"
                               "2 2 2\n1 2\n2 1\n");
    CHECK(pat.A.coeff(0, 1) == Complex(1.0, 0.0));
    CHECK(pat.A.coeff(1, 1) == Complex(0.0, 0.0));
    CHECK(pat.info.field == "pattern");
  }

  TEST_CASE("duplicates are summed and rows sorted")
  {
    auto const d = read_text("%%MatrixMarket matrix coordinate real general\n"
                             "3 3 4\n1 3 1\n1 1 2\n1 3 4\n3 2 7\n");
    CHECK(d.A.coeff(0, 2) == Complex(5.0, 0.0));
    CHECK(d.info.file_entries == 4);
    CHECK(d.info.stored_nonzeros == 3);
    CHECK(csr_well_formed(d.A));
  }

  TEST_CASE("parse errors name the line")
  {
    CHECK(error_line("%%MatrixMarket matrix array real general\n2 1\n1\n2\n") == 1);
    CHECK(error_line("not a header\n") == 1);
    CHECK(error_line("%%MatrixMarket matrix coordinate real general\n"
                     "2 2 2\n1 1 1\n3 1 1\n") == 4);
    CHECK(error_line("%%MatrixMarket matrix coordinate real general\n"
                     "% c\n2 2 1\n1 1 abc\n") == 4);
    CHECK(error_line("%%MatrixMarket matrix coordinate real general\n"
                     "2 2 3\n1 1 1\n") != 0);
    CHECK(error_line("%%MatrixMarket matrix coordinate real general\n"
                     "2 x 3\n") == 2);
  }

  TEST_CASE("write then read reproduces the matrix exactly")
  {
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
      SparseMatrix const A = testutil::random_sparse(25, 3, seed, seed % 2 == 0);
      std::stringstream buf;
      mm_write(buf, A);
      auto const back = mm_read_with_info(buf);
      CHECK((to_dense(back.A) - to_dense(A)).norm() == 0.0);
      CHECK(back.info.field == (seed % 2 == 0 ? "real" : "complex"));

      std::stringstream again;
      mm_write(again, back.A);
      std::stringstream first;
      mm_write(first, A);
      CHECK(again.str() == first.str());
    }
  }

  TEST_CASE("vector files")
  {
    auto const dir = std::filesystem::temp_directory_path() / "cdefl_mm_test";
    std::filesystem::create_directories(dir);
    Vector v(3);
    v << Complex(1.0, 0.0), Complex(-2.5, 0.0), Complex(1e-300, 0.0);
    mm_write_vector(dir / "v.mtx", v);
    CHECK((mm_read_vector(dir / "v.mtx") - v).norm() == 0.0);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("missing file is an error")
  {
    CHECK_THROWS(mm_read("/nonexistent/matrix.mtx"));
  }

  TEST_CASE("collection matrices (CDEFL_DATA_DIR)")
  {
    auto const bcs = data_file("bcsstm27.mtx");
    if (bcs.empty())
      MESSAGE("bcsstm27.mtx not found under CDEFL_DATA_DIR; skipped");
    else
    {
      auto const d = mm_read_with_info(bcs);
      CHECK(d.A.rows() == 1224);
      CHECK(d.A.cols() == 1224);
      CHECK(d.info.stored_nonzeros == 56126);
    }
    auto const mah = data_file("mahindas.mtx");
    if (mah.empty())
      MESSAGE("mahindas.mtx not found under CDEFL_DATA_DIR; skipped");
    else
    {
      auto const d = mm_read_with_info(mah);
      CHECK(d.A.rows() == 1258);
      CHECK(d.info.stored_nonzeros == 7682);
    }
  }
}
