#ifndef CDEFL_CLI_APP_HPP
#define CDEFL_CLI_APP_HPP

#include <cdefl/contour.hpp>
#include <cdefl/sparse.hpp>

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdefl::cli
{

enum ExitCode
{
  exit_ok = 0,
  exit_not_converged = 1,
  exit_input_error = 2,
  exit_internal_error = 3
};

/// An error raised inside a pipeline stage, tagged with the stage name.
class StageError : public std::runtime_error
{
public:
  StageError(std::string stage, std::string const &what, bool input_error)
      : std::runtime_error("[" + stage + "] " + what), _stage(std::move(stage)),
        _input(input_error)
  {
  }
  std::string const &stage() const { return _stage; }
  bool input_error() const { return _input; }

private:
  std::string _stage;
  bool _input;
};

struct RunConfig
{
  std::string matrix;             // path, or convdiff:..., diag:..., clustered:...
  std::string rhs = "ones";       // "ones" (b = A 1) or a Matrix Market vector file
  std::string precond = "none";   // none | ilu0
  std::string computation = "plain"; // plain | contour-deflate | eig-deflate
  std::optional<std::string> contour; // "c_re,c_im,r"
  std::optional<long> m;
  int q = 128;
  std::uint64_t seed = 0;
  std::string solver = "bicg"; // bicg | gmres
  double tol = 1e-7;
  std::optional<long> maxit; // default 1000 N
  int restart = 50;
  std::string output;        // report path, empty for stdout
  std::string history;       // residual history CSV path
  std::string save_subspace;
  std::string load_subspace;

  void validate() const;
};

nlohmann::json to_json(RunConfig const &cfg);
RunConfig run_config_from_json(nlohmann::json const &j);

struct LoadedMatrix
{
  SparseMatrix A;
  std::string name;
  std::optional<Vector> rhs; // generators that come with a right-hand side
};

/// Resolves a matrix source: a Matrix Market path, "diag:1,2,3",
/// "convdiff:n=31,re=100,upwind=1" or "clustered:n=500,small=10,mag=1e-6,seed=1".
LoadedMatrix load_matrix(std::string const &source);

struct RunOutcome
{
  nlohmann::json report;
  bool converged = false;
};

/// Executes one pipeline end to end. Throws StageError.
RunOutcome run_pipeline(RunConfig const &cfg);

/// Full command line entry point; returns the process exit code.
int main_entry(std::vector<std::string> const &args, std::ostream &out, std::ostream &err);

} // namespace cdefl::cli

#endif
