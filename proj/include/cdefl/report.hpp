#ifndef CDEFL_REPORT_HPP
#define CDEFL_REPORT_HPP

#include <cdefl/deflation.hpp>
#include <cdefl/krylov.hpp>
#include <cdefl/multigrid.hpp>

#include <json.hpp>

namespace cdefl
{

/// {iterations, final_relres, converged, matvecs, wall_time_s, history?, ...}
nlohmann::json to_json(SolveReport const &rep);
nlohmann::json to_json(ContourDiagnostics const &diag);
nlohmann::json to_json(MultigridReport const &rep);

/// Same object without the wall_time_s field, for determinism checks.
nlohmann::json without_timing(nlohmann::json j);

} // namespace cdefl

#endif
