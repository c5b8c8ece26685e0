#include <cdefl/report.hpp>

namespace cdefl
{

nlohmann::json to_json(SolveReport const &rep)
{
  nlohmann::json j = {{"iterations", rep.iterations},
                      {"final_relres", rep.final_relres},
                      {"converged", rep.converged},
                      {"breakdown", rep.breakdown},
                      {"matvecs", rep.matvecs},
                      {"wall_time_s", rep.wall_time_s}};
  if (rep.true_error)
    j["true_error"] = *rep.true_error;
  if (!rep.residual_history.empty())
    j["history"] = rep.residual_history;
  return j;
}

nlohmann::json to_json(ContourDiagnostics const &diag)
{
  nlohmann::json j = {{"conjugate_pairs", diag.conjugate_pairs},
                      {"shifted_solves", diag.solves.size()},
                      {"total_iterations", diag.total_iterations},
                      {"total_matvecs", diag.total_matvecs},
                      {"inaccurate_nodes", diag.inaccurate_nodes}};
  std::size_t fallbacks = 0;
  for (auto const &s : diag.solves)
    fallbacks += s.dense_fallback ? 1 : 0;
  j["dense_fallbacks"] = fallbacks;
  return j;
}

nlohmann::json to_json(MultigridReport const &rep)
{
  nlohmann::json j = to_json(rep.solve);
  j["cycles"] = rep.solve.iterations;
  j["reduction_factors"] = rep.reduction_factors;
  j["work_units_per_cycle"] = rep.work_units_per_cycle;
  return j;
}

nlohmann::json without_timing(nlohmann::json j)
{
  if (j.is_object())
  {
    j.erase("wall_time_s");
    for (auto &[key, value] : j.items())
      value = without_timing(value);
  }
  else if (j.is_array())
    for (auto &value : j)
      value = without_timing(value);
  return j;
}

} // namespace cdefl
