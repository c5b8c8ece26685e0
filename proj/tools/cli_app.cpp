#include "cli_app.hpp"

#include <cdefl/deflation.hpp>
#include <cdefl/eig_oracle.hpp>
#include <cdefl/ilu0.hpp>
#include <cdefl/krylov.hpp>
#include <cdefl/matrix_market.hpp>
#include <cdefl/model_problems.hpp>
#include <cdefl/multigrid.hpp>
#include <cdefl/random.hpp>
#include <cdefl/report.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#ifndef CDEFL_VERSION
#define CDEFL_VERSION "0.0.0"
#endif

namespace cdefl::cli
{

namespace
{

// Eigencounts for contour-deflate runs are informational; skip them above this.
constexpr Index count_cap = 2000;

template <typename F>
auto stage(std::string const &name, F &&f) -> decltype(f())
{
  try
  {
    return f();
  }
  catch (StageError const &)
  {
    throw;
  }
  catch (ParseError const &e)
  {
    throw StageError(name, e.what(), true);
  }
  catch (std::invalid_argument const &e)
  {
    throw StageError(name, e.what(), true);
  }
  catch (nlohmann::json::exception const &e)
  {
    throw StageError(name, e.what(), true);
  }
  catch (std::exception const &e)
  {
    throw StageError(name, e.what(), false);
  }
}

std::string hex(std::uint64_t v)
{
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::uint64_t fnv1a(std::string const &text)
{
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text)
  {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::map<std::string, std::string> parse_kv(std::string const &body)
{
  std::map<std::string, std::string> kv;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    auto const eq = item.find('=');
    if (eq == std::string::npos)
      kv[item] = "1";
    else
      kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

double number(std::map<std::string, std::string> const &kv, std::string const &key,
              double fallback)
{
  auto const it = kv.find(key);
  if (it == kv.end())
    return fallback;
  try
  {
    std::size_t used = 0;
    double const v = std::stod(it->second, &used);
    if (used != it->second.size())
      throw std::invalid_argument("");
    return v;
  }
  catch (std::exception const &)
  {
    throw std::invalid_argument("bad value for '" + key + "': " + it->second);
  }
}

void write_json(nlohmann::json const &j, std::string const &path, std::ostream &out)
{
  if (path.empty())
  {
    out << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << j.dump(2) << '\n';
}

nlohmann::json contour_json(ContourSpec const &c)
{
  return {{"c", {c.center.real(), c.center.imag()}}, {"r", c.radius}, {"q", c.quad_order}};
}

void write_history(std::string const &path, std::vector<Real> const &history)
{
  std::ofstream f(path);
  if (!f)
    throw std::runtime_error("cannot write " + path);
  f << "iteration,relres\n" << std::setprecision(17);
  for (std::size_t j = 0; j < history.size(); ++j)
    f << j << ',' << history[j] << '\n';
}

} // namespace

//-----------------------------------------------------------------------------
// RunConfig

void RunConfig::validate() const
{
  if (matrix.empty())
    throw std::invalid_argument("a matrix source is required");
  if (precond != "none" && precond != "ilu0")
    throw std::invalid_argument("precond must be none or ilu0");
  if (computation != "plain" && computation != "contour-deflate" &&
      computation != "eig-deflate")
    throw std::invalid_argument("computation must be plain, contour-deflate or eig-deflate");
  if (computation != "plain" && !contour)
    throw std::invalid_argument("computation " + computation + " needs a contour");
  if (m && *m < 1)
    throw std::invalid_argument("m must be >= 1");
  if (q < 2)
    throw std::invalid_argument("q must be >= 2");
  if (solver != "bicg" && solver != "gmres")
    throw std::invalid_argument("solver must be bicg or gmres");
  if (!(tol > 0.0))
    throw std::invalid_argument("tol must be positive");
  if (maxit && *maxit < 1)
    throw std::invalid_argument("maxit must be >= 1");
  if (restart < 1)
    throw std::invalid_argument("restart must be >= 1");
  if (contour)
    parse_contour(*contour, q);
}

nlohmann::json to_json(RunConfig const &cfg)
{
  nlohmann::json j = {{"matrix", cfg.matrix},       {"rhs", cfg.rhs},
                      {"precond", cfg.precond},     {"computation", cfg.computation},
                      {"q", cfg.q},                 {"seed", cfg.seed},
                      {"solver", cfg.solver},       {"tol", cfg.tol},
                      {"restart", cfg.restart}};
  j["contour"] = cfg.contour ? nlohmann::json(*cfg.contour) : nlohmann::json(nullptr);
  j["m"] = cfg.m ? nlohmann::json(*cfg.m) : nlohmann::json(nullptr);
  j["maxit"] = cfg.maxit ? nlohmann::json(*cfg.maxit) : nlohmann::json(nullptr);
  if (!cfg.load_subspace.empty())
    j["load_subspace"] = cfg.load_subspace;
  return j;
}

RunConfig run_config_from_json(nlohmann::json const &j)
{
  RunConfig c;
  if (!j.is_object())
    throw std::invalid_argument("config must be a JSON object");
  for (auto const &[key, value] : j.items())
  {
    if (key == "matrix")
      c.matrix = value.get<std::string>();
    else if (key == "rhs")
      c.rhs = value.get<std::string>();
    else if (key == "precond")
      c.precond = value.get<std::string>();
    else if (key == "computation")
      c.computation = value.get<std::string>();
    else if (key == "contour")
    {
      if (!value.is_null())
        c.contour = value.get<std::string>();
    }
    else if (key == "m")
    {
      if (!value.is_null())
        c.m = value.get<long>();
    }
    else if (key == "q")
      c.q = value.get<int>();
    else if (key == "seed")
      c.seed = value.get<std::uint64_t>();
    else if (key == "solver")
      c.solver = value.get<std::string>();
    else if (key == "tol")
      c.tol = value.get<double>();
    else if (key == "maxit")
    {
      if (!value.is_null())
        c.maxit = value.get<long>();
    }
    else if (key == "restart")
      c.restart = value.get<int>();
    else if (key == "output")
      c.output = value.get<std::string>();
    else if (key == "history")
      c.history = value.get<std::string>();
    else if (key == "save_subspace")
      c.save_subspace = value.get<std::string>();
    else if (key == "load_subspace")
      c.load_subspace = value.get<std::string>();
    else if (key != "name" && key != "computations")
      throw std::invalid_argument("unknown config key '" + key + "'");
  }
  return c;
}

//-----------------------------------------------------------------------------
// Matrix sources

LoadedMatrix load_matrix(std::string const &source)
{
  auto const colon = source.find(':');
  std::string const kind = colon == std::string::npos ? "" : source.substr(0, colon);
  std::string const body = colon == std::string::npos ? "" : source.substr(colon + 1);
  LoadedMatrix out;

  if (kind == "diag")
  {
    std::vector<Triplet> t;
    std::stringstream ss(body);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ','))
    {
      std::size_t used = 0;
      double v = 0.0;
      try
      {
        v = std::stod(item, &used);
      }
      catch (std::exception const &)
      {
        used = 0;
      }
      if (used == 0 || used != item.size())
        throw std::invalid_argument("bad diagonal entry '" + item + "'");
      t.emplace_back(i, i, v);
      ++i;
    }
    if (i == 0)
      throw std::invalid_argument("diag: needs at least one entry");
    out.A.resize(i, i);
    out.A.setFromTriplets(t.begin(), t.end());
    out.A.makeCompressed();
    out.name = source;
    return out;
  }
  if (kind == "convdiff")
  {
    auto const kv = parse_kv(body);
    int const n = static_cast<int>(number(kv, "n", 31));
    ConvDiffSpec const spec =
        manufactured_spec(n, number(kv, "re", 0.0), number(kv, "upwind", 0.0) != 0.0);
    auto [A, b] = convdiff_matrix(spec);
    out.A = std::move(A);
    out.rhs = std::move(b);
    out.name = source;
    return out;
  }
  if (kind == "clustered")
  {
    auto const kv = parse_kv(body);
    auto const n = static_cast<Index>(number(kv, "n", 100));
    auto const small = static_cast<Index>(number(kv, "small", 5));
    SyntheticSpec spec{clustered_spectrum(n, small, number(kv, "mag", 1e-6)),
                       number(kv, "kappa", 1.0),
                       static_cast<std::uint64_t>(number(kv, "seed", 0))};
    out.A = synthetic_matrix(spec);
    out.name = source;
    return out;
  }

  std::filesystem::path const path(source);
  if (!std::filesystem::exists(path))
    throw std::invalid_argument("matrix file not found: " + source);
  out.A = mm_read(path);
  out.name = path.stem().string();
  return out;
}

//-----------------------------------------------------------------------------
// run

RunOutcome run_pipeline(RunConfig const &cfg)
{
  auto const t0 = std::chrono::steady_clock::now();
  stage("config", [&] { cfg.validate(); });

  LoadedMatrix const loaded = stage("load", [&] { return load_matrix(cfg.matrix); });
  SparseMatrix const &A = loaded.A;
  if (A.rows() != A.cols())
    throw StageError("load", "matrix must be square", true);
  Index const N = A.rows();

  Vector const b = stage("rhs", [&]() -> Vector {
    if (cfg.rhs == "ones")
      return matvec(A, Vector::Ones(N));
    if (cfg.rhs == "generator")
    {
      if (!loaded.rhs)
        throw std::invalid_argument("matrix source has no generated right-hand side");
      return *loaded.rhs;
    }
    if (!std::filesystem::exists(cfg.rhs))
      throw std::invalid_argument("rhs file not found: " + cfg.rhs);
    Vector v = mm_read_vector(cfg.rhs);
    if (v.size() != N)
      throw std::invalid_argument("rhs length does not match the matrix");
    return v;
  });

  // system actually handed to the Krylov solver
  std::optional<Ilu0Factor> factor;
  std::optional<PreconditionedSystem> psys;
  LinearOperator op;
  Vector rhs;
  nlohmann::json precond_info = nullptr;
  stage("precond", [&] {
    if (cfg.precond == "ilu0")
    {
      factor = ilu0(A, true);
      psys = precondition(*factor, A, b);
      op = psys->op;
      rhs = psys->rhs;
      precond_info = {{"kind", "ilu0"}, {"patched_pivots", factor->patched_pivots.size()}};
    }
    else
    {
      op = make_operator(A);
      rhs = b;
    }
  });

  SolverConfig scfg;
  scfg.tol = cfg.tol;
  scfg.maxit = cfg.maxit ? *cfg.maxit : 1000 * static_cast<long>(N);
  scfg.restart = cfg.restart;
  scfg.record_history = !cfg.history.empty();
  KrylovMethod const method = cfg.solver == "gmres" ? KrylovMethod::gmres : KrylovMethod::bicg;

  nlohmann::json report;
  nlohmann::json warnings = nlohmann::json::array();
  std::optional<ContourSpec> contour;
  if (cfg.contour)
    contour = parse_contour(*cfg.contour, cfg.q);

  std::optional<std::size_t> eig_inside;
  std::optional<DeflationSubspace> D;
  Index m = cfg.m.value_or(0);

  if (cfg.computation == "eig-deflate")
  {
    stage("eig", [&] {
      if (m == 0)
      {
        SpectrumReport spec = dense_eig(to_dense(op), false);
        count_inside(spec, *contour);
        auto const s = static_cast<Index>(spec.count_inside);
        m = std::min<Index>(N, s + (s + 9) / 10);
      }
      EigSubspace e = exact_eigvec_subspace(op, *contour, m, cfg.seed);
      eig_inside = e.inside;
      for (auto const &w : e.warnings)
        warnings.push_back(w);
      D = std::move(e.subspace);
    });
  }
  else if (cfg.computation == "contour-deflate")
  {
    if (N <= count_cap)
      stage("eig", [&] {
        SpectrumReport spec = dense_eig(to_dense(op), false);
        count_inside(spec, *contour);
        eig_inside = spec.count_inside;
        if (spec.near_boundary > 0)
          warnings.push_back(std::to_string(spec.near_boundary) +
                             " eigenvalue(s) within 1e-8 r of the contour");
      });
    if (m == 0)
    {
      if (!eig_inside)
        throw StageError("config", "m is required when N exceeds the dense cap", true);
      auto const s = static_cast<Index>(*eig_inside);
      if (s == 0)
        throw StageError("contour", "no eigenvalues inside the contour, nothing to deflate",
                         true);
      m = std::min<Index>(N, s + (s + 9) / 10);
    }
    DenseMatrix Z;
    if (!cfg.load_subspace.empty())
    {
      Z = stage("subspace", [&] { return load_subspace(cfg.load_subspace); });
      if (Z.rows() != N)
        throw StageError("subspace", "stored subspace has the wrong dimension", true);
      m = Z.cols();
    }
    else
    {
      ContourResult const cr = stage("contour", [&] {
        DenseMatrix const Y = gaussian_matrix(N, m, stream_seed(cfg.seed, "Y"));
        return contour_subspace(op, Y, *contour);
      });
      report["contour_diagnostics"] = to_json(cr.diagnostics);
      if (!cr.diagnostics.all_converged())
        warnings.push_back(std::to_string(cr.diagnostics.inaccurate_nodes.size()) +
                           " quadrature node(s) with unconverged shifted solves");
      Z = cr.Zraw;
    }
    D = stage("subspace", [&] {
      // a stored Z is already orthonormal; reusing it as is keeps runs identical
      return cfg.load_subspace.empty() ? build_subspace(op, Z)
                                       : subspace_from_orthonormal(op, std::move(Z));
    });
    if (D->rank_deficient)
      warnings.push_back("Z is numerically rank deficient (rank " +
                         std::to_string(D->numerical_rank) + " of " + std::to_string(m) +
                         ")");
    if (!cfg.save_subspace.empty())
      stage("subspace", [&] {
        save_subspace(cfg.save_subspace, D->Z,
                      {N, D->m(), cfg.seed, format_contour(*contour), cfg.q});
      });
  }

  // solve
  auto [u, rep] = stage("solve", [&] {
    if (D)
      return deflated_solve(op, rhs, *D, scfg, method);
    return method == KrylovMethod::gmres ? gmres(op, rhs, Vector::Zero(N), scfg)
                                         : bicg(op, rhs, Vector::Zero(N), scfg);
  });

  // Err column: residual of the system the solver saw, deflated when deflating
  Real err = 0.0;
  Real true_error = 0.0;
  stage("report", [&] {
    if (D)
    {
      ProjectorPair const pp(op, *D);
      Vector const Pb = pp.apply_P(rhs);
      Real const pbn = Pb.norm();
      err = pbn == 0.0 ? 0.0 : (Pb - pp.apply_P(op(u))).norm() / pbn;
    }
    else
      err = relative_residual(op, rhs, u);
    Vector const x = psys ? psys->recover(u) : u;
    Real const bn = b.norm();
    true_error = bn == 0.0 ? (b - matvec(A, x)).norm() : (b - matvec(A, x)).norm() / bn;
    if (!cfg.history.empty())
      write_history(cfg.history, rep.residual_history);
  });

  nlohmann::json solve = to_json(rep);
  solve.erase("history");

  report["provenance"] = {{"version", CDEFL_VERSION},
                          {"matrix_checksum", hex(checksum(A))},
                          {"config_hash", hex(fnv1a(to_json(cfg).dump()))}};
  report["config"] = to_json(cfg);
  report["matrix"] = {{"name", loaded.name}, {"n", N}, {"nnz", A.nonZeros()}};
  report["precond"] = precond_info;
  nlohmann::json row = {{"matrix", loaded.name}};
  row["contour"] = contour ? contour_json(*contour) : nlohmann::json(nullptr);
  row["eig_inside"] = eig_inside ? nlohmann::json(*eig_inside) : nlohmann::json(nullptr);
  row["m"] = D ? nlohmann::json(D->m()) : nlohmann::json(nullptr);
  row[cfg.computation] = {{"iterations", rep.iterations}, {"err", err}};
  report["row"] = row;
  report["solve"] = solve;
  report["err"] = err;
  report["true_error"] = true_error;
  report["warnings"] = warnings;
  report["wall_time_s"] =
      std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  return {report, rep.converged};
}

//-----------------------------------------------------------------------------
// bench

namespace
{

std::string format_err(double v)
{
  std::ostringstream s;
  s << std::scientific << std::setprecision(1) << v;
  return s.str();
}

nlohmann::json run_bench(nlohmann::json const &manifest, std::ostream &table)
{
  nlohmann::json const rows_in = manifest.is_array() ? manifest : manifest.value("rows", nlohmann::json::array());
  if (!rows_in.is_array())
    throw std::invalid_argument("manifest rows must be an array");
  static std::vector<std::string> const all = {"plain", "contour-deflate", "eig-deflate"};

  nlohmann::json rows = nlohmann::json::array();
  std::vector<std::vector<std::string>> cells;
  for (auto const &entry : rows_in)
  {
    nlohmann::json row;
    std::string const name =
        entry.value("name", entry.value("matrix", std::string("?")));
    row["matrix"] = name;
    row["contour"] = nullptr;
    row["eig_inside"] = nullptr;
    row["m"] = entry.contains("m") ? entry["m"] : nlohmann::json(nullptr);
    std::vector<std::string> wanted = all;
    if (entry.contains("computations"))
      wanted = entry["computations"].get<std::vector<std::string>>();

    std::vector<std::string> line = {name, "", "", ""};
    for (auto const &comp : all)
    {
      if (std::find(wanted.begin(), wanted.end(), comp) == wanted.end())
      {
        row[comp] = nullptr;
        line.push_back("-");
        line.push_back("-");
        continue;
      }
      try
      {
        RunConfig cfg = run_config_from_json(entry);
        cfg.computation = comp;
        cfg.output.clear();
        cfg.history.clear();
        cfg.save_subspace.clear();
        if (comp == "plain")
          cfg.load_subspace.clear();
        RunOutcome const outcome = run_pipeline(cfg);
        auto const &r = outcome.report.at("row");
        if (!r.at("contour").is_null())
          row["contour"] = r.at("contour");
        if (!r.at("eig_inside").is_null())
          row["eig_inside"] = r.at("eig_inside");
        if (!r.at("m").is_null() && row["m"].is_null())
          row["m"] = r.at("m");
        row[comp] = r.at(comp);
        row[comp]["converged"] = outcome.converged;
        line.push_back(std::to_string(r.at(comp).at("iterations").get<long>()));
        line.push_back(format_err(r.at(comp).at("err").get<double>()));
      }
      catch (StageError const &e)
      {
        row[comp] = {{"failed", e.stage()}, {"message", e.what()}};
        line.push_back("FAIL(" + e.stage() + ")");
        line.push_back("-");
      }
      catch (std::exception const &e)
      {
        row[comp] = {{"failed", "config"}, {"message", e.what()}};
        line.push_back("FAIL(config)");
        line.push_back("-");
      }
    }
    if (!row["contour"].is_null())
    {
      auto const &c = row["contour"];
      std::ostringstream s;
      s << "D(" << c["c"][0].get<double>();
      if (c["c"][1].get<double>() != 0.0)
        s << (c["c"][1].get<double>() < 0 ? "" : "+") << c["c"][1].get<double>() << "i";
      s << ", " << c["r"].get<double>() << ")";
      line[1] = s.str();
    }
    line[2] = row["eig_inside"].is_null() ? "-" : std::to_string(row["eig_inside"].get<long>());
    line[3] = row["m"].is_null() ? "-" : std::to_string(row["m"].get<long>());
    rows.push_back(row);
    cells.push_back(line);
  }

  std::vector<std::string> const header = {"matrix", "contour", "#eig in G", "m",
                                           "#1 iter", "#1 Err",  "#2 iter",  "#2 Err",
                                           "#3 iter", "#3 Err"};
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c)
  {
    width[c] = header[c].size();
    for (auto const &l : cells)
      width[c] = std::max(width[c], l[c].size());
  }
  auto print = [&](std::vector<std::string> const &l) {
    for (std::size_t c = 0; c < l.size(); ++c)
      table << (c ? "  " : "") << std::left << std::setw(static_cast<int>(width[c])) << l[c];
    table << '\n';
  };
  print(header);
  for (auto const &l : cells)
    print(l);
  return {{"rows", rows}};
}

//-----------------------------------------------------------------------------

int report_error(std::exception const &e, bool input, std::ostream &err)
{
  err << "error: " << e.what() << '\n';
  return input ? exit_input_error : exit_internal_error;
}

} // namespace

int main_entry(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Contour-integral deflation for Krylov solvers"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(CDEFL_VERSION));

  // run
  RunConfig rc;
  std::string config_path;
  std::optional<long> rc_m, rc_maxit;
  std::string rc_contour;
  auto *run = app.add_subcommand("run", "Solve one system (plain, contour-deflate or eig-deflate)");
  run->add_option("--config", config_path, "JSON file with run settings; flags override it");
  std::vector<std::pair<CLI::Option *, std::function<void(RunConfig &)>>> overrides;
  auto bind = [&](CLI::Option *opt, std::function<void(RunConfig &)> copy) {
    overrides.emplace_back(opt, std::move(copy));
  };
  bind(run->add_option("--matrix", rc.matrix, "Matrix Market path or convdiff:/diag:/clustered: spec"),
       [&](RunConfig &c) { c.matrix = rc.matrix; });
  bind(run->add_option("--rhs", rc.rhs, "ones (b = A 1), generator, or a vector file"),
       [&](RunConfig &c) { c.rhs = rc.rhs; });
  bind(run->add_option("--precond", rc.precond, "none | ilu0"),
       [&](RunConfig &c) { c.precond = rc.precond; });
  bind(run->add_option("--computation", rc.computation, "plain | contour-deflate | eig-deflate"),
       [&](RunConfig &c) { c.computation = rc.computation; });
  bind(run->add_option("--contour", rc_contour, "circle as c_re,c_im,r"),
       [&](RunConfig &c) { c.contour = rc_contour; });
  bind(run->add_option("--m", rc_m, "deflation subspace dimension"),
       [&](RunConfig &c) { c.m = rc_m; });
  bind(run->add_option("--q", rc.q, "quadrature order"), [&](RunConfig &c) { c.q = rc.q; });
  bind(run->add_option("--seed", rc.seed, "random seed"), [&](RunConfig &c) { c.seed = rc.seed; });
  bind(run->add_option("--solver", rc.solver, "bicg | gmres"),
       [&](RunConfig &c) { c.solver = rc.solver; });
  bind(run->add_option("--tol", rc.tol, "relative residual tolerance"),
       [&](RunConfig &c) { c.tol = rc.tol; });
  bind(run->add_option("--maxit", rc_maxit, "iteration cap (default 1000 N)"),
       [&](RunConfig &c) { c.maxit = rc_maxit; });
  bind(run->add_option("--restart", rc.restart, "GMRES restart length"),
       [&](RunConfig &c) { c.restart = rc.restart; });
  bind(run->add_option("--output,-o", rc.output, "report path (default stdout)"),
       [&](RunConfig &c) { c.output = rc.output; });
  bind(run->add_option("--history", rc.history, "residual history CSV"),
       [&](RunConfig &c) { c.history = rc.history; });
  bind(run->add_option("--save-subspace", rc.save_subspace, "store Z for reuse"),
       [&](RunConfig &c) { c.save_subspace = rc.save_subspace; });
  bind(run->add_option("--load-subspace", rc.load_subspace, "reuse a stored Z"),
       [&](RunConfig &c) { c.load_subspace = rc.load_subspace; });

  // spectrum
  std::string sp_matrix, sp_precond = "none", sp_output, sp_contour;
  Index sp_cap = default_dense_cap;
  auto *spectrum = app.add_subcommand("spectrum", "Dense eigenvalues to CSV");
  spectrum->add_option("--matrix", sp_matrix)->required();
  spectrum->add_option("--precond", sp_precond, "none | ilu0");
  spectrum->add_option("--output,-o", sp_output, "CSV path")->required();
  spectrum->add_option("--contour", sp_contour, "also count eigenvalues inside c_re,c_im,r");
  spectrum->add_option("--cap", sp_cap, "dense size cap");

  // bench
  std::string bench_manifest, bench_output, bench_table;
  auto *bench = app.add_subcommand("bench", "Run a manifest of matrices through all computations");
  bench->add_option("--manifest", bench_manifest)->required();
  bench->add_option("--output,-o", bench_output, "JSON path");
  bench->add_option("--table", bench_table, "text table path (default stdout)");

  // mg
  int mg_n = 63, mg_levels = 0, mg_pre = 2, mg_post = 2, mg_krylov = 3, mg_max = 50;
  double mg_re = 0.0, mg_tol = 1e-8, mg_omega = 0.8;
  bool mg_upwind = false;
  std::string mg_cycle_kind = "V", mg_smoother = "jacobi", mg_output;
  std::uint64_t mg_seed = 7;
  auto *mg = app.add_subcommand("mg", "Multigrid on the convection-diffusion model problem");
  mg->add_option("--n", mg_n, "interior points per side");
  mg->add_option("--re", mg_re, "Reynolds number");
  mg->add_flag("--upwind", mg_upwind, "first-order upwind convection");
  mg->add_option("--levels", mg_levels, "grid levels (default: coarsen to n <= 3)");
  mg->add_option("--cycle", mg_cycle_kind, "V | W");
  mg->add_option("--smoother", mg_smoother, "jacobi | gauss-seidel | deflated-krylov");
  mg->add_option("--pre", mg_pre);
  mg->add_option("--post", mg_post);
  mg->add_option("--omega", mg_omega, "Jacobi weight");
  mg->add_option("--krylov-steps", mg_krylov, "GMRES steps per deflated-Krylov sweep");
  mg->add_option("--tol", mg_tol);
  mg->add_option("--max-cycles", mg_max);
  mg->add_option("--seed", mg_seed);
  mg->add_option("--output,-o", mg_output, "JSON path (default stdout)");

  // gen
  std::string gen_matrix, gen_output, gen_rhs;
  auto *gen = app.add_subcommand("gen", "Export a generated matrix to Matrix Market");
  gen->add_option("--matrix", gen_matrix, "convdiff:/diag:/clustered: spec")->required();
  gen->add_option("--output,-o", gen_output)->required();
  gen->add_option("--rhs-output", gen_rhs, "also write the right-hand side");

  std::vector<std::string> argv_rev(args.rbegin(), args.rend());
  try
  {
    app.parse(argv_rev);
  }
  catch (CLI::CallForHelp const &)
  {
    out << app.help();
    return exit_ok;
  }
  catch (CLI::CallForVersion const &)
  {
    out << CDEFL_VERSION << '\n';
    return exit_ok;
  }
  catch (CLI::ParseError const &e)
  {
    err << "error: " << e.what() << '\n';
    return exit_input_error;
  }

  try
  {
    if (*run)
    {
      RunConfig cfg;
      if (!config_path.empty())
      {
        std::ifstream f(config_path);
        if (!f)
          throw StageError("config", "cannot open " + config_path, true);
        cfg = stage("config", [&] { return run_config_from_json(nlohmann::json::parse(f)); });
      }
      for (auto const &[opt, copy] : overrides)
        if (opt->count() > 0)
          copy(cfg);
      RunOutcome const outcome = run_pipeline(cfg);
      stage("report", [&] { write_json(outcome.report, cfg.output, out); });
      return outcome.converged ? exit_ok : exit_not_converged;
    }

    if (*spectrum)
    {
      LoadedMatrix const loaded = stage("load", [&] { return load_matrix(sp_matrix); });
      DenseMatrix dense = stage("precond", [&]() -> DenseMatrix {
        if (sp_precond == "ilu0")
        {
          Ilu0Factor const F = ilu0(loaded.A, true);
          return to_dense(apply_ilu0(F, loaded.A));
        }
        if (sp_precond != "none")
          throw std::invalid_argument("precond must be none or ilu0");
        return to_dense(loaded.A);
      });
      if (dense.rows() > sp_cap)
        throw StageError("eig",
                         "N = " + std::to_string(dense.rows()) + " exceeds the dense cap of " +
                             std::to_string(sp_cap) +
                             "; use a submatrix or raise --cap if memory allows",
                         true);
      SpectrumReport spec = stage("eig", [&] { return dense_eig(dense, false, sp_cap); });
      stage("report", [&] { write_eigenvalues_csv(sp_output, spec.eigenvalues); });
      nlohmann::json summary = {{"n", dense.rows()}, {"eigenvalues", spec.eigenvalues.size()},
                                {"csv", sp_output}};
      if (!sp_contour.empty())
      {
        ContourSpec const c = stage("config", [&] { return parse_contour(sp_contour, 2); });
        count_inside(spec, c);
        summary["contour"] = contour_json(c);
        summary["inside"] = spec.count_inside;
        summary["near_boundary"] = spec.near_boundary;
      }
      out << summary.dump(2) << '\n';
      return exit_ok;
    }

    if (*bench)
    {
      std::ifstream f(bench_manifest);
      if (!f)
        throw StageError("config", "cannot open " + bench_manifest, true);
      nlohmann::json const manifest =
          stage("config", [&] { return nlohmann::json::parse(f); });
      std::ostringstream table;
      nlohmann::json result = stage("config", [&] { return run_bench(manifest, table); });
      if (bench_table.empty())
        out << table.str();
      else
      {
        std::ofstream t(bench_table);
        t << table.str();
      }
      if (!bench_output.empty())
        write_json(result, bench_output, out);
      return exit_ok;
    }

    if (*mg)
    {
      ConvDiffSpec spec = manufactured_spec(mg_n, mg_re, mg_upwind);
      CycleSpec cs;
      GridHierarchy H = stage("setup", [&] {
        cs.kind = parse_cycle_kind(mg_cycle_kind);
        cs.smoother = parse_smoother(mg_smoother);
        cs.pre_smooth = mg_pre;
        cs.post_smooth = mg_post;
        cs.jacobi_weight = mg_omega;
        cs.krylov_steps = mg_krylov;
        int levels = mg_levels;
        if (levels <= 0)
        {
          levels = 1;
          for (int n = mg_n; n > 3 && n % 2 == 1; n = (n - 1) / 2)
            ++levels;
        }
        std::optional<LevelDeflationSetup> defl;
        if (cs.smoother == SmootherKind::deflated_krylov)
        {
          LevelDeflationSetup s;
          s.seed = mg_seed;
          defl = s;
        }
        return build_hierarchy(spec, levels, defl);
      });
      Vector const b = convdiff_matrix(spec).second;
      auto [x, rep] = stage("solve", [&] { return mg_solve(H, cs, b, mg_tol, mg_max); });
      Vector const exact = grid_sample(mg_n, manufactured_solution);
      nlohmann::json j = {{"provenance", {{"version", CDEFL_VERSION}}},
                          {"n", mg_n},
                          {"re", mg_re},
                          {"upwind", mg_upwind},
                          {"levels", H.sizes()},
                          {"cycle", mg_cycle_kind},
                          {"smoother", mg_smoother},
                          {"deflated_levels", H.deflated_levels()},
                          {"report", to_json(rep)},
                          {"max_error_vs_exact", (x - exact).cwiseAbs().maxCoeff()}};
      stage("report", [&] { write_json(j, mg_output, out); });
      return rep.solve.converged ? exit_ok : exit_not_converged;
    }

    if (*gen)
    {
      LoadedMatrix const loaded = stage("load", [&] { return load_matrix(gen_matrix); });
      stage("report", [&] {
        mm_write(std::filesystem::path(gen_output), loaded.A);
        if (!gen_rhs.empty())
          mm_write_vector(gen_rhs, loaded.rhs ? *loaded.rhs
                                              : matvec(loaded.A, Vector::Ones(loaded.A.rows())));
      });
      out << nlohmann::json{{"n", loaded.A.rows()}, {"nnz", loaded.A.nonZeros()},
                            {"output", gen_output}}
                 .dump(2)
          << '\n';
      return exit_ok;
    }
  }
  catch (StageError const &e)
  {
    return report_error(e, e.input_error(), err);
  }
  catch (std::exception const &e)
  {
    return report_error(e, false, err);
  }
  return exit_internal_error;
}

} // namespace cdefl::cli
