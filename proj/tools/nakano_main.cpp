#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "nakano/constructions.hpp"
#include "nakano/io.hpp"
#include "nakano/serialize.hpp"
#include "nakano/solver.hpp"

namespace nakano::cli {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Config plumbing

Json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

// Applies one --set override of the form dotted.path=value; the value is
// parsed as JSON when possible and kept as a string otherwise.
void apply_override(Json& config, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--set expects key=value, got '" + spec + "'");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::exception&) {
    value = raw;
  }

  Json* node = &config;
  std::size_t begin = 0;
  std::vector<std::string> parts;
  while (begin <= path.size()) {
    const auto dot = path.find('.', begin);
    parts.push_back(path.substr(begin, dot == std::string::npos ? dot : dot - begin));
    if (dot == std::string::npos) break;
    begin = dot + 1;
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const std::string& key = parts[i];
    if (node->is_array()) {
      const std::size_t idx = std::stoul(key);
      if (idx >= node->size()) throw ConfigError("--set index out of range in '" + path + "'");
      node = &(*node)[idx];
    } else {
      node = &(*node)[key];
    }
  }
  if (node->is_array()) {
    const std::size_t idx = std::stoul(parts.back());
    if (idx >= node->size()) throw ConfigError("--set index out of range in '" + path + "'");
    (*node)[idx] = value;
  } else {
    (*node)[parts.back()] = value;
  }
}

GridSpec grid_from(const Json& config) {
  if (!config.contains("grid")) throw ConfigError("config lacks a 'grid' object");
  const Json& g = config["grid"];
  for (const char* key : {"mins", "maxs", "points"})
    if (!g.contains(key)) throw ConfigError(std::string("grid lacks '") + key + "'");
  return GridSpec(g["mins"].get<std::vector<double>>(),
                  g["maxs"].get<std::vector<double>>(),
                  g["points"].get<std::vector<std::size_t>>(),
                  g.value("rank", std::size_t{1}));
}

double tolerance(const Json& config, const char* name, double fallback) {
  if (config.contains("tolerances") && config["tolerances"].contains(name))
    return config["tolerances"][name].get<double>();
  return fallback;
}

const Json& field_spec(const Json& config, const char* name) {
  if (!config.contains("fields") || !config["fields"].contains(name))
    throw ConfigError(std::string("config lacks fields.") + name);
  return config["fields"][name];
}

std::vector<std::vector<ExprPtr>> parse_entries(const Json& spec) {
  std::vector<std::vector<ExprPtr>> entries;
  for (const auto& row : spec) {
    entries.emplace_back();
    for (const auto& cell : row) entries.back().push_back(parse(cell.get<std::string>()));
  }
  return entries;
}

ScalarField scalar_field_from(const Json& spec, const GridSpec& grid,
                              const SampleVars& vars = {}) {
  if (spec.contains("expr"))
    return sample_scalar(*parse(spec["expr"].get<std::string>()), grid, vars);
  if (spec.contains("file")) {
    ScalarField f = read_scalar_field(spec["file"].get<std::string>());
    if (!(f.grid() == grid)) throw ConfigError("field file grid does not match config grid");
    return f;
  }
  throw ConfigError("scalar field spec needs 'expr' or 'file'");
}

// Metric from fields.g (entries/file), or fields.phi as e^{-phi} at rank 1.
MatrixField metric_from(const Json& config, const GridSpec& grid,
                        const SampleVars& vars = {}) {
  if (config.contains("fields") && config["fields"].contains("g")) {
    const Json& spec = config["fields"]["g"];
    if (spec.contains("entries")) {
      // tolerances.tau_sym / tau_pd override the scale-aware defaults; in
      // particular strongly decaying metrics (entries below ~1e-12) need an
      // explicit tau_pd, or the rank-1 fields.phi shorthand.
      std::optional<double> tau_sym, tau_pd;
      if (config.contains("tolerances")) {
        if (config["tolerances"].contains("tau_sym"))
          tau_sym = config["tolerances"]["tau_sym"].get<double>();
        if (config["tolerances"].contains("tau_pd"))
          tau_pd = config["tolerances"]["tau_pd"].get<double>();
      }
      return sample_metric(parse_entries(spec["entries"]), grid, tau_sym, tau_pd, vars);
    }
    if (spec.contains("file")) {
      MatrixField g = read_matrix_field(spec["file"].get<std::string>());
      if (!(g.grid() == grid)) throw ConfigError("metric file grid does not match config grid");
      return g;
    }
    throw ConfigError("fields.g needs 'entries' or 'file'");
  }
  if (config.contains("fields") && config["fields"].contains("phi")) {
    if (grid.rank() != 1) throw ConfigError("fields.phi shorthand requires rank 1");
    return metric_from_weight(scalar_field_from(config["fields"]["phi"], grid, vars));
  }
  throw ConfigError("config lacks fields.g (or rank-1 fields.phi)");
}

FalsifierConfig falsifier_from(const Json& config, const GridSpec& grid) {
  FalsifierConfig cfg;
  if (!config.contains("falsifier"))
    throw ConfigError("config lacks a 'falsifier' object");
  const Json& f = config["falsifier"];
  if (!f.contains("radius")) throw ConfigError("falsifier lacks 'radius'");
  cfg.radius = f["radius"].get<double>();
  if (f.contains("center")) cfg.center = f["center"].get<std::vector<double>>();
  if (f.contains("xi")) {
    const auto rows = f["xi"].get<std::vector<std::vector<double>>>();
    if (rows.size() != grid.dim()) throw ConfigError("falsifier.xi needs n rows");
    cfg.xi = Eigen::VectorXd(static_cast<Eigen::Index>(grid.dim() * grid.rank()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != grid.rank()) throw ConfigError("falsifier.xi rows need r entries");
      for (std::size_t c = 0; c < grid.rank(); ++c)
        cfg.xi(static_cast<Eigen::Index>(i * grid.rank() + c)) = rows[i][c];
    }
  }
  if (f.contains("s_schedule")) cfg.s_schedule = f["s_schedule"].get<std::vector<double>>();
  if (f.contains("margin")) cfg.margin = f["margin"].get<double>();
  return cfg;
}

OneForm one_form_from(const Json& config, const char* name, const GridSpec& grid) {
  const Json& spec = field_spec(config, name);
  if (spec.contains("components")) {
    const Json& comps = spec["components"];
    if (comps.size() != grid.dim()) throw ConfigError("one-form needs n component rows");
    std::vector<SectionField> sections;
    for (const auto& row : comps) {
      if (row.size() != grid.rank()) throw ConfigError("one-form rows need r expressions");
      std::vector<double> values(grid.node_count() * grid.rank());
      std::vector<ScalarField> cols;
      for (const auto& cell : row)
        cols.push_back(sample_scalar(*parse(cell.get<std::string>()), grid));
      for (std::size_t flat = 0; flat < grid.node_count(); ++flat)
        for (std::size_t c = 0; c < grid.rank(); ++c)
          values[flat * grid.rank() + c] = cols[c][flat];
      sections.emplace_back(grid, std::move(values));
    }
    return OneForm(grid, std::move(sections));
  }
  if (spec.contains("potential")) {
    const Json& pot = spec["potential"];
    if (pot.size() != grid.rank()) throw ConfigError("potential needs r expressions");
    std::vector<double> values(grid.node_count() * grid.rank());
    std::vector<ScalarField> cols;
    for (const auto& cell : pot)
      cols.push_back(sample_scalar(*parse(cell.get<std::string>()), grid));
    for (std::size_t flat = 0; flat < grid.node_count(); ++flat)
      for (std::size_t c = 0; c < grid.rank(); ++c)
        values[flat * grid.rank() + c] = cols[c][flat];
    return d0(SectionField(grid, std::move(values)));
  }
  if (spec.contains("seed")) {
    Json wrapped = config;
    wrapped["falsifier"] = spec["seed"];
    return seed_form(falsifier_from(wrapped, grid), grid);
  }
  if (spec.contains("file")) {
    OneForm f = read_one_form(spec["file"].get<std::string>());
    if (!(f.grid() == grid)) throw ConfigError("one-form file grid does not match config grid");
    return f;
  }
  throw ConfigError(std::string("fields.") + name +
                    " needs 'components', 'potential', 'seed' or 'file'");
}

// ---------------------------------------------------------------------------
// Commands

struct Outcome {
  Json result;
  int exit_code = 0;
};

Outcome run_curvature(const Json& config, int threads) {
  const GridSpec grid = grid_from(config);
  MatrixField g = metric_from(config, grid);
  CurvatureTensor theta = curvature_tensor(g, threads);
  Json result;
  result["max_abs_block_entry"] = json_number(theta.max_abs());
  if (config.contains("dump")) {
    // raw blocks in the field-file layout, kind "curvature"
    const std::string path = config["dump"].get<std::string>();
    std::ofstream probe(path);
    if (!probe) throw IoError("cannot open '" + path + "' for writing");
    probe.close();
    Json header;
    header["kind"] = "curvature";
    header["n"] = grid.dim();
    header["r"] = grid.rank();
    header["mins"] = grid.mins();
    header["maxs"] = grid.maxs();
    header["points"] = grid.points();
    header["dtype"] = "f64";
    header["order"] = "row-major, last axis fastest, matrix entries row-major innermost";
    std::ofstream out(path, std::ios::binary);
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(theta.blocks().data()),
              static_cast<std::streamsize>(theta.blocks().size() * sizeof(double)));
    result["dump"] = path;
  }
  return {std::move(result), 0};
}

Outcome run_check_nakano(const Json& config, int threads) {
  const GridSpec grid = grid_from(config);
  MatrixField g = metric_from(config, grid);
  PositivityReport rep = nakano_verdict(g, tolerance(config, "tau", 1e-7), threads);
  return {to_json(rep), rep.verdict == Verdict::Indefinite ? 1 : 0};
}

Outcome run_check_convex(const Json& config, int) {
  const GridSpec grid = grid_from(config);
  ScalarField phi = scalar_field_from(field_spec(config, "phi"), grid);
  PositivityReport rep = convexity_verdict(phi, tolerance(config, "tau", 1e-7));
  return {to_json(rep), rep.verdict == Verdict::Indefinite ? 1 : 0};
}

Outcome run_solve_d(const Json& config, int) {
  const GridSpec grid = grid_from(config);
  OneForm f = one_form_from(config, "f", grid);
  QuadratureRule rule(grid);
  const double tau_closed = tolerance(config, "tau_closed", 1e-8);

  MatrixField g = config.contains("fields") && (config["fields"].contains("g") ||
                                                config["fields"].contains("phi"))
                      ? metric_from(config, grid)
                      : MatrixField::identity(grid);
  ScalarField psi = config.contains("fields") && config["fields"].contains("psi")
                        ? scalar_field_from(config["fields"]["psi"], grid)
                        : ScalarField(grid, std::vector<double>(grid.node_count(), 0.0));

  Json result;
  result["closedness_residual"] = json_number(closedness_residual(f));
  SectionField u = minimal_solution(solve_potential(f, tau_closed), g, psi, rule);

  OneForm du = d0(u);
  double reproduce = 0.0;
  for (std::size_t flat = 0; flat < grid.node_count(); ++flat) {
    if (grid.is_boundary(flat)) continue;
    for (std::size_t i = 0; i < grid.dim(); ++i)
      reproduce = std::max(reproduce, (du.component(i).at(flat) - f.component(i).at(flat))
                                          .cwiseAbs()
                                          .maxCoeff());
  }
  result["reproduce_residual_interior"] = json_number(reproduce);
  result["solution_max_abs"] = json_number(u.max_abs());
  result["solution_weighted_norm_sq"] = json_number(inner_sections(u, u, g, psi, rule));
  if (config.contains("dump")) {
    write_field(config["dump"].get<std::string>(), u);
    result["dump"] = config["dump"];
  }
  return {std::move(result), 0};
}

Outcome run_check_estimate(const Json& config, int) {
  const GridSpec grid = grid_from(config);
  MatrixField g = metric_from(config, grid);
  ScalarField psi = scalar_field_from(field_spec(config, "psi"), grid);
  OneForm f = one_form_from(config, "f", grid);
  QuadratureRule rule(grid);
  EstimateOptions opts;
  opts.eps_rep = tolerance(config, "eps_rep", 1e-6);
  opts.tau_conv = tolerance(config, "tau_conv", 1e-10);
  opts.tau_closed = tolerance(config, "tau_closed", 1e-8);
  EstimateReport rep = check_optimal_estimate(g, psi, f, rule, opts);
  return {to_json(rep), rep.holds ? 0 : 1};
}

Outcome run_bochner(const Json& config, int) {
  const GridSpec grid = grid_from(config);
  MatrixField g = metric_from(config, grid);
  OneForm alpha = one_form_from(config, "alpha", grid);
  BochnerRecord rec = bochner_residual(alpha, g, QuadratureRule(grid));
  return {to_json(rec), 0};
}

Outcome run_falsify(const Json& config, int, const std::string& csv_override) {
  const GridSpec grid = grid_from(config);
  MatrixField g = metric_from(config, grid);
  FalsifierConfig cfg = falsifier_from(config, grid);
  FalsifierTrace trace =
      falsify_scan(g, cfg, QuadratureRule(grid), tolerance(config, "tau_viol", 1e-6));
  std::string csv_path = csv_override;
  if (csv_path.empty() && config.contains("csv")) csv_path = config["csv"].get<std::string>();
  if (!csv_path.empty()) {
    std::ofstream out(csv_path);
    if (!out) throw IoError("cannot open '" + csv_path + "' for writing");
    out << trace_to_csv(trace);
  }
  Json result = to_json(trace);
  if (!csv_path.empty()) result["csv"] = csv_path;
  return {std::move(result), trace.violated ? 1 : 0};
}

Outcome run_prekopa(const Json& config, int) {
  const GridSpec joint = grid_from(config);
  if (!config.contains("prekopa") || !config["prekopa"].contains("x_dims"))
    throw ConfigError("config lacks prekopa.x_dims");
  const std::size_t nx = config["prekopa"]["x_dims"].get<std::size_t>();
  if (nx == 0 || nx >= joint.dim())
    throw ConfigError("prekopa.x_dims must be in [1, n_total)");
  SampleVars vars;
  vars.x_dims = nx;

  MatrixField gt = metric_from(config, joint, vars);
  GridSpec ygrid(std::vector<double>(joint.mins().begin() + nx, joint.mins().end()),
                 std::vector<double>(joint.maxs().begin() + nx, joint.maxs().end()),
                 std::vector<std::size_t>(joint.points().begin() + nx, joint.points().end()),
                 joint.rank());
  QuadratureRule rule_y(ygrid);
  PrekopaRecord rec = prekopa_verify(gt, rule_y, tolerance(config, "tau", 1e-7),
                                     tolerance(config, "truncation_rel", 1e-10));
  Json result = to_json(rec);
  if (config.contains("dump")) {
    MatrixField g = prekopa_pushforward(gt, rule_y,
                                        tolerance(config, "truncation_rel", 1e-10));
    write_field(config["dump"].get<std::string>(), g);
    result["dump"] = config["dump"];
  }
  const bool negative = rec.applicable && !rec.consistent;
  return {std::move(result), negative ? 1 : 0};
}

// Dry-run validation: structural diagnostics only, no numerics.
Json validate_config(const std::string& path) {
  Json diagnostics = Json::array();
  auto note = [&](const std::string& msg) { diagnostics.push_back(msg); };

  Json config;
  try {
    config = load_config(path);
  } catch (const Error& e) {
    note(e.what());
    return diagnostics;
  }

  static const std::vector<std::string> commands = {
      "curvature",      "check-nakano", "check-convex", "solve-d",
      "check-estimate", "bochner",      "falsify",      "prekopa"};
  const std::string command = config.value("command", "");
  if (command.empty())
    note("config lacks 'command'");
  else if (std::find(commands.begin(), commands.end(), command) == commands.end())
    note("unknown command '" + command + "'");

  std::optional<GridSpec> grid;
  try {
    grid = grid_from(config);
  } catch (const Error& e) {
    note(e.what());
  } catch (const Json::exception& e) {
    note(std::string("grid: ") + e.what());
  }

  if (config.contains("fields")) {
    for (const auto& [name, spec] : config["fields"].items()) {
      if (spec.contains("expr")) {
        try {
          parse(spec["expr"].get<std::string>());
        } catch (const Error& e) {
          note("fields." + name + ": " + e.what());
        }
      }
      if (spec.contains("entries")) {
        const auto& entries = spec["entries"];
        const std::size_t r = entries.size();
        for (const auto& row : entries)
          if (row.size() != r) note("fields." + name + ": entry grid is not square");
        if (grid && r != grid->rank())
          note("fields." + name + ": entry grid size does not match grid rank");
        for (const auto& row : entries)
          for (const auto& cell : row) {
            try {
              parse(cell.get<std::string>());
            } catch (const Error& e) {
              note("fields." + name + ": " + e.what());
            }
          }
      }
      if (spec.contains("components")) {
        for (const auto& row : spec["components"])
          for (const auto& cell : row) {
            try {
              parse(cell.get<std::string>());
            } catch (const Error& e) {
              note("fields." + name + ": " + e.what());
            }
          }
      }
      if (spec.contains("file")) {
        const std::string file = spec["file"].get<std::string>();
        if (!std::filesystem::exists(file))
          note("fields." + name + ": file not found: " + file);
      }
    }
  }
  return diagnostics;
}

int main(int argc, char** argv) {
  CLI::App app{"numerical verification of curvature positivity and weighted L2 "
               "estimates for the d-equation on flat bundles"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  std::string csv_path;
  std::vector<std::string> overrides;
  int threads = 1;

  const std::vector<std::string> commands = {"curvature",      "check-nakano",
                                             "check-convex",   "solve-d",
                                             "check-estimate", "bochner",
                                             "falsify",        "prekopa"};
  std::vector<CLI::App*> subs;
  for (const auto& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "job config (JSON)")->required();
    sub->add_option("--set", overrides, "dotted-path override, key=value");
    sub->add_option("--threads", threads, "worker cap; 1 is fully deterministic");
    sub->add_option("--out", out_path, "report path (overrides config.output)");
    if (name == "falsify")
      sub->add_option("--csv", csv_path, "trace CSV path (overrides config.csv)");
    subs.push_back(sub);
  }
  CLI::App* validate = app.add_subcommand("validate", "dry-run config validation");
  validate->add_option("--config", config_path, "job config (JSON)")->required();

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  if (command == "validate") {
    Json report;
    report["schema"] = 1;
    report["command"] = "validate";
    report["diagnostics"] = validate_config(config_path);
    std::cout << report.dump(2) << std::endl;
    return 0;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Json report;
  report["schema"] = 1;
  report["command"] = command;
  int code = 0;

  try {
    Json config = load_config(config_path);
    for (const auto& ov : overrides) apply_override(config, ov);
    if (config.contains("command") && config["command"] != command)
      throw ConfigError("config command '" + config["command"].get<std::string>() +
                        "' does not match subcommand '" + command + "'");
    if (threads < 1) throw ConfigError("--threads must be at least 1");
    report["config"] = config;
    if (config.contains("output") && out_path.empty())
      out_path = config["output"].get<std::string>();

    Outcome outcome;
    if (command == "curvature")
      outcome = run_curvature(config, threads);
    else if (command == "check-nakano")
      outcome = run_check_nakano(config, threads);
    else if (command == "check-convex")
      outcome = run_check_convex(config, threads);
    else if (command == "solve-d")
      outcome = run_solve_d(config, threads);
    else if (command == "check-estimate")
      outcome = run_check_estimate(config, threads);
    else if (command == "bochner")
      outcome = run_bochner(config, threads);
    else if (command == "falsify")
      outcome = run_falsify(config, threads, csv_path);
    else
      outcome = run_prekopa(config, threads);
    report["result"] = std::move(outcome.result);
    code = outcome.exit_code;
  } catch (const Error& e) {
    report["error"] = Json{{"code", e.code()}, {"message", e.what()}};
    code = 2;
  } catch (const Json::exception& e) {
    report["error"] = Json{{"code", "ConfigError"}, {"message", e.what()}};
    code = 2;
  } catch (const std::exception& e) {
    report["error"] = Json{{"code", "InternalError"}, {"message", e.what()}};
    code = 2;
  }

  const auto t1 = std::chrono::steady_clock::now();
  report["wall_time_s"] = std::chrono::duration<double>(t1 - t0).count();

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot write report to '" << out_path << "'\n";
      return 2;
    }
    out << report.dump(2) << '\n';
  } else {
    std::cout << report.dump(2) << std::endl;
  }
  return code;
}

}  // namespace nakano::cli

int main(int argc, char** argv) { return nakano::cli::main(argc, argv); }
