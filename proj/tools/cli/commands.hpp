#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cli/config.hpp"

namespace cilp::cli {

enum ExitCode : int { kOk = 0, kOther = 1, kConfigError = 2, kModelError = 3, kSolverError = 4 };

/// Maps the exception in flight to an exit code and a message.
inline std::pair<int, std::string> classify(std::exception_ptr ep) {
  try {
    std::rethrow_exception(ep);
  } catch (const ConfigError& e) {
    return {kConfigError, e.what()};
  } catch (const PreconditionError& e) {
    return {kConfigError, e.what()};
  } catch (const EnvelopeRequired& e) {
    return {kConfigError, e.what()};
  } catch (const TruncationTooSmall& e) {
    return {kConfigError, e.what()};
  } catch (const ModelError& e) {
    return {kModelError, e.what()};
  } catch (const LpFailure& e) {
    return {kSolverError, e.what()};
  } catch (const std::exception& e) {
    return {kOther, e.what()};
  } catch (...) {
    return {kOther, "unknown error"};
  }
}

/// Command-line settings that take precedence over the config file.
struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::size_t> workers;
  std::optional<std::uint64_t> seed;
  bool relaxed = false;
  std::optional<double> tolerance;
  bool no_timing = false;
};

inline void apply(RunConfig& cfg, const Overrides& o) {
  if (o.out_dir) cfg.out_dir = *o.out_dir;
  if (o.workers) cfg.workers = *o.workers;
  if (o.seed) cfg.seed = *o.seed;
  if (o.relaxed) cfg.relaxed = true;
  if (o.tolerance) cfg.tolerance = *o.tolerance;
  if (o.no_timing) cfg.timing = false;
  if (!cfg.workers) cfg.workers = default_workers();
}

namespace detail {

inline json number_or_null(std::optional<double> v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

inline json lp_json(const LpDiagnostics& d) {
  return {{"status", to_string(d.status)}, {"iterations", d.iterations}, {"max_residual", number_or_null(d.max_residual)}};
}

inline json measure_json(const BoundedMeasure<Int>& m) {
  json rows = json::array();
  for (const auto& [x, v] : m.entries()) rows.push_back(json::array({x, v}));
  return rows;
}

inline json map_json(const std::map<Int, double>& m) {
  json rows = json::array();
  for (const auto& [x, v] : m) rows.push_back(json::array({x, v}));
  return rows;
}

inline std::string csv_real(std::optional<double> v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *v);
  return buf;
}

inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

inline SolveOptions solve_options(const RunConfig& cfg) {
  RevisedSimplex::Options so;
  so.tol.feasibility = cfg.tolerance;
  SolveOptions opt;
  opt.solver = std::make_shared<RevisedSimplex>(so);
  opt.relaxed = cfg.relaxed;
  opt.workers = cfg.workers.value_or(1);
  opt.require_two_sided = cfg.require_two_sided;
  opt.experimental_upper = cfg.experimental_upper;
  return opt;
}

inline json header(const RunConfig& cfg, const BuiltModel& built, const std::string& command) {
  return {{"schema_version", kSchemaVersion},
          {"command", command},
          {"setting", cfg.setting},
          {"family", cfg.family},
          {"c", built.c},
          {"c_closed_form", built.c_closed_form},
          {"relaxed", cfg.relaxed},
          {"workers", cfg.workers.value_or(1)}};
}

struct Row {
  std::string objective;
  BoundResult result;
  int code = kOk;
};

inline Row bound_row(const RunConfig& cfg, const BuiltModel& built, const Objective<Int>& f, std::size_t index,
                     Int r, const SolveOptions& opt) {
  Row row;
  row.objective = f.name;
  try {
    const auto trunc = build_truncation(built.model, r);
    if (cfg.lp_dump) {
      for (Sense s : {Sense::minimize, Sense::maximize}) {
        std::ostringstream os;
        write_lp_dump(os, cilp::detail::assemble(built.model, trunc, f, s, opt));
        write_file(std::filesystem::path(cfg.out_dir) / "lp" /
                       ("obj" + std::to_string(index) + "_r" + std::to_string(r) + "_" + to_string(s) + ".lp"),
                   os.str());
      }
    }
    row.result = bound_value(built.model, trunc, f, opt);
  } catch (...) {
    auto [code, msg] = classify(std::current_exception());
    row.result = BoundResult{};
    row.result.r = r;
    row.result.error = msg;
    row.code = code;
  }
  return row;
}

inline json row_json(const Row& row, bool timing) {
  const BoundResult& b = row.result;
  json j = {{"objective", row.objective}, {"r", b.r}};
  if (!b.ok()) {
    j["error"] = b.error;
    return j;
  }
  j["window_size"] = b.window_size;
  j["l_raw"] = number_or_null(b.l_raw);
  j["u_raw"] = number_or_null(b.u_raw);
  j["l_corrected"] = number_or_null(b.l_corrected);
  j["u_corrected"] = number_or_null(b.u_corrected);
  j["correction"] = number_or_null(b.correction);
  j["one_sided"] = b.one_sided;
  j["gap"] = number_or_null(b.gap);
  j["midpoint"] = number_or_null(b.midpoint);
  j["min_lp"] = lp_json(b.min_lp);
  j["max_lp"] = lp_json(b.max_lp);
  if (timing) j["solve_ms"] = b.solve_ms;
  return j;
}

inline std::string rows_csv(const std::vector<Row>& rows) {
  std::string s = "objective,r,window_size,l_raw,u_raw,l_corrected,u_corrected,gap,midpoint,one_sided,error\n";
  for (const auto& row : rows) {
    const BoundResult& b = row.result;
    s += csv_text(row.objective) + ',' + std::to_string(b.r) + ',';
    s += b.ok() ? std::to_string(b.window_size) : "";
    for (const auto& v : {b.l_raw, b.u_raw, b.l_corrected, b.u_corrected, b.gap, b.midpoint}) s += ',' + csv_real(v);
    s += ',';
    s += b.ok() ? (b.one_sided ? "true" : "false") : "";
    s += ',' + csv_text(b.error) + '\n';
  }
  return s;
}

inline std::vector<Objective<Int>> objectives(const RunConfig& cfg, const BuiltModel& built) {
  if (cfg.objectives.empty()) fail("objectives", "at least one objective is required");
  std::vector<Objective<Int>> out;
  for (std::size_t i = 0; i < cfg.objectives.size(); ++i)
    out.push_back(build_objective(cfg.objectives[i], built, cfg.w_degree, "objectives[" + std::to_string(i) + "]"));
  return out;
}

inline int worst(int a, int b) { return a == kOk ? b : a; }

}  // namespace detail

/// Checks the model assumptions on X_horizon and writes validate.json.
inline int cmd_validate(const RunConfig& cfg, std::ostream& log) {
  const BuiltModel built = build_model(cfg);
  for (std::size_t i = 0; i < cfg.objectives.size(); ++i)
    build_objective(cfg.objectives[i], built, cfg.w_degree, "objectives[" + std::to_string(i) + "]");
  const auto report = validate_assumptions(built.model, cfg.validate_horizon);
  json doc = detail::header(cfg, built, "validate");
  doc["horizon"] = report.horizon;
  doc["window_size"] = report.window_size;
  doc["ok"] = report.ok();
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name}, {"status", to_string(c.status)}, {"detail", c.detail}, {"witnesses", c.witnesses}});
  doc["checks"] = checks;
  const auto path = std::filesystem::path(cfg.out_dir) / "validate.json";
  detail::write_file(path, doc.dump(2) + "\n");
  for (const auto& c : report.checks)
    log << c.name << ": " << to_string(c.status) << (c.detail.empty() ? "" : " (" + c.detail + ")") << "\n";
  log << "wrote " << path.string() << "\n";
  return report.ok() ? kOk : kModelError;
}

/// Scheme A at a single r (config "r", else the last schedule entry).
inline int cmd_bound(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.scheme_a()) detail::fail("scheme", "the bound command runs Scheme A; set scheme to \"A\" or \"both\"");
  const Int r = cfg.r ? *cfg.r : (cfg.schedule.empty() ? 0 : cfg.schedule.back());
  if (r < 1) detail::fail("r", "required (or a non-empty schedule)");
  const BuiltModel built = build_model(cfg);
  const auto objs = detail::objectives(cfg, built);
  const SolveOptions opt = detail::solve_options(cfg);
  std::vector<detail::Row> rows(objs.size());
  SolveOptions inner = opt;
  inner.workers = 1;
  parallel_for(objs.size(), opt.workers, [&](std::size_t i) { rows[i] = detail::bound_row(cfg, built, objs[i], i, r, inner); });

  json doc = detail::header(cfg, built, "bound");
  json records = json::array();
  int code = kOk;
  for (const auto& row : rows) {
    records.push_back(detail::row_json(row, cfg.timing));
    code = detail::worst(code, row.code);
    if (!row.result.ok()) log << row.objective << " at r=" << r << ": " << row.result.error << "\n";
  }
  doc["records"] = records;
  const auto dir = std::filesystem::path(cfg.out_dir);
  detail::write_file(dir / "bound.json", doc.dump(2) + "\n");
  detail::write_file(dir / "bound.csv", detail::rows_csv(rows));
  log << "wrote " << (dir / "bound.json").string() << "\n";
  return code;
}

/// Scheme A over the whole schedule; rows are independent and a failed row
/// does not stop the others.
inline int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.scheme_a()) detail::fail("scheme", "the sweep command runs Scheme A; set scheme to \"A\" or \"both\"");
  if (cfg.schedule.empty()) detail::fail("schedule", "required for a sweep");
  const BuiltModel built = build_model(cfg);
  const auto objs = detail::objectives(cfg, built);
  const SolveOptions opt = detail::solve_options(cfg);
  SolveOptions inner = opt;
  inner.workers = 1;
  const std::size_t per = cfg.schedule.size();
  std::vector<detail::Row> rows(objs.size() * per);
  parallel_for(rows.size(), opt.workers, [&](std::size_t k) {
    rows[k] = detail::bound_row(cfg, built, objs[k / per], k / per, cfg.schedule[k % per], inner);
  });

  json doc = detail::header(cfg, built, "sweep");
  doc["schedule"] = cfg.schedule;
  json records = json::array();
  int code = kOk;
  for (const auto& row : rows) {
    records.push_back(detail::row_json(row, cfg.timing));
    code = detail::worst(code, row.code);
    if (!row.result.ok()) log << row.objective << " at r=" << row.result.r << ": " << row.result.error << "\n";
  }
  doc["records"] = records;
  const auto dir = std::filesystem::path(cfg.out_dir);
  detail::write_file(dir / "sweep.json", doc.dump(2) + "\n");
  detail::write_file(dir / "sweep.csv", detail::rows_csv(rows));
  log << "wrote " << (dir / "sweep.json").string() << " and sweep.csv\n";
  return code;
}

/// Scheme B: lower bounds on the minimal point and, optionally, its image,
/// for every r of the schedule.
inline int cmd_minimal(const RunConfig& cfg, std::ostream& log) {
  if (!cfg.scheme_b()) detail::fail("scheme", "the minimal command runs Scheme B; set scheme to \"B\" or \"both\"");
  if (!cfg.exit_setting() && !cfg.unique_stationary)
    detail::fail("model.unique_stationary",
                 "refusing to run: Scheme B needs a feasible set with a minimal point. Exit settings always have one "
                 "(the occupation measure); for a stationary setting the minimal point exists when the stationary "
                 "distribution is unique, which the model owner must assert with \"unique_stationary\": true");
  std::vector<Int> schedule = cfg.schedule;
  if (schedule.empty() && cfg.r) schedule = {*cfg.r};
  if (schedule.empty()) detail::fail("schedule", "required (or r)");
  const BuiltModel built = build_model(cfg);
  const SolveOptions opt = detail::solve_options(cfg);

  json doc = detail::header(cfg, built, "minimal");
  doc["schedule"] = schedule;
  json runs = json::array();
  std::string csv = "r,window_size,captured_mass,u_indicator,gamma,image_mass_gap,error\n";
  int code = kOk;
  for (Int r : schedule) {
    json run = {{"r", r}};
    try {
      const auto trunc = build_truncation(built.model, r);
      const auto approx = minimal_point_lower(built.model, trunc, opt);
      run["window_size"] = trunc.size();
      run["captured_mass"] = approx.captured_mass;
      run["u_indicator"] = approx.u_indicator;
      run["gamma"] = approx.gamma;
      run["lower"] = detail::measure_json(approx.lower);
      if (approx.upper) run["upper_experimental"] = detail::measure_json(*approx.upper);
      std::optional<double> image_gap;
      if (cfg.image) {
        const std::vector<Int> ys = cfg.image_outputs ? *cfg.image_outputs : reachable_outputs(built.model, trunc);
        const auto image = image_lower(built.model, trunc, std::span<const Int>(ys), opt, &approx);
        image_gap = image.mass_gap;
        run["image"] = {{"outputs", image.window},
                        {"lower", detail::measure_json(image.lower)},
                        {"mass_gap", image.mass_gap},
                        {"lower_point_gap", detail::number_or_null(image.lower_point_gap)}};
      }
      if (cfg.timing) run["solve_ms"] = approx.solve_ms;
      csv += std::to_string(r) + ',' + std::to_string(trunc.size()) + ',' + detail::csv_real(approx.captured_mass) + ',' +
             detail::csv_real(approx.u_indicator) + ',' + detail::csv_real(approx.gamma) + ',' +
             detail::csv_real(image_gap) + ",\n";
    } catch (...) {
      auto [c, msg] = classify(std::current_exception());
      code = detail::worst(code, c);
      run["error"] = msg;
      csv += std::to_string(r) + ",,,,,," + detail::csv_text(msg) + '\n';
      log << "r=" << r << ": " << msg << "\n";
    }
    runs.push_back(run);
  }
  doc["runs"] = runs;

  if (cfg.mc_paths) {
    const auto& domain = *built.domain;
    auto sim = std::visit(
        [&](const auto& chain) {
          return simulate_exit(chain, domain.contains, *cfg.mc_paths, cfg.seed, cfg.mc_step_cap, opt.workers);
        },
        built.chain);
    doc["monte_carlo"] = {{"seed", sim.seed},
                          {"paths", sim.n_paths},
                          {"censored", sim.censored},
                          {"exit_frequency", detail::map_json(sim.frequency)},
                          {"exit_standard_error", detail::map_json(sim.standard_error)},
                          {"occupation", detail::map_json(sim.occupation)},
                          {"occupation_standard_error", detail::map_json(sim.occupation_error)}};
  }

  const auto dir = std::filesystem::path(cfg.out_dir);
  detail::write_file(dir / "minimal.json", doc.dump(2) + "\n");
  detail::write_file(dir / "minimal.csv", csv);
  log << "wrote " << (dir / "minimal.json").string() << " and minimal.csv\n";
  return code;
}

/// Loads the config, applies overrides and runs one command. Every failure
/// is turned into an exit code.
inline int run(const std::string& command, const std::string& config_path, const Overrides& overrides,
               std::ostream& log) {
  try {
    RunConfig cfg = load_config(config_path);
    apply(cfg, overrides);
    if (command == "validate") return cmd_validate(cfg, log);
    if (command == "bound") return cmd_bound(cfg, log);
    if (command == "sweep") return cmd_sweep(cfg, log);
    if (command == "minimal") return cmd_minimal(cfg, log);
    log << "error: unknown command '" << command << "'\n";
    return kOther;
  } catch (...) {
    auto [code, msg] = classify(std::current_exception());
    log << "error: " << msg << "\n";
    return code;
  }
}

}  // namespace cilp::cli
