#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "cilp/cilp.hpp"

namespace cilp::cli {

using Int = std::int64_t;
using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct ObjectiveSpec {
  std::string kind;  // mass | indicator | set_indicator | monomial | truncation_indicator
  int degree = 0;
  std::vector<Int> states;
  Int big_r = 0;
  /// Monomials only: false drops the tail envelope, leaving a lower bound.
  bool envelope = true;
};

struct RunConfig {
  int schema_version = kSchemaVersion;

  std::string setting;  // dt_stationary | ct_stationary | dt_exit | ct_exit
  std::string family;   // mm1 | birth_death | linear_birth_death | random_walk | finite
  json params = json::object();
  std::optional<std::pair<Int, std::optional<Int>>> domain;  // [lo, hi] or [lo, ∞)
  bool unique_stationary = false;

  double w_degree = 1;
  double w_scale = 1;
  std::optional<double> c;  // empty: closed form
  std::optional<double> b_max_down;

  std::vector<Int> schedule;
  std::optional<Int> r;
  std::vector<ObjectiveSpec> objectives;
  std::string scheme = "A";

  bool image = false;
  std::optional<std::vector<Int>> image_outputs;  // empty: reachable outputs

  double tolerance = 1e-9;
  std::optional<std::size_t> workers;
  bool relaxed = false;
  bool require_two_sided = false;
  bool experimental_upper = false;

  Int validate_horizon = 1000;

  std::optional<std::size_t> mc_paths;
  std::size_t mc_step_cap = 1'000'000;
  std::uint64_t seed = 0;

  std::string out_dir = "out";
  bool lp_dump = false;
  bool timing = true;

  bool scheme_a() const { return scheme == "A" || scheme == "both"; }
  bool scheme_b() const { return scheme == "B" || scheme == "both"; }
  bool exit_setting() const { return setting == "dt_exit" || setting == "ct_exit"; }
  bool continuous() const { return setting == "ct_stationary" || setting == "ct_exit"; }
};

namespace detail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline const json* member(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(path, "must be finite");
  return d;
}

inline Int integer(const json& v, const std::string& path) {
  if (!v.is_number_integer()) fail(path, "expected an integer");
  return v.get<Int>();
}

inline bool boolean(const json& v, const std::string& path) {
  if (!v.is_boolean()) fail(path, "expected true or false");
  return v.get<bool>();
}

inline std::string string(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

inline std::vector<Int> integers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of integers");
  std::vector<Int> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(integer(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

inline void known_keys(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  for (const auto& [k, v] : obj.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) fail(path.empty() ? k : path + "." + k, "unknown field");
  }
}

inline const json& object(const json& v, const std::string& path) {
  if (!v.is_object()) fail(path, "expected an object");
  return v;
}

inline double positive(const json& params, const std::string& key, const std::string& path) {
  const json* v = member(params, key);
  if (!v) fail(path + "." + key, "required");
  const double d = number(*v, path + "." + key);
  if (!(d > 0)) fail(path + "." + key, "must be positive");
  return d;
}

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline ObjectiveSpec parse_objective(const json& v, const std::string& path) {
  object(v, path);
  known_keys(v, path, {"kind", "degree", "state", "states", "R", "envelope"});
  ObjectiveSpec o;
  const json* kind = member(v, "kind");
  if (!kind) fail(path + ".kind", "required");
  o.kind = string(*kind, path + ".kind");
  if (o.kind == "monomial") {
    const json* d = member(v, "degree");
    if (!d) fail(path + ".degree", "required for a monomial objective");
    o.degree = static_cast<int>(integer(*d, path + ".degree"));
    if (const json* e = member(v, "envelope")) o.envelope = boolean(*e, path + ".envelope");
  } else if (o.kind == "indicator") {
    const json* s = member(v, "state");
    if (!s) fail(path + ".state", "required for an indicator objective");
    o.states = {integer(*s, path + ".state")};
  } else if (o.kind == "set_indicator") {
    const json* s = member(v, "states");
    if (!s) fail(path + ".states", "required for a set indicator objective");
    o.states = integers(*s, path + ".states");
    if (o.states.empty()) fail(path + ".states", "must not be empty");
  } else if (o.kind == "truncation_indicator") {
    const json* s = member(v, "R");
    if (!s) fail(path + ".R", "required for a truncation indicator objective");
    o.big_r = integer(*s, path + ".R");
    if (o.big_r < 1) fail(path + ".R", "must be at least 1");
  } else if (o.kind != "mass") {
    fail(path + ".kind", "unknown objective kind '" + o.kind + "'");
  }
  return o;
}

}  // namespace detail

/// Parses and checks a run configuration. Errors carry the JSON path of the
/// offending field, or the line and column of a syntax error.
inline RunConfig parse_config(const std::string& text) {
  using namespace detail;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON at " + line_column(text, e.byte ? e.byte - 1 : 0));
  }
  object(doc, "config");
  known_keys(doc, "", {"schema_version", "model", "weight", "c", "b_seq", "schedule", "r", "objectives", "scheme",
                       "image", "solver", "validate_horizon", "monte_carlo", "output"});
  RunConfig cfg;

  const json* version = member(doc, "schema_version");
  if (!version) fail("schema_version", "required");
  cfg.schema_version = static_cast<int>(integer(*version, "schema_version"));
  if (cfg.schema_version != kSchemaVersion)
    fail("schema_version", "unsupported version " + std::to_string(cfg.schema_version) + " (expected " +
                               std::to_string(kSchemaVersion) + ")");

  const json* model = member(doc, "model");
  if (!model) fail("model", "required");
  object(*model, "model");
  known_keys(*model, "model", {"setting", "family", "params", "domain", "unique_stationary"});
  if (!member(*model, "setting")) fail("model.setting", "required");
  cfg.setting = string((*model)["setting"], "model.setting");
  if (cfg.setting != "dt_stationary" && cfg.setting != "ct_stationary" && cfg.setting != "dt_exit" &&
      cfg.setting != "ct_exit")
    fail("model.setting", "unknown setting '" + cfg.setting + "'");
  if (!member(*model, "family")) fail("model.family", "required");
  cfg.family = string((*model)["family"], "model.family");
  if (const json* p = member(*model, "params")) cfg.params = object(*p, "model.params");
  if (const json* u = member(*model, "unique_stationary")) cfg.unique_stationary = boolean(*u, "model.unique_stationary");
  if (const json* d = member(*model, "domain")) {
    object(*d, "model.domain");
    known_keys(*d, "model.domain", {"from", "range"});
    if (const json* from = member(*d, "from")) {
      cfg.domain = std::pair<Int, std::optional<Int>>{integer(*from, "model.domain.from"), std::nullopt};
    } else if (const json* range = member(*d, "range")) {
      auto lh = integers(*range, "model.domain.range");
      if (lh.size() != 2 || lh[0] > lh[1]) fail("model.domain.range", "expected [lo, hi] with lo <= hi");
      cfg.domain = std::pair<Int, std::optional<Int>>{lh[0], lh[1]};
    } else {
      fail("model.domain", "expected 'from' or 'range'");
    }
  }
  if (cfg.exit_setting() && !cfg.domain) fail("model.domain", "required for exit settings");
  if (!cfg.exit_setting() && cfg.domain) fail("model.domain", "only exit settings take a domain");

  if (const json* w = member(doc, "weight")) {
    object(*w, "weight");
    known_keys(*w, "weight", {"degree", "scale"});
    if (const json* d = member(*w, "degree")) cfg.w_degree = number(*d, "weight.degree");
    if (const json* s = member(*w, "scale")) cfg.w_scale = number(*s, "weight.scale");
  }
  if (!(cfg.w_degree > 0)) fail("weight.degree", "must be positive");
  if (!(cfg.w_scale > 0)) fail("weight.scale", "must be positive");
  if (cfg.setting == "ct_exit" && !(cfg.w_degree > 1)) fail("weight.degree", "exit weight degree d must exceed 1");

  const json* c = member(doc, "c");
  if (!c) fail("c", "required (a number or \"closed-form\")");
  if (c->is_string()) {
    if (c->get<std::string>() != "closed-form") fail("c", "expected a number or \"closed-form\"");
  } else {
    cfg.c = number(*c, "c");
    if (!(*cfg.c > 0)) fail("c", "moment bound must be positive");
  }

  if (const json* b = member(doc, "b_seq")) {
    object(*b, "b_seq");
    known_keys(*b, "b_seq", {"nearest_neighbour"});
    const json* nn = member(*b, "nearest_neighbour");
    if (!nn) fail("b_seq.nearest_neighbour", "required");
    cfg.b_max_down = number(*nn, "b_seq.nearest_neighbour");
    if (*cfg.b_max_down < 0) fail("b_seq.nearest_neighbour", "must be non-negative");
  }

  if (const json* s = member(doc, "schedule")) cfg.schedule = integers(*s, "schedule");
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    if (cfg.schedule[i] < 1) fail("schedule[" + std::to_string(i) + "]", "r must be at least 1");
    if (i > 0 && cfg.schedule[i] <= cfg.schedule[i - 1])
      fail("schedule[" + std::to_string(i) + "]", "schedule must be strictly increasing");
  }
  if (const json* r = member(doc, "r")) {
    cfg.r = integer(*r, "r");
    if (*cfg.r < 1) fail("r", "must be at least 1");
  }

  if (const json* objs = member(doc, "objectives")) {
    if (!objs->is_array()) fail("objectives", "expected an array");
    for (std::size_t i = 0; i < objs->size(); ++i)
      cfg.objectives.push_back(parse_objective((*objs)[i], "objectives[" + std::to_string(i) + "]"));
  }
  for (std::size_t i = 0; i < cfg.objectives.size(); ++i) {
    const auto& o = cfg.objectives[i];
    if (o.kind == "monomial" && static_cast<double>(o.degree) >= cfg.w_degree)
      fail("objectives[" + std::to_string(i) + "].degree",
           "x^" + std::to_string(o.degree) + " is not in W: its degree must be below the weight degree");
  }

  if (const json* s = member(doc, "scheme")) cfg.scheme = string(*s, "scheme");
  if (cfg.scheme != "A" && cfg.scheme != "B" && cfg.scheme != "both") fail("scheme", "expected \"A\", \"B\" or \"both\"");

  if (const json* img = member(doc, "image")) {
    object(*img, "image");
    known_keys(*img, "image", {"outputs"});
    cfg.image = true;
    if (const json* o = member(*img, "outputs")) {
      if (o->is_string()) {
        if (o->get<std::string>() != "reachable") fail("image.outputs", "expected an array or \"reachable\"");
      } else {
        cfg.image_outputs = integers(*o, "image.outputs");
      }
    }
  }

  if (const json* sol = member(doc, "solver")) {
    object(*sol, "solver");
    known_keys(*sol, "solver", {"tolerance", "workers", "relaxed", "require_two_sided", "experimental_upper"});
    if (const json* t = member(*sol, "tolerance")) cfg.tolerance = number(*t, "solver.tolerance");
    if (const json* w = member(*sol, "workers")) {
      const Int n = integer(*w, "solver.workers");
      if (n < 1) fail("solver.workers", "must be at least 1");
      cfg.workers = static_cast<std::size_t>(n);
    }
    if (const json* x = member(*sol, "relaxed")) cfg.relaxed = boolean(*x, "solver.relaxed");
    if (const json* x = member(*sol, "require_two_sided")) cfg.require_two_sided = boolean(*x, "solver.require_two_sided");
    if (const json* x = member(*sol, "experimental_upper"))
      cfg.experimental_upper = boolean(*x, "solver.experimental_upper");
  }
  if (!(cfg.tolerance > 0)) fail("solver.tolerance", "must be positive");

  if (const json* h = member(doc, "validate_horizon")) {
    cfg.validate_horizon = integer(*h, "validate_horizon");
    if (cfg.validate_horizon < 1) fail("validate_horizon", "must be at least 1");
  }

  if (const json* mc = member(doc, "monte_carlo")) {
    object(*mc, "monte_carlo");
    known_keys(*mc, "monte_carlo", {"paths", "step_cap", "seed"});
    const json* p = member(*mc, "paths");
    if (!p) fail("monte_carlo.paths", "required");
    const Int n = integer(*p, "monte_carlo.paths");
    if (n < 1) fail("monte_carlo.paths", "must be at least 1");
    cfg.mc_paths = static_cast<std::size_t>(n);
    if (const json* s = member(*mc, "step_cap")) {
      const Int cap = integer(*s, "monte_carlo.step_cap");
      if (cap < 1) fail("monte_carlo.step_cap", "must be at least 1");
      cfg.mc_step_cap = static_cast<std::size_t>(cap);
    }
    if (const json* s = member(*mc, "seed")) {
      const Int seed = integer(*s, "monte_carlo.seed");
      if (seed < 0) fail("monte_carlo.seed", "must be non-negative");
      cfg.seed = static_cast<std::uint64_t>(seed);
    }
    if (!cfg.exit_setting()) fail("monte_carlo", "simulation is only available for exit settings");
  }

  if (const json* out = member(doc, "output")) {
    object(*out, "output");
    known_keys(*out, "output", {"dir", "lp_dump", "timing"});
    if (const json* d = member(*out, "dir")) cfg.out_dir = string(*d, "output.dir");
    if (const json* d = member(*out, "lp_dump")) cfg.lp_dump = boolean(*d, "output.lp_dump");
    if (const json* d = member(*out, "timing")) cfg.timing = boolean(*d, "output.timing");
  }
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// The model described by a configuration, with the chain and domain kept
/// for oracle and simulation use.
struct BuiltModel {
  CilpModel<Int, Int> model;
  std::variant<DtChain<Int>, CtChain<Int>> chain;
  std::optional<Domain<Int>> domain;
  /// Scale of w = scale · x^degree when the weight is monomial.
  std::optional<double> monomial_scale;
  double c = 0;
  bool c_closed_form = false;
};

namespace detail {

inline std::vector<std::vector<double>> matrix(const json& params, const std::string& path) {
  const json* m = member(params, "matrix");
  if (!m) fail(path + ".matrix", "required");
  if (!m->is_array()) fail(path + ".matrix", "expected an array of rows");
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < m->size(); ++i) {
    rows.push_back(numbers((*m)[i], path + ".matrix[" + std::to_string(i) + "]"));
    for (std::size_t j = 0; j < rows.back().size(); ++j)
      if (rows.back()[j] < 0) fail(path + ".matrix[" + std::to_string(i) + "][" + std::to_string(j) + "]", "must be non-negative");
  }
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (rows[i].size() != rows.size()) fail(path + ".matrix[" + std::to_string(i) + "]", "matrix must be square");
  if (rows.empty()) fail(path + ".matrix", "must not be empty");
  return rows;
}

inline Transitions<Int> initial(const json& params, const std::string& path) {
  const json* v = member(params, "initial");
  if (!v) return {{0, 1.0}};
  if (!v->is_array()) fail(path + ".initial", "expected [[state, mass], ...]");
  Transitions<Int> out;
  for (std::size_t i = 0; i < v->size(); ++i) {
    const std::string p = path + ".initial[" + std::to_string(i) + "]";
    const json& e = (*v)[i];
    if (!e.is_array() || e.size() != 2) fail(p, "expected [state, mass]");
    out.emplace_back(integer(e[0], p + "[0]"), number(e[1], p + "[1]"));
  }
  return out;
}

inline Int start_state(const json& params, const std::string& path, Int fallback) {
  const json* s = member(params, "start");
  return s ? integer(*s, path + ".start") : fallback;
}

}  // namespace detail

inline BuiltModel build_model(const RunConfig& cfg) {
  using namespace detail;
  const std::string pp = "model.params";
  const json& p = cfg.params;
  BuiltModel out;
  std::optional<double> closed;

  auto wrap = [](auto fn, const std::string& path) {
    try {
      return fn();
    } catch (const ConfigError& e) {
      fail(path, e.what());
    }
  };

  if (cfg.family == "mm1") {
    known_keys(p, pp, {"lambda", "mu"});
    const double lambda = positive(p, "lambda", pp), mu = positive(p, "mu", pp);
    out.chain = family_mm1(lambda, mu);
    if (cfg.setting == "ct_stationary" && lambda < mu && std::floor(cfg.w_degree) == cfg.w_degree)
      closed = cfg.w_scale * mm1_stationary_moment(lambda, mu, static_cast<int>(cfg.w_degree));
  } else if (cfg.family == "birth_death") {
    known_keys(p, pp, {"birth", "death", "start"});
    if (!member(p, "birth")) fail(pp + ".birth", "required");
    if (!member(p, "death")) fail(pp + ".death", "required");
    auto birth = numbers(p["birth"], pp + ".birth");
    auto death = numbers(p["death"], pp + ".death");
    for (std::size_t i = 0; i < birth.size(); ++i)
      if (birth[i] < 0) fail(pp + ".birth[" + std::to_string(i) + "]", "rate must be non-negative");
    for (std::size_t i = 0; i < death.size(); ++i)
      if (death[i] < 0) fail(pp + ".death[" + std::to_string(i) + "]", "rate must be non-negative");
    out.chain = wrap([&] { return family_birth_death(birth, death, start_state(p, pp, 0)); }, pp);
  } else if (cfg.family == "linear_birth_death") {
    known_keys(p, pp, {"lambda", "mu", "start"});
    const double lambda = positive(p, "lambda", pp), mu = positive(p, "mu", pp);
    const Int start = start_state(p, pp, 1);
    out.chain = wrap([&] { return family_linear_birth_death(lambda, mu, start); }, pp);
    if (cfg.setting == "ct_exit" && cfg.w_degree == 2 && lambda < mu && cfg.domain && cfg.domain->first == 1 &&
        !cfg.domain->second)
      closed = linear_birth_death_exit_moment(lambda, mu, start);
  } else if (cfg.family == "random_walk") {
    known_keys(p, pp, {"p_up", "start"});
    const double p_up = positive(p, "p_up", pp);
    if (!(p_up < 1)) fail(pp + ".p_up", "must lie in (0, 1)");
    const Int start = start_state(p, pp, 0);
    out.chain = wrap([&] { return family_random_walk(p_up, start); }, pp);
    const bool integer_degree = std::floor(cfg.w_degree) == cfg.w_degree;
    if (cfg.setting == "dt_stationary" && p_up < 0.5 && integer_degree)
      closed = cfg.w_scale * random_walk_stationary_moment(p_up, static_cast<int>(cfg.w_degree));
    if (cfg.setting == "dt_exit" && p_up < 0.5 && integer_degree && cfg.w_degree <= 2 && cfg.domain &&
        cfg.domain->first == 1 && !cfg.domain->second && start >= 1)
      closed = cfg.w_scale * random_walk_exit_moment(p_up, start, static_cast<int>(cfg.w_degree));
  } else if (cfg.family == "finite") {
    known_keys(p, pp, {"matrix", "initial"});
    auto m = matrix(p, pp);
    auto init = initial(p, pp);
    if (cfg.continuous())
      out.chain = finite_ct_chain(std::move(m), std::move(init));
    else
      out.chain = finite_dt_chain(std::move(m), std::move(init));
  } else {
    fail("model.family", "unknown family '" + cfg.family + "'");
  }

  const bool ct_family = std::holds_alternative<CtChain<Int>>(out.chain);
  if (ct_family != cfg.continuous())
    fail("model.setting", "setting '" + cfg.setting + "' does not match the " +
                              (ct_family ? "continuous" : "discrete") + "-time family '" + cfg.family + "'");
  if (cfg.setting == "ct_exit" && (cfg.family == "mm1" || cfg.family == "birth_death"))
    fail("model.family", "ct_exit uses w = (-q(x,x))^d, which needs exit rates growing to infinity; use "
                         "linear_birth_death or a finite chain");

  if (cfg.c) {
    out.c = *cfg.c;
  } else {
    if (!closed) fail("c", "no closed-form moment bound for this setting, family and weight; give c as a number");
    out.c = *closed;
    out.c_closed_form = true;
  }

  if (cfg.domain) {
    const Int lo = cfg.domain->first;
    out.domain = cfg.domain->second ? integer_range(lo, *cfg.domain->second) : integers_from(lo);
  }

  const auto w = monomial_weight(cfg.w_degree, cfg.w_scale);
  if (cfg.setting == "dt_stationary") {
    out.model = dt_stationary(std::get<DtChain<Int>>(out.chain), w, out.c);
  } else if (cfg.setting == "ct_stationary") {
    out.model = ct_stationary(std::get<CtChain<Int>>(out.chain), w, out.c);
  } else if (cfg.setting == "dt_exit") {
    out.model = dt_exit(std::get<DtChain<Int>>(out.chain), *out.domain, w, out.c);
  } else {
    out.model = ct_exit(std::get<CtChain<Int>>(out.chain), *out.domain, cfg.w_degree, out.c);
  }

  if (cfg.setting != "ct_exit")
    out.monomial_scale = cfg.w_scale;
  else if (cfg.family == "linear_birth_death")
    out.monomial_scale = std::pow(positive(p, "lambda", pp) + positive(p, "mu", pp), cfg.w_degree);

  if (cfg.b_max_down) out.model.b_seq = nearest_neighbour_b_seq(*cfg.b_max_down);
  return out;
}

inline Objective<Int> build_objective(const ObjectiveSpec& spec, const BuiltModel& built, double w_degree,
                                      const std::string& path) {
  if (spec.kind == "mass") return mass_objective<Int>();
  if (spec.kind == "indicator") return indicator<Int>(spec.states.front());
  if (spec.kind == "set_indicator") return set_indicator<Int>(spec.states);
  if (spec.kind == "truncation_indicator") return truncation_indicator(built.model, spec.big_r);
  if (!built.monomial_scale) detail::fail(path, "monomial objectives need a monomial weight");
  try {
    auto f = monomial_objective(spec.degree, w_degree, *built.monomial_scale);
    if (!spec.envelope) f.envelope = {};
    return f;
  } catch (const ConfigError& e) {
    detail::fail(path, e.what());
  }
}

}  // namespace cilp::cli
