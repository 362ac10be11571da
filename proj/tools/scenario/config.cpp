#include "config.hpp"

#include <fstream>
#include <sstream>

#include "ebl/errors.hpp"

namespace ebl::scenario {

namespace {

std::vector<double> positive_list(const Field& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.at(i).positive();
  return out;
}

std::vector<double> finite_list(const Field& f) {
  std::vector<double> out(f.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f.at(i).finite();
  if (out.empty()) f.fail("must not be empty");
  return out;
}

std::size_t count(const Field& f, std::size_t minimum) {
  const auto v = f.unsigned_integer();
  if (v < minimum) f.fail("must be >= " + std::to_string(minimum));
  return static_cast<std::size_t>(v);
}

void parse_functions(const Field& root, Scenario& s) {
  const Field functions = root.at("functions");
  functions.only({"f", "h"});
  const Field fs = functions.at("f");
  if (fs.size() != s.lambdas.size()) fs.fail("expected one function per coefficient (" + std::to_string(s.lambdas.size()) + ")");
  for (std::size_t i = 0; i < fs.size(); ++i) s.fs.push_back(function_from_json(fs.at(i)));
  const Field h = functions.at("h");
  if (h.has("kind") && h.at("kind").raw() == "minkowski") {
    // h = indicator of sum_i lambda_i S_i for indicator f_i.
    h.only({"kind"});
    std::vector<GaussianSet> sets;
    for (std::size_t i = 0; i < s.fs.size(); ++i) {
      auto set = indicator_set(s.fs[i]);
      if (!set) fs.at(i).fail("minkowski h needs indicator functions (intervals, box or halfspace)");
      sets.push_back(std::move(*set));
    }
    try {
      s.h.push_back(set_to_indicator(minkowski_combine(sets, s.lambdas)));
    } catch (const ebl::Error& e) {
      h.fail(e.what());
    }
  } else {
    s.h.push_back(function_from_json(h));
  }
  for (std::size_t i = 0; i < s.fs.size(); ++i) {
    if (s.fs[i].dim() != s.h_spec().dim()) fs.at(i).fail("dimension differs from h");
  }
}

void parse_checks(const Field& checks, Scenario& s) {
  checks.only({"expect", "deficit_tol", "residual_tol", "pde", "simulate"});
  if (const auto e = checks.find("expect")) {
    s.expect = parse_equality_case(e->string());
    if (!s.expect) e->fail("unknown equality case '" + e->string() + "'");
  }
  if (const auto d = checks.find("deficit_tol")) s.classify.deficit_tol = d->positive();
  if (const auto r = checks.find("residual_tol")) s.classify.residual_tol = r->positive();

  if (const auto pde = checks.find("pde")) {
    pde->only({"t", "x", "y", "dt", "dx", "stencil", "max_residual", "slope_range"});
    PdeCheckSpec& p = s.pde;
    if (const auto f = pde->find("t")) p.t = finite_list(*f);
    if (const auto f = pde->find("x")) p.x = finite_list(*f);
    if (const auto f = pde->find("y")) p.y = finite_list(*f);
    if (const auto f = pde->find("dt")) {
      p.dt = positive_list(*f);
      if (p.dt.empty()) f->fail("must not be empty");
      for (std::size_t i = 1; i < p.dt.size(); ++i) {
        if (!(p.dt[i] < p.dt[i - 1])) f->at(i).fail("the dt ladder must decrease");
      }
    }
    if (const auto f = pde->find("dx")) p.dx = f->positive();
    if (const auto f = pde->find("stencil")) {
      const std::string v = f->string();
      if (v != "forward" && v != "central") f->fail("expected 'forward' or 'central'");
      p.stencil = v == "central" ? TimeStencil::central : TimeStencil::forward;
    }
    if (const auto f = pde->find("max_residual")) p.max_residual = f->positive();
    if (const auto f = pde->find("slope_range")) {
      if (f->size() != 2) f->fail("expected [lo, hi]");
      p.slope_range = std::array<double, 2>{f->at(std::size_t{0}).finite(), f->at(std::size_t{1}).finite()};
    }
    const double widest = p.dt.front();
    for (std::size_t i = 0; i < p.t.size(); ++i) {
      if (p.t[i] < 2.0 * widest || p.t[i] > 1.0 - 2.0 * widest) {
        Field(pde->raw(), pde->path()).at("t").at(i).fail("t must satisfy 2 dt <= t <= 1 - 2 dt for every dt");
      }
    }
  }

  if (const auto sim = checks.find("simulate")) {
    sim->only({"points", "t", "max_abs_z", "max_diag_spread", "max_bracket_gap", "max_minimizer_residual"});
    SimulateSpec& d = s.simulate;
    if (const auto f = sim->find("points")) {
      d.points.clear();
      for (std::size_t i = 0; i < f->size(); ++i) {
        const Field p = f->at(i);
        if (p.size() != 2) p.fail("a point is a pair [x, y]");
        d.points.push_back({p.at(std::size_t{0}).finite(), p.at(std::size_t{1}).finite()});
      }
    }
    if (const auto f = sim->find("t")) {
      d.diagnostic_t = f->finite();
      if (!(d.diagnostic_t > 0.0 && d.diagnostic_t < 1.0)) f->fail("must lie in (0, 1)");
    }
    if (const auto f = sim->find("max_abs_z")) d.max_abs_z = f->positive();
    if (const auto f = sim->find("max_diag_spread")) d.max_diag_spread = f->positive();
    if (const auto f = sim->find("max_bracket_gap")) d.max_bracket_gap = f->positive();
    if (const auto f = sim->find("max_minimizer_residual")) d.max_minimizer_residual = f->positive();
    if ((d.max_bracket_gap || d.max_minimizer_residual) && s.h_spec().dim() != 1) {
      sim->fail("bracket and minimizer checks need a one-dimensional instance");
    }
  }
}

void parse_sim(const Field& sim, Scenario& s) {
  sim.only({"dt", "t_end", "n_paths", "antithetic", "fk_time", "ensemble_paths", "summary_stride"});
  if (const auto f = sim.find("dt")) s.sim.dt = f->positive();
  if (const auto f = sim.find("t_end")) s.sim.t_end = f->positive();
  if (const auto f = sim.find("n_paths")) s.sim.n_paths = count(*f, 1);
  if (const auto f = sim.find("antithetic")) s.sim.antithetic = f->boolean();
  if (const auto f = sim.find("ensemble_paths")) s.simulate.ensemble_paths = count(*f, 1);
  if (const auto f = sim.find("summary_stride")) s.simulate.summary_stride = count(*f, 1);
  try {
    validate(s.sim);
  } catch (const ebl::Error& e) {
    sim.fail(e.what());
  }
  if (const auto f = sim.find("fk_time")) s.simulate.fk_time = f->positive();
  if (s.simulate.fk_time > s.sim.t_end) {
    Field(sim.raw(), sim.path()).fail("fk_time must not exceed t_end");
  }
}

Scenario parse_fields(const json& doc, const std::string& text, const std::string& origin) {
  const Field root(doc, {});
  root.only({"id", "seed", "coefficients", "flags", "functions", "quadrature", "sim", "checks"});
  Scenario s;
  s.origin = origin;
  s.config_hash = fnv1a_hex(text);
  s.id = root.at("id").string();
  if (s.id.empty()) root.at("id").fail("must not be empty");
  if (const auto f = root.find("seed")) s.seed = f->unsigned_integer();

  const Field coefficients = root.at("coefficients");
  s.lambdas = positive_list(coefficients);
  if (s.lambdas.size() < 2) coefficients.fail("at least two coefficients are required");

  if (const auto flags = root.find("flags")) {
    flags->only({"convex_regime", "trivial_case"});
    if (const auto f = flags->find("convex_regime")) s.flags.convex_regime = f->boolean();
    if (const auto f = flags->find("trivial_case")) s.flags.trivial_case = f->boolean();
  }
  parse_functions(root, s);

  if (const auto q = root.find("quadrature")) {
    q->only({"hypothesis_b_samples"});
    if (const auto f = q->find("hypothesis_b_samples")) s.b_samples = count(*f, 1);
  }
  if (const auto sim = root.find("sim")) parse_sim(*sim, s);
  if (const auto checks = root.find("checks")) parse_checks(*checks, s);

  // Instance-level invariants (regime, flags, trivial functions).
  try {
    (void)s.instance();
  } catch (const RegimeError& e) {
    coefficients.fail(e.what());
  } catch (const ebl::Error& e) {
    root.at("functions").fail(e.what());
  }
  return s;
}

}  // namespace

AnyInstance Scenario::instance() const {
  if (lambdas.size() == 2) return BorellInstance(lambdas[0], lambdas[1], fs[0], fs[1], h_spec(), flags);
  return MInstance(lambdas, fs, h_spec(), flags);
}

BorellInstance Scenario::borell() const {
  if (lambdas.size() != 2) throw ConfigError({std::string("coefficients")}, "this command needs exactly two coefficients");
  return BorellInstance(lambdas[0], lambdas[1], fs[0], fs[1], h_spec(), flags);
}

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    ConfigError err({}, std::string("invalid JSON: ") + e.what());
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    err.anchor(origin, 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n')));
    throw err;
  }
  try {
    return parse_fields(doc, text, origin);
  } catch (ConfigError& e) {
    e.anchor(origin, locate_line(text, e.path()));
    throw;
  }
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigError err({}, "cannot read file");
    err.anchor(path, 0);
    throw err;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path);
}

json instance_to_json(const Scenario& s) {
  json fs = json::array();
  for (const auto& f : s.fs) fs.push_back(function_to_json(f));
  return {{"coefficients", s.lambdas},
          {"flags", {{"convex_regime", s.flags.convex_regime}, {"trivial_case", s.flags.trivial_case}}},
          {"functions", {{"f", fs}, {"h", function_to_json(s.h_spec())}}},
          {"dim", s.h_spec().dim()}};
}

}  // namespace ebl::scenario
