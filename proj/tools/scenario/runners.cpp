#include "runners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ebl/errors.hpp"
#include "ebl/version.hpp"

namespace ebl::scenario {

namespace {

/// B violations below this (in Phi^{-1} units) count as real counterexamples.
constexpr double kBViolationFloor = -1e-10;
/// Residuals at or below this are rounding noise and give no convergence slope.
constexpr double kSlopeNoiseFloor = 1e-12;
/// Absolute floor on the Feynman-Kac standard error. An equality instance has
/// C = 0 identically up to rounding, so the sample spread is itself rounding noise.
constexpr double kFkStdErrorFloor = 1e-12;

ExtendedReal any_deficit(const AnyInstance& inst) {
  if (const auto* b = std::get_if<BorellInstance>(&inst)) return deficit(*b);
  return deficit_m(std::get<MInstance>(inst));
}

Regime any_regime(const AnyInstance& inst) {
  return std::visit([](const auto& i) { return i.regime(); }, inst);
}

json common_fields(const Scenario& s, const char* command) {
  return {{"id", s.id},
          {"command", command},
          {"origin", s.origin},
          {"config_hash", s.config_hash},
          {"version", library_version()}};
}

Vector filled(int n, double v) { return Vector(static_cast<std::size_t>(n), v); }

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Report run_deficit(const Scenario& s, const RunOptions& options) {
  const AnyInstance inst = s.instance();
  const std::uint64_t seed = options.seed.value_or(s.seed);
  ClassifyOptions classify = s.classify;
  if (options.tol) classify.deficit_tol = *options.tol;

  const ExtendedReal d = any_deficit(inst);
  const ConditionA a = condition_a_check(s.lambdas);
  const HypothesisBReport b = hypothesis_b_check(s.h_spec(), s.fs, s.lambdas, s.b_samples, seed);
  const EqualityVerdict verdict = classify_equality(inst, classify);

  bool pass = true;
  if (s.expect) pass = verdict.case_label == *s.expect;
  const bool expects_equality = s.expect && *s.expect != EqualityCase::strict && *s.expect != EqualityCase::unclassified;
  const bool b_ok = !(b.max_violation.value() < kBViolationFloor);
  if (expects_equality && !b_ok) pass = false;

  json witness = json::array();
  for (const auto& w : b.witness) witness.push_back(vector_to_json(w));
  json residuals = json::object();
  for (const auto& [name, r] : verdict.residuals) residuals[name] = number_to_json(r);

  Report rep;
  rep.id = s.id;
  rep.pass = pass;
  rep.body = common_fields(s, "deficit");
  rep.body["seed"] = seed;
  rep.body["instance"] = instance_to_json(s);
  rep.body["regime"] = to_string(any_regime(inst));
  rep.body["deficit"] = extended_to_json(d);
  rep.body["condition_a"] = {{"holds", a.holds}, {"convex_regime_holds", a.convex_regime_holds}};
  rep.body["hypothesis_b"] = {{"samples", b.samples},
                              {"max_violation", extended_to_json(b.max_violation)},
                              {"min_gap", extended_to_json(b.min_gap)},
                              {"witness", witness},
                              {"epistemic_status", HypothesisBReport::epistemic_status}};
  rep.body["verdict"] = {{"case", to_string(verdict.case_label)},
                         {"deficit_tol", verdict.deficit_tol},
                         {"residuals", residuals}};
  rep.body["expect"] = s.expect ? json(to_string(*s.expect)) : json(nullptr);
  rep.body["pass"] = pass;

  rep.csv_header = {"id", "m", "dim", "regime", "deficit", "condition_a", "b_max_violation", "verdict", "expect", "pass"};
  rep.csv_rows.push_back({s.id, std::to_string(s.m()), std::to_string(s.h_spec().dim()), to_string(any_regime(inst)),
                          format_double(d.value()), a.holds ? "true" : "false", format_double(b.max_violation.value()),
                          to_string(verdict.case_label), s.expect ? to_string(*s.expect) : "", pass ? "true" : "false"});
  return rep;
}

Report run_pde_check(const Scenario& s, const RunOptions& options) {
  const BorellInstance inst = s.borell();
  const PdeCheckSpec& p = s.pde;
  const std::optional<double> max_residual = options.tol ? options.tol : p.max_residual;
  const int n = inst.dim();

  Report rep;
  rep.id = s.id;
  rep.csv_header = {"id", "t", "x", "y", "dt", "dx", "residual", "slope"};
  json rows = json::array();
  std::vector<double> slopes;
  double worst = 0.0;  // at the first dt
  double worst_last = 0.0;
  for (double t : p.t) {
    for (double x : p.x) {
      for (double y : p.y) {
        const Vector xv = filled(n, x);
        const Vector yv = filled(n, y);
        double previous = 0.0;
        for (std::size_t k = 0; k < p.dt.size(); ++k) {
          const double r = pde_residual(inst, t, xv, yv, PdeSteps{p.dt[k], p.dx, p.stencil});
          std::optional<double> slope;
          if (k > 0 && previous > kSlopeNoiseFloor && r > kSlopeNoiseFloor) {
            slope = std::log(previous / r) / std::log(p.dt[k - 1] / p.dt[k]);
            slopes.push_back(*slope);
          }
          if (k == 0) worst = std::max(worst, r);
          if (k + 1 == p.dt.size()) worst_last = std::max(worst_last, r);
          previous = r;
          rows.push_back({{"t", t}, {"x", x}, {"y", y}, {"dt", p.dt[k]}, {"dx", p.dx}, {"residual", r},
                          {"slope", slope ? json(*slope) : json(nullptr)}});
          rep.csv_rows.push_back({s.id, format_double(t), format_double(x), format_double(y), format_double(p.dt[k]),
                                  format_double(p.dx), format_double(r), slope ? format_double(*slope) : ""});
        }
      }
    }
  }

  bool pass = true;
  json checks = json::object();
  if (max_residual) {
    const bool ok = worst <= *max_residual;
    checks["max_residual"] = {{"limit", *max_residual}, {"value", worst}, {"pass", ok}};
    pass = pass && ok;
  }
  const double med = slopes.empty() ? std::nan("") : median(slopes);
  const json med_json = slopes.empty() ? json(nullptr) : json(med);
  if (p.slope_range) {
    const bool ok = med >= (*p.slope_range)[0] && med <= (*p.slope_range)[1];
    checks["slope"] = {{"range", *p.slope_range}, {"value", med_json}, {"pass", ok}};
    pass = pass && ok;
  }

  rep.pass = pass;
  rep.body = common_fields(s, "pde-check");
  rep.body["instance"] = instance_to_json(s);
  rep.body["rho"] = inst.rho();
  rep.body["stencil"] = p.stencil == TimeStencil::central ? "central" : "forward";
  rep.body["rows"] = rows;
  rep.body["summary"] = {{"max_residual_first_dt", worst},
                         {"max_residual_last_dt", worst_last},
                         {"median_slope", med_json},
                         {"slope_samples", slopes.size()}};
  rep.body["checks"] = checks;
  rep.body["pass"] = pass;
  return rep;
}

Report run_simulate(const Scenario& s, const RunOptions& options) {
  const BorellInstance inst = s.borell();
  const SimulateSpec& spec = s.simulate;
  SimConfig cfg = s.sim;
  cfg.seed = options.seed.value_or(s.seed);
  const double max_abs_z = options.tol.value_or(spec.max_abs_z);

  SimConfig ens_cfg = cfg;
  ens_cfg.n_paths = std::min(spec.ensemble_paths, cfg.n_paths);
  if (ens_cfg.antithetic && ens_cfg.n_paths % 2 == 1) ens_cfg.n_paths += 1;
  const PathEnsemble ens = simulate_paths(inst, ens_cfg);
  const SupportDiagnostics support = support_diagnostics(ens);
  const MonteCarloEstimate fk = feynman_kac_estimate(inst, spec.fk_time, cfg);
  const ExtendedReal direct = deficit(inst);

  Report rep;
  rep.id = s.id;
  bool pass = true;
  json checks = json::object();

  std::optional<double> z;
  if (direct.is_finite()) {
    z = (fk.mean - direct.value()) / std::max(fk.std_error, kFkStdErrorFloor);
    const bool ok = std::abs(*z) <= max_abs_z;
    checks["fk_z"] = {{"limit", max_abs_z}, {"value", *z}, {"pass", ok}};
    pass = pass && ok;
  }
  const double spread = std::max(support.diag_spread, support.max_diagonal_sd);
  if (spec.max_diag_spread) {
    const bool ok = spread <= *spec.max_diag_spread;
    checks["diag_spread"] = {{"limit", *spec.max_diag_spread}, {"value", spread}, {"pass", ok}};
    pass = pass && ok;
  }

  // Pointwise dichotomy diagnostics (one-dimensional instances only).
  json points = json::array();
  double worst_gap = 0.0;
  double worst_minimizer = 0.0;
  if (inst.dim() == 1) {
    const bool sum_one = inst.regime() == Regime::sum_one;
    for (const auto& [x, y] : spec.points) {
      const double gap = lie_bracket_gap(inst, spec.diagnostic_t, x, y);
      const MinimizerResiduals mr = minimizer_identities_check(inst, spec.diagnostic_t, x, y);
      worst_gap = std::max(worst_gap, std::abs(gap));
      worst_minimizer = std::max(worst_minimizer, mr.max_abs());
      json entry = {{"x", x},
                    {"y", y},
                    {"bracket_gap", gap},
                    {"minimizer",
                     {{"dc_dx", mr.dc_dx},
                      {"dc_dy", mr.dc_dy},
                      {"xx_minus_yy", mr.xx_minus_yy},
                      {"xx_plus_xy", mr.xx_plus_xy}}}};
      if (sum_one) {
        const D1D2Report d = d1_d2_check(inst, spec.diagnostic_t, x, y);
        entry["d1d2"] = {{"verdict", to_string(d.verdict)}, {"d1_residual", d.d1_residual}, {"d2_residual", d.d2_residual}};
      } else {
        entry["d1d2"] = nullptr;
      }
      points.push_back(entry);
    }
    if (spec.max_bracket_gap) {
      const bool ok = worst_gap <= *spec.max_bracket_gap;
      checks["bracket_gap"] = {{"limit", *spec.max_bracket_gap}, {"value", worst_gap}, {"pass", ok}};
      pass = pass && ok;
    }
    if (spec.max_minimizer_residual) {
      const bool ok = worst_minimizer <= *spec.max_minimizer_residual;
      checks["minimizer"] = {{"limit", *spec.max_minimizer_residual}, {"value", worst_minimizer}, {"pass", ok}};
      pass = pass && ok;
    }
  }

  // Path summaries every summary_stride steps (and at the final step).
  rep.csv_header = {"id", "step", "t", "mean_x", "mean_y", "sd_x_minus_y", "max_abs_x_minus_y", "mean_kill"};
  json summaries = json::array();
  const std::size_t K = ens.steps();
  const int n = ens.dim;
  for (std::size_t k = 0; k <= K; ++k) {
    if (k % spec.summary_stride != 0 && k != K) continue;
    double mx = 0.0, my = 0.0, mk = 0.0, sum = 0.0, sum2 = 0.0, max_abs = 0.0;
    for (std::size_t p = 0; p < ens.n_paths; ++p) {
      double norm2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double diff = ens.x(p, k, i) - ens.y(p, k, i);
        norm2 += diff * diff;
        max_abs = std::max(max_abs, std::abs(diff));
      }
      mx += ens.x(p, k, 0);
      my += ens.y(p, k, 0);
      mk += ens.kill(p, k);
      sum += std::sqrt(norm2);
      sum2 += norm2;
    }
    const double count = static_cast<double>(ens.n_paths);
    mx /= count;
    my /= count;
    mk /= count;
    const double mean_norm = sum / count;
    const double sd = ens.n_paths > 1 ? std::sqrt(std::max(0.0, (sum2 - count * mean_norm * mean_norm) / (count - 1.0))) : 0.0;
    summaries.push_back({{"step", k}, {"t", ens.times[k]}, {"mean_x", mx}, {"mean_y", my}, {"sd_x_minus_y", sd},
                         {"max_abs_x_minus_y", max_abs}, {"mean_kill", mk}});
    rep.csv_rows.push_back({s.id, std::to_string(k), format_double(ens.times[k]), format_double(mx), format_double(my),
                            format_double(sd), format_double(max_abs), format_double(mk)});
  }

  json cov = support.coverage ? json(*support.coverage) : json(nullptr);
  rep.pass = pass;
  rep.body = common_fields(s, "simulate");
  rep.body["seed"] = cfg.seed;
  rep.body["instance"] = instance_to_json(s);
  rep.body["rho"] = inst.rho();
  rep.body["sim"] = {{"dt", cfg.dt}, {"t_end", cfg.t_end}, {"n_paths", cfg.n_paths}, {"antithetic", cfg.antithetic},
                     {"ensemble_paths", ens.n_paths}, {"fk_time", spec.fk_time}};
  rep.body["fk_mean"] = fk.mean;
  rep.body["fk_stderr"] = fk.std_error;
  rep.body["fk_samples"] = fk.samples;
  rep.body["direct_deficit"] = extended_to_json(direct);
  rep.body["z"] = z ? json(*z) : json(nullptr);
  rep.body["diag_spread"] = support.diag_spread;
  rep.body["max_diagonal_sd"] = support.max_diagonal_sd;
  rep.body["max_abs_diagonal"] = support.max_abs_diagonal;
  rep.body["coverage"] = cov;
  rep.body["points"] = points;
  rep.body["path_summary"] = summaries;
  rep.body["checks"] = checks;
  rep.body["pass"] = pass;
  return rep;
}

std::string render(const std::string& command, std::vector<Report> reports, Format format) {
  std::stable_sort(reports.begin(), reports.end(), [](const Report& a, const Report& b) { return a.id < b.id; });
  const bool pass = std::all_of(reports.begin(), reports.end(), [](const Report& r) { return r.pass; });
  if (format == Format::json) {
    json doc = {{"command", command}, {"version", library_version()}, {"pass", pass}, {"reports", json::array()}};
    for (auto& r : reports) doc["reports"].push_back(std::move(r.body));
    return doc.dump(2) + "\n";
  }
  std::ostringstream out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      const bool quote = cells[i].find_first_of(",\"\n") != std::string::npos;
      if (!quote) {
        out << cells[i];
        continue;
      }
      out << '"';
      for (char c : cells[i]) out << (c == '"' ? "\"\"" : std::string(1, c));
      out << '"';
    }
    out << '\n';
  };
  if (!reports.empty()) line(reports.front().csv_header);
  for (const auto& r : reports) {
    for (const auto& row : r.csv_rows) line(row);
  }
  return out.str();
}

}  // namespace ebl::scenario
