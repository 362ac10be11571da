// Command-line front end: deficit, pde-check, simulate and catalog.
// Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration error.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ebl/errors.hpp"
#include "scenario/catalog.hpp"
#include "scenario/pool.hpp"
#include "scenario/runners.hpp"

namespace {

using namespace ebl::scenario;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;

struct Common {
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  std::vector<std::string> configs;
  std::optional<std::string> filter;
};

void add_common(CLI::App& cmd, Common& c) {
  cmd.add_option("--seed", c.seed, "Override the scenario seed (U64)");
  cmd.add_option("--tol", c.tol, "Override the primary tolerance of the command")->check(CLI::PositiveNumber);
  cmd.add_option("--out", c.out, "Write the report to PATH instead of stdout");
  cmd.add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "csv"}));
}

int emit(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return kExitOk;
  }
  std::ofstream file(out, std::ios::binary);
  file << text;
  if (!file) {
    std::cerr << "error: cannot write " << out << "\n";
    return kExitUsage;
  }
  return kExitOk;
}

using Runner = Report (*)(const Scenario&, const RunOptions&);

int run_scenarios(const std::string& command, Runner runner, const Common& c, unsigned workers) {
  std::vector<Scenario> scenarios;
  for (const auto& path : c.configs) scenarios.push_back(load_scenario(path));
  const RunOptions options{c.seed, c.tol};
  auto reports = parallel_map(scenarios, [&](const Scenario& s) { return runner(s, options); }, workers);
  bool pass = true;
  for (const auto& r : reports) pass = pass && r.pass;
  const int written = emit(render(command, std::move(reports), c.format == "csv" ? Format::csv : Format::json), c.out);
  if (written != kExitOk) return written;
  return pass ? kExitOk : kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian functional-inequality laboratory"};
  app.require_subcommand(1);
  Common c;

  auto* deficit = app.add_subcommand("deficit", "Deficit, condition (A), (B) sampling and equality verdict");
  auto* pde = app.add_subcommand("pde-check", "Finite-difference residual of the parabolic equation over a dt ladder");
  auto* simulate = app.add_subcommand("simulate", "Diffusion paths, Feynman-Kac estimate and dichotomy diagnostics");
  auto* catalog = app.add_subcommand("catalog", "Regenerate and classify the equality-family fixture suite");
  for (auto* cmd : {deficit, pde, simulate}) {
    add_common(*cmd, c);
    cmd->add_option("--config", c.configs, "Scenario file (repeatable)")->required()->check(CLI::ExistingFile);
  }
  add_common(*catalog, c);
  catalog->add_option("--filter", c.filter, "Keep rows whose id or family contains TEXT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (deficit->parsed()) return run_scenarios("deficit", &run_deficit, c, 0);
    if (pde->parsed()) return run_scenarios("pde-check", &run_pde_check, c, 0);
    // Path simulation already uses every core; scenarios run one at a time.
    if (simulate->parsed()) return run_scenarios("simulate", &run_simulate, c, 1);
    Report rep = run_catalog(RunOptions{c.seed, c.tol}, c.filter);
    const bool pass = rep.pass;
    std::vector<Report> reports;
    reports.push_back(std::move(rep));
    const int written = emit(render("catalog", std::move(reports), c.format == "csv" ? Format::csv : Format::json), c.out);
    if (written != kExitOk) return written;
    return pass ? kExitOk : kExitCheckFailed;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ebl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
