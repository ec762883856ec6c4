#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pffrac/pffrac.hpp"

namespace {

constexpr int kUsage = 2;
constexpr int kSolver = 1;

std::vector<pff::ModelKind> parseModelList(const std::string& s) {
  if (s == "all") return {pff::kAllModels.begin(), pff::kAllModels.end()};
  std::vector<pff::ModelKind> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto m = pff::parseModel(item);
    if (!m) throw pff::InvalidInput("unknown model '" + item + "'");
    out.push_back(*m);
  }
  if (out.empty()) throw pff::InvalidInput("empty model list");
  return out;
}

int cmdSweep(int dim, const std::string& models, int points, const std::string& output, std::optional<double> eps12) {
  const auto kinds = parseModelList(models);
  const auto spec = pff::buildScenario(dim == 2 ? pff::BuiltinScenario::ConstitutiveSweep2D : pff::BuiltinScenario::ConstitutiveSweep3D);
  const auto grid = pff::uniformGrid(points);
  pff::SweepOptions o;
  if (eps12) o.eps12 = *eps12;
  std::vector<std::vector<double>> cols;
  for (auto m : kinds) cols.push_back(pff::constitutiveSweep(dim, m, grid, spec.material(), o));

  std::ofstream file;
  if (!output.empty()) {
    file.open(output);
    if (!file) throw pff::InvalidInput("cannot write " + output);
  }
  std::ostream& os = output.empty() ? std::cout : file;
  os << "d";
  for (auto m : kinds) os << "," << pff::toString(m);
  os << "\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    os << pff::fmt17(grid[i]);
    for (const auto& c : cols) os << "," << pff::fmt17(c[i]);
    os << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-field brittle fracture: benchmarks, constitutive sweeps and crack diagnostics"};
  app.require_subcommand(1);

  pff::RunConfig cfg;
  std::string model_name = "proposed", density_name = "coarse", config_path;
  bool no_irrev = false;
  double k = 0, alpha = 0, skb = 0;

  auto* run = app.add_subcommand("run", "run a finite-element benchmark");
  run->add_option("--scenario", cfg.scenario, "builtin scenario name (see 'scenarios list')");
  run->add_option("--scenario-file", cfg.scenario_file, "scenario file");
  run->add_option("--config", config_path, "run.json of an earlier run to repeat");
  run->add_option("--model", model_name, "constitutive model");
  run->add_option("--density", density_name, "mesh density: coarse, medium, fine");
  run->add_option("--output", cfg.output, "output directory (default $PFFRAC_OUTPUT_ROOT/<scenario>-<model>-<density>)");
  run->add_flag("--no-irreversibility", no_irrev, "allow the phase field to decrease between load steps");
  auto* k_opt = run->add_option("--k", k, "residual stiffness k, in [0, 1)");
  auto* a_opt = run->add_option("--alpha-reg", alpha, "frame regularization alpha, > 0");
  auto* b_opt = run->add_option("--sk-b", skb, "Sargado-Keilegavlen parameter b, nonzero");
  run->add_option("--snapshots", cfg.snapshots, "VTK snapshots: all, none, last or comma separated steps");
  run->add_option("--max-steps", cfg.max_steps, "stop after this many load steps");
  bool quiet = false;
  run->add_flag("-q,--quiet", quiet, "no per-step log");

  int dim = 2, points = 101;
  std::string sweep_models = "all", sweep_out;
  std::optional<double> eps12;
  auto* sweep = app.add_subcommand("sweep", "effective shear degradation sigma12/(2 mu eps12) against d");
  sweep->add_option("--dim", dim, "2 (plane strain) or 3")->check(CLI::IsMember({2, 3}));
  sweep->add_option("--models", sweep_models, "comma separated models or 'all'");
  sweep->add_option("--points", points, "uniform d grid size")->check(CLI::Range(2, 1000000));
  sweep->add_option("--eps12", eps12, "applied shear strain");
  sweep->add_option("--output", sweep_out, "CSV file (default stdout)");

  std::string kink_dir;
  auto* kink = app.add_subcommand("kink-angle", "crack kink angle from a run directory with snapshots");
  kink->add_option("dir", kink_dir, "run output directory")->required();

  auto* scen = app.add_subcommand("scenarios", "builtin scenarios");
  scen->require_subcommand(1);
  auto* list = scen->add_subcommand("list", "list builtin scenario names");
  std::string show_name, show_density = "coarse";
  auto* show = scen->add_subcommand("show", "print a builtin scenario in file form");
  show->add_option("name", show_name)->required();
  show->add_option("--density", show_density);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*run) {
      if (!config_path.empty()) {
        const auto base = pff::loadRunJson(config_path);
        const std::string out = cfg.output;
        cfg = base;
        if (!out.empty()) cfg.output = out;
      } else {
        auto m = pff::parseModel(model_name);
        if (!m) throw pff::InvalidInput("unknown model '" + model_name + "'");
        cfg.model = *m;
        auto d = pff::parseDensity(density_name);
        if (!d) throw pff::InvalidInput("unknown density '" + density_name + "'");
        cfg.density = *d;
        cfg.irreversible = !no_irrev;
        if (*k_opt) cfg.k_residual = k;
        if (*a_opt) cfg.alpha_reg = alpha;
        if (*b_opt) cfg.sk_b = skb;
      }
      const auto res = pff::executeRun(cfg, quiet ? nullptr : &std::cerr);
      if (res.status != 0) {
        std::cerr << "error: " << res.error << "\n";
        return kSolver;
      }
      std::cout << res.output_dir << "\n";
      return 0;
    }
    if (*sweep) return cmdSweep(dim, sweep_models, points, sweep_out, eps12);
    if (*kink) {
      const auto r = pff::kinkAngleFromRun(kink_dir);
      std::printf("%.6f\n", r.angle_deg);
      return 0;
    }
    if (*list) {
      for (auto s : pff::kAllScenarios) std::cout << pff::toString(s) << "\n";
      return 0;
    }
    if (*show) {
      auto s = pff::parseScenario(show_name);
      if (!s) throw pff::InvalidInput("unknown scenario '" + show_name + "'");
      auto d = pff::parseDensity(show_density);
      if (!d) throw pff::InvalidInput("unknown density '" + show_density + "'");
      pff::writeScenario(std::cout, pff::buildScenario(*s, *d));
      return 0;
    }
  } catch (const pff::SolverError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolver;
  } catch (const pff::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
