#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diagnostics.hpp"
#include "io.hpp"
#include "scenarios.hpp"

namespace pff {

namespace fs = std::filesystem;

struct RunConfig {
  std::string scenario;       // builtin name
  std::string scenario_file;  // or a scenario file
  std::string scenario_text;  // or the text itself (as stored in run.json)
  ModelKind model = ModelKind::Proposed;
  Density density = Density::Coarse;
  std::string output;
  bool irreversible = true;
  std::optional<double> k_residual, alpha_reg, sk_b;
  std::string snapshots = "all";  // all | none | last | comma separated step indices
  int max_steps = -1;             // negative: whole program

  bool operator==(const RunConfig&) const = default;
};

inline std::string defaultOutputDir(const RunConfig& c, const std::string& scenario_name) {
  const char* root = std::getenv("PFFRAC_OUTPUT_ROOT");
  fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  return (base / (scenario_name + "-" + toString(c.model) + "-" + toString(c.density))).string();
}

// Builtin, file or embedded scenario with the command-line overrides applied.
inline ScenarioSpec resolveScenario(const RunConfig& c) {
  const int sources = !c.scenario.empty() + !c.scenario_file.empty() + !c.scenario_text.empty();
  if (sources != 1) throw InvalidInput("give exactly one of --scenario and --scenario-file");
  ScenarioSpec s;
  if (!c.scenario.empty()) {
    auto b = parseScenario(c.scenario);
    if (!b) throw InvalidInput("unknown scenario '" + c.scenario + "'");
    s = buildScenario(*b, c.density);
  } else if (!c.scenario_file.empty()) {
    s = loadScenarioFile(c.scenario_file);
  } else {
    std::istringstream in(c.scenario_text);
    s = readScenario(in);
  }
  if (c.k_residual) s.k_residual = *c.k_residual;
  if (c.alpha_reg) s.alpha_reg = *c.alpha_reg;
  if (c.sk_b) s.sk_b = *c.sk_b;
  s.material().validate();
  s.validate();
  if (s.isSweep()) throw InvalidInput("scenario '" + s.name + "' is a pointwise sweep; use the sweep command");
  return s;
}

// Which steps get a VTK snapshot.
class SnapshotSelector {
 public:
  explicit SnapshotSelector(const std::string& spec) {
    if (spec == "all" || spec == "none" || spec == "last") {
      mode_ = spec;
      return;
    }
    mode_ = "list";
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      std::size_t pos = 0;
      int v = -1;
      try {
        v = std::stoi(item, &pos);
      } catch (const std::exception&) {
        pos = 0;
      }
      if (pos != item.size() || v < 0) throw InvalidInput("snapshots: expected all, none, last or step indices, got '" + spec + "'");
      steps_.push_back(v);
    }
    if (steps_.empty()) throw InvalidInput("snapshots: empty step list");
  }
  bool wants(int step, int last) const {
    if (mode_ == "all") return true;
    if (mode_ == "none") return false;
    if (mode_ == "last") return step == last;
    return std::find(steps_.begin(), steps_.end(), step) != steps_.end();
  }

 private:
  std::string mode_;
  std::vector<int> steps_;
};

inline nlohmann::json toJson(const RunConfig& c) {
  nlohmann::json j;
  j["scenario"] = c.scenario;
  j["scenario_file"] = c.scenario_file;
  j["model"] = toString(c.model);
  j["density"] = toString(c.density);
  j["output"] = c.output;
  j["irreversible"] = c.irreversible;
  j["k_residual"] = c.k_residual ? nlohmann::json(*c.k_residual) : nlohmann::json(nullptr);
  j["alpha_reg"] = c.alpha_reg ? nlohmann::json(*c.alpha_reg) : nlohmann::json(nullptr);
  j["sk_b"] = c.sk_b ? nlohmann::json(*c.sk_b) : nlohmann::json(nullptr);
  j["snapshots"] = c.snapshots;
  j["max_steps"] = c.max_steps;
  return j;
}

inline RunConfig configFromJson(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.scenario = j.value("scenario", "");
    c.scenario_file = j.value("scenario_file", "");
    const auto m = parseModel(j.at("model").get<std::string>());
    if (!m) throw InvalidInput("config: unknown model '" + j.at("model").get<std::string>() + "'");
    c.model = *m;
    const auto d = parseDensity(j.value("density", "coarse"));
    if (!d) throw InvalidInput("config: unknown density");
    c.density = *d;
    c.output = j.value("output", "");
    c.irreversible = j.value("irreversible", true);
    auto opt = [&](const char* k) -> std::optional<double> {
      if (!j.contains(k) || j.at(k).is_null()) return std::nullopt;
      return j.at(k).get<double>();
    };
    c.k_residual = opt("k_residual");
    c.alpha_reg = opt("alpha_reg");
    c.sk_b = opt("sk_b");
    c.snapshots = j.value("snapshots", "all");
    c.max_steps = j.value("max_steps", -1);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
}

// run.json as written by executeRun: the stored scenario text replaces the original source.
inline RunConfig loadRunJson(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(path + ": " + e.what());
  }
  if (!j.contains("config")) throw InvalidInput(path + ": no 'config' object");
  RunConfig c = configFromJson(j.at("config"));
  if (j.contains("scenario_text")) {
    c.scenario.clear();
    c.scenario_file.clear();
    c.scenario_text = j.at("scenario_text").get<std::string>();
  }
  return c;
}

struct RunResult {
  int status = 0;  // 0 completed, 1 solver failure
  std::string error;
  std::vector<StepRecord> history;
  std::string output_dir;
};

inline RunResult executeRun(RunConfig cfg, std::ostream* log = nullptr) {
  const ScenarioSpec spec = resolveScenario(cfg);
  if (cfg.output.empty()) cfg.output = defaultOutputDir(cfg, spec.name);
  const SnapshotSelector snaps(cfg.snapshots);
  const fs::path out(cfg.output);
  std::error_code ec;
  fs::create_directories(out / "snapshots", ec);
  if (ec) throw InvalidInput("output directory " + cfg.output + ": " + ec.message());
  std::ofstream hist(out / "history.csv");
  if (!hist) throw InvalidInput("output directory " + cfg.output + " is not writable");
  hist << kHistoryHeader << "\n";

  const ScenarioMesh sm = buildMesh(spec);
  PhaseFieldSolver solver(sm.mesh, spec.bcs, sm.crack_nodes, cfg.model, spec.material());
  Controls controls;
  controls.irreversible = cfg.irreversible;
  LoadProgram program = spec.program;
  auto loads = program.values();
  if (cfg.max_steps >= 0 && static_cast<std::size_t>(cfg.max_steps) < loads.size()) loads.resize(cfg.max_steps);
  const int last = static_cast<int>(loads.size()) - 1;

  std::ostringstream spec_text;
  writeScenario(spec_text, spec);
  nlohmann::json doc;
  doc["config"] = toJson(cfg);
  doc["scenario_text"] = spec_text.str();
  doc["mesh"] = {{"nodes", sm.mesh.numNodes()}, {"elements", sm.mesh.numElements()}};
  doc["ell"] = spec.ell;
  if (spec.crack.kind != CrackKind::None) {
    try {
      auto [tip, dir] = spec.crackTip();
      doc["crack"] = {{"tip", {tip.x(), tip.y()}}, {"direction", {dir.x(), dir.y()}}};
    } catch (const InvalidInput&) {
      // through crack: no tip
    }
  }
  doc["steps"] = nlohmann::json::array();

  RunResult res;
  res.output_dir = cfg.output;
  SolutionState st = solver.initialState();
  for (int i = 0; i <= last; ++i) {
    StepReport rep;
    try {
      rep = solver.staggeredStep(st, loads[i], controls);
    } catch (const SolverError& e) {
      res.status = 1;
      res.error = "step " + std::to_string(i) + ": " + e.what();
      doc["failed_step"] = i;
      break;
    }
    StepRecord rec;
    rec.step = i;
    rec.load = loads[i];
    rec.reaction = st.reactions.at(spec.reaction_set);
    rec.max_d = st.d.maxCoeff();
    rec.iterations = rep.iterations;
    rec.converged = rep.converged;
    rec.max_energy_increase = rep.max_energy_increase;
    rec.energy = rep.energy_log.empty() ? 0.0 : rep.energy_log.back();
    rec.set_reactions = st.reactions;
    rec.warnings = rep.warnings;
    res.history.push_back(rec);
    writeHistoryRow(hist, rec);
    hist.flush();
    nlohmann::json reactions = nlohmann::json::object();
    for (const auto& [name, r] : st.reactions) reactions[name] = {r.x(), r.y()};
    doc["steps"].push_back({{"step", i},
                            {"u_D", rec.load},
                            {"iterations", rep.iterations},
                            {"newton_iterations", rep.newton_iterations},
                            {"converged", rep.converged},
                            {"energy", rec.energy},
                            {"max_energy_increase", rep.max_energy_increase},
                            {"reactions", reactions},
                            {"warnings", rep.warnings}});
    if (snaps.wants(i, last)) {
      char name[32];
      std::snprintf(name, sizeof name, "step_%04d.vtk", i);
      writeVtkFile((out / "snapshots" / name).string(), sm.mesh, st.d, st.u, i, loads[i]);
    }
    if (log)
      *log << "step " << i << " u_D=" << fmt17(loads[i]) << " max_d=" << rec.max_d << " iterations=" << rep.iterations
           << (rep.converged ? "" : " (not converged)") << "\n";
  }
  doc["status"] = res.status == 0 ? "completed" : "failed";
  if (res.status != 0) doc["error"] = res.error;
  std::ofstream js(out / "run.json");
  js << doc.dump(2) << "\n";
  if (!js) throw InvalidInput("cannot write run.json in " + cfg.output);
  return res;
}

// Kink angle of the first propagation visible in a run directory's snapshots.
// Baseline is the earliest snapshot; the analysed state is the first one whose new
// d >= 0.9 cells reach 2 ell from the tip, else the last one with any.
inline KinkResult kinkAngleFromRun(const std::string& dir) {
  const fs::path root(dir);
  std::ifstream in(root / "run.json");
  if (!in) throw InvalidInput("no run.json in " + dir);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(dir + "/run.json: " + e.what());
  }
  if (!doc.contains("crack")) throw InvalidInput("run has no crack tip");
  const auto& cr = doc.at("crack");
  const Vec2 tip(cr.at("tip")[0].get<double>(), cr.at("tip")[1].get<double>());
  const Vec2 dir_v(cr.at("direction")[0].get<double>(), cr.at("direction")[1].get<double>());
  const double ell = doc.at("ell").get<double>();

  std::vector<fs::path> files;
  if (fs::is_directory(root / "snapshots"))
    for (const auto& e : fs::directory_iterator(root / "snapshots"))
      if (e.path().extension() == ".vtk") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.size() < 2) throw InvalidInput("kink angle needs at least two snapshots in " + dir);

  const Snapshot base = readVtkFile(files.front().string());
  std::optional<KinkResult> last_ok;
  for (std::size_t k = 1; k < files.size(); ++k) {
    const Snapshot s = readVtkFile(files[k].string());
    if (s.d.size() != base.d.size()) throw InvalidInput("snapshots have different meshes");
    KinkResult r;
    try {
      r = kinkAngle(base.mesh, base.d, s.d, tip, dir_v, 3 * ell);
    } catch (const SolverError&) {
      continue;
    }
    last_ok = r;
    double reach = 0;
    for (int e = 0; e < base.mesh.numElements(); ++e) {
      const auto& t = base.mesh.elements[e];
      const double d1 = (s.d[t[0]] + s.d[t[1]] + s.d[t[2]]) / 3, d0 = (base.d[t[0]] + base.d[t[1]] + base.d[t[2]]) / 3;
      const double dist = (base.mesh.centroid(e) - tip).norm();
      if (d1 >= 0.9 && d0 < 0.9 && dist <= 3 * ell) reach = std::max(reach, dist);
    }
    if (reach >= 2 * ell) return r;
  }
  if (!last_ok) throw SolverError("no crack propagation detected near the tip");
  return *last_ok;
}

}  // namespace pff
