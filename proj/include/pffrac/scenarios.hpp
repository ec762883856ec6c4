#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "fem2d.hpp"
#include "mesh.hpp"

namespace pff {

enum class BuiltinScenario {
  UniaxialTension,
  UniaxialCompression,
  ThreePointBending,
  Shear,
  ThroughCrackShear,
  CircularLoadPath,
  ConstitutiveSweep2D,
  ConstitutiveSweep3D
};

inline constexpr std::array<BuiltinScenario, 8> kAllScenarios{
    BuiltinScenario::UniaxialTension,   BuiltinScenario::UniaxialCompression, BuiltinScenario::ThreePointBending,
    BuiltinScenario::Shear,             BuiltinScenario::ThroughCrackShear,   BuiltinScenario::CircularLoadPath,
    BuiltinScenario::ConstitutiveSweep2D, BuiltinScenario::ConstitutiveSweep3D};

inline std::string toString(BuiltinScenario s) {
  switch (s) {
    case BuiltinScenario::UniaxialTension: return "tension";
    case BuiltinScenario::UniaxialCompression: return "compression";
    case BuiltinScenario::ThreePointBending: return "bending";
    case BuiltinScenario::Shear: return "shear";
    case BuiltinScenario::ThroughCrackShear: return "through-crack-shear";
    case BuiltinScenario::CircularLoadPath: return "circular-load-path";
    case BuiltinScenario::ConstitutiveSweep2D: return "sweep-2d";
    case BuiltinScenario::ConstitutiveSweep3D: return "sweep-3d";
  }
  return "?";
}

inline std::optional<BuiltinScenario> parseScenario(std::string_view s) {
  for (auto b : kAllScenarios)
    if (toString(b) == s) return b;
  return std::nullopt;
}

enum class Density { Coarse, Medium, Fine };

inline std::string toString(Density d) {
  switch (d) {
    case Density::Coarse: return "coarse";
    case Density::Medium: return "medium";
    case Density::Fine: return "fine";
  }
  return "?";
}

inline std::optional<Density> parseDensity(std::string_view s) {
  for (auto d : {Density::Coarse, Density::Medium, Density::Fine})
    if (toString(d) == s) return d;
  return std::nullopt;
}

// refinement factor of the expected crack region
inline int refinement(Density d) { return d == Density::Coarse ? 1 : (d == Density::Medium ? 2 : 4); }

enum class CrackKind { None, Band, Slit };

struct CrackSpec {
  CrackKind kind = CrackKind::None;
  Vec2 a = Vec2::Zero(), b = Vec2::Zero();
  double band_width = 0;  // band only: d = 1 on nodes within +-width/2 of the segment
  bool operator==(const CrackSpec&) const = default;
};

struct NodeBox {
  std::string name;
  Vec2 lo = Vec2::Zero(), hi = Vec2::Zero();
  bool operator==(const NodeBox&) const = default;
};

struct ScenarioSpec {
  std::string name;
  int sweep_dim = 0;  // 0: finite-element scenario; 2 or 3: pointwise sweep
  // domain [0, width] x [0, height], mm
  double width = 0, height = 0;
  std::vector<AxisSegment> mesh_x, mesh_y;
  CrackSpec crack;
  std::vector<NodeBox> boxes;
  std::vector<DirichletBC> bcs;
  LoadProgram program;
  std::string reaction_set;
  // material as tabulated: GPa, N/mm, mm
  double lambda_gpa = 0, mu_gpa = 0, gc = 0, ell = 0;
  double k_residual = 1e-6, alpha_reg = 566.0, sk_b = 2.0;
  double r_a = 0;  // sweeps: micro-crack length ratio

  MaterialParams material() const {
    MaterialParams m;
    m.lambda = lambda_gpa * 1000.0;
    m.mu = mu_gpa * 1000.0;
    m.gc = gc;
    m.ell = ell;
    m.k_residual = k_residual;
    m.alpha_reg = alpha_reg;
    m.sk_b = sk_b;
    return m;
  }

  bool isSweep() const { return sweep_dim != 0; }

  // tip inside the domain and unit direction of growth
  std::pair<Vec2, Vec2> crackTip() const {
    if (crack.kind == CrackKind::None) throw InvalidInput("scenario has no initial crack");
    auto inside = [&](const Vec2& p) {
      const double t = 1e-9 * std::max(width, height);
      return p.x() > t && p.x() < width - t && p.y() > t && p.y() < height - t;
    };
    if (inside(crack.b)) return {crack.b, (crack.b - crack.a).normalized()};
    if (inside(crack.a)) return {crack.a, (crack.a - crack.b).normalized()};
    throw InvalidInput("crack has no tip inside the domain");
  }

  void validate() const {
    auto bad = [](const std::string& field, const std::string& why) { throw InvalidInput(field + ": " + why); };
    if (name.empty()) bad("name", "must not be empty");
    if (sweep_dim != 0 && sweep_dim != 2 && sweep_dim != 3) bad("sweep_dim", "must be 0, 2 or 3");
    if (!(std::isfinite(lambda_gpa))) bad("lambda", "must be finite");
    if (!(mu_gpa > 0)) bad("mu", "must be positive");
    if (!(lambda_gpa + 2 * mu_gpa > 0)) bad("lambda", "lambda + 2 mu must be positive");
    if (!(k_residual >= 0 && k_residual < 1)) bad("k_residual", "must lie in [0, 1)");
    if (!(alpha_reg > 0)) bad("alpha_reg", "must be positive");
    if (!(std::isfinite(sk_b) && sk_b != 0)) bad("sk_b", "must be finite and nonzero");
    if (isSweep()) {
      if (!(r_a >= 0 && r_a < 1)) bad("r_a", "must lie in [0, 1)");
      return;
    }
    if (!(gc > 0)) bad("gc", "must be positive");
    if (!(ell > 0)) bad("ell", "must be positive");
    if (!(width > 0)) bad("width", "must be positive");
    if (!(height > 0)) bad("height", "must be positive");
    if (mesh_x.empty() || mesh_x.back().end != width) bad("mesh_x", "must end at the domain width");
    if (mesh_y.empty() || mesh_y.back().end != height) bad("mesh_y", "must end at the domain height");
    const double t = 1e-9 * std::max(width, height);
    auto inDomain = [&](const Vec2& p) {
      return p.allFinite() && p.x() >= -t && p.x() <= width + t && p.y() >= -t && p.y() <= height + t;
    };
    if (crack.kind != CrackKind::None) {
      if (!inDomain(crack.a) || !inDomain(crack.b)) bad("crack", "lies outside the domain");
      if ((crack.a - crack.b).norm() <= t) bad("crack", "has zero length");
      if (crack.kind == CrackKind::Band && !(crack.band_width > 0)) bad("crack", "band width must be positive");
    }
    std::set<std::string> sets{"left", "right", "bottom", "top"};
    for (const auto& bx : boxes) {
      if (bx.name.empty()) bad("box", "needs a name");
      if (!inDomain(bx.lo) || !inDomain(bx.hi)) bad("box", "'" + bx.name + "' lies outside the domain");
      sets.insert(bx.name);
    }
    if (crack.kind == CrackKind::Band) sets.insert("crack");
    if (crack.kind == CrackKind::Slit) sets.insert("slit");
    for (const auto& bc : bcs) {
      if (!sets.count(bc.set)) bad("bc", "unknown node set '" + bc.set + "'");
      if (bc.component != 0 && bc.component != 1) bad("bc", "component must be 0 or 1");
      if (!std::isfinite(bc.scale)) bad("bc", "scale must be finite");
    }
    if (bcs.empty()) bad("bc", "at least one boundary condition is required");
    if (!sets.count(reaction_set)) bad("reaction_set", "unknown node set '" + reaction_set + "'");
    program.validate();
  }

  bool operator==(const ScenarioSpec&) const = default;
};

struct ScenarioMesh {
  Mesh mesh;
  std::vector<int> crack_nodes;
};

inline ScenarioMesh buildMesh(const ScenarioSpec& spec) {
  spec.validate();
  if (spec.isSweep()) throw InvalidInput("sweep scenarios have no mesh");
  ScenarioMesh out;
  Mesh& m = out.mesh;
  m = gridMesh(gradedAxis(0.0, spec.mesh_x), gradedAxis(0.0, spec.mesh_y));
  if (spec.crack.kind == CrackKind::Slit) cutSlit(m, spec.crack.a, spec.crack.b);
  for (const auto& bx : spec.boxes) {
    auto ids = nodesInBox(m, bx.lo, bx.hi);
    if (ids.empty()) throw InvalidInput("box '" + bx.name + "' contains no mesh nodes");
    m.node_sets[bx.name] = ids;
  }
  if (spec.crack.kind == CrackKind::Band) {
    const auto& c = spec.crack;
    const Vec2 dir = (c.b - c.a).normalized();
    const Vec2 nrm(-dir.y(), dir.x());
    const double len = (c.b - c.a).norm(), tol = 1e-9 * std::max(spec.width, spec.height);
    std::set<long long> offsets;
    for (int v = 0; v < m.numNodes(); ++v) {
      const Vec2 r = m.nodes[v] - c.a;
      const double s = r.dot(dir), o = r.dot(nrm);
      if (s < -tol || s > len + tol || std::abs(o) > 0.5 * c.band_width + tol) continue;
      out.crack_nodes.push_back(v);
      offsets.insert(std::llround(o / tol));
    }
    if (offsets.size() < 2) throw InvalidInput("crack band must span at least two node rows of the mesh");
    m.node_sets["crack"] = out.crack_nodes;
  }
  m.validate();
  return out;
}

// ---- built-in scenarios ----

namespace detail {

inline ScenarioSpec tableMaterial(ScenarioSpec s, double lam, double mu, double gc, double ell) {
  s.lambda_gpa = lam;
  s.mu_gpa = mu;
  s.gc = gc;
  s.ell = ell;
  return s;
}

inline ScenarioSpec squareWithCrack(const std::string& name, Density density, bool compression) {
  const int r = refinement(density);
  ScenarioSpec s = tableMaterial({}, 121.15, 80.77, 2.7, 40);
  s.name = name;
  s.width = s.height = 1000;
  // ligament rows at hf / 2, the rest of the band region at hf
  const double hf = 20.0 / r, hq = hf / 2, hc = 50.0;
  s.mesh_x = {{500, hf}, {1000, hq}};
  s.mesh_y = {{400, hc}, {480, hf}, {500 - hq / 2, hq}, {500 + hq / 2, hq}, {520, hq}, {600, hf}, {1000, hc}};
  s.crack = {CrackKind::Band, Vec2(0, 500), Vec2(500, 500), hq};
  const double sgn = compression ? -1.0 : 1.0;
  s.bcs = {{"top", 0, 0.0}, {"top", 1, sgn}, {"bottom", 0, 0.0}, {"bottom", 1, -sgn}};
  s.reaction_set = "top";
  s.program = compression ? LoadProgram{0.0, {{0.07, 0.01}, {0.08, 0.0005}}}
                          : LoadProgram{0.0, {{0.07, 0.01}, {0.1, 0.0005}}};
  return s;
}

inline ScenarioSpec throughCrack(const std::string& name, Density density) {
  const int r = refinement(density);
  ScenarioSpec s = tableMaterial({}, 121.15, 80.77, 2.7, 3.125);
  s.name = name;
  s.width = s.height = 100;
  // odd cell count so one row of cells straddles y = 50
  const double h = 100.0 / (36 * r + 1);
  s.mesh_x = {{100, h}};
  s.mesh_y = {{50 - h / 2, h}, {50 + h / 2, h}, {100, h}};
  s.crack = {CrackKind::Band, Vec2(0, 50), Vec2(100, 50), h};
  s.reaction_set = "top";
  return s;
}

}  // namespace detail

inline ScenarioSpec buildScenario(BuiltinScenario which, Density density = Density::Coarse) {
  const int r = refinement(density);
  ScenarioSpec s;
  switch (which) {
    case BuiltinScenario::UniaxialTension: return detail::squareWithCrack("tension", density, false);
    case BuiltinScenario::UniaxialCompression: return detail::squareWithCrack("compression", density, true);
    case BuiltinScenario::ThreePointBending: {
      s = detail::tableMaterial({}, 8, 12, 0.5, 0.06);
      s.name = "bending";
      s.width = 8;
      s.height = 2;
      const double hf = 0.06 / r, hc = 0.2;
      s.mesh_x = {{3.7, hc}, {4.0, hf}, {4.3, hf}, {8, hc}};
      s.mesh_y = {{0.4, hf}, {2.0, hf}};
      s.crack = {CrackKind::Slit, Vec2(4, 0), Vec2(4, 0.4), 0};
      s.boxes = {{"patch", Vec2(3.7, 2), Vec2(4.3, 2)},
                 {"left_support", Vec2(0, 0), Vec2(0, 0)},
                 {"right_support", Vec2(8, 0), Vec2(8, 0)}};
      s.bcs = {{"patch", 0, 0.0}, {"patch", 1, -1.0}, {"left_support", 0, 0.0}, {"left_support", 1, 0.0},
               {"right_support", 1, 0.0}};
      s.reaction_set = "patch";
      s.program = {0.0, {{0.04, 0.01}, {0.05, 0.002}, {0.12, 0.01}}};
      return s;
    }
    case BuiltinScenario::Shear: {
      s = detail::tableMaterial({}, 121.15, 80.77, 2.7, 3.125);
      s.name = "shear";
      s.width = s.height = 100;
      const double hf = 1.25 / r, hc = 4.0;
      s.mesh_x = {{42, hc}, {50, hf}, {70, hf}, {100, hc}};
      s.mesh_y = {{30, hc}, {50, hf}, {58, hf}, {100, hc}};
      s.crack = {CrackKind::Slit, Vec2(0, 50), Vec2(50, 50), 0};
      s.bcs = {{"top", 0, 1.0}, {"top", 1, 0.0}, {"bottom", 0, -1.0}, {"bottom", 1, 0.0}};
      s.reaction_set = "top";
      s.program = {0.0, {{0.05, 0.01}, {0.06, 0.001}, {0.1, 0.01}}};
      return s;
    }
    case BuiltinScenario::ThroughCrackShear: {
      s = detail::throughCrack("through-crack-shear", density);
      s.bcs = {{"top", 0, 1.0}, {"top", 1, 0.0}, {"bottom", 0, -1.0}, {"bottom", 1, 0.0}};
      s.program = {0.0, {{0.01, 0.01}}};
      return s;
    }
    case BuiltinScenario::CircularLoadPath: {
      s = detail::throughCrack("circular-load-path", density);
      const double du = 0.01;
      s.bcs = {{"bottom", 0, 0.0}, {"bottom", 1, 0.0}, {"top", 0, du, Profile::Sin}, {"top", 1, du, Profile::OnePlusCos}};
      // load parameter is theta
      s.program = {0.0, {{std::numbers::pi, std::numbers::pi / 4}}};
      return s;
    }
    case BuiltinScenario::ConstitutiveSweep2D:
    case BuiltinScenario::ConstitutiveSweep3D: {
      s = detail::tableMaterial({}, 1.1538, 0.76923, 0, 0);
      s.name = toString(which);
      s.sweep_dim = which == BuiltinScenario::ConstitutiveSweep2D ? 2 : 3;
      s.k_residual = 0.0;
      s.r_a = 0.4;
      return s;
    }
  }
  throw InvalidInput("unknown scenario");
}

// ---- scenario files ----
//
//   # comment
//   key = value
//
// Lists (mesh_x, mesh_y, load) are comma separated "end@step" pairs; bc and box
// may repeat. Material moduli are in GPa.

// shortest text that reads back to the same double
inline std::string formatNumber(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

inline void writeScenario(std::ostream& os, const ScenarioSpec& s) {
  auto pairs = [](const auto& segs, auto first, auto second) {
    std::string out;
    for (const auto& x : segs) {
      if (!out.empty()) out += ", ";
      out += formatNumber(first(x)) + "@" + formatNumber(second(x));
    }
    return out;
  };
  auto num = [](double v) { return formatNumber(v); };
  os << "name = " << s.name << "\n";
  if (s.isSweep()) {
    os << "sweep_dim = " << s.sweep_dim << "\n";
    os << "r_a = " << num(s.r_a) << "\n";
  }
  os << "lambda = " << num(s.lambda_gpa) << "\n";
  os << "mu = " << num(s.mu_gpa) << "\n";
  os << "gc = " << num(s.gc) << "\n";
  os << "ell = " << num(s.ell) << "\n";
  os << "k_residual = " << num(s.k_residual) << "\n";
  os << "alpha_reg = " << num(s.alpha_reg) << "\n";
  os << "sk_b = " << num(s.sk_b) << "\n";
  if (s.isSweep()) return;
  os << "width = " << num(s.width) << "\n";
  os << "height = " << num(s.height) << "\n";
  auto segEnd = [](const AxisSegment& a) { return a.end; };
  auto segH = [](const AxisSegment& a) { return a.h; };
  os << "mesh_x = " << pairs(s.mesh_x, segEnd, segH) << "\n";
  os << "mesh_y = " << pairs(s.mesh_y, segEnd, segH) << "\n";
  const auto& c = s.crack;
  if (c.kind == CrackKind::None) {
    os << "crack = none\n";
  } else {
    os << "crack = " << (c.kind == CrackKind::Band ? "band " : "slit ") << num(c.a.x()) << " " << num(c.a.y()) << " "
       << num(c.b.x()) << " " << num(c.b.y());
    if (c.kind == CrackKind::Band) os << " " << num(c.band_width);
    os << "\n";
  }
  for (const auto& b : s.boxes)
    os << "box = " << b.name << " " << num(b.lo.x()) << " " << num(b.lo.y()) << " " << num(b.hi.x()) << " "
       << num(b.hi.y()) << "\n";
  for (const auto& b : s.bcs)
    os << "bc = " << b.set << " " << (b.component == 0 ? "x" : "y") << " " << num(b.scale) << " " << toString(b.profile)
       << "\n";
  os << "reaction_set = " << s.reaction_set << "\n";
  os << "load_start = " << num(s.program.start) << "\n";
  os << "load = "
     << pairs(s.program.segments, [](const LoadSegment& x) { return x.target; },
              [](const LoadSegment& x) { return x.increment; })
     << "\n";
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> w;
  for (std::string t; is >> t;) w.push_back(t);
  return w;
}

inline std::vector<std::array<double, 2>> atPairs(const std::string& v, int line) {
  std::vector<std::array<double, 2>> out;
  std::string item;
  std::istringstream is(v);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    const auto at = item.find('@');
    if (at == std::string::npos) throw ParseError("expected 'end@step', got '" + item + "'", line);
    out.push_back({parseNumber(trim(item.substr(0, at)), line), parseNumber(trim(item.substr(at + 1)), line)});
  }
  if (out.empty()) throw ParseError("empty list", line);
  return out;
}

}  // namespace detail

inline ScenarioSpec readScenario(std::istream& is) {
  ScenarioSpec s;
  s.bcs.clear();
  std::set<std::string> seen;
  std::map<std::string, int> line_of;
  static const std::set<std::string> repeatable{"bc", "box"};
  static const std::set<std::string> known{"name",  "sweep_dim", "r_a",    "lambda",       "mu",         "gc",
                                           "ell",   "k_residual", "alpha_reg", "sk_b",     "width",      "height",
                                           "mesh_x", "mesh_y",   "crack",  "box",          "bc",         "reaction_set",
                                           "load_start", "load"};
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    if (auto h = raw.find('#'); h != std::string::npos) raw.erase(h);
    raw = detail::trim(raw);
    if (raw.empty()) continue;
    const auto eq = raw.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line);
    const std::string key = detail::trim(raw.substr(0, eq)), val = detail::trim(raw.substr(eq + 1));
    if (!known.count(key)) throw ParseError("unknown key '" + key + "'", line);
    if (!repeatable.count(key) && !seen.insert(key).second) throw ParseError("duplicate key '" + key + "'", line);
    line_of[key] = line;
    auto number = [&] { return detail::parseNumber(val, line); };
    const auto w = detail::words(val);
    if (key == "name") {
      if (w.size() != 1) throw ParseError("name must be a single word", line);
      s.name = val;
    } else if (key == "sweep_dim") {
      s.sweep_dim = static_cast<int>(number());
    } else if (key == "r_a") {
      s.r_a = number();
    } else if (key == "lambda") {
      s.lambda_gpa = number();
    } else if (key == "mu") {
      s.mu_gpa = number();
    } else if (key == "gc") {
      s.gc = number();
    } else if (key == "ell") {
      s.ell = number();
    } else if (key == "k_residual") {
      s.k_residual = number();
    } else if (key == "alpha_reg") {
      s.alpha_reg = number();
    } else if (key == "sk_b") {
      s.sk_b = number();
    } else if (key == "width") {
      s.width = number();
    } else if (key == "height") {
      s.height = number();
    } else if (key == "mesh_x" || key == "mesh_y") {
      auto& segs = key == "mesh_x" ? s.mesh_x : s.mesh_y;
      for (auto [e, h] : detail::atPairs(val, line)) segs.push_back({e, h});
    } else if (key == "load") {
      for (auto [t, inc] : detail::atPairs(val, line)) s.program.segments.push_back({t, inc});
    } else if (key == "load_start") {
      s.program.start = number();
    } else if (key == "reaction_set") {
      s.reaction_set = val;
    } else if (key == "crack") {
      if (w.size() == 1 && w[0] == "none") {
        s.crack = {};
      } else if ((w.size() == 5 && w[0] == "slit") || (w.size() == 6 && w[0] == "band")) {
        s.crack.kind = w[0] == "slit" ? CrackKind::Slit : CrackKind::Band;
        s.crack.a = Vec2(detail::parseNumber(w[1], line), detail::parseNumber(w[2], line));
        s.crack.b = Vec2(detail::parseNumber(w[3], line), detail::parseNumber(w[4], line));
        s.crack.band_width = w.size() == 6 ? detail::parseNumber(w[5], line) : 0.0;
      } else {
        throw ParseError("crack must be 'none', 'slit x0 y0 x1 y1' or 'band x0 y0 x1 y1 width'", line);
      }
    } else if (key == "box") {
      if (w.size() != 5) throw ParseError("box must be 'name xmin ymin xmax ymax'", line);
      s.boxes.push_back({w[0], Vec2(detail::parseNumber(w[1], line), detail::parseNumber(w[2], line)),
                         Vec2(detail::parseNumber(w[3], line), detail::parseNumber(w[4], line))});
    } else if (key == "bc") {
      if (w.size() != 4) throw ParseError("bc must be 'set x|y scale profile'", line);
      if (w[1] != "x" && w[1] != "y") throw ParseError("bc component must be x or y", line);
      auto prof = parseProfile(w[3]);
      if (!prof) throw ParseError("unknown load profile '" + w[3] + "'", line);
      s.bcs.push_back({w[0], w[1] == "x" ? 0 : 1, detail::parseNumber(w[2], line), *prof});
    }
  }
  try {
    s.validate();
  } catch (const InvalidInput& e) {
    // point at the offending key when it appeared in the file
    const std::string msg = e.what();
    const std::string field = msg.substr(0, msg.find(':'));
    auto it = line_of.find(field);
    throw ParseError(msg, it == line_of.end() ? 0 : it->second);
  }
  return s;
}

inline ScenarioSpec loadScenarioFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open scenario file " + path);
  return readScenario(in);
}

// ---- constitutive sweeps ----

struct SweepOptions {
  double eps12 = 1.666e-6;
  double eps33 = -1e-6;  // 3D only
  const ShearFitTable* shear_fit = nullptr;
};

// sigma_12 / (2 mu eps_12) with the crack normal fixed to e2
inline std::vector<double> constitutiveSweep(int dim, ModelKind model, const std::vector<double>& d_grid,
                                             const MaterialParams& mat, const SweepOptions& o = {}) {
  if (dim != 2 && dim != 3) throw InvalidInput("sweep dimension must be 2 or 3");
  if (!(o.eps12 != 0 && std::isfinite(o.eps12))) throw InvalidInput("sweep shear strain must be finite and nonzero");
  const SymTensor3 eps = SymTensor3::fromComponents(0, 0, dim == 3 ? o.eps33 : 0.0, 0, 0, o.eps12);
  EvalOptions opts;
  opts.shear_fit = o.shear_fit;
  opts.crack_normal = Vec3(0, 1, 0);
  std::vector<double> out;
  out.reserve(d_grid.size());
  for (double d : d_grid) {
    requirePhase(d);
    PhasePoint ph{d, Vec3(0, 1, 0)};
    const auto r = evaluate(model, eps, ph, mat, opts);
    out.push_back(r.sigma(0, 1) / (2.0 * mat.mu * o.eps12));
  }
  return out;
}

inline std::vector<double> uniformGrid(int n) {
  if (n < 2) throw InvalidInput("grid needs at least two points");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = static_cast<double>(i) / (n - 1);
  g.back() = 1.0;
  return g;
}

}  // namespace pff
