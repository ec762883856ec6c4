#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "pffrac/scenarios.hpp"

using namespace pff;

namespace {

const std::string kDataDir = PFFRAC_DATA_DIR;

std::map<std::string, std::vector<std::string>> materialsCsv() {
  std::ifstream in(kDataDir + "/materials_v1.csv");
  std::map<std::string, std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    if (line.back() == ',') cells.push_back("");
    rows[cells[0]] = {cells.begin() + 1, cells.end()};
  }
  return rows;
}

ScenarioSpec reparse(const ScenarioSpec& s) {
  std::stringstream ss;
  writeScenario(ss, s);
  return readScenario(ss);
}

int parseErrorLine(const std::string& text) {
  std::istringstream is(text);
  try {
    readScenario(is);
  } catch (const ParseError& e) {
    return e.line;
  }
  return -1;
}

std::string tensionText() {
  std::stringstream ss;
  writeScenario(ss, buildScenario(BuiltinScenario::UniaxialTension));
  return ss.str();
}

}  // namespace

TEST(Scenarios, NamesRoundTrip) {
  for (auto s : kAllScenarios) EXPECT_EQ(parseScenario(toString(s)), s);
  EXPECT_FALSE(parseScenario("tensile"));
  EXPECT_EQ(parseDensity("fine"), Density::Fine);
  EXPECT_FALSE(parseDensity("ultra"));
}

TEST(Scenarios, MeshesValidAtAllDensities) {
  for (auto which : kAllScenarios) {
    for (auto density : {Density::Coarse, Density::Medium, Density::Fine}) {
      const auto spec = buildScenario(which, density);
      SCOPED_TRACE(spec.name + " " + toString(density));
      ASSERT_NO_THROW(spec.validate());
      if (spec.isSweep()) continue;
      const auto sm = buildMesh(spec);
      EXPECT_NO_THROW(sm.mesh.validate());
      const auto dofs = makeDofSystem(sm.mesh, spec.bcs);
      EXPECT_NO_THROW(checkFloatingSubdomains(sm.mesh, dofs));
      if (density == Density::Coarse) EXPECT_LE(sm.mesh.numElements(), 5000);
      if (spec.crack.kind == CrackKind::Band) EXPECT_FALSE(sm.crack_nodes.empty());
    }
  }
}

TEST(Scenarios, ThroughCrackCoarseWithinElementBudget) {
  const auto sm = buildMesh(buildScenario(BuiltinScenario::ThroughCrackShear));
  EXPECT_LE(sm.mesh.numElements(), 3000);
  // the band covers the whole width
  std::set<double> xs;
  for (int v : sm.crack_nodes) xs.insert(sm.mesh.nodes[v].x());
  EXPECT_EQ(*xs.begin(), 0.0);
  EXPECT_EQ(*xs.rbegin(), 100.0);
}

TEST(Scenarios, MaterialValuesMatchShippedTable) {
  const auto rows = materialsCsv();
  ASSERT_EQ(rows.size(), kAllScenarios.size());
  for (auto which : kAllScenarios) {
    const auto s = buildScenario(which);
    SCOPED_TRACE(s.name);
    ASSERT_TRUE(rows.count(s.name));
    const auto& r = rows.at(s.name);
    EXPECT_EQ(formatNumber(s.lambda_gpa), r[0]);
    EXPECT_EQ(formatNumber(s.mu_gpa), r[1]);
    if (s.isSweep()) {
      EXPECT_EQ(formatNumber(s.r_a), r[4]);
    } else {
      EXPECT_EQ(formatNumber(s.gc), r[2]);
      EXPECT_EQ(formatNumber(s.ell), r[3]);
    }
  }
}

TEST(Scenarios, LoadPrograms) {
  const auto t = buildScenario(BuiltinScenario::UniaxialTension).program.values();
  EXPECT_EQ(t.front(), 0.0);
  EXPECT_EQ(t.back(), 0.1);
  // 7 coarse steps, then 60 fine ones
  EXPECT_EQ(t.size(), 1u + 7u + 60u);
  EXPECT_NEAR(t[8] - t[7], 0.0005, 1e-15);

  const auto sh = buildScenario(BuiltinScenario::Shear).program.values();
  EXPECT_NEAR(sh[6] - sh[5], 0.001, 1e-15);
  EXPECT_NEAR(sh.back(), 0.1, 0);

  const auto c = buildScenario(BuiltinScenario::CircularLoadPath);
  const auto th = c.program.values();
  ASSERT_EQ(th.size(), 5u);
  EXPECT_EQ(th.back(), std::numbers::pi);
  // u_D = du sin(theta) e1 + du (1 + cos(theta)) e2 on the top edge
  for (double theta : th) {
    for (const auto& bc : c.bcs) {
      if (bc.set != "top") continue;
      const double expect = bc.component == 0 ? 0.01 * std::sin(theta) : 0.01 * (1 + std::cos(theta));
      EXPECT_NEAR(bc.value(theta), expect, 1e-16);
    }
  }
}

TEST(Scenarios, FileRoundTripAllBuiltins) {
  for (auto which : kAllScenarios) {
    for (auto density : {Density::Coarse, Density::Fine}) {
      const auto s = buildScenario(which, density);
      SCOPED_TRACE(s.name);
      EXPECT_EQ(reparse(s), s);
    }
  }
}

TEST(Scenarios, LoadScenarioFileEqualsBuiltin) {
  const std::string path = ::testing::TempDir() + "tension_echo.scn";
  {
    std::ofstream out(path);
    out << "# tension echo\n" << tensionText();
  }
  EXPECT_EQ(loadScenarioFile(path), buildScenario(BuiltinScenario::UniaxialTension));
  EXPECT_THROW(loadScenarioFile(path + ".missing"), InvalidInput);
}

TEST(Scenarios, NegativeMuNamesField) {
  std::string text = tensionText();
  const auto at = text.find("mu = ");
  text.replace(at, text.find('\n', at) - at, "mu = -80.77");
  std::istringstream is(text);
  try {
    readScenario(is);
    FAIL() << "accepted negative mu";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("mu"), std::string::npos);
    EXPECT_GT(e.line, 0);
  }
}

TEST(Scenarios, CrackOutsideDomainRejected) {
  auto s = buildScenario(BuiltinScenario::Shear);
  s.crack.a = Vec2(-10, 50);
  EXPECT_THROW(s.validate(), InvalidInput);
  std::string text = tensionText();
  const auto at = text.find("crack = ");
  text.replace(at, text.find('\n', at) - at, "crack = band 0 1500 500 1500 20");
  EXPECT_GT(parseErrorLine(text), 0);
}

TEST(Scenarios, UnknownKeyAndSyntaxErrorsCarryLine) {
  EXPECT_EQ(parseErrorLine("name = x\nfoo = 1\n"), 2);
  EXPECT_EQ(parseErrorLine("name = x\n\n# c\nwidth 3\n"), 4);
  EXPECT_EQ(parseErrorLine("name = x\nwidth = 1\nwidth = 2\n"), 3);
  EXPECT_EQ(parseErrorLine("name = x\nmesh_x = 10@1, 20\n"), 2);
  EXPECT_EQ(parseErrorLine("name = x\nbc = top z 1 linear\n"), 2);
  EXPECT_EQ(parseErrorLine("name = x\nwidth = 1e400\n"), 2);
}

TEST(Scenarios, BandCrackNeedsTwoRows) {
  auto s = buildScenario(BuiltinScenario::UniaxialTension);
  s.crack.band_width = 1.0;
  EXPECT_THROW(buildMesh(s), InvalidInput);
}

TEST(Scenarios, CrackTip) {
  auto [tip, dir] = buildScenario(BuiltinScenario::Shear).crackTip();
  EXPECT_EQ(tip, Vec2(50, 50));
  EXPECT_EQ(dir, Vec2(1, 0));
  EXPECT_THROW(buildScenario(BuiltinScenario::ThroughCrackShear).crackTip(), InvalidInput);
}

TEST(Scenarios, BendingSupportsAndPatch) {
  const auto spec = buildScenario(BuiltinScenario::ThreePointBending, Density::Medium);
  const auto sm = buildMesh(spec);
  for (int v : sm.mesh.nodeSet("patch")) {
    EXPECT_EQ(sm.mesh.nodes[v].y(), 2.0);
    EXPECT_GE(sm.mesh.nodes[v].x(), 3.7 - 1e-12);
    EXPECT_LE(sm.mesh.nodes[v].x(), 4.3 + 1e-12);
  }
  ASSERT_EQ(sm.mesh.nodeSet("left_support").size(), 1u);
  ASSERT_EQ(sm.mesh.nodeSet("right_support").size(), 1u);
  EXPECT_EQ(sm.mesh.nodes[sm.mesh.nodeSet("right_support")[0]], Vec2(8, 0));
  // notch faces are split
  EXPECT_FALSE(sm.mesh.nodeSet("slit").empty());
}

// affine uniaxial plane-strain field on the graded tension mesh
TEST(Scenarios, TensionMeshUndamagedStiffness) {
  auto spec = buildScenario(BuiltinScenario::UniaxialTension);
  spec.crack = {};
  spec.bcs = {{"left", 0, 0.0}, {"top", 1, 1.0}, {"bottom", 1, -1.0}};
  const auto sm = buildMesh(spec);
  const auto mat = spec.material();
  PhaseFieldSolver solver(sm.mesh, spec.bcs, {}, ModelKind::Isotropic, mat);
  auto st = solver.initialState();
  solver.applyLoad(st, 0.01);
  solver.solveDisplacement(st, Controls{});
  solver.updateReactions(st);
  const double eyy = 0.02 / 1000.0;
  const double eprime = 4 * mat.mu * (mat.lambda + mat.mu) / (mat.lambda + 2 * mat.mu);
  // g(0) = 1 + k
  EXPECT_NEAR(st.reactions.at("top").y() / ((1 + mat.k_residual) * eprime * eyy * 1000.0), 1.0, 1e-8);
}

TEST(Sweep, TwoDimensionalClosedForms) {
  const auto spec = buildScenario(BuiltinScenario::ConstitutiveSweep2D);
  const auto mat = spec.material();
  ASSERT_EQ(mat.k_residual, 0.0);
  const auto grid = uniformGrid(101);
  // sweep Lame pair is nu = 0.3 to printed precision
  const double a = 0.1281, b = -0.8783;
  for (auto model : kAllModels) {
    const auto r = constitutiveSweep(2, model, grid, mat);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double d = grid[i], x = 1 - d;
      double expect = x * x;
      if (model == ModelKind::Spectral) expect = (x * x + 1) / 2;
      if (model == ModelKind::SK) {
        const double sb = mat.sk_b, e = std::exp(sb);
        expect = (std::exp(sb * d) - (sb * (d - 1) + 1) * e) / ((sb - 1) * e + 1);
      }
      if (model == ModelKind::Proposed) expect = 1 + (x * x - 1) * (a * x * x + b * x + 1);
      if (model == ModelKind::Wu) continue;
      EXPECT_NEAR(r[i], expect, 1e-12) << toString(model) << " d=" << d;
    }
  }
  EXPECT_EQ(constitutiveSweep(2, ModelKind::Proposed, {1.0}, mat)[0], 0.0);
  EXPECT_EQ(constitutiveSweep(2, ModelKind::Spectral, {1.0}, mat)[0], 0.5);
  EXPECT_EQ(constitutiveSweep(2, ModelKind::Isotropic, {0.5}, mat)[0], 0.25);
}

TEST(Sweep, ThreeDimensionalProposedIgnoresNormalCompression) {
  const auto mat = buildScenario(BuiltinScenario::ConstitutiveSweep3D).material();
  const auto grid = uniformGrid(101);
  const auto r3 = constitutiveSweep(3, ModelKind::Proposed, grid, mat);
  const auto r2 = constitutiveSweep(2, ModelKind::Proposed, grid, mat);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = 1 - grid[i];
    EXPECT_NEAR(r3[i], 1 + (x * x - 1) * (0.1281 * x * x - 0.8783 * x + 1), 1e-12);
    EXPECT_NEAR(r3[i], r2[i], 1e-12);
  }
}

TEST(Sweep, RejectsBadInput) {
  const auto mat = buildScenario(BuiltinScenario::ConstitutiveSweep2D).material();
  EXPECT_THROW(constitutiveSweep(1, ModelKind::Isotropic, {0.0}, mat), InvalidInput);
  EXPECT_THROW(constitutiveSweep(2, ModelKind::Isotropic, {1.5}, mat), InvalidInput);
  SweepOptions o;
  o.eps12 = 0;
  EXPECT_THROW(constitutiveSweep(2, ModelKind::Isotropic, {0.5}, mat, o), InvalidInput);
  EXPECT_THROW(uniformGrid(1), InvalidInput);
}
