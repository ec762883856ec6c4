#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "pffrac/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int rc = -1;
  std::string out;
};

Result sh(const std::string& args) {
  const std::string cmd = std::string(PFFRAC_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.rc = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pffrac_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::vector<std::string>> csvRows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string c;
    while (std::getline(ls, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(sh("").rc, 2);
  EXPECT_EQ(sh("run --scenario tension --model bogus").rc, 2);
  EXPECT_EQ(sh("run --scenario nowhere").rc, 2);
  EXPECT_EQ(sh("sweep --dim 4").rc, 2);
  EXPECT_EQ(sh("scenarios show nowhere").rc, 2);
}

TEST(Cli, ScenariosList) {
  const auto r = sh("scenarios list");
  ASSERT_EQ(r.rc, 0);
  for (const char* s : {"tension", "compression", "shear", "through-crack-shear", "circular-load-path"})
    EXPECT_NE(r.out.find(s), std::string::npos) << s;
}

TEST(Cli, SweepEndpoints) {
  const auto r = sh("sweep --points 11");
  ASSERT_EQ(r.rc, 0);
  const auto rows = csvRows(r.out);
  ASSERT_EQ(rows.size(), 12u);
  const auto& head = rows[0];
  auto col = [&](const std::string& name) {
    for (size_t i = 0; i < head.size(); ++i)
      if (head[i] == name) return i;
    ADD_FAILURE() << "no column " << name;
    return size_t(0);
  };
  const size_t iso = col("isotropic"), vd = col("voldev"), sp = col("spectral"), pr = col("proposed");
  EXPECT_DOUBLE_EQ(std::stod(rows[1][pr]), 1.0);
  EXPECT_DOUBLE_EQ(std::stod(rows[11][pr]), 0.0);
  EXPECT_NEAR(std::stod(rows[11][sp]), 0.5, 1e-12);
  for (size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][vd], rows[i][iso]);
}

TEST(Cli, SweepIsDeterministic) {
  EXPECT_EQ(sh("sweep --dim 3 --points 17").out, sh("sweep --dim 3 --points 17").out);
}

TEST(Cli, RunIsDeterministicAndRepeatableFromConfig) {
  const fs::path a = scratch("a"), b = scratch("b"), c = scratch("c");
  const std::string common = " --scenario tension --model proposed --max-steps 2 --snapshots last -q";
  ASSERT_EQ(sh("run" + common + " --output " + a.string()).rc, 0);
  ASSERT_EQ(sh("run" + common + " --output " + b.string()).rc, 0);
  const std::string ha = slurp(a / "history.csv");
  ASSERT_FALSE(ha.empty());
  EXPECT_EQ(ha, slurp(b / "history.csv"));
  std::stringstream hs(ha);
  EXPECT_EQ(pff::readHistory(hs).size(), 2u);

  ASSERT_EQ(sh("run --config " + (a / "run.json").string() + " -q --output " + c.string()).rc, 0);
  EXPECT_EQ(ha, slurp(c / "history.csv"));
  EXPECT_TRUE(fs::exists(a / "snapshots" / "step_0001.vtk"));
  EXPECT_FALSE(fs::exists(a / "snapshots" / "step_0000.vtk"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}
