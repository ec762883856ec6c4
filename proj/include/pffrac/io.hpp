#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fem2d.hpp"
#include "mesh.hpp"

namespace pff {

// %.17g, locale independent
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---- legacy VTK (ASCII unstructured grid) ----

struct Snapshot {
  int step = -1;
  double load = 0;
  Mesh mesh;  // nodes and elements only
  VecX d;
  VecX u;  // 2 per node, may be empty
};

inline void writeVtk(std::ostream& os, const Mesh& m, const VecX& d, const VecX& u, int step, double load) {
  if (d.size() != m.numNodes()) throw InvalidInput("phase field size does not match the mesh");
  if (u.size() != 0 && u.size() != 2 * m.numNodes()) throw InvalidInput("displacement size does not match the mesh");
  os << "# vtk DataFile Version 3.0\n";
  os << "step " << step << " load " << fmt17(load) << "\n";
  os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  os << "POINTS " << m.numNodes() << " double\n";
  for (const auto& p : m.nodes) os << fmt17(p.x()) << " " << fmt17(p.y()) << " 0\n";
  os << "CELLS " << m.numElements() << " " << 4 * m.numElements() << "\n";
  for (const auto& t : m.elements) os << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  os << "CELL_TYPES " << m.numElements() << "\n";
  for (int e = 0; e < m.numElements(); ++e) os << "5\n";
  os << "POINT_DATA " << m.numNodes() << "\n";
  os << "SCALARS d double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < d.size(); ++i) os << fmt17(d[i]) << "\n";
  if (u.size() != 0) {
    os << "VECTORS u double\n";
    for (int i = 0; i < m.numNodes(); ++i) os << fmt17(u[2 * i]) << " " << fmt17(u[2 * i + 1]) << " 0\n";
  }
}

inline void writeVtkFile(const std::string& path, const Mesh& m, const VecX& d, const VecX& u, int step, double load) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  writeVtk(out, m, d, u, step, load);
  if (!out) throw InvalidInput("write failed: " + path);
}

// Reads what writeVtk produces.
inline Snapshot readVtk(std::istream& is) {
  Snapshot s;
  std::string line, word;
  int line_no = 0;
  auto next = [&]() -> std::istringstream {
    while (std::getline(is, line)) {
      ++line_no;
      if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw ParseError("unexpected end of file", line_no);
  };
  auto expectWord = [&](std::istringstream& ss, const std::string& w) {
    if (!(ss >> word) || word != w) throw ParseError("expected '" + w + "'", line_no);
  };
  {
    auto ss = next();
    if (line.rfind("# vtk DataFile", 0) != 0) throw ParseError("not a legacy VTK file", line_no);
  }
  {
    auto ss = next();
    std::string k1, k2;
    if (ss >> k1 >> s.step >> k2 >> s.load; k1 != "step" || k2 != "load") {
      s.step = -1;
      s.load = 0;
    }
  }
  {
    auto ss = next();
    expectWord(ss, "ASCII");
  }
  {
    auto ss = next();
    expectWord(ss, "DATASET");
    expectWord(ss, "UNSTRUCTURED_GRID");
  }
  int nn = 0, ne = 0, total = 0;
  {
    auto ss = next();
    expectWord(ss, "POINTS");
    if (!(ss >> nn) || nn < 0) throw ParseError("bad point count", line_no);
  }
  s.mesh.nodes.resize(nn);
  for (int i = 0; i < nn; ++i) {
    auto ss = next();
    double z = 0;
    if (!(ss >> s.mesh.nodes[i].x() >> s.mesh.nodes[i].y() >> z)) throw ParseError("bad point", line_no);
  }
  {
    auto ss = next();
    expectWord(ss, "CELLS");
    if (!(ss >> ne >> total) || ne < 0 || total != 4 * ne) throw ParseError("only triangle cells are supported", line_no);
  }
  s.mesh.elements.resize(ne);
  for (int e = 0; e < ne; ++e) {
    auto ss = next();
    int k = 0;
    auto& t = s.mesh.elements[e];
    if (!(ss >> k >> t[0] >> t[1] >> t[2]) || k != 3) throw ParseError("bad cell", line_no);
    for (int v : t)
      if (v < 0 || v >= nn) throw ParseError("cell references a missing point", line_no);
  }
  {
    auto ss = next();
    expectWord(ss, "CELL_TYPES");
  }
  for (int e = 0; e < ne; ++e) {
    auto ss = next();
    int type = 0;
    if (!(ss >> type) || type != 5) throw ParseError("only VTK_TRIANGLE cells are supported", line_no);
  }
  {
    auto ss = next();
    expectWord(ss, "POINT_DATA");
  }
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream ss(line);
    if (!(ss >> word)) continue;
    if (word == "SCALARS") {
      std::string name;
      ss >> name;
      auto lt = next();
      expectWord(lt, "LOOKUP_TABLE");
      VecX v(nn);
      for (int i = 0; i < nn; ++i) {
        auto vs = next();
        if (!(vs >> v[i])) throw ParseError("bad scalar value", line_no);
      }
      if (name == "d") s.d = v;
    } else if (word == "VECTORS") {
      std::string name;
      ss >> name;
      VecX v(2 * nn);
      for (int i = 0; i < nn; ++i) {
        auto vs = next();
        double z = 0;
        if (!(vs >> v[2 * i] >> v[2 * i + 1] >> z)) throw ParseError("bad vector value", line_no);
      }
      if (name == "u") s.u = v;
    } else {
      throw ParseError("unexpected section '" + word + "'", line_no);
    }
  }
  if (s.d.size() != nn) throw ParseError("missing point scalars 'd'", line_no);
  return s;
}

inline Snapshot readVtkFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return readVtk(in);
}

// ---- load history ----

inline constexpr const char* kHistoryHeader = "step,u_D,reaction_x,reaction_y,max_d,iterations";

inline void writeHistoryRow(std::ostream& os, const StepRecord& r) {
  os << r.step << "," << fmt17(r.load) << "," << fmt17(r.reaction.x()) << "," << fmt17(r.reaction.y()) << ","
     << fmt17(r.max_d) << "," << r.iterations << "\n";
}

inline void writeHistory(std::ostream& os, const std::vector<StepRecord>& h) {
  os << kHistoryHeader << "\n";
  for (const auto& r : h) writeHistoryRow(os, r);
}

inline std::vector<StepRecord> readHistory(std::istream& is) {
  std::string line;
  int line_no = 1;
  if (!std::getline(is, line) || line != kHistoryHeader) throw ParseError("history header mismatch", 1);
  std::vector<StepRecord> out;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ss(line);
    StepRecord r;
    double rx = 0, ry = 0;
    if (!(ss >> r.step >> r.load >> rx >> ry >> r.max_d >> r.iterations)) throw ParseError("bad history row", line_no);
    r.reaction = Vec2(rx, ry);
    out.push_back(r);
  }
  return out;
}

}  // namespace pff
