#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"

namespace pff {

using Vec2 = Eigen::Vector2d;
using Edge = std::array<int, 2>;

struct Mesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> elements;
  std::map<std::string, std::vector<int>> node_sets;
  std::map<std::string, std::vector<Edge>> edge_sets;

  int numNodes() const { return static_cast<int>(nodes.size()); }
  int numElements() const { return static_cast<int>(elements.size()); }

  double area(int e) const {
    const auto& t = elements[e];
    const Vec2 a = nodes[t[1]] - nodes[t[0]], b = nodes[t[2]] - nodes[t[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
  }
  Vec2 centroid(int e) const {
    const auto& t = elements[e];
    return (nodes[t[0]] + nodes[t[1]] + nodes[t[2]]) / 3.0;
  }

  const std::vector<int>& nodeSet(const std::string& name) const {
    auto it = node_sets.find(name);
    if (it == node_sets.end()) throw InvalidInput("mesh has no node set '" + name + "'");
    return it->second;
  }

  void validate() const {
    const int n = numNodes();
    for (const auto& p : nodes)
      if (!p.allFinite()) throw InvalidInput("mesh: non-finite node coordinate");
    for (int e = 0; e < numElements(); ++e) {
      for (int v : elements[e])
        if (v < 0 || v >= n) throw InvalidInput("mesh: element " + std::to_string(e) + " references node " + std::to_string(v));
      if (!(area(e) > 0)) throw InvalidInput("mesh: element " + std::to_string(e) + " is not positively oriented");
    }
    for (const auto& [name, ids] : node_sets)
      for (int v : ids)
        if (v < 0 || v >= n) throw InvalidInput("mesh: node set '" + name + "' references node " + std::to_string(v));
    for (const auto& [name, edges] : edge_sets)
      for (const auto& ed : edges)
        for (int v : ed)
          if (v < 0 || v >= n) throw InvalidInput("mesh: edge set '" + name + "' references node " + std::to_string(v));
  }

  Eigen::AlignedBox2d bounds() const {
    Eigen::AlignedBox2d b;
    for (const auto& p : nodes) b.extend(p);
    return b;
  }
};

// Piecewise-uniform axis: each segment runs from the previous end to `end` with spacing <= h.
struct AxisSegment {
  double end;
  double h;
  bool operator==(const AxisSegment&) const = default;
};

inline std::vector<double> gradedAxis(double start, const std::vector<AxisSegment>& segs) {
  if (segs.empty()) throw InvalidInput("axis needs at least one segment");
  std::vector<double> xs{start};
  double a = start;
  for (const auto& s : segs) {
    if (!(s.end > a)) throw InvalidInput("axis segments must increase");
    if (!(s.h > 0)) throw InvalidInput("axis spacing must be positive");
    const int n = std::max(1, static_cast<int>(std::ceil((s.end - a) / s.h - 1e-9)));
    for (int i = 1; i < n; ++i) xs.push_back(a + (s.end - a) * i / n);
    xs.push_back(s.end);
    a = s.end;
  }
  return xs;
}

namespace detail {

inline double boxTol(const Mesh& m) { return 1e-9 * std::max(1.0, m.bounds().diagonal().norm()); }

}  // namespace detail

inline std::vector<int> nodesInBox(const Mesh& m, const Vec2& lo, const Vec2& hi) {
  const double tol = detail::boxTol(m);
  std::vector<int> out;
  for (int i = 0; i < m.numNodes(); ++i) {
    const Vec2& p = m.nodes[i];
    if (p.x() >= lo.x() - tol && p.x() <= hi.x() + tol && p.y() >= lo.y() - tol && p.y() <= hi.y() + tol)
      out.push_back(i);
  }
  return out;
}

// Rebuilds left/right/bottom/top (and "slit" for interior faces) from the boundary edges.
inline void tagBoundary(Mesh& m) {
  std::map<std::pair<int, int>, int> count;
  std::map<std::pair<int, int>, Edge> oriented;
  for (const auto& t : m.elements) {
    for (int k = 0; k < 3; ++k) {
      const int a = t[k], b = t[(k + 1) % 3];
      auto key = std::minmax(a, b);
      ++count[key];
      oriented[key] = {a, b};
    }
  }
  const auto box = m.bounds();
  const double tol = detail::boxTol(m);
  std::map<std::string, std::vector<Edge>> edges;
  for (const auto& [key, c] : count) {
    if (c != 1) continue;
    const Edge e = oriented[key];
    const Vec2 &p = m.nodes[e[0]], &q = m.nodes[e[1]];
    auto on = [&](double u, double v, double w) { return std::abs(u - w) <= tol && std::abs(v - w) <= tol; };
    if (on(p.x(), q.x(), box.min().x())) edges["left"].push_back(e);
    else if (on(p.x(), q.x(), box.max().x())) edges["right"].push_back(e);
    else if (on(p.y(), q.y(), box.min().y())) edges["bottom"].push_back(e);
    else if (on(p.y(), q.y(), box.max().y())) edges["top"].push_back(e);
    else edges["slit"].push_back(e);
  }
  for (const char* side : {"left", "right", "bottom", "top", "slit"}) {
    m.edge_sets.erase(side);
    m.node_sets.erase(side);
    auto it = edges.find(side);
    if (it == edges.end()) continue;
    std::set<int> ids;
    for (const auto& e : it->second) ids.insert(e.begin(), e.end());
    m.edge_sets[side] = it->second;
    m.node_sets[side] = std::vector<int>(ids.begin(), ids.end());
  }
}

// Tensor-product grid, each cell split along alternating diagonals.
inline Mesh gridMesh(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() < 2 || ys.size() < 2) throw InvalidInput("grid needs at least one cell per direction");
  Mesh m;
  const int nx = static_cast<int>(xs.size()), ny = static_cast<int>(ys.size());
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) m.nodes.emplace_back(xs[i], ys[j]);
  auto id = [nx](int i, int j) { return j * nx + i; };
  for (int j = 0; j + 1 < ny; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      if ((i + j) % 2 == 0) {
        m.elements.push_back({a, b, c});
        m.elements.push_back({a, c, d});
      } else {
        m.elements.push_back({a, b, d});
        m.elements.push_back({b, c, d});
      }
    }
  }
  tagBoundary(m);
  return m;
}

// Opens an axis-aligned segment [a, b] lying on mesh lines. End points inside
// the domain stay shared (crack tips); end points on the boundary are split.
inline void cutSlit(Mesh& m, const Vec2& a, const Vec2& b) {
  const bool horizontal = std::abs(a.y() - b.y()) < 1e-12 * (1 + std::abs(a.y()));
  const bool vertical = std::abs(a.x() - b.x()) < 1e-12 * (1 + std::abs(a.x()));
  if (horizontal == vertical) throw InvalidInput("slit must be a non-degenerate axis-aligned segment");
  const auto box = m.bounds();
  const double tol = detail::boxTol(m);
  auto onBoundary = [&](const Vec2& p) {
    return std::abs(p.x() - box.min().x()) <= tol || std::abs(p.x() - box.max().x()) <= tol ||
           std::abs(p.y() - box.min().y()) <= tol || std::abs(p.y() - box.max().y()) <= tol;
  };
  const int axis = horizontal ? 0 : 1;  // running coordinate
  const double line = horizontal ? a.y() : a.x();
  const double s0 = std::min(a[axis], b[axis]), s1 = std::max(a[axis], b[axis]);
  const Vec2 p0 = a[axis] <= b[axis] ? a : b, p1 = a[axis] <= b[axis] ? b : a;
  const bool keep0 = !onBoundary(p0), keep1 = !onBoundary(p1);

  std::map<int, int> dup;
  int found = 0;
  const int n0 = m.numNodes();
  for (int i = 0; i < n0; ++i) {
    const Vec2 p = m.nodes[i];
    if (std::abs(p[1 - axis] - line) > tol) continue;
    const double s = p[axis];
    if (s < s0 - tol || s > s1 + tol) continue;
    ++found;
    if ((std::abs(s - s0) <= tol && keep0) || (std::abs(s - s1) <= tol && keep1)) continue;
    dup[i] = static_cast<int>(m.nodes.size());
    m.nodes.push_back(p);
  }
  if (found < 2 || dup.empty()) throw InvalidInput("slit does not lie on mesh lines");
  // elements on the positive side (above / right of the line) take the copies
  for (int e = 0; e < m.numElements(); ++e) {
    const Vec2 c = m.centroid(e);
    if (c[1 - axis] <= line) continue;
    for (int& v : m.elements[e]) {
      auto it = dup.find(v);
      if (it != dup.end()) v = it->second;
    }
  }
  for (auto& [name, ids] : m.node_sets) {
    std::vector<int> extra;
    for (int v : ids)
      if (auto it = dup.find(v); it != dup.end()) extra.push_back(it->second);
    ids.insert(ids.end(), extra.begin(), extra.end());
  }
  tagBoundary(m);
}

inline void writeMesh(std::ostream& os, const Mesh& m) {
  os.precision(17);
  os << "nodes " << m.numNodes() << "\n";
  for (int i = 0; i < m.numNodes(); ++i) os << i << " " << m.nodes[i].x() << " " << m.nodes[i].y() << "\n";
  os << "elements " << m.numElements() << "\n";
  for (int e = 0; e < m.numElements(); ++e) {
    const auto& t = m.elements[e];
    os << e << " " << t[0] << " " << t[1] << " " << t[2] << "\n";
  }
  for (const auto& [name, ids] : m.node_sets) {
    os << "nodeset " << name << " " << ids.size() << "\n";
    for (int v : ids) os << v << "\n";
  }
  for (const auto& [name, edges] : m.edge_sets) {
    os << "edgeset " << name << " " << edges.size() << "\n";
    for (const auto& e : edges) os << e[0] << " " << e[1] << "\n";
  }
}

inline Mesh readMesh(std::istream& is) {
  Mesh m;
  std::string raw;
  int line_no = 0;
  auto nextLine = [&](std::istringstream& ss) {
    while (std::getline(is, raw)) {
      ++line_no;
      auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
      ss.clear();
      ss.str(raw);
      return true;
    }
    return false;
  };
  auto expectEnd = [&](std::istringstream& ss) {
    std::string rest;
    if (ss >> rest) throw ParseError("unexpected token '" + rest + "'", line_no);
  };
  std::istringstream ss;
  auto header = [&](const char* key) -> long {
    if (!nextLine(ss)) throw ParseError(std::string("missing '") + key + "' section", line_no);
    std::string k;
    long n = -1;
    if (!(ss >> k) || k != key || !(ss >> n) || n < 0) throw ParseError(std::string("expected '") + key + " <count>'", line_no);
    expectEnd(ss);
    return n;
  };
  const long nn = header("nodes");
  for (long i = 0; i < nn; ++i) {
    if (!nextLine(ss)) throw ParseError("truncated node list", line_no);
    long id;
    double x, y;
    if (!(ss >> id >> x >> y)) throw ParseError("expected 'id x y'", line_no);
    if (id != i) throw ParseError("node ids must be consecutive from 0", line_no);
    expectEnd(ss);
    m.nodes.emplace_back(x, y);
  }
  const long ne = header("elements");
  for (long i = 0; i < ne; ++i) {
    if (!nextLine(ss)) throw ParseError("truncated element list", line_no);
    long id;
    std::array<int, 3> t;
    if (!(ss >> id >> t[0] >> t[1] >> t[2])) throw ParseError("expected 'id n1 n2 n3'", line_no);
    if (id != i) throw ParseError("element ids must be consecutive from 0", line_no);
    for (int v : t)
      if (v < 0 || v >= nn) throw ParseError("node index " + std::to_string(v) + " out of range", line_no);
    expectEnd(ss);
    m.elements.push_back(t);
  }
  while (nextLine(ss)) {
    std::string kind, name;
    long count = -1;
    if (!(ss >> kind >> name >> count) || count < 0 || (kind != "nodeset" && kind != "edgeset"))
      throw ParseError("expected 'nodeset <name> <count>' or 'edgeset <name> <count>'", line_no);
    expectEnd(ss);
    const int width = kind == "nodeset" ? 1 : 2;
    std::vector<int> vals;
    while (static_cast<long>(vals.size()) < count * width) {
      if (!nextLine(ss)) throw ParseError("truncated " + kind + " '" + name + "'", line_no);
      long v;
      while (ss >> v) {
        if (v < 0 || v >= nn) throw ParseError("node index " + std::to_string(v) + " out of range", line_no);
        vals.push_back(static_cast<int>(v));
      }
      if (!ss.eof()) throw ParseError("expected node indices", line_no);
    }
    if (static_cast<long>(vals.size()) != count * width) throw ParseError("too many indices in " + kind + " '" + name + "'", line_no);
    if (width == 1) {
      m.node_sets[name] = vals;
    } else {
      auto& es = m.edge_sets[name];
      for (std::size_t k = 0; k < vals.size(); k += 2) es.push_back({vals[k], vals[k + 1]});
    }
  }
  m.validate();
  return m;
}

}  // namespace pff
