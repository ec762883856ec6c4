#pragma once

#include <cmath>
#include <numbers>
#include <queue>
#include <vector>

#include <Eigen/Eigenvalues>

#include "errors.hpp"
#include "mesh.hpp"

namespace pff {

// True when nodes with d >= threshold connect some seed node to some target node through element edges.
inline bool spanningCrack(const Mesh& m, const Eigen::VectorXd& d, const std::vector<int>& seeds, const std::vector<int>& targets,
                          double threshold = 0.9) {
  if (d.size() != m.numNodes()) throw InvalidInput("phase field size does not match the mesh");
  const int n = m.numNodes();
  std::vector<std::vector<int>> adj(n);
  for (const auto& t : m.elements)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        if (a != b) adj[t[a]].push_back(t[b]);
  std::vector<char> goal(n, 0), seen(n, 0);
  for (int v : targets) goal.at(v) = 1;
  std::queue<int> q;
  for (int v : seeds)
    if (d[v] >= threshold && !seen[v]) {
      seen[v] = 1;
      q.push(v);
    }
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (goal[v]) return true;
    for (int w : adj[v])
      if (!seen[w] && d[w] >= threshold) {
        seen[w] = 1;
        q.push(w);
      }
  }
  return false;
}

struct KinkResult {
  double angle_deg = 0;  // signed, counterclockwise from the pre-crack direction
  Vec2 direction = Vec2::Zero();
  int cells = 0;
};

// Area-weighted line through element centres that reach d >= threshold in `after` but not in `before`,
// within `radius` of the tip. Element d is the mean of its nodal values.
inline KinkResult kinkAngle(const Mesh& m, const Eigen::VectorXd& before, const Eigen::VectorXd& after, const Vec2& tip, const Vec2& crack_dir,
                            double radius, double threshold = 0.9) {
  if (before.size() != m.numNodes() || after.size() != m.numNodes())
    throw InvalidInput("phase field size does not match the mesh");
  if (!(radius > 0)) throw InvalidInput("kink radius must be positive");
  if (!(crack_dir.norm() > 0)) throw InvalidInput("crack direction must be nonzero");
  std::vector<Vec2> pts;
  std::vector<double> w;
  for (int e = 0; e < m.numElements(); ++e) {
    const auto& t = m.elements[e];
    const double d1 = (after[t[0]] + after[t[1]] + after[t[2]]) / 3.0;
    const double d0 = (before[t[0]] + before[t[1]] + before[t[2]]) / 3.0;
    const Vec2 c = m.centroid(e);
    if (d1 >= threshold && d0 < threshold && (c - tip).norm() <= radius) {
      pts.push_back(c);
      w.push_back(m.area(e));
    }
  }
  if (pts.size() < 2) throw SolverError("no crack propagation detected near the tip");
  double wsum = 0;
  Vec2 mean = Vec2::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    wsum += w[i];
    mean += w[i] * pts[i];
  }
  mean /= wsum;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec2 r = pts[i] - mean;
    cov += w[i] * r * r.transpose();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(cov);
  Vec2 v = es.eigenvectors().col(1);
  if (v.dot(mean - tip) < 0) v = -v;
  const Vec2 a = crack_dir.normalized();
  KinkResult r;
  r.direction = v;
  r.cells = static_cast<int>(pts.size());
  r.angle_deg = std::atan2(a.x() * v.y() - a.y() * v.x(), a.dot(v)) * 180.0 / std::numbers::pi;
  return r;
}

// Mixed-mode kink prediction 2 atan((K_I/K_II -+ sqrt((K_I/K_II)^2 + 8)) / 4), in degrees.
// For pure mode II the magnitude is 2 atan(sqrt(8)/4).
inline double kinkAnglePrediction(double k1, double k2) {
  if (k2 == 0) return 0;
  const double r = k1 / k2;
  const double th = 2 * std::atan((r - std::copysign(1.0, k2) * std::sqrt(r * r + 8)) / 4);
  return th * 180.0 / std::numbers::pi;
}

}  // namespace pff
