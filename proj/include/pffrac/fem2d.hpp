#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "constitutive.hpp"
#include "mesh.hpp"

namespace pff {

using SpMat = Eigen::SparseMatrix<double>;
using VecX = Eigen::VectorXd;

// ---- boundary conditions and load programs ----

enum class Profile { Linear, Sin, OnePlusCos };

inline double profileValue(Profile p, double s) {
  switch (p) {
    case Profile::Linear: return s;
    case Profile::Sin: return std::sin(s);
    case Profile::OnePlusCos: return 1.0 + std::cos(s);
  }
  return s;
}

inline std::string toString(Profile p) {
  switch (p) {
    case Profile::Linear: return "linear";
    case Profile::Sin: return "sin";
    case Profile::OnePlusCos: return "one_plus_cos";
  }
  return "?";
}

inline std::optional<Profile> parseProfile(std::string_view s) {
  for (auto p : {Profile::Linear, Profile::Sin, Profile::OnePlusCos})
    if (toString(p) == s) return p;
  return std::nullopt;
}

// u[component] = scale * profile(load) on every node of `set`
struct DirichletBC {
  std::string set;
  int component = 0;
  double scale = 0;
  Profile profile = Profile::Linear;

  double value(double load) const { return scale * profileValue(profile, load); }
  bool operator==(const DirichletBC&) const = default;
};

struct LoadSegment {
  double target = 0;
  double increment = 0;
  bool operator==(const LoadSegment&) const = default;
};

struct LoadProgram {
  double start = 0;
  std::vector<LoadSegment> segments;

  void validate() const {
    double a = start;
    for (std::size_t i = 0; i < segments.size(); ++i) {
      const auto& s = segments[i];
      if (!(s.increment > 0)) throw InvalidInput("load segment " + std::to_string(i) + ": increment must be positive");
      if (!(s.target > a)) throw InvalidInput("load segment " + std::to_string(i) + ": target must exceed the previous one");
      a = s.target;
    }
  }

  // start value first; empty when there are no segments
  std::vector<double> values() const {
    validate();
    std::vector<double> v;
    if (segments.empty()) return v;
    v.push_back(start);
    double a = start;
    for (const auto& s : segments) {
      const int n = std::max(1, static_cast<int>(std::ceil((s.target - a) / s.increment - 1e-9)));
      for (int i = 1; i < n; ++i) v.push_back(a + i * s.increment);
      v.push_back(s.target);
      a = s.target;
    }
    return v;
  }
  bool operator==(const LoadProgram&) const = default;
};

// ---- degrees of freedom ----

struct DofSystem {
  int ndof = 0;
  std::vector<int> free_index;  // -1 when constrained
  std::vector<int> free_dofs;
  std::vector<int> fixed_dofs;
  std::vector<int> bc_of_dof;  // index into the BC list, -1 when free

  int numFree() const { return static_cast<int>(free_dofs.size()); }
  bool isFixed(int dof) const { return free_index[dof] < 0; }

  void validate() const {
    std::vector<int> seen(ndof, 0);
    for (int f : free_dofs) ++seen[f];
    for (int f : fixed_dofs) ++seen[f];
    for (int i = 0; i < ndof; ++i)
      if (seen[i] != 1) throw InvalidInput("dof partition is not disjoint and exhaustive at dof " + std::to_string(i));
  }
};

// Later conditions override earlier ones on shared dofs.
inline DofSystem makeDofSystem(const Mesh& mesh, const std::vector<DirichletBC>& bcs) {
  DofSystem ds;
  ds.ndof = 2 * mesh.numNodes();
  ds.bc_of_dof.assign(ds.ndof, -1);
  for (std::size_t k = 0; k < bcs.size(); ++k) {
    if (bcs[k].component != 0 && bcs[k].component != 1) throw InvalidInput("boundary condition component must be 0 or 1");
    for (int n : mesh.nodeSet(bcs[k].set)) ds.bc_of_dof[2 * n + bcs[k].component] = static_cast<int>(k);
  }
  ds.free_index.assign(ds.ndof, -1);
  for (int i = 0; i < ds.ndof; ++i) {
    if (ds.bc_of_dof[i] >= 0) {
      ds.fixed_dofs.push_back(i);
    } else {
      ds.free_index[i] = static_cast<int>(ds.free_dofs.size());
      ds.free_dofs.push_back(i);
    }
  }
  ds.validate();
  return ds;
}

// Every connected piece needs constrained x and y dofs on at least two nodes.
inline void checkFloatingSubdomains(const Mesh& mesh, const DofSystem& dofs) {
  std::vector<int> parent(mesh.numNodes());
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
  for (const auto& t : mesh.elements) {
    parent[find(t[1])] = find(t[0]);
    parent[find(t[2])] = find(t[0]);
  }
  struct Info {
    bool x = false, y = false;
    int constrained = 0, elements = 0, anchor = -1;
  };
  std::map<int, Info> comps;
  std::vector<char> used(mesh.numNodes(), 0);
  for (const auto& t : mesh.elements) {
    auto& c = comps[find(t[0])];
    ++c.elements;
    if (c.anchor < 0) c.anchor = t[0];
    for (int v : t) used[v] = 1;
  }
  for (int n = 0; n < mesh.numNodes(); ++n) {
    if (!used[n]) continue;
    auto& c = comps[find(n)];
    const bool fx = dofs.isFixed(2 * n), fy = dofs.isFixed(2 * n + 1);
    c.x |= fx;
    c.y |= fy;
    if (fx || fy) ++c.constrained;
  }
  for (const auto& [root, c] : comps) {
    if (c.x && c.y && c.constrained >= 2) continue;
    const Vec2& p = mesh.nodes[c.anchor];
    throw SolverError("floating subdomain: " + std::to_string(c.elements) + " elements connected to node " +
                      std::to_string(c.anchor) + " (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                      ") are not restrained against rigid motion");
  }
}

// ---- solver state and controls ----

struct Controls {
  double tol_stag = 1e-5;
  int max_stag = 200;
  bool irreversible = true;
  double newton_rtol = 1e-10;
  int max_newton = 100;
};

struct SolutionState {
  VecX u;
  VecX d;
  VecX d_prev;
  double load = 0;
  std::map<std::string, Vec2> reactions;

  void validate(bool irreversible) const {
    for (int i = 0; i < d.size(); ++i) {
      if (!(d[i] >= 0.0 && d[i] <= 1.0)) throw InvalidInput("nodal phase field outside [0, 1] at node " + std::to_string(i));
      if (irreversible && d[i] < d_prev[i]) throw InvalidInput("phase field decreased at node " + std::to_string(i));
    }
  }
};

struct StepReport {
  int iterations = 0;
  bool converged = false;
  int newton_iterations = 0;
  std::vector<double> energy_log;  // after each half-step
  double max_energy_increase = 0;
  std::vector<std::string> warnings;
};

struct LinearSystem {
  SpMat matrix;
  VecX rhs;
};

// ---- the coupled problem ----

class PhaseFieldSolver {
 public:
  PhaseFieldSolver(Mesh mesh, std::vector<DirichletBC> bcs, std::vector<int> crack_nodes, ModelKind model,
                   MaterialParams mat, EvalOptions opts = {})
      : mesh_(std::move(mesh)), bcs_(std::move(bcs)), crack_nodes_(std::move(crack_nodes)), model_(model), mat_(mat),
        opts_(opts) {
    mesh_.validate();
    mat_.validateFracture();
    for (int n : crack_nodes_)
      if (n < 0 || n >= mesh_.numNodes()) throw InvalidInput("crack node index out of range");
    dofs_ = makeDofSystem(mesh_, bcs_);
    checkFloatingSubdomains(mesh_, dofs_);
    setupGeometry();
    setupPatterns();
    if (model_ == ModelKind::SK) phi_curv_ = skDegradationFull(0.0, mat_.sk_b).curvature_bound;
    if (model_ == ModelKind::Proposed) {
      auto [a, b] = detail::fitTable(opts_).lookup(mat_.nu());
      gs_curv_ = shearDegradationFull(0.0, a, b).curvature_bound;
      // smoothing radius about ell / 2 in units of the smallest element
      double hmin = std::numeric_limits<double>::infinity();
      for (double a_e : area_) hmin = std::min(hmin, std::sqrt(2.0 * a_e));
      frame_passes_ = std::max(1, static_cast<int>(std::lround(mat_.ell / (2.0 * hmin))));
    }
  }

  const Mesh& mesh() const { return mesh_; }

  // node/element averaging passes applied to the structure tensor of the proposed model
  int framePasses() const { return frame_passes_; }
  void setFramePasses(int p) {
    if (p < 1) throw InvalidInput("frame smoothing needs at least one pass");
    frame_passes_ = p;
  }
  const DofSystem& dofs() const { return dofs_; }
  const std::vector<DirichletBC>& bcs() const { return bcs_; }
  const std::vector<int>& crackNodes() const { return crack_nodes_; }
  ModelKind model() const { return model_; }
  const MaterialParams& material() const { return mat_; }
  double elementArea(int e) const { return area_[e]; }
  const Eigen::Matrix<double, 3, 2>& shapeGradients(int e) const { return grad_[e]; }

  SolutionState initialState() const {
    SolutionState s;
    s.u = VecX::Zero(dofs_.ndof);
    s.d = VecX::Zero(mesh_.numNodes());
    for (int n : crack_nodes_) s.d[n] = 1.0;
    s.d_prev = s.d;
    return s;
  }

  void applyLoad(SolutionState& s, double load) const {
    s.load = load;
    for (int dof : dofs_.fixed_dofs) s.u[dof] = bcs_[dofs_.bc_of_dof[dof]].value(load);
  }

  SymTensor3 strain(int e, const VecX& u) const {
    const auto& g = grad_[e];
    const auto& t = mesh_.elements[e];
    double e11 = 0, e22 = 0, gam = 0;
    for (int a = 0; a < 3; ++a) {
      const double ux = u[2 * t[a]], uy = u[2 * t[a] + 1];
      e11 += g(a, 0) * ux;
      e22 += g(a, 1) * uy;
      gam += g(a, 1) * ux + g(a, 0) * uy;
    }
    return SymTensor3::fromComponents(e11, e22, 0, 0, 0, 0.5 * gam);
  }

  Vec3 phaseGradient(int e, const VecX& d) const {
    const auto& t = mesh_.elements[e];
    Eigen::Vector2d g = Eigen::Vector2d::Zero();
    for (int a = 0; a < 3; ++a) g += d[t[a]] * grad_[e].row(a).transpose();
    return Vec3(g.x(), g.y(), 0);
  }

  // Element phase values. The proposed model takes its frame from the recovered
  // structure tensor, which stays defined inside a fully broken band.
  std::vector<PhasePoint> phasePoints(const VecX& d) const { return frameData(d).pts; }

  ConstitutiveOutput evaluateElement(int e, const VecX& u, const PhasePoint& ph) const {
    return evaluate(model_, strain(e, u), ph, mat_, opts_);
  }

  // Internal nodal forces (all dofs).
  VecX internalForce(const SolutionState& s) const {
    VecX f;
    assembleElastic(s.u, phasePoints(s.d), &f, false);
    return f;
  }

  // Newton system at the current state: K du_free = rhs (= -residual_free).
  LinearSystem assembleDisplacement(const SolutionState& s) const {
    VecX f;
    assembleElastic(s.u, phasePoints(s.d), &f, true);
    LinearSystem ls{kmat_, VecX(dofs_.numFree())};
    for (int i = 0; i < dofs_.numFree(); ++i) ls.rhs[i] = -f[dofs_.free_dofs[i]];
    return ls;
  }

  // Quadratic model of the energy in d about the current d: matrix * d = rhs.
  LinearSystem assemblePhaseField(const SolutionState& s) const {
    if (!isVariational(model_))
      throw UnsupportedModel(toString(model_) + " has no strain energy; the phase-field subproblem is undefined");
    const FrameData fd = frameData(s.d);
    const auto& pts = fd.pts;
    SpMat a = surface_;
    VecX b = VecX::Zero(mesh_.numNodes());
    double* av = a.valuePtr();
    std::vector<Eigen::Vector2d> flux(model_ == ModelKind::Proposed ? mesh_.numElements() : 0);
    for (int e = 0; e < mesh_.numElements(); ++e) {
      const auto out = evaluateElement(e, s.u, pts[e]);
      double c = 2.0 * out.psi_plus;
      if (model_ == ModelKind::SK) c = phi_curv_ * out.psi_plus;
      if (model_ == ModelKind::Proposed) c += gs_curv_ * out.psi_shear;
      const double w = out.dpsi_dd;
      const double A = area_[e];
      const auto& t = mesh_.elements[e];
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) av[dslot_[e][3 * i + j]] += A * c / 9.0;
        b[t[i]] -= A * (w - c * pts[e].d) / 3.0;
      }
      if (model_ == ModelKind::Proposed) flux[e] = out.dpsi_dgradd.head<2>();
    }
    if (model_ == ModelKind::Proposed) b -= frameGradient(fd, flux);
    return {a, b};
  }

  // d/dd of the elastic energy at fixed u, frame dependence included
  VecX elasticEnergyGradient(const SolutionState& s) const {
    const FrameData fd = frameData(s.d);
    VecX g = VecX::Zero(mesh_.numNodes());
    std::vector<Eigen::Vector2d> flux(mesh_.numElements(), Eigen::Vector2d::Zero());
    for (int e = 0; e < mesh_.numElements(); ++e) {
      const auto out = evaluateElement(e, s.u, fd.pts[e]);
      for (int v : mesh_.elements[e]) g[v] += area_[e] * out.dpsi_dd / 3.0;
      if (model_ == ModelKind::Proposed) flux[e] = out.dpsi_dgradd.head<2>();
    }
    if (model_ == ModelKind::Proposed) g += frameGradient(fd, flux);
    return g;
  }

  double elasticEnergy(const VecX& u, const std::vector<PhasePoint>& pts) const {
    long double sum = 0;
    for (int e = 0; e < mesh_.numElements(); ++e) sum += area_[e] * evaluateElement(e, u, pts[e]).psi;
    return static_cast<double>(sum);
  }

  double surfaceEnergy(const VecX& d) const { return 0.5 * d.dot(surface_ * d); }

  double energy(const SolutionState& s) const { return elasticEnergy(s.u, phasePoints(s.d)) + surfaceEnergy(s.d); }

  // Newton iterations on the free displacement dofs with the current d.
  int solveDisplacement(SolutionState& s, const Controls& c) {
    const auto pts = phasePoints(s.d);
    const bool sym = model_ != ModelKind::Wu;
    VecX f;
    double e0 = assembleElastic(s.u, pts, &f, true);
    for (int it = 0; it < c.max_newton; ++it) {
      VecX r = freePart(f);
      const double fnorm = std::max(f.norm(), force_scale_);
      if (r.norm() <= c.newton_rtol * fnorm || r.norm() == 0.0) return it;
      VecX p;
      bool ok = false;
      if (sym) {
        if (!ldlt_pattern_) {
          ldlt_.analyzePattern(kmat_);
          ldlt_pattern_ = true;
        }
        ldlt_.factorize(kmat_);
        if (ldlt_.info() == Eigen::Success) {
          p = ldlt_.solve(-r);
          ok = p.allFinite() && p.dot(r) < 0;
        }
      } else {
        if (!lu_pattern_) {
          lu_.analyzePattern(kmat_);
          lu_pattern_ = true;
        }
        lu_.factorize(kmat_);
        if (lu_.info() == Eigen::Success) {
          p = lu_.solve(-r);
          ok = p.allFinite();
        }
      }
      if (!ok) p = k0_solver_.solve(-r);  // undamaged stiffness: always a descent direction

      const VecX u0 = s.u;
      const double slope = p.dot(r);
      double alpha = 1.0;
      bool accepted = false, flat = false;
      VecX f1;
      double e1 = 0, r1 = 0;
      for (int ls = 0; ls < 40; ++ls) {
        s.u = u0;
        addFree(s.u, alpha * p);
        e1 = assembleElastic(s.u, pts, &f1, false);
        r1 = freePart(f1).norm();
        if (sym) {
          if (e1 <= e0 + 1e-4 * alpha * slope) {
            accepted = true;
          } else if (std::abs(e1 - e0) <= 1e-14 * std::abs(e0) && r1 < r.norm()) {
            // at roundoff level the energy no longer resolves progress
            accepted = flat = true;
          }
        } else if (r1 <= (1.0 - 1e-4 * alpha) * r.norm()) {
          accepted = true;
        }
        if (accepted) break;
        alpha *= 0.5;
      }
      if (flat && r1 > 0.5 * r.norm() && r.norm() <= 1e-7 * fnorm) {
        e0 = assembleElastic(s.u, pts, &f, false);
        return it + 1;
      }
      if (!accepted) {
        s.u = u0;
        if (r.norm() <= 1e-7 * fnorm) return it;
        throw SolverError("displacement solve stalled: residual " + std::to_string(r.norm()) + " against force scale " +
                          std::to_string(fnorm));
      }
      e0 = assembleElastic(s.u, pts, &f, true);
    }
    const VecX r = freePart(f);
    if (r.norm() <= 1e-7 * std::max(f.norm(), force_scale_)) return c.max_newton;
    throw SolverError("displacement Newton did not converge in " + std::to_string(c.max_newton) + " iterations");
  }

  // Bound-constrained minimization of the quadratic model; the true energy is
  // then checked and the step shortened if it went up.
  void solvePhaseField(SolutionState& s, const Controls& c) {
    const int n = mesh_.numNodes();
    VecX lo = c.irreversible ? s.d_prev : VecX::Zero(n);
    VecX hi = VecX::Ones(n);
    for (int v : crack_nodes_) lo[v] = hi[v] = 1.0;
    lo = lo.cwiseMin(hi);
    const LinearSystem qp = assemblePhaseField(s);
    const VecX dn = boxQP(qp.matrix, qp.rhs, lo, hi, s.d.cwiseMax(lo).cwiseMin(hi));
    if (model_ == ModelKind::Wu) {
      s.d = dn;
      return;
    }
    const VecX d0 = s.d;
    const double e0 = energy(s);
    double tau = 1.0;
    for (int k = 0; k < 30; ++k) {
      s.d = d0 + tau * (dn - d0);
      if (tau == 1.0) s.d = dn;
      if (energy(s) <= e0) return;
      tau *= 0.5;
    }
    s.d = d0;
  }

  StepReport staggeredStep(SolutionState& s, double load, const Controls& c) {
    StepReport rep;
    applyLoad(s, load);
    auto log = [&] {
      const double e = energy(s);
      if (!rep.energy_log.empty()) rep.max_energy_increase = std::max(rep.max_energy_increase, e - rep.energy_log.back());
      rep.energy_log.push_back(e);
    };
    rep.newton_iterations += solveDisplacement(s, c);
    log();
    for (int it = 1; it <= c.max_stag; ++it) {
      const VecX d_old = s.d;
      solvePhaseField(s, c);
      log();
      const double delta = (s.d - d_old).cwiseAbs().maxCoeff();
      rep.newton_iterations += solveDisplacement(s, c);
      log();
      rep.iterations = it;
      if (delta < c.tol_stag) {
        rep.converged = true;
        break;
      }
    }
    if (!rep.converged)
      rep.warnings.push_back("staggered iteration cap " + std::to_string(c.max_stag) + " reached at load " +
                             std::to_string(load));
    s.d_prev = s.d;
    updateReactions(s);
    return rep;
  }

  void updateReactions(SolutionState& s) const {
    const VecX f = internalForce(s);
    s.reactions.clear();
    for (const auto& bc : bcs_) {
      if (s.reactions.count(bc.set)) continue;
      Vec2 r = Vec2::Zero();
      for (int n : mesh_.nodeSet(bc.set)) r += Vec2(f[2 * n], f[2 * n + 1]);
      s.reactions[bc.set] = r;
    }
  }

  // min 1/2 x'Ax - b'x subject to lo <= x <= hi, primal-dual active set
  VecX boxQP(const SpMat& a, const VecX& b, const VecX& lo, const VecX& hi, VecX x) {
    const int n = static_cast<int>(b.size());
    const VecX diag = a.diagonal();
    std::vector<signed char> state(n, 0), next(n, 0);  // -1 lower, +1 upper, 0 free
    auto classify = [&](const VecX& xv, std::vector<signed char>& st) {
      const VecX g = a * xv - b;
      for (int i = 0; i < n; ++i) {
        if (lo[i] == hi[i]) {
          st[i] = -1;
          continue;
        }
        const double y = xv[i] - g[i] / diag[i];
        st[i] = y < lo[i] ? -1 : (y > hi[i] ? 1 : 0);
      }
    };
    classify(x, state);
    for (int it = 0; it < 200; ++it) {
      SpMat m = a;
      VecX rhs = b;
      VecX fixed = VecX::Zero(n);
      for (int i = 0; i < n; ++i)
        if (state[i]) fixed[i] = state[i] < 0 ? lo[i] : hi[i];
      for (int col = 0; col < n; ++col) {
        for (SpMat::InnerIterator itr(m, col); itr; ++itr) {
          const int row = static_cast<int>(itr.row());
          if (!state[row] && !state[col]) continue;
          if (!state[row] && state[col]) rhs[row] -= itr.value() * fixed[col];
          itr.valueRef() = row == col ? 1.0 : 0.0;
        }
      }
      for (int i = 0; i < n; ++i)
        if (state[i]) rhs[i] = fixed[i];
      if (!qp_pattern_) {
        qp_solver_.analyzePattern(m);
        qp_pattern_ = true;
      }
      qp_solver_.factorize(m);
      if (qp_solver_.info() != Eigen::Success) throw SolverError("phase-field system factorization failed");
      x = qp_solver_.solve(rhs);
      for (int i = 0; i < n; ++i)
        if (state[i]) x[i] = fixed[i];
      classify(x, next);
      if (next == state) {
        for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], lo[i], hi[i]);
        return x;
      }
      state = next;
    }
    throw SolverError("phase-field active-set iteration did not settle");
  }

 private:
  struct FrameData {
    std::vector<PhasePoint> pts;
    std::vector<Eigen::Vector2d> raw;
    std::vector<Eigen::Matrix2d> tensor;  // element structure tensor
  };

  FrameData frameData(const VecX& d) const {
    const int ne = mesh_.numElements();
    FrameData fd;
    fd.pts.resize(ne);
    fd.raw.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const auto& t = mesh_.elements[e];
      fd.pts[e].d = std::clamp((d[t[0]] + d[t[1]] + d[t[2]]) / 3.0, 0.0, 1.0);
      fd.pts[e].grad_d = phaseGradient(e, d);
      fd.raw[e] = fd.pts[e].grad_d.head<2>();
    }
    if (model_ != ModelKind::Proposed) return fd;
    fd.tensor.resize(ne);
    for (int e = 0; e < ne; ++e) fd.tensor[e] = fd.raw[e] * fd.raw[e].transpose();
    std::vector<Eigen::Matrix2d> nodal(mesh_.numNodes());
    for (int pass = 0; pass < frame_passes_; ++pass) {
      std::fill(nodal.begin(), nodal.end(), Eigen::Matrix2d::Zero());
      for (int e = 0; e < ne; ++e)
        for (int v : mesh_.elements[e]) nodal[v] += area_[e] * fd.tensor[e];
      for (int n = 0; n < mesh_.numNodes(); ++n)
        if (node_area_[n] > 0) nodal[n] /= node_area_[n];
      for (int e = 0; e < ne; ++e) {
        fd.tensor[e].setZero();
        for (int v : mesh_.elements[e]) fd.tensor[e] += nodal[v] / 3.0;
      }
    }
    for (int e = 0; e < ne; ++e) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(fd.tensor[e]);
      const double lmax = std::max(es.eigenvalues()[1], 0.0);
      const Eigen::Vector2d v = es.eigenvectors().col(1);
      fd.pts[e].grad_d = Vec3(v.x(), v.y(), 0) * std::sqrt(lmax);
    }
    return fd;
  }

  // Gradient of sum_e A_e psi_e with respect to nodal d through the recovered
  // frame p_e = sqrt(lmax) v of the element structure tensor.
  VecX frameGradient(const FrameData& fd, const std::vector<Eigen::Vector2d>& flux) const {
    const int ne = mesh_.numElements();
    // adjoint of the element tensors, then back through the smoothing passes
    std::vector<Eigen::Matrix2d> ge(ne, Eigen::Matrix2d::Zero());
    for (int e = 0; e < ne; ++e) {
      if (flux[e].squaredNorm() == 0.0) continue;
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(fd.tensor[e]);
      const double l1 = es.eigenvalues()[1], l2 = es.eigenvalues()[0];
      if (!(l1 > 0)) continue;
      const Eigen::Vector2d v = es.eigenvectors().col(1), w = es.eigenvectors().col(0);
      const double r = std::sqrt(l1);
      // dpsi/dS for S -> sqrt(lmax) v
      Eigen::Matrix2d m = flux[e].dot(v) / (2 * r) * v * v.transpose();
      if (l1 - l2 > 1e-12 * l1) m += r * flux[e].dot(w) / (l1 - l2) * 0.5 * (w * v.transpose() + v * w.transpose());
      ge[e] = area_[e] * m;
    }
    std::vector<Eigen::Matrix2d> nodal(mesh_.numNodes());
    for (int pass = 0; pass < frame_passes_; ++pass) {
      std::fill(nodal.begin(), nodal.end(), Eigen::Matrix2d::Zero());
      for (int e = 0; e < ne; ++e)
        for (int n : mesh_.elements[e]) nodal[n] += ge[e] / 3.0;
      for (int f = 0; f < ne; ++f) {
        ge[f].setZero();
        for (int n : mesh_.elements[f])
          if (node_area_[n] > 0) ge[f] += area_[f] * nodal[n] / node_area_[n];
      }
    }
    VecX g = VecX::Zero(mesh_.numNodes());
    for (int f = 0; f < ne; ++f) {
      const Eigen::Vector2d q = 2.0 * ge[f] * fd.raw[f];
      if (q.squaredNorm() == 0.0) continue;
      const auto& t = mesh_.elements[f];
      for (int i = 0; i < 3; ++i) g[t[i]] += grad_[f].row(i).dot(q);
    }
    return g;
  }

  void setupGeometry() {
    const int ne = mesh_.numElements();
    area_.resize(ne);
    grad_.resize(ne);
    node_area_.assign(mesh_.numNodes(), 0.0);
    for (int e = 0; e < ne; ++e) {
      const auto& t = mesh_.elements[e];
      const Vec2 &p0 = mesh_.nodes[t[0]], &p1 = mesh_.nodes[t[1]], &p2 = mesh_.nodes[t[2]];
      const double A = mesh_.area(e);
      area_[e] = A;
      Eigen::Matrix<double, 3, 2> g;
      g << p1.y() - p2.y(), p2.x() - p1.x(), p2.y() - p0.y(), p0.x() - p2.x(), p0.y() - p1.y(), p1.x() - p0.x();
      grad_[e] = g / (2.0 * A);
      for (int v : t) node_area_[v] += A;
    }
  }

  static int slotOf(const SpMat& m, int row, int col) {
    const int* outer = m.outerIndexPtr();
    const int* inner = m.innerIndexPtr();
    const int* p = std::lower_bound(inner + outer[col], inner + outer[col + 1], row);
    return static_cast<int>(p - inner);
  }

  void setupPatterns() {
    const int ne = mesh_.numElements();
    std::vector<Eigen::Triplet<double>> trip;
    for (const auto& t : mesh_.elements)
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const int fa = dofs_.free_index[2 * t[a / 2] + a % 2], fb = dofs_.free_index[2 * t[b / 2] + b % 2];
          if (fa >= 0 && fb >= 0) trip.emplace_back(fa, fb, 0.0);
        }
    kmat_.resize(dofs_.numFree(), dofs_.numFree());
    kmat_.setFromTriplets(trip.begin(), trip.end());
    kmat_.makeCompressed();
    uslot_.resize(ne);
    for (int e = 0; e < ne; ++e) {
      const auto& t = mesh_.elements[e];
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) {
          const int fa = dofs_.free_index[2 * t[a / 2] + a % 2], fb = dofs_.free_index[2 * t[b / 2] + b % 2];
          uslot_[e][6 * a + b] = (fa >= 0 && fb >= 0) ? slotOf(kmat_, fa, fb) : -1;
        }
    }
    // undamaged stiffness for fallback steps
    SpMat k0 = kmat_;
    const Mat6 c0 = isotropicTangent(mat_.lambda, mat_.mu);
    for (int e = 0; e < ne; ++e) scatterStiffness(e, planeStrain(c0), k0.valuePtr());
    k0_solver_.compute(k0);
    if (k0_solver_.info() != Eigen::Success) throw SolverError("undamaged stiffness is singular");

    // phase field: gc/ell M + gc ell L
    trip.clear();
    for (const auto& t : mesh_.elements)
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) trip.emplace_back(t[a], t[b], 0.0);
    surface_.resize(mesh_.numNodes(), mesh_.numNodes());
    surface_.setFromTriplets(trip.begin(), trip.end());
    surface_.makeCompressed();
    dslot_.resize(ne);
    double* sv = surface_.valuePtr();
    for (int e = 0; e < ne; ++e) {
      const auto& t = mesh_.elements[e];
      const double A = area_[e];
      const Eigen::Matrix3d lap = A * grad_[e] * grad_[e].transpose();
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const int k = slotOf(surface_, t[a], t[b]);
          dslot_[e][3 * a + b] = k;
          const double mass = A / 12.0 * (a == b ? 2.0 : 1.0);
          sv[k] += mat_.gc / mat_.ell * mass + mat_.gc * mat_.ell * lap(a, b);
        }
    }
  }

  static Eigen::Matrix3d planeStrain(const Mat6& c) {
    static constexpr std::array<int, 3> idx{0, 1, 5};
    Eigen::Matrix3d d;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) d(i, j) = c(idx[i], idx[j]);
    return d;
  }

  Eigen::Matrix<double, 3, 6> bmatrix(int e) const {
    const auto& g = grad_[e];
    Eigen::Matrix<double, 3, 6> b = Eigen::Matrix<double, 3, 6>::Zero();
    for (int a = 0; a < 3; ++a) {
      b(0, 2 * a) = g(a, 0);
      b(1, 2 * a + 1) = g(a, 1);
      b(2, 2 * a) = g(a, 1);
      b(2, 2 * a + 1) = g(a, 0);
    }
    return b;
  }

  void scatterStiffness(int e, const Eigen::Matrix3d& dm, double* values) const {
    const auto b = bmatrix(e);
    const Eigen::Matrix<double, 6, 6> ke = area_[e] * b.transpose() * dm * b;
    for (int k = 0; k < 36; ++k)
      if (uslot_[e][k] >= 0) values[uslot_[e][k]] += ke(k / 6, k % 6);
  }

  // Returns the elastic energy; fills internal forces and optionally the tangent.
  double assembleElastic(const VecX& u, const std::vector<PhasePoint>& pts, VecX* f, bool tangent) const {
    if (f) f->setZero(dofs_.ndof);
    double* kv = nullptr;
    if (tangent) {
      std::fill(kmat_.valuePtr(), kmat_.valuePtr() + kmat_.nonZeros(), 0.0);
      kv = kmat_.valuePtr();
    }
    long double energy = 0, fsq = 0;
    for (int e = 0; e < mesh_.numElements(); ++e) {
      const auto out = evaluateElement(e, u, pts[e]);
      energy += area_[e] * out.psi;
      const auto& t = mesh_.elements[e];
      if (f) {
        const Eigen::Vector3d sig(out.sigma(0, 0), out.sigma(1, 1), out.sigma(0, 1));
        const Eigen::Matrix<double, 6, 1> fe = area_[e] * bmatrix(e).transpose() * sig;
        for (int a = 0; a < 6; ++a) (*f)[2 * t[a / 2] + a % 2] += fe[a];
        const SymTensor3 s0 = sigma0(strain(e, u), mat_);
        fsq += (area_[e] * bmatrix(e).transpose() * Eigen::Vector3d(s0(0, 0), s0(1, 1), s0(0, 1))).squaredNorm();
      }
      if (kv) scatterStiffness(e, planeStrain(out.tangent), kv);
    }
    if (f) force_scale_ = std::max(force_scale_, std::sqrt(static_cast<double>(fsq)));
    return static_cast<double>(energy);
  }

  VecX freePart(const VecX& f) const {
    VecX r(dofs_.numFree());
    for (int i = 0; i < dofs_.numFree(); ++i) r[i] = f[dofs_.free_dofs[i]];
    return r;
  }

  void addFree(VecX& u, const VecX& p) const {
    for (int i = 0; i < dofs_.numFree(); ++i) u[dofs_.free_dofs[i]] += p[i];
  }

  Mesh mesh_;
  std::vector<DirichletBC> bcs_;
  std::vector<int> crack_nodes_;
  ModelKind model_;
  MaterialParams mat_;
  EvalOptions opts_;
  DofSystem dofs_;
  std::vector<double> area_, node_area_;
  // largest undamaged element-force norm seen: a roundoff scale that does not cancel
  mutable double force_scale_ = 0;
  std::vector<Eigen::Matrix<double, 3, 2>> grad_;
  mutable SpMat kmat_;
  std::vector<std::array<int, 36>> uslot_;
  SpMat surface_;
  std::vector<std::array<int, 9>> dslot_;
  double phi_curv_ = 2.0, gs_curv_ = 0.0;
  int frame_passes_ = 1;

  Eigen::SimplicialLDLT<SpMat> ldlt_, k0_solver_, qp_solver_;
  Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>> lu_;
  bool ldlt_pattern_ = false, lu_pattern_ = false, qp_pattern_ = false;
};

// ---- load programs ----

struct StepRecord {
  int step = 0;
  double load = 0;
  Vec2 reaction = Vec2::Zero();
  double max_d = 0;
  int iterations = 0;
  bool converged = true;
  double max_energy_increase = 0;
  double energy = 0;  // total energy at the end of the step
  std::map<std::string, Vec2> set_reactions;
  std::vector<std::string> warnings;
};

using StepObserver = std::function<void(const StepRecord&, const SolutionState&)>;

inline std::vector<StepRecord> runLoadProgram(PhaseFieldSolver& solver, const LoadProgram& program, const Controls& controls,
                                              const std::string& reaction_set, SolutionState* state = nullptr,
                                              const StepObserver& observer = {}) {
  std::vector<StepRecord> history;
  const auto loads = program.values();
  SolutionState local = solver.initialState();
  SolutionState& s = state ? *state : local;
  if (s.u.size() == 0) s = solver.initialState();
  for (std::size_t i = 0; i < loads.size(); ++i) {
    StepReport rep;
    try {
      rep = solver.staggeredStep(s, loads[i], controls);
    } catch (SolverError& e) {
      SolverError err(std::string("step ") + std::to_string(i) + ": " + e.what());
      err.step = static_cast<int>(i);
      throw err;
    }
    StepRecord rec;
    rec.step = static_cast<int>(i);
    rec.load = loads[i];
    auto it = s.reactions.find(reaction_set);
    if (it == s.reactions.end()) throw InvalidInput("no reaction recorded for set '" + reaction_set + "'");
    rec.reaction = it->second;
    rec.max_d = s.d.maxCoeff();
    rec.iterations = rep.iterations;
    rec.converged = rep.converged;
    rec.max_energy_increase = rep.max_energy_increase;
    rec.energy = rep.energy_log.empty() ? 0.0 : rep.energy_log.back();
    rec.set_reactions = s.reactions;
    rec.warnings = rep.warnings;
    history.push_back(rec);
    if (observer) observer(rec, s);
  }
  return history;
}

}  // namespace pff
