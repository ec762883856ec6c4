#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

#include "errors.hpp"

namespace pff {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Voigt6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;

// Voigt ordering (11, 22, 33, 23, 13, 12)
inline constexpr std::array<std::array<int, 2>, 6> kVoigtPairs{{{0, 0}, {1, 1}, {2, 2}, {1, 2}, {0, 2}, {0, 1}}};

inline int voigtIndex(int i, int j) {
  if (i == j) return i;
  const int s = i + j;  // 1 -> 12, 2 -> 13, 3 -> 23
  return s == 1 ? 5 : (s == 2 ? 4 : 3);
}

enum class Sign { Plus, Minus };

inline double macaulay(double x, Sign s) { return s == Sign::Plus ? std::max(x, 0.0) : std::min(x, 0.0); }

class SymTensor3 {
 public:
  SymTensor3() { c_.fill(0.0); }

  static SymTensor3 fromComponents(double t11, double t22, double t33, double t23, double t13, double t12) {
    SymTensor3 t;
    t.c_ = {t11, t22, t33, t23, t13, t12};
    return t;
  }
  static SymTensor3 diag(double a, double b, double c) { return fromComponents(a, b, c, 0, 0, 0); }
  static SymTensor3 identity() { return diag(1, 1, 1); }

  static SymTensor3 fromMatrix(const Mat3& m) {
    SymTensor3 t;
    for (int k = 0; k < 6; ++k) {
      auto [i, j] = kVoigtPairs[k];
      t.c_[k] = 0.5 * (m(i, j) + m(j, i));
    }
    return t;
  }

  // a (x) a
  static SymTensor3 outer(const Vec3& a) { return fromMatrix(a * a.transpose()); }
  // a (x) b + b (x) a
  static SymTensor3 symOuter(const Vec3& a, const Vec3& b) {
    return fromMatrix(a * b.transpose() + b * a.transpose());
  }

  // tensor components, no shear factors
  static SymTensor3 fromVoigt(const Voigt6& v) {
    SymTensor3 t;
    for (int k = 0; k < 6; ++k) t.c_[k] = v[k];
    return t;
  }
  Voigt6 toVoigt() const {
    Voigt6 v;
    for (int k = 0; k < 6; ++k) v[k] = c_[k];
    return v;
  }
  // engineering strain: shear entries doubled
  static SymTensor3 fromEngineering(const Voigt6& v) {
    return fromComponents(v[0], v[1], v[2], 0.5 * v[3], 0.5 * v[4], 0.5 * v[5]);
  }
  Voigt6 toEngineering() const {
    Voigt6 v = toVoigt();
    v.tail<3>() *= 2.0;
    return v;
  }

  double operator()(int i, int j) const { return c_[voigtIndex(i, j)]; }
  double& operator[](int k) { return c_[k]; }
  double operator[](int k) const { return c_[k]; }

  Mat3 matrix() const {
    Mat3 m;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) = (*this)(i, j);
    return m;
  }

  double trace() const { return c_[0] + c_[1] + c_[2]; }
  SymTensor3 deviator() const {
    SymTensor3 t = *this;
    const double m = trace() / 3.0;
    for (int k = 0; k < 3; ++k) t.c_[k] -= m;
    return t;
  }
  double ddot(const SymTensor3& o) const {
    return c_[0] * o.c_[0] + c_[1] * o.c_[1] + c_[2] * o.c_[2] +
           2.0 * (c_[3] * o.c_[3] + c_[4] * o.c_[4] + c_[5] * o.c_[5]);
  }
  double norm() const { return std::sqrt(ddot(*this)); }
  Vec3 apply(const Vec3& v) const { return matrix() * v; }
  SymTensor3 square() const { return fromMatrix(matrix() * matrix()); }
  SymTensor3 rotated(const Mat3& q) const { return fromMatrix(q * matrix() * q.transpose()); }

  bool isFinite() const {
    return std::all_of(c_.begin(), c_.end(), [](double x) { return std::isfinite(x); });
  }

  SymTensor3& operator+=(const SymTensor3& o) {
    for (int k = 0; k < 6; ++k) c_[k] += o.c_[k];
    return *this;
  }
  SymTensor3& operator-=(const SymTensor3& o) {
    for (int k = 0; k < 6; ++k) c_[k] -= o.c_[k];
    return *this;
  }
  SymTensor3& operator*=(double s) {
    for (auto& x : c_) x *= s;
    return *this;
  }
  friend SymTensor3 operator+(SymTensor3 a, const SymTensor3& b) { return a += b; }
  friend SymTensor3 operator-(SymTensor3 a, const SymTensor3& b) { return a -= b; }
  friend SymTensor3 operator*(SymTensor3 a, double s) { return a *= s; }
  friend SymTensor3 operator*(double s, SymTensor3 a) { return a *= s; }
  friend SymTensor3 operator-(SymTensor3 a) { return a *= -1.0; }
  bool operator==(const SymTensor3& o) const { return c_ == o.c_; }

 private:
  std::array<double, 6> c_;
};

// Unit strain for engineering Voigt column j (shear entries 1/2)
inline SymTensor3 engineeringBasis(int j) {
  Voigt6 e = Voigt6::Zero();
  e[j] = 1.0;
  return SymTensor3::fromEngineering(e);
}

struct EigenSystem {
  std::array<double, 3> values{};  // descending
  Mat3 vectors = Mat3::Identity();  // columns

  Mat3 source = Mat3::Zero();

  Vec3 vector(int a) const { return vectors.col(a); }
  // Sylvester's formula when the spectrum is well separated, eigenvectors otherwise
  SymTensor3 projector(int a) const {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    const double scale = std::max({std::abs(values[0]), std::abs(values[1]), std::abs(values[2])});
    const double gb = values[a] - values[b], gc = values[a] - values[c];
    const double gbc = values[b] - values[c];
    const double sep = 0.1 * scale;
    if (scale > 0 && std::abs(gb) >= sep && std::abs(gc) >= sep && std::abs(gbc) >= sep) {
      const Mat3 id = Mat3::Identity();
      const Mat3 p = (source - values[b] * id) * (source - values[c] * id);
      return SymTensor3::fromMatrix(p / (gb * gc));
    }
    return SymTensor3::outer(vectors.col(a));
  }
  SymTensor3 reconstruct() const {
    SymTensor3 t;
    for (int a = 0; a < 3; ++a) t += values[a] * projector(a);
    return t;
  }
};

// Cyclic Jacobi; each rotation is the closed-form 2x2 solution.
inline EigenSystem eigDecompose(const SymTensor3& t) {
  if (!t.isFinite()) throw InvalidInput("eigDecompose: non-finite tensor");
  Mat3 a = t.matrix();
  Mat3 v = Mat3::Identity();
  const double scale = a.norm();
  if (scale > 0.0) {
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double off = std::hypot(std::hypot(a(0, 1), a(0, 2)), a(1, 2));
      if (off <= 1e-17 * scale) break;
      for (int p = 0; p < 2; ++p) {
        for (int q = p + 1; q < 3; ++q) {
          const double apq = a(p, q);
          if (std::abs(apq) <= 1e-300) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          const double tt = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(tt * tt + 1.0);
          const double s = tt * c;
          Eigen::Matrix3d r = Mat3::Identity();
          r(p, p) = c;
          r(q, q) = c;
          r(p, q) = s;
          r(q, p) = -s;
          const double app = a(p, p) - tt * apq, aqq = a(q, q) + tt * apq;
          a = r.transpose() * a * r;
          a(p, p) = app;
          a(q, q) = aqq;
          a(p, q) = a(q, p) = 0.0;
          v = v * r;
        }
      }
    }
  }
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  EigenSystem es;
  es.source = t.matrix();
  for (int k = 0; k < 3; ++k) {
    es.values[k] = a(idx[k], idx[k]);
    es.vectors.col(k) = v.col(idx[k]);
  }
  if (es.vectors.determinant() < 0) es.vectors.col(2) *= -1.0;
  return es;
}

struct InvariantSet {
  double I1 = 0, I2 = 0, I4 = 0, I5 = 0;
  double I4hat = 0, I5hat = 0;
};

inline Vec3 requireUnit(const Vec3& n, const char* who) {
  if (!n.allFinite() || std::abs(n.norm() - 1.0) > 1e-8) throw InvalidInput(std::string(who) + ": normal is not unit length");
  return n;
}

// factor scales the pseudo-invariants into I4hat, I5hat
inline InvariantSet invariants(const SymTensor3& eps, const Vec3& n, double factor = 1.0) {
  if (!eps.isFinite()) throw InvalidInput("invariants: non-finite strain");
  requireUnit(n, "invariants");
  InvariantSet s;
  s.I1 = eps.trace();
  s.I2 = 0.5 * (s.I1 * s.I1 - eps.ddot(eps));
  const Vec3 en = eps.apply(n);
  s.I4 = n.dot(en);
  s.I5 = en.dot(en);
  s.I4hat = factor * s.I4;
  s.I5hat = factor * s.I5;
  return s;
}

// Derivative of F(X) = sum_a h_a(x) E_a (x) E_a, x the eigenvalues of X.
// h(x) returns {h_a} and the Jacobian dh_a/dx_b. Column j of the result is dF
// applied to engineeringBasis(j). scale is |X|, used for the coalescence shift.
template <class Fn>
Mat6 spectralDerivative(const EigenSystem& es, Fn&& h, double scale) {
  std::array<double, 3> x = es.values;
  auto [hv, jac] = h(x);
  Mat3 theta = Mat3::Zero();
  bool shifted = false;
  for (int a = 0; a < 3 && !shifted; ++a)
    for (int b = a + 1; b < 3; ++b)
      if (std::abs(x[a] - x[b]) <= 1e-10 * scale) shifted = true;
  std::array<double, 3> hs = hv;
  if (shifted && scale > 0.0) {
    std::array<double, 3> xs = x;
    for (int a = 0; a < 3; ++a) xs[a] += (3 - a) * 1e-10 * scale;  // keeps descending order
    auto r = h(xs);
    hs = r.first;
    x = xs;
  }
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      const double gap = x[a] - x[b];
      if (gap != 0.0) {
        theta(a, b) = (hs[a] - hs[b]) / gap;
      } else {
        theta(a, b) = jac(a, a) - jac(a, b);
      }
    }
  }
  const Mat3& e = es.vectors;
  Mat6 out;
  for (int j = 0; j < 6; ++j) {
    const Mat3 bp = e.transpose() * engineeringBasis(j).matrix() * e;
    Mat3 dp = Mat3::Zero();
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) {
        if (a == b) {
          for (int c = 0; c < 3; ++c) dp(a, a) += jac(a, c) * bp(c, c);
        } else {
          dp(a, b) = theta(a, b) * bp(a, b);
        }
      }
    }
    out.col(j) = SymTensor3::fromMatrix(e * dp * e.transpose()).toVoigt();
  }
  return out;
}

}  // namespace pff
