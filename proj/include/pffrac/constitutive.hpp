#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "tables.hpp"
#include "tensor.hpp"

namespace pff {

struct MaterialParams {
  double lambda = 0;  // MPa
  double mu = 0;      // MPa
  double gc = 0;      // N/mm
  double ell = 0;     // mm
  double k_residual = 1e-6;
  double alpha_reg = 5.66e-4;
  double sk_b = 2.0;

  double K() const { return lambda + 2.0 * mu / 3.0; }
  double nu() const { return lambda / (2.0 * (lambda + mu)); }
  double pModulus() const { return lambda + 2.0 * mu; }

  void validate() const {
    auto bad = [](const std::string& f, const std::string& why) { throw InvalidInput("material " + f + ": " + why); };
    if (!(std::isfinite(lambda))) bad("lambda", "not finite");
    if (!(mu > 0)) bad("mu", "must be positive");
    if (!(lambda + 2 * mu > 0)) bad("lambda", "lambda + 2 mu must be positive");
    if (!(k_residual >= 0 && k_residual < 1)) bad("k_residual", "must lie in [0, 1)");
    if (!(alpha_reg > 0)) bad("alpha_reg", "must be positive");
    if (!(std::isfinite(sk_b) && sk_b != 0)) bad("sk_b", "must be finite and nonzero");
  }
  // fracture data are only needed by the FE solver
  void validateFracture() const {
    validate();
    if (!(gc > 0)) throw InvalidInput("material gc: must be positive");
    if (!(ell > 0)) throw InvalidInput("material ell: must be positive");
  }
};

struct PhasePoint {
  double d = 0;
  Vec3 grad_d = Vec3::Zero();

  double gradNorm() const { return grad_d.norm(); }
  bool hasNormal() const { return gradNorm() > 1e-14; }
  // e2 when the gradient vanishes
  Vec3 normal() const { return hasNormal() ? Vec3(grad_d / gradNorm()) : Vec3(0, 1, 0); }
};

enum class ModelKind { Isotropic, VolDev, Spectral, Wu, SS1, SS2, SK, Proposed };

inline constexpr std::array<ModelKind, 8> kAllModels{ModelKind::Isotropic, ModelKind::VolDev, ModelKind::Spectral,
                                                     ModelKind::Wu,        ModelKind::SS1,    ModelKind::SS2,
                                                     ModelKind::SK,        ModelKind::Proposed};

inline std::string toString(ModelKind m) {
  switch (m) {
    case ModelKind::Isotropic: return "isotropic";
    case ModelKind::VolDev: return "voldev";
    case ModelKind::Spectral: return "spectral";
    case ModelKind::Wu: return "wu";
    case ModelKind::SS1: return "ss1";
    case ModelKind::SS2: return "ss2";
    case ModelKind::SK: return "sk";
    case ModelKind::Proposed: return "proposed";
  }
  return "?";
}

inline std::optional<ModelKind> parseModel(std::string_view s) {
  for (auto m : kAllModels)
    if (toString(m) == s) return m;
  if (s == "vd" || s == "volumetric-deviatoric") return ModelKind::VolDev;
  return std::nullopt;
}

inline bool isVariational(ModelKind m) { return m != ModelKind::SS1 && m != ModelKind::SS2; }

struct ConstitutiveOutput {
  bool energy_available = true;
  double psi = 0;
  SymTensor3 sigma;
  Mat6 tangent = Mat6::Zero();  // d sigma / d (engineering strain)
  double dpsi_dd = 0;
  Vec3 dpsi_dgradd = Vec3::Zero();
  // psi = phi(d) psi_plus + g_s(d) psi_shear + (d-independent part)
  double psi_plus = 0;
  double psi_shear = 0;
  int branch = 0;  // model specific: 1 tension/active, 0 compression/passive
};

struct EvalOptions {
  const ShearFitTable* shear_fit = nullptr;
  // fixed crack normal: regularization factor 1, no gradient flux
  std::optional<Vec3> crack_normal;
};

// ---- degradation functions ----

inline void requirePhase(double d) {
  if (!(d >= 0.0 && d <= 1.0)) throw InvalidInput("phase field value " + std::to_string(d) + " outside [0, 1]");
}

inline double degradation(double d, double k) {
  requirePhase(d);
  return (1.0 - d) * (1.0 - d) + k;
}
inline double degradationPrime(double d) { return -2.0 * (1.0 - d); }

struct ShearDegradation {
  double value, prime, curvature_bound;
};

inline ShearDegradation shearDegradationFull(double d, double a, double b) {
  requirePhase(d);
  const double x = 1.0 - d;
  // 1 + (x^2 - 1)(a x^2 + b x + 1)
  const double val = 1.0 + (x * x - 1.0) * (a * x * x + b * x + 1.0);
  const double dx = 4 * a * x * x * x + 3 * b * x * x + 2 * (1 - a) * x - b;
  auto second = [&](double y) { return 12 * a * y * y + 6 * b * y + 2 * (1 - a); };
  double sup = std::max(second(0.0), second(1.0));
  if (a != 0) {
    const double v = -b / (4 * a);
    if (v > 0 && v < 1) sup = std::max(sup, second(v));
  }
  return {val, -dx, std::max(sup, 0.0)};
}

inline double shearDegradation(double d, double nu, const ShearFitTable& table = ShearFitTable::builtin()) {
  auto [a, b] = table.lookup(nu);
  return shearDegradationFull(d, a, b).value;
}

struct SkDegradation {
  double value, prime, curvature_bound;
};

inline SkDegradation skDegradationFull(double d, double b) {
  requirePhase(d);
  if (!(std::isfinite(b) && b != 0)) throw InvalidInput("SK parameter b must be finite and nonzero");
  const double eb = std::exp(b);
  const double den = (b - 1.0) * eb + 1.0;
  const double val = (std::exp(b * d) - (b * (d - 1.0) + 1.0) * eb) / den;
  const double prime = (b * std::exp(b * d) - b * eb) / den;
  const double c0 = b * b / den, c1 = b * b * eb / den;
  return {val, prime, std::max({c0, c1, 0.0})};
}

inline double skDegradation(double d, double b) { return skDegradationFull(d, b).value; }

// tanh(alpha ell^2 |grad d|^2) applied to (I4, I5)
inline std::array<double, 2> regularize(double I4, double I5, const Vec3& grad_d, double ell, double alpha) {
  if (!(alpha > 0)) throw InvalidInput("regularization alpha must be positive");
  const double f = std::tanh(alpha * ell * ell * grad_d.squaredNorm());
  return {f * I4, f * I5};
}

// ---- elasticity helpers ----

inline double psi0(const SymTensor3& e, const MaterialParams& m) {
  const double tr = e.trace();
  return 0.5 * m.lambda * tr * tr + m.mu * e.ddot(e);
}

inline SymTensor3 sigma0(const SymTensor3& e, const MaterialParams& m) {
  return m.lambda * e.trace() * SymTensor3::identity() + 2.0 * m.mu * e;
}

inline Mat6 isotropicTangent(double lambda, double mu) {
  Mat6 c = Mat6::Zero();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c(i, j) = lambda;
    c(i, i) += 2.0 * mu;
    c(i + 3, i + 3) = mu;
  }
  return c;
}

template <class Fn>
Mat6 linearTangent(Fn&& sigma_of) {
  Mat6 c;
  for (int j = 0; j < 6; ++j) c.col(j) = sigma_of(engineeringBasis(j)).toVoigt();
  return c;
}

namespace detail {

inline void checkInputs(const SymTensor3& eps, const PhasePoint& ph, const MaterialParams& m) {
  if (!eps.isFinite()) throw InvalidInput("strain is not finite");
  requirePhase(ph.d);
  if (!ph.grad_d.allFinite()) throw InvalidInput("phase gradient is not finite");
  m.validate();
}

inline const ShearFitTable& fitTable(const EvalOptions& o) { return o.shear_fit ? *o.shear_fit : ShearFitTable::builtin(); }

}  // namespace detail

// ---- models ----

inline ConstitutiveOutput psiIsotropic(const SymTensor3& eps, double d, const MaterialParams& m) {
  ConstitutiveOutput out;
  const double g = degradation(d, m.k_residual);
  const double p0 = psi0(eps, m);
  out.psi = g * p0;
  out.sigma = g * sigma0(eps, m);
  out.tangent = g * isotropicTangent(m.lambda, m.mu);
  out.psi_plus = p0;
  out.dpsi_dd = degradationPrime(d) * p0;
  return out;
}

inline ConstitutiveOutput psiVolDev(const SymTensor3& eps, double d, const MaterialParams& m) {
  ConstitutiveOutput out;
  const double g = degradation(d, m.k_residual);
  const double K = m.K();
  const double tr = eps.trace();
  const double tp = macaulay(tr, Sign::Plus), tm = macaulay(tr, Sign::Minus);
  const SymTensor3 dev = eps.deviator();
  const double plus = 0.5 * K * tp * tp + m.mu * dev.ddot(dev);
  const double minus = 0.5 * K * tm * tm;
  out.psi = g * plus + minus;
  out.psi_plus = plus;
  out.dpsi_dd = degradationPrime(d) * plus;
  out.sigma = (g * K * tp + K * tm) * SymTensor3::identity() + g * (2.0 * m.mu * dev);
  out.branch = tr > 0 ? 1 : 0;
  Mat6 c = Mat6::Zero();
  const double kv = (tr > 0 ? g : 1.0) * K;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) c(i, j) = kv + g * 2.0 * m.mu * ((i == j ? 1.0 : 0.0) - 1.0 / 3.0);
    c(i + 3, i + 3) = g * m.mu;
  }
  out.tangent = c;
  return out;
}

inline ConstitutiveOutput psiSpectral(const SymTensor3& eps, double d, const MaterialParams& m) {
  ConstitutiveOutput out;
  const double g = degradation(d, m.k_residual);
  const EigenSystem es = eigDecompose(eps);
  const double tr = eps.trace();
  const double tp = macaulay(tr, Sign::Plus), tm = macaulay(tr, Sign::Minus);
  double plus = 0.5 * m.lambda * tp * tp, minus = 0.5 * m.lambda * tm * tm;
  SymTensor3 sdev;
  for (int a = 0; a < 3; ++a) {
    const double ep = macaulay(es.values[a], Sign::Plus), em = macaulay(es.values[a], Sign::Minus);
    plus += m.mu * ep * ep;
    minus += m.mu * em * em;
    sdev += (g * ep + em) * es.projector(a);
  }
  out.psi = g * plus + minus;
  out.psi_plus = plus;
  out.dpsi_dd = degradationPrime(d) * plus;
  out.sigma = m.lambda * (g * tp + tm) * SymTensor3::identity() + 2.0 * m.mu * sdev;
  auto h = [g](const std::array<double, 3>& x) {
    std::array<double, 3> v{};
    Mat3 j = Mat3::Zero();
    for (int a = 0; a < 3; ++a) {
      v[a] = x[a] > 0 ? g * x[a] : x[a];
      j(a, a) = x[a] > 0 ? g : 1.0;
    }
    return std::make_pair(v, j);
  };
  Mat6 c = 2.0 * m.mu * spectralDerivative(es, h, eps.norm());
  const double lv = m.lambda * (tr > 0 ? g : 1.0);
  c.topLeftCorner<3, 3>().array() += lv;
  out.tangent = c;
  return out;
}

inline ConstitutiveOutput psiWu(const SymTensor3& eps, double d, const MaterialParams& m) {
  ConstitutiveOutput out;
  const double g = degradation(d, m.k_residual);
  const double nu = m.nu();
  const double nut = nu / (1.0 - nu);
  const SymTensor3 sbar = sigma0(eps, m);
  const EigenSystem es = eigDecompose(sbar);
  auto h = [nu, nut](const std::array<double, 3>& s) {
    std::array<double, 3> v{};
    Mat3 j = Mat3::Zero();
    if (s[0] > 0) {
      v[0] = s[0];
      j(0, 0) = 1;
    }
    // second
    double m2;
    Eigen::RowVector3d dm2 = Eigen::RowVector3d::Zero();
    if (s[1] >= nut * s[0]) {
      m2 = s[1];
      dm2(1) = 1;
    } else {
      m2 = nut * s[0];
      dm2(0) = nut;
    }
    if (m2 > 0) {
      v[1] = m2;
      j.row(1) = dm2;
    }
    // third
    double m3;
    Eigen::RowVector3d dm3 = Eigen::RowVector3d::Zero();
    if (s[2] >= nu * (s[0] + s[1])) {
      m3 = s[2];
      dm3(2) = 1;
    } else {
      m3 = nu * (s[0] + s[1]);
      dm3(0) = nu;
      dm3(1) = nu;
    }
    if (nut * s[0] > m3) {
      m3 = nut * s[0];
      dm3 = Eigen::RowVector3d::Zero();
      dm3(0) = nut;
    }
    if (m3 > 0) {
      v[2] = m3;
      j.row(2) = dm3;
    }
    return std::make_pair(v, j);
  };
  auto [hv, jac] = h(es.values);
  // sigma_bar = splus + sminus; assembling both avoids cancellation when g is near k
  SymTensor3 splus, sminus;
  for (int a = 0; a < 3; ++a) {
    const SymTensor3 pa = es.projector(a);
    splus += hv[a] * pa;
    sminus += (es.values[a] - hv[a]) * pa;
  }
  const double plus = 0.5 * splus.ddot(eps);
  out.psi = 0.5 * sminus.ddot(eps) + g * plus;
  out.psi_plus = plus;
  out.dpsi_dd = degradationPrime(d) * plus;
  out.sigma = sminus + g * splus;
  Mat6 dplus = spectralDerivative(es, h, sbar.norm());
  dplus.rightCols<3>() *= 2.0;  // derivative w.r.t. tensor components of sigma_bar
  const Mat6 c0 = isotropicTangent(m.lambda, m.mu);
  const Mat6 cplus = dplus * c0;
  out.tangent = (c0 - cplus) + g * cplus;
  return out;
}

inline ConstitutiveOutput psiSS1(const SymTensor3& eps, const PhasePoint& ph, const MaterialParams& m,
                                 const std::optional<Vec3>& normal = std::nullopt) {
  ConstitutiveOutput out;
  out.energy_available = false;
  out.psi = std::numeric_limits<double>::quiet_NaN();
  out.dpsi_dd = std::numeric_limits<double>::quiet_NaN();
  const double g = degradation(ph.d, m.k_residual);
  const bool has_n = normal.has_value() || ph.hasNormal();
  const SymTensor3 N = has_n ? SymTensor3::outer(normal ? *normal : ph.normal()) : SymTensor3();
  const bool active = eps.ddot(N) > 0;
  out.branch = active ? 1 : 0;
  auto sig = [&](const SymTensor3& e) {
    SymTensor3 s = g * sigma0(e, m);
    if (!active) s += (1.0 - g) * m.pModulus() * e.ddot(N) * N;
    return s;
  };
  out.sigma = sig(eps);
  out.tangent = linearTangent(sig);
  return out;
}

inline ConstitutiveOutput psiSS2(const SymTensor3& eps, const PhasePoint& ph, const MaterialParams& m,
                                 const std::optional<Vec3>& normal = std::nullopt) {
  ConstitutiveOutput out;
  out.energy_available = false;
  out.psi = std::numeric_limits<double>::quiet_NaN();
  out.dpsi_dd = std::numeric_limits<double>::quiet_NaN();
  const double g = degradation(ph.d, m.k_residual);
  const double lam = m.lambda, mu = m.mu;
  const double kl = lam * lam / (lam + 2 * mu);
  const bool has_n = normal.has_value() || ph.hasNormal();
  const Vec3 n = normal ? *normal : ph.normal();
  const SymTensor3 N = has_n ? SymTensor3::outer(n) : SymTensor3();
  const SymTensor3 I = SymTensor3::identity();
  const bool active = eps.ddot(N) > 0;
  out.branch = active ? 1 : 0;
  auto sig = [&](const SymTensor3& e) {
    const double tr = e.trace(), en = e.ddot(N);
    const SymTensor3 ne = has_n ? SymTensor3::symOuter(n, e.apply(n)) : SymTensor3();
    if (active) {
      return (lam + (g - 1) * kl) * tr * I + 2 * mu * e + (g - 1) * (lam + kl) * (tr * N + en * I) +
             4 * (1 - g) * (lam + 2 * mu - kl) * en * N + mu * (g - 1) * ne;
    }
    return lam * tr * I + 2 * mu * e + 4 * mu * (1 - g) * en * N + 2 * mu * (g - 1) * ne;
  };
  out.sigma = sig(eps);
  out.tangent = linearTangent(sig);
  return out;
}

// Without a fixed normal, n is the major principal direction of the undamaged stress.
inline ConstitutiveOutput psiSK(const SymTensor3& eps, double d, const MaterialParams& m,
                                const std::optional<Vec3>& normal = std::nullopt) {
  ConstitutiveOutput out;
  const auto gd = skDegradationFull(d, m.sk_b);
  const double g = gd.value + m.k_residual;
  const double lam = m.lambda, mu = m.mu, pm = m.pModulus();
  const SymTensor3 I = SymTensor3::identity();
  if (normal) {
    const Vec3 n = requireUnit(*normal, "psiSK");
    const SymTensor3 N = SymTensor3::outer(n);
    const SymTensor3 a = lam * I + 2 * mu * N;
    const bool open = a.ddot(eps) > 0;
    out.branch = open ? 1 : 0;
    auto splus = [&](const SymTensor3& e) {
      SymTensor3 s = 2 * mu * (SymTensor3::symOuter(n, e.apply(n)) - 2 * e.ddot(N) * N);
      if (open) s += (a.ddot(e) / pm) * a;
      return s;
    };
    const Vec3 en = eps.apply(n);
    const double snn = a.ddot(eps);
    const double plus = (open ? snn * snn / (2 * pm) : 0.0) + 2 * mu * (en.dot(en) - std::pow(n.dot(en), 2));
    out.psi_plus = plus;
    out.psi = psi0(eps, m) - (1 - g) * plus;
    out.dpsi_dd = gd.prime * plus;
    out.sigma = sigma0(eps, m) - (1 - g) * splus(eps);
    out.tangent = linearTangent([&](const SymTensor3& e) { return sigma0(e, m) - (1 - g) * splus(e); });
    return out;
  }
  const EigenSystem es = eigDecompose(eps);
  const SymTensor3 M1 = es.projector(0);
  const SymTensor3 a = lam * I + 2 * mu * M1;
  const double smax = lam * eps.trace() + 2 * mu * es.values[0];
  const bool open = smax > 0;
  out.branch = open ? 1 : 0;
  const double plus = open ? smax * smax / (2 * pm) : 0.0;
  out.psi_plus = plus;
  out.psi = psi0(eps, m) - (1 - g) * plus;
  out.dpsi_dd = gd.prime * plus;
  out.sigma = sigma0(eps, m);
  out.tangent = isotropicTangent(lam, mu);
  if (open) {
    out.sigma -= (1 - g) * (smax / pm) * a;
    auto h = [](const std::array<double, 3>&) { return std::make_pair(std::array<double, 3>{1, 0, 0}, Mat3::Zero().eval()); };
    const Voigt6 av = a.toVoigt();
    const Mat6 cplus = (av * av.transpose() + smax * 2 * mu * spectralDerivative(es, h, eps.norm())) / pm;
    out.tangent -= (1 - g) * cplus;
  }
  return out;
}

// Crack frame: unit normal n and regularization factor t; flux needs the raw gradient.
inline ConstitutiveOutput psiProposed(const SymTensor3& eps, const PhasePoint& ph, const MaterialParams& m,
                                      const ShearFitTable& table = ShearFitTable::builtin(),
                                      const std::optional<Vec3>& normal = std::nullopt) {
  ConstitutiveOutput out;
  const double lam = m.lambda, mu = m.mu, pm = m.pModulus();
  const double d = ph.d;
  const double g = degradation(d, m.k_residual);
  const double gp = degradationPrime(d);
  auto [fa, fb] = table.lookup(m.nu());
  const auto gs = shearDegradationFull(d, fa, fb);

  Vec3 n;
  double t = 1.0, dt_ds = 0.0, s = 0.0;
  const double gn = ph.gradNorm();
  const bool fixed = normal.has_value();
  if (fixed) {
    n = requireUnit(*normal, "psiProposed");
  } else {
    n = ph.normal();
    s = m.alpha_reg * m.ell * m.ell * gn * gn;
    t = std::tanh(s);
    dt_ds = 1.0 - t * t;
  }
  const InvariantSet inv = invariants(eps, n, t);
  const double I1 = inv.I1, I2 = inv.I2, J4 = inv.I4hat, J5 = inv.I5hat;
  const double beta = lam * I1 + 2 * mu * J4;
  const bool tension = beta > 0;  // H(0) = 0
  out.branch = tension ? 1 : 0;
  const double den = 2 * pm;

  double psi_main, f1, f2 = -2 * mu, f4, f5 = -2 * mu, f11, f14, f44;
  if (tension) {
    psi_main = (g * beta * beta + 4 * mu * (lam + mu) * (I1 * I1 + J4 * J4 - 2 * I2 - 2 * J5) +
                4 * lam * mu * (I2 - I1 * J4 + J5)) /
               den;
    f1 = (2 * g * lam * beta + 8 * mu * (lam + mu) * I1 - 4 * lam * mu * J4) / den;
    f4 = (4 * g * mu * beta + 8 * mu * (lam + mu) * J4 - 4 * lam * mu * I1) / den;
    f11 = (2 * g * lam * lam + 8 * mu * (lam + mu)) / den;
    f14 = (4 * g * lam * mu - 4 * lam * mu) / den;
    f44 = (8 * g * mu * mu + 8 * mu * (lam + mu)) / den;
  } else {
    psi_main = 0.5 * (lam * I1 * I1 + 2 * mu * (I1 * I1 + 2 * J4 * J4 - 2 * I2 - 2 * J5));
    f1 = pm * I1;
    f4 = 4 * mu * J4;
    f11 = pm;
    f14 = 0;
    f44 = 4 * mu;
  }
  const double shear = 2 * mu * (J5 - J4 * J4);
  f4 += -4 * mu * gs.value * J4;
  f5 += 2 * mu * gs.value;
  f44 += -4 * mu * gs.value;

  out.psi = psi_main + gs.value * shear;
  out.psi_plus = tension ? beta * beta / den : 0.0;
  out.psi_shear = shear;
  out.dpsi_dd = gp * out.psi_plus + gs.prime * shear;

  const SymTensor3 I = SymTensor3::identity();
  const SymTensor3 N = SymTensor3::outer(n);
  auto dI2 = [&](const SymTensor3& e) { return e.trace() * I - e; };
  auto dI5 = [&](const SymTensor3& e) { return SymTensor3::symOuter(e.apply(n), n); };
  out.sigma = f1 * I + f2 * dI2(eps) + t * f4 * N + t * f5 * dI5(eps);
  out.tangent = linearTangent([&](const SymTensor3& b) {
    const double trb = b.trace(), nb = b.ddot(N);
    return f11 * trb * I + f14 * t * (nb * I + trb * N) + f44 * t * t * nb * N + f2 * dI2(b) + t * f5 * dI5(b);
  });

  if (!fixed && gn > 1e-14) {
    // d/d(grad d) through t and n
    const Vec3 en = eps.apply(n), e2n = eps.apply(en);
    const Mat3 proj = (Mat3::Identity() - n * n.transpose()) / gn;
    const Vec3 dI4 = proj * (2.0 * en);
    const Vec3 dI5v = proj * (2.0 * e2n);
    const Vec3 dt = dt_ds * 2.0 * m.alpha_reg * m.ell * m.ell * ph.grad_d;
    out.dpsi_dgradd = f4 * (dt * inv.I4 + t * dI4) + f5 * (dt * inv.I5 + t * dI5v);
  }
  return out;
}

inline ConstitutiveOutput evaluate(ModelKind model, const SymTensor3& eps, const PhasePoint& phase,
                                   const MaterialParams& mat, const EvalOptions& opts = {}) {
  detail::checkInputs(eps, phase, mat);
  switch (model) {
    case ModelKind::Isotropic: return psiIsotropic(eps, phase.d, mat);
    case ModelKind::VolDev: return psiVolDev(eps, phase.d, mat);
    case ModelKind::Spectral: return psiSpectral(eps, phase.d, mat);
    case ModelKind::Wu: return psiWu(eps, phase.d, mat);
    case ModelKind::SS1: return psiSS1(eps, phase, mat, opts.crack_normal);
    case ModelKind::SS2: return psiSS2(eps, phase, mat, opts.crack_normal);
    case ModelKind::SK: return psiSK(eps, phase.d, mat, opts.crack_normal);
    case ModelKind::Proposed: return psiProposed(eps, phase, mat, detail::fitTable(opts), opts.crack_normal);
  }
  throw UnsupportedModel("unknown model");
}

struct DrivingForce {
  double dpsi_dd = 0;
  Vec3 dpsi_dgradd = Vec3::Zero();
};

inline DrivingForce drivingForce(ModelKind model, const SymTensor3& eps, const PhasePoint& phase,
                                 const MaterialParams& mat, const EvalOptions& opts = {}) {
  if (!isVariational(model))
    throw UnsupportedModel(toString(model) + " has no strain energy; its phase-field driving force is undefined");
  auto out = evaluate(model, eps, phase, mat, opts);
  return {out.dpsi_dd, out.dpsi_dgradd};
}

}  // namespace pff
