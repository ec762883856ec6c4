// Evaluates every split model at one strain state and a few phase-field values.
#include <cstdio>

#include "pffrac/pffrac.hpp"

int main() {
  pff::MaterialParams mat;
  mat.lambda = 121150;
  mat.mu = 80770;
  mat.gc = 2.7;
  mat.ell = 0.015;

  // opening across a horizontal crack with some shear
  const auto eps = pff::SymTensor3::fromComponents(2e-4, 5e-4, 0, 0, 0, 3e-4);
  pff::EvalOptions opts;
  opts.crack_normal = pff::Vec3(0, 1, 0);

  std::printf("%-10s %6s %14s %14s %14s\n", "model", "d", "psi", "sigma22", "sigma12");
  for (auto m : pff::kAllModels) {
    for (double d : {0.0, 0.5, 1.0}) {
      const auto out = pff::evaluate(m, eps, pff::PhasePoint{d, pff::Vec3::Zero()}, mat, opts);
      std::printf("%-10s %6.2f %14.6g %14.6g %14.6g\n", pff::toString(m).c_str(), d, out.psi, out.sigma[1], out.sigma[5]);
    }
  }
}
