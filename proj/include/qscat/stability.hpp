#pragma once

#include "qscat/core.hpp"

namespace qscat {

struct StencilCoefficients {
  static constexpr std::array<double, 5> alpha{-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0,
                                               -1.0 / 560.0};
};

// eigenvalue factor of the 8th-order stencil: D2 e^{i delta j} = -f(delta)/Delta^2 e^{i delta j}
double stencil_factor_f(double delta);

// Inactive axes are passed with an infinite spacing.
double stability_dtau_fdtd(const Vec3& spacing, double vmax);
double stability_dtau_pstd(const Vec3& spacing, double vmax);

// eta = sin(dtau)/dtau
double phase_eta(double dtau);

}  // namespace qscat
