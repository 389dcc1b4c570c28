#pragma once

#include <functional>
#include <string>

#include "qscat/core.hpp"

namespace qscat {

// Central potential V(r)/E0, zero for r >= cutoff.
struct CentralPotential {
  std::function<double(double)> v;
  double cutoff = 0.0;
  static CentralPotential square_well(double s, double radius);  // V = s inside radius
  static CentralPotential none();
};

struct OracleOptions {
  int lmax_override = -1;     // < 0: ceil(k a) + 12, raised while the tail is not converged
  double radial_step = 1e-3;  // reduced length
  double tail_tol = 1e-10;    // |delta_l| at l_max
  int lmax_cap = 400;
};

struct PartialWaveSolution {
  double k = 1.0;
  int lmax = 0;
  std::vector<double> delta;  // principal branch, (-pi/2, pi/2]

  cplx amplitude(double theta) const;  // f(theta)
  double dcs(double theta) const { return std::norm(amplitude(theta)); }
  double total_cross_section() const;  // (4 pi / k^2) sum (2l+1) sin^2 delta
};

// radial equation u'' = (l(l+1)/r^2 + V - k^2) u by RK4 from the origin series, matched to
// j_l, y_l at the cutoff
double phase_shift(const CentralPotential& pot, double k, int l, double radial_step = 1e-3);
// errors: non_convergent when the tail is still above tail_tol at lmax_cap
PartialWaveSolution phase_shifts(const CentralPotential& pot, double k, const OracleOptions& opt = {});

std::vector<double> differential_cross_section(const PartialWaveSolution& sol,
                                               const std::vector<double>& theta);

// closed-form s-wave shift of a square step V = s inside radius a
double square_well_s_wave(double s, double a, double k);

// j_l(x), y_l(x) for l = 0..lmax (downward recurrence for j, upward for y); x > 0
std::vector<double> sph_bessel_j_all(int lmax, double x);
std::vector<double> sph_bessel_y_all(int lmax, double x);
// P_l(x) for l = 0..lmax by upward recurrence
std::vector<double> legendre_all(int lmax, double x);

// scattering angle (radians) between an observation direction and the incident direction
double scattering_angle(const Vec3& dir, const Vec3& khat);

void write_dcs_csv(const std::string& path, const std::vector<double>& gamma_deg,
                   const std::vector<double>& dcs);

}  // namespace qscat
