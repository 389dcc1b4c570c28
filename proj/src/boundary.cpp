#include "qscat/boundary.hpp"

#include <cmath>

namespace qscat {

AbsorberProfile AbsorberProfile::poschl_teller(double u0, double alpha, int width) {
  if (!(u0 > 0)) throw Error(Errc::invalid_argument, "absorber U0 must be positive");
  if (!(alpha > 0)) throw Error(Errc::invalid_argument, "absorber alpha must be positive");
  if (width < 0) throw Error(Errc::invalid_argument, "negative absorber width");
  AbsorberProfile p;
  p.u0_ = u0;
  p.alpha_ = alpha;
  p.width_ = width;
  return p;
}

AbsorberProfile AbsorberProfile::custom(std::function<double(double)> gamma, int width) {
  if (!gamma) throw Error(Errc::invalid_argument, "empty absorber profile");
  // imaginary part of the potential must stay <= 0
  for (int d = 0; d <= 4 * std::max(width, 1); ++d)
    if (!(gamma(double(d)) >= 0.0))
      throw Error(Errc::invalid_argument, "absorber profile negative at d = " + std::to_string(d));
  AbsorberProfile p;
  p.width_ = width;
  p.custom_ = std::move(gamma);
  return p;
}

double AbsorberProfile::gamma(double d) const {
  if (custom_) return custom_(d);
  double c = std::cosh(alpha_ * d);
  return u0_ / (c * c);
}

RField AbsorberMask::lattice() const {
  RField out(n);
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) out(i, j, k) = (*this)(i, j, k);
  return out;
}

AbsorberMask build_mask(const std::array<AbsorberProfile, 3>& profiles, const ModelGeometry& g,
                        double dtau) {
  AbsorberMask m;
  m.n = g.grid.n;
  for (int a = 0; a < 3; ++a) {
    std::size_t n = g.grid.n[a];
    m.axis[a].assign(n, 1.0);
    if (!g.axes[a].active) continue;
    if (2 * std::size_t(profiles[a].width()) > n)
      throw Error(Errc::geometry_infeasible, "absorber width " + std::to_string(profiles[a].width()) +
                                                 " exceeds half the lattice on axis " +
                                                 std::to_string(a));
    for (std::size_t i = 0; i < n; ++i) {
      double d = double(std::min(i, n - 1 - i));
      m.axis[a][i] = std::exp(-profiles[a].gamma(d) * dtau);
    }
  }
  return m;
}

AbsorberMask build_mask(const AbsorberProfile& p, const ModelGeometry& g, double dtau) {
  return build_mask(std::array<AbsorberProfile, 3>{p, p, p}, g, dtau);
}

void apply_mask(CField& f, const AbsorberMask& m) {
  if (f.shape() != m.n) throw Error(Errc::shape_mismatch, "field and mask shapes differ");
  auto n = f.shape();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j) {
      double gij = m.axis[0][i] * m.axis[1][j];
      cplx* row = &f(i, j, 0);
      for (std::size_t k = 0; k < n[2]; ++k) row[k] *= gij * m.axis[2][k];
    }
}

}  // namespace qscat
