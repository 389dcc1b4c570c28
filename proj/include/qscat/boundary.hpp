#pragma once

#include <functional>

#include "qscat/lattice.hpp"

namespace qscat {

// gamma(d) = U0 / cosh^2(alpha d), d in grids from the outermost surface. A custom profile can
// replace it; it must be non-negative (non-positive imaginary potential).
class AbsorberProfile {
 public:
  static AbsorberProfile poschl_teller(double u0, double alpha_per_grid, int width_grids);
  static AbsorberProfile custom(std::function<double(double)> gamma, int width_grids);

  double gamma(double d) const;
  int width() const { return width_; }
  double u0() const { return u0_; }
  double alpha() const { return alpha_; }

 private:
  double u0_ = 0.0, alpha_ = 0.0;
  int width_ = 0;
  std::function<double(double)> custom_;
};

// Gamma(i,j,k) = gx(i) gy(j) gz(k), each factor exp(-gamma dtau)
struct AbsorberMask {
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<std::vector<double>, 3> axis;

  double operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return axis[0][i] * axis[1][j] * axis[2][k];
  }
  RField lattice() const;
};

AbsorberMask build_mask(const std::array<AbsorberProfile, 3>& profiles, const ModelGeometry& g,
                        double dtau);
AbsorberMask build_mask(const AbsorberProfile& profile, const ModelGeometry& g, double dtau);

void apply_mask(CField& field, const AbsorberMask& mask);

}  // namespace qscat
