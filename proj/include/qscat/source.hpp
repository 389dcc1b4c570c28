#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "qscat/core.hpp"
#include "qscat/fft.hpp"

namespace qscat {

struct IncidentDirection {
  double theta_deg = 90.0;
  double phi_deg = 90.0;
  Vec3 khat{0.0, 1.0, 0.0};

  // 0 <= theta <= 180, 0 <= phi < 360, else out_of_range
  static IncidentDirection from_degrees(double theta_deg, double phi_deg);
};

struct IndexBounds {
  long i0, i1, j0, j1, k0, k1;
};

// Corner of the box first touched by the incident wavefront; every grid of the box then has
// d >= 0.
Idx3 contact_corner(const IncidentDirection& dir, const IndexBounds& b);

double project_distance(const Idx3& idx, const Idx3& origin, const Vec3& spacing,
                        const IncidentDirection& dir);

enum class IncidentMode { sinusoidal, pulsed };
enum class Interp { spectral, nearest };

struct GaussianPulse {
  double center = 0.0;  // reduced distance along k at tau = 0
  double width = 8.0;   // sigma of |psi|, reduced length
  double k0 = 1.0;
};

// Free evolution in reduced units (i dpsi/dtau = -d2psi/dd2).
cplx gaussian_packet(const GaussianPulse& p, double d, double tau);
// Centre such that the leading 1e-6 tail has not reached d = 0 at tau = 0.
double pulse_center_for_width(double width);
// 1D lattice length per the sizing rule: (diagonal + run length x max group velocity) x 1.5
std::size_t pulsed_lattice_size(double diagonal, double run_tau, const GaussianPulse& p,
                                double spacing);

struct IncidentSample {
  cplx psi;
  std::array<cplx, 3> grad;
};

class IncidentSource1D {
 public:
  static IncidentSource1D sinusoidal(const IncidentDirection& dir, double dtau);

  // 1D lattice node m sits at d = d_start + m*spacing. Levels are set from the analytic packet
  // at tau = 0 and tau = dtau. far_abc_grids > 0 adds a masking absorber at the far end.
  static IncidentSource1D pulsed(const IncidentDirection& dir, double dtau, double spacing,
                                 std::size_t n, double d_start, const GaussianPulse& pulse,
                                 bool use_eta, int far_abc_grids = 0);
  // arbitrary samples for the two start levels (level 0 and level 1)
  static IncidentSource1D pulsed_from_samples(const IncidentDirection& dir, double dtau,
                                              double spacing, double d_start,
                                              std::vector<cplx> level0, std::vector<cplx> level1,
                                              bool use_eta, int far_abc_grids = 0);

  IncidentMode mode() const { return mode_; }
  const IncidentDirection& direction() const { return dir_; }
  double dtau() const { return dtau_; }
  double eta() const { return eta_; }
  long level() const { return level_; }
  Interp interpolation() const { return interp_; }
  void set_interpolation(Interp i) { interp_ = i; }

  // 1D value and d-derivative at time level n (pulsed: n must be level() or level()-1)
  std::pair<cplx, cplx> eval_1d(double d, long n) const;
  IncidentSample eval(double d, long n) const;

  // pulsed mode only
  void step();
  std::size_t lattice_size() const { return cur_.size(); }
  double spacing() const { return spacing_; }
  double d_start() const { return d_start_; }
  double d_end() const { return d_start_ + double(cur_.size() - 1) * spacing_; }
  const std::vector<cplx>& samples(long n) const;
  double norm(long n) const;
  // abort when the 1D norm grows beyond this factor of its start value
  void set_growth_limit(double f) { growth_limit_ = f; }

 private:
  IncidentSource1D() = default;
  void refresh_spectra();
  void init_pulsed(int far_abc_grids);

  IncidentMode mode_ = IncidentMode::sinusoidal;
  IncidentDirection dir_;
  double dtau_ = 0.0;
  double eta_ = 1.0;
  Interp interp_ = Interp::spectral;
  long level_ = 1;

  double spacing_ = 0.0, d_start_ = 0.0;
  std::vector<cplx> prev_, cur_;
  std::vector<cplx> spec_prev_, spec_cur_;  // 1D spectra of each level
  std::vector<cplx> der_prev_, der_cur_;    // nodal derivatives (nearest mode)
  std::vector<double> kappa_;               // signed wavenumbers
  std::vector<double> mask_;
  std::shared_ptr<fft::LinePlans> plan_;
  double norm0_ = 0.0;
  double growth_limit_ = 10.0;
};

// sin(n dtau), cos(n dtau) by the rotation recurrence
class RecursiveSinusoid {
 public:
  explicit RecursiveSinusoid(double dtau)
      : sd_(std::sin(dtau)), cd_(std::cos(dtau)) {}
  long n() const { return n_; }
  double sin() const { return s_; }
  double cos() const { return c_; }
  void advance() {
    double s = s_ * cd_ + c_ * sd_;
    double c = c_ * cd_ - s_ * sd_;
    s_ = s;
    c_ = c;
    ++n_;
  }

 private:
  double sd_, cd_;
  double s_ = 0.0, c_ = 1.0;
  long n_ = 0;
};

std::pair<double, double> recursive_sinusoid(long n, double dtau);

}  // namespace qscat
