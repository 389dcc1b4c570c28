#pragma once

#include <functional>

#include "qscat/boundary.hpp"
#include "qscat/ntdf.hpp"
#include "qscat/oracle.hpp"
#include "qscat/stepper.hpp"

namespace qscat {

// Everything a scatter run needs, read from a flat Config. Unknown keys are a config error.
struct RunConfig {
  GridSpec grid;
  RegionWidths widths{36, 16, 12, 15};  // desk layout: recording planes 44 grids deep
  double abc_u0 = 5.0;
  double abc_alpha = 0.1;  // per grid
  StepperOptions stepper;
  std::string potential_kind = "none";  // none | square_well
  double potential_s = 0.0, potential_radius = 0.0;
  IncidentDirection dir;
  IncidentMode mode = IncidentMode::sinusoidal;
  GaussianPulse pulse;
  Interp interp = Interp::spectral;
  double warmup_periods = 10;
  double accumulate_periods = 1;
  long pulsed_steps = 0;  // 0: long enough for the packet to cross the lattice
  std::vector<double> omegas{1.0};
  int workers = 0;  // 0 leaves the OpenMP default
  // scans
  std::vector<double> radii{100.0, 2e4};
  std::vector<std::string> planes{"xy"};
  int scan_points = 360;
  double series_tol = 1e-9;
  OracleOptions oracle;

  static RunConfig from(const Config& c);
  PotentialSpec potential() const;
  CentralPotential central_potential() const;
  long steps_per_period() const;
};

// the keys RunConfig::from understands
const std::vector<std::string>& known_config_keys();

struct FieldStats {
  double sf_max = 0;     // max |psi| over the scattered-field zone
  double tf_dev = 0;     // max ||psi| - 1| over the total-field zone
  double tf_min = 0, tf_max = 0;
};
FieldStats field_stats(const Stepper& st);

struct ScatterResult {
  std::vector<SurfacePhasors> phasors;  // one per omega
  double dtau = 0, stability_bound = 0;
  long steps = 0;
  std::vector<double> period_norms;  // core norm at the end of each period
  FieldStats stats;                  // at the end of the run
  double wall_seconds = 0;
};

using LogFn = std::function<void(const std::string&)>;

ScatterResult run_scatter(const RunConfig& rc, const LogFn& log = {});

struct AngularScan {
  double radius;
  std::string plane;
  std::vector<double> gamma_deg;
  std::vector<cplx> psi;
  std::vector<double> dcs() const;  // |r psi|^2
};
std::vector<AngularScan> angular_scans(const SurfacePhasors& s, const std::vector<double>& radii,
                                       const std::vector<std::string>& planes, int points,
                                       const NtdfOptions& opt = {});

// oracle dcs on the gamma grid of a scan, for incidence along khat
std::vector<double> oracle_on_scan(const PartialWaveSolution& sol, const AngularScan& scan,
                                   const Vec3& khat);

struct Comparison {
  double rms_rel = 0;  // over points where the oracle is >= floor * max
  std::size_t used = 0;
  double oracle_max = 0;
};
Comparison compare_dcs(const std::vector<double>& solver, const std::vector<double>& oracle,
                       double floor_fraction = 0.01);

// relative L2 distance between two profiles each normalised to unit maximum
double profile_distance(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace qscat
