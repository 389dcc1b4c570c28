#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "qscat/core.hpp"

namespace qscat {

// Reduced units: tau = omega0 t, xbar = x / lambdabar0 = 2 pi x / lambda0.
struct UnitSystem {
  std::optional<double> lambda0;
};

double to_reduced(double x, double lambda0);
double from_reduced(double xbar, double lambda0);

struct GridSpec {
  std::array<std::size_t, 3> n{1, 1, 1};
  Vec3 spacing{pi / 10, pi / 10, pi / 10};
  double dtau = pi / 1000;

  bool active(int a) const { return n[a] > 1; }
  // node coordinate, lattice centre at the origin
  double coord(int a, double i) const { return (i - (double(n[a]) - 1.0) / 2.0) * spacing[a]; }
  Vec3 position(long i, long j, long k) const { return {coord(0, i), coord(1, j), coord(2, k)}; }
  std::size_t count() const { return n[0] * n[1] * n[2]; }
  // throws invalid_argument on bad spacing/dtau or too few grids per wavelength
  void validate(double min_grids_per_wavelength = 4.0) const;
};

enum class StepperKind { pstd, fdtd };
enum class Region { tf, transition, sf, abc };

const char* stepper_name(StepperKind k);
StepperKind parse_stepper(const std::string& s);

struct RegionWidths {
  int abc = 40;
  int sf = 41;
  int trans = 12;
  int halo = 15;
};

inline constexpr int fdtd_transition_grids = 8;

// Per-axis index layout. Lower side from index 0:
//   ABC [0, abc), SF [abc, y0], walls (y0, y1), TF [y1, y2], walls (y2, y3), SF [y3, n-abc).
// zeta(y0) = 0 and zeta(y1) = 1 exactly. For FDTD the total-field interval is [t0, t1]
// (TF plus the 4 TF-side wall grids).
struct AxisLayout {
  bool active = false;
  long n = 1;
  long abc = 0;
  long y0 = -1, y1 = 0, y2 = 0, y3 = 1;
  long t0 = 0, t1 = 0;
  long plane_lo = -1, plane_hi = -1;

  Region classify(long i) const;
  bool in_tf(long i) const { return i >= y1 && i <= y2; }
  bool in_total(long i) const { return i >= t0 && i <= t1; }
};

struct ModelGeometry {
  GridSpec grid;
  RegionWidths widths;
  StepperKind kind = StepperKind::pstd;
  std::array<AxisLayout, 3> axes;

  Region classify(long i, long j, long k) const;
  bool in_tf(long i, long j, long k) const {
    return axes[0].in_tf(i) && axes[1].in_tf(j) && axes[2].in_tf(k);
  }
  // total-field bookkeeping of the active stepper (TF for PSTD, TF + 4 wall grids for FDTD)
  bool holds_total(long i, long j, long k) const;
  // virtual box in reduced coordinates: {lo, hi} per axis
  std::array<std::array<double, 2>, 3> virtual_box() const;
  // TF box in reduced coordinates
  std::array<std::array<double, 2>, 3> tf_box() const;
};

// Errors: geometry_infeasible, potential_support_violation (support sphere about the lattice
// centre must lie inside the TF).
ModelGeometry build_geometry(const GridSpec& grid, const RegionWidths& w, StepperKind kind,
                             double potential_support_radius = 0.0);

struct WaveField {
  CField prev;  // level n-1
  CField cur;   // level n
  long n = 1;

  WaveField() = default;
  explicit WaveField(std::array<std::size_t, 3> shape) : prev(shape), cur(shape) {}
};

// V/E0 as a function of reduced position (origin at the lattice centre) and reduced time.
struct PotentialSpec {
  std::function<double(const Vec3&, double)> v;
  double support_radius = 0.0;
  bool time_dependent = false;
  double vmax = 0.0;

  bool empty() const { return !v; }
  static PotentialSpec none();
  // V = s E0 for r <= a
  static PotentialSpec square_well(double s, double radius);
};

// Flat key = value text. '#' starts a comment. Values may use pi forms ("pi/10", "2*pi").
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  bool has(const std::string& key) const { return kv_.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  long get_int(const std::string& key, long def) const;
  bool get_bool(const std::string& key, bool def) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& def) const;
  std::vector<std::string> get_words(const std::string& key,
                                     const std::vector<std::string>& def) const;
  const std::map<std::string, std::string>& entries() const { return kv_; }
  std::string dump() const;

 private:
  std::map<std::string, std::string> kv_;
};

double parse_number(const std::string& s);

}  // namespace qscat
