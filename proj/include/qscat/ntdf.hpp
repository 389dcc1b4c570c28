#pragma once

#include <string>

#include "qscat/lattice.hpp"

namespace qscat {

class Stepper;

// bottom/top = -z/+z, back/front = -x/+x, left/right = -y/+y
enum class Face { bottom, top, back, front, left, right };
inline constexpr std::array<Face, 6> all_faces{Face::bottom, Face::top,  Face::back,
                                               Face::front,  Face::left, Face::right};
const char* face_name(Face f);
int face_axis(Face f);
bool face_is_upper(Face f);
// +1 on bottom/back/left, -1 on top/front/right
double face_sign(Face f);
// tangential axes in ascending order
std::array<int, 2> face_tangents(Face f);

// One full virtual plane. Node (ib, ic) sits at (xb0 + ib hb, xc0 + ic hc); the face of the
// virtual box covers nodes [box_b0, box_b1] x [box_c0, box_c1] and its cells lie between nodes.
struct FacePhasors {
  Face face = Face::bottom;
  double coord = 0;  // plane position along the normal axis
  std::size_t nb = 0, nc = 0;
  double hb = 1, hc = 1;
  double xb0 = 0, xc0 = 0;
  long box_b0 = 0, box_b1 = 0, box_c0 = 0, box_c1 = 0;
  std::vector<cplx> psi, dpsi;  // row-major (ib, ic); dpsi is d/d(normal axis), +axis direction

  cplx& at(std::vector<cplx>& v, std::size_t ib, std::size_t ic) const { return v[ib * nc + ic]; }
};

struct SurfacePhasors {
  double omega = 1.0;
  double k = 1.0;
  cplx incident{1.0, 0.0};  // incident phasor at the contact corner
  bool scaled = false;      // divided by `incident`
  std::array<std::array<double, 2>, 3> box{};  // virtual box {lo, hi} per axis
  std::array<FacePhasors, 6> faces;
};

// Running temporal transforms of psi and d psi / dn on the six full virtual planes.
class VirtualPlaneRecorder {
 public:
  VirtualPlaneRecorder(const ModelGeometry& g, std::vector<double> omegas);

  // field: global lattice at level n; incident: psi_inc at the contact corner at level n
  void accumulate(const CField& field, long n, double dtau, cplx incident);
  void accumulate(const Stepper& st);

  const std::vector<double>& omegas() const { return omegas_; }
  long samples() const { return samples_; }
  const FacePhasors& raw(std::size_t w, Face f) const { return acc_[w][std::size_t(f)]; }
  cplx raw_incident(std::size_t w) const { return inc_[w]; }

  SurfacePhasors finalize(std::size_t w = 0) const;  // errors: zero_incident_phasor

 private:
  ModelGeometry geom_;
  std::vector<double> omegas_;
  std::vector<std::array<FacePhasors, 6>> acc_;
  std::vector<cplx> inc_;
  long samples_ = 0;
  std::array<std::vector<cplx>, 3> dlo_, dhi_;  // derivative weights per normal axis
};

// Divide every plane phasor by the incident phasor.
SurfacePhasors scale_phasors(const SurfacePhasors& raw);

// 2D DFT of the plane fields in FFTW order; wavenumber index l maps to signed_index(l, n).
struct PlaneSpectra {
  std::size_t nb = 0, nc = 0;
  std::vector<cplx> psi, dpsi;
};
PlaneSpectra plane_spectra(const FacePhasors& f);
// Fourier interpolant of a spectrum at tangential position (xb, xc)
cplx plane_interpolate(const FacePhasors& f, const std::vector<cplx>& spectrum, double xb, double xc);

// G = -exp(ik|r' - r|)/|r' - r|; errors: coincident_points
cplx green(const Vec3& rp, const Vec3& r, double k);

bool inside_box(const SurfacePhasors& s, const Vec3& r);

// Closed-form integral over the cell between nodes (ib, ic) and (ib+1, ic+1), signed per face.
// errors: observation_inside_box, cell_size_violation (k h^2 / R > cell_guard)
cplx cell_contribution(const SurfacePhasors& s, Face f, const PlaneSpectra& sp, long ib, long ic,
                       const Vec3& r, double cell_guard = 0.1);

struct NtdfOptions {
  double series_tol = 1e-9;  // truncation of the in-cell phase expansion
  double cell_guard = 0.1;
  bool parallel = true;
};

// Sum of all box-face cells. The fast path expands the in-cell phase in moments of the Fourier
// interpolant, so each face costs a few 2D transforms plus O(cells) per point.
std::vector<cplx> evaluate_distant(const SurfacePhasors& s, const std::vector<Vec3>& points,
                                   const NtdfOptions& opt = {});
cplx evaluate_distant(const SurfacePhasors& s, const Vec3& r, const NtdfOptions& opt = {});
// literal sum of cell_contribution, O(N^2) per cell; for checks on small planes
cplx evaluate_distant_direct(const SurfacePhasors& s, const Vec3& r, double cell_guard = 0.1);
int series_order(double k, double h, double tol);

// direction Rz(alpha) Ry(beta) (cos gamma, sin gamma, 0)
Vec3 euler_direction(double alpha_deg, double beta_deg, double gamma_deg);
struct EulerPlane {
  std::string name;
  double alpha_deg, beta_deg;
};
// "xy" (0,0), "yz" (0,90), "xz" (90,90)
EulerPlane euler_plane(const std::string& name);
std::vector<double> gamma_grid(int points);  // uniform over [0, 360)
std::vector<Vec3> observation_circle(double radius, const EulerPlane& p,
                                     const std::vector<double>& gammas_deg);

// Analytic outgoing spherical wave exp(ikr)/r on the six planes of a box centred at the origin.
// Planes extend `margin` grids past the box; the outer `taper` of them roll off with the xi
// window so the samples vanish at the plane edges.
SurfacePhasors spherical_wave_surface(const std::array<double, 3>& half_width, double spacing,
                                      double k, int margin = 40, int taper = 20);
// Plane wave exp(i k khat.r) on the same planes
SurfacePhasors plane_wave_surface(const std::array<double, 3>& half_width, double spacing, double k,
                                  const Vec3& khat, int margin = 40, int taper = 20);

// Binary archive (header + interleaved float64 re/im per face) and a text sidecar path + ".meta".
void write_archive(const std::string& path, const SurfacePhasors& s);
SurfacePhasors read_archive(const std::string& path);

struct ScanRow {
  double gamma_deg;
  cplx value;
};
void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows);

}  // namespace qscat
