#include "qscat/ntdf.hpp"

#include <omp.h>

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "qscat/fft.hpp"
#include "qscat/stepper.hpp"
#include "qscat/tfsf.hpp"

namespace qscat {

const char* face_name(Face f) {
  static const char* names[] = {"bottom", "top", "back", "front", "left", "right"};
  return names[int(f)];
}

int face_axis(Face f) {
  switch (f) {
    case Face::bottom:
    case Face::top: return 2;
    case Face::back:
    case Face::front: return 0;
    default: return 1;
  }
}

bool face_is_upper(Face f) { return f == Face::top || f == Face::front || f == Face::right; }
double face_sign(Face f) { return face_is_upper(f) ? -1.0 : 1.0; }

std::array<int, 2> face_tangents(Face f) {
  int a = face_axis(f);
  return a == 0 ? std::array{1, 2} : (a == 1 ? std::array{0, 2} : std::array{0, 1});
}

static Face face_of(int axis, bool upper) {
  static const Face lo[] = {Face::back, Face::left, Face::bottom};
  static const Face hi[] = {Face::front, Face::right, Face::top};
  return upper ? hi[axis] : lo[axis];
}

// ---------------- recorder ----------------

VirtualPlaneRecorder::VirtualPlaneRecorder(const ModelGeometry& g, std::vector<double> omegas)
    : geom_(g), omegas_(std::move(omegas)) {
  for (int a = 0; a < 3; ++a)
    if (!g.axes[a].active) throw Error(Errc::invalid_argument, "virtual planes need a 3D lattice");
  if (omegas_.empty()) throw Error(Errc::invalid_argument, "no frequencies to record");
  for (double w : omegas_)
    if (!(w > 0)) throw Error(Errc::invalid_argument, "frequencies must be positive");
  std::array<FacePhasors, 6> tmpl;
  for (Face f : all_faces) {
    FacePhasors& p = tmpl[std::size_t(f)];
    int a = face_axis(f);
    auto [b, c] = face_tangents(f);
    const AxisLayout& L = g.axes[a];
    p.face = f;
    p.coord = g.grid.coord(a, double(face_is_upper(f) ? L.plane_hi : L.plane_lo));
    p.nb = g.grid.n[b];
    p.nc = g.grid.n[c];
    p.hb = g.grid.spacing[b];
    p.hc = g.grid.spacing[c];
    p.xb0 = g.grid.coord(b, 0);
    p.xc0 = g.grid.coord(c, 0);
    p.box_b0 = g.axes[b].plane_lo;
    p.box_b1 = g.axes[b].plane_hi;
    p.box_c0 = g.axes[c].plane_lo;
    p.box_c1 = g.axes[c].plane_hi;
    p.psi.assign(p.nb * p.nc, 0.0);
    p.dpsi.assign(p.nb * p.nc, 0.0);
  }
  acc_.assign(omegas_.size(), tmpl);
  inc_.assign(omegas_.size(), 0.0);
  for (int a = 0; a < 3; ++a) {
    std::size_t n = g.grid.n[a];
    dlo_[a].assign(n, 0.0);
    dhi_[a].assign(n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      long s = fft::signed_index(l, n);
      if (n % 2 == 0 && s == -long(n / 2)) continue;  // Nyquist carries no derivative
      double kap = 2 * pi * double(s) / (double(n) * g.grid.spacing[a]);
      cplx ik(0, kap / double(n));
      dlo_[a][l] = ik * std::polar(1.0, 2 * pi * double(l) * double(g.axes[a].plane_lo) / double(n));
      dhi_[a][l] = ik * std::polar(1.0, 2 * pi * double(l) * double(g.axes[a].plane_hi) / double(n));
    }
  }
}

void VirtualPlaneRecorder::accumulate(const CField& field, long n, double dtau, cplx incident) {
  if (field.shape() != geom_.grid.n) throw Error(Errc::shape_mismatch, "field vs recorder lattice");
  constexpr std::size_t B = 16;
  std::vector<cplx> ph(omegas_.size());
  for (std::size_t w = 0; w < omegas_.size(); ++w) ph[w] = std::polar(1.0, omegas_[w] * double(n) * dtau);
  for (int a = 0; a < 3; ++a) {
    const std::size_t N = geom_.grid.n[a];
    const long plo = geom_.axes[a].plane_lo, phi = geom_.axes[a].plane_hi;
    Face flo = face_of(a, false), fhi = face_of(a, true);
    auto [b, c] = face_tangents(flo);
    const std::size_t nb = geom_.grid.n[b], nc = geom_.grid.n[c];
    const std::size_t st_a = field.stride(a), st_b = field.stride(b), st_c = field.stride(c);
    std::vector<cplx> d_lo(nb * nc), d_hi(nb * nc);
    fft::LinePlans plans(N, B);
    const long chunks = long((nc + B - 1) / B);
    const long nbatch = long(nb) * chunks;
    const cplx* src = field.data();
#pragma omp parallel
    {
      auto buf = fft::make_buffer(N * B);
#pragma omp for schedule(static)
      for (long bi = 0; bi < nbatch; ++bi) {
        std::size_t u = std::size_t(bi / chunks);
        std::size_t v0 = std::size_t(bi % chunks) * B;
        std::size_t cnt = std::min(B, nc - v0);
        for (std::size_t q = 0; q < cnt; ++q) {
          std::size_t base = u * st_b + (v0 + q) * st_c;
          for (std::size_t l = 0; l < N; ++l) buf[q * N + l] = src[base + l * st_a];
        }
        for (std::size_t x = cnt * N; x < B * N; ++x) buf[x] = 0.0;
        plans.forward(buf.get());
        for (std::size_t q = 0; q < cnt; ++q) {
          cplx sl = 0, sh = 0;
          const cplx* F = buf.get() + q * N;
          for (std::size_t l = 0; l < N; ++l) {
            sl += F[l] * dlo_[a][l];
            sh += F[l] * dhi_[a][l];
          }
          d_lo[u * nc + v0 + q] = sl;
          d_hi[u * nc + v0 + q] = sh;
        }
      }
    }
    for (std::size_t w = 0; w < omegas_.size(); ++w) {
      FacePhasors& Lo = acc_[w][std::size_t(flo)];
      FacePhasors& Hi = acc_[w][std::size_t(fhi)];
      const cplx e = ph[w];
      for (std::size_t u = 0; u < nb; ++u)
        for (std::size_t v = 0; v < nc; ++v) {
          std::size_t base = u * st_b + v * st_c;
          std::size_t p = u * nc + v;
          Lo.psi[p] += e * src[base + std::size_t(plo) * st_a];
          Hi.psi[p] += e * src[base + std::size_t(phi) * st_a];
          Lo.dpsi[p] += e * d_lo[p];
          Hi.dpsi[p] += e * d_hi[p];
        }
    }
  }
  for (std::size_t w = 0; w < omegas_.size(); ++w) inc_[w] += ph[w] * incident;
  ++samples_;
}

void VirtualPlaneRecorder::accumulate(const Stepper& st) {
  cplx inc = 0;
  if (st.source()) inc = st.source()->eval_1d(0.0, st.n()).first;
  if (st.blocks().size() == 1)
    accumulate(st.blocks().front().state.cur, st.n(), st.dtau(), inc);
  else
    accumulate(st.gather_cur(), st.n(), st.dtau(), inc);
}

SurfacePhasors VirtualPlaneRecorder::finalize(std::size_t w) const {
  if (w >= omegas_.size()) throw Error(Errc::out_of_range, "frequency index");
  SurfacePhasors s;
  s.omega = omegas_[w];
  s.k = std::sqrt(s.omega);
  s.incident = inc_[w];
  s.box = geom_.virtual_box();
  s.faces = acc_[w];
  return scale_phasors(s);
}

SurfacePhasors scale_phasors(const SurfacePhasors& raw) {
  if (raw.scaled) return raw;
  if (!(std::abs(raw.incident) > 0))
    throw Error(Errc::zero_incident_phasor, "incident phasor is zero; nothing to normalise by");
  SurfacePhasors s = raw;
  const cplx inv = 1.0 / raw.incident;
  for (auto& f : s.faces) {
    for (auto& x : f.psi) x *= inv;
    for (auto& x : f.dpsi) x *= inv;
  }
  s.scaled = true;
  return s;
}

// ---------------- spectra ----------------

PlaneSpectra plane_spectra(const FacePhasors& f) {
  PlaneSpectra sp;
  sp.nb = f.nb;
  sp.nc = f.nc;
  fft::Plan2D plan(f.nb, f.nc);
  auto buf = fft::make_buffer(f.nb * f.nc);
  auto run = [&](const std::vector<cplx>& in, std::vector<cplx>& out) {
    std::copy(in.begin(), in.end(), buf.get());
    plan.forward(buf.get());
    out.assign(buf.get(), buf.get() + f.nb * f.nc);
  };
  run(f.psi, sp.psi);
  run(f.dpsi, sp.dpsi);
  return sp;
}

cplx plane_interpolate(const FacePhasors& f, const std::vector<cplx>& F, double xb, double xc) {
  cplx s = 0;
  for (std::size_t i = 0; i < f.nb; ++i) {
    double kb = 2 * pi * double(fft::signed_index(i, f.nb)) / (double(f.nb) * f.hb);
    cplx eb = std::polar(1.0, kb * (xb - f.xb0));
    for (std::size_t j = 0; j < f.nc; ++j) {
      double kc = 2 * pi * double(fft::signed_index(j, f.nc)) / (double(f.nc) * f.hc);
      s += F[i * f.nc + j] * eb * std::polar(1.0, kc * (xc - f.xc0));
    }
  }
  return s / double(f.nb * f.nc);
}

cplx green(const Vec3& rp, const Vec3& r, double k) {
  double R = std::hypot(rp[0] - r[0], rp[1] - r[1], rp[2] - r[2]);
  if (R == 0.0) throw Error(Errc::coincident_points, "Green's function at coincident points");
  return -std::polar(1.0 / R, k * R);
}

bool inside_box(const SurfacePhasors& s, const Vec3& r) {
  for (int a = 0; a < 3; ++a)
    if (r[a] < s.box[a][0] || r[a] > s.box[a][1]) return false;
  return true;
}

static void check_outside(const SurfacePhasors& s, const Vec3& r) {
  if (inside_box(s, r))
    throw Error(Errc::observation_inside_box, "observation point lies inside the virtual box");
}

static double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6 : std::sin(x) / x; }

namespace {
struct CellGeom {
  Vec3 rc;
  double R;
  Vec3 rhat;
};

CellGeom cell_geom(const SurfacePhasors& s, const FacePhasors& f, double xb, double xc, const Vec3& r) {
  int a = face_axis(f.face);
  auto [b, c] = face_tangents(f.face);
  CellGeom g;
  g.rc[a] = f.coord;
  g.rc[b] = xb;
  g.rc[c] = xc;
  Vec3 d{r[0] - g.rc[0], r[1] - g.rc[1], r[2] - g.rc[2]};
  g.R = std::hypot(d[0], d[1], d[2]);
  for (int x = 0; x < 3; ++x) g.rhat[x] = d[x] / g.R;
  (void)s;
  return g;
}

void guard(double k, double h, double R, double limit) {
  if (k * h * h / R > limit)
    throw Error(Errc::cell_size_violation,
                "cell too large for this distance: k h^2 / R = " + std::to_string(k * h * h / R));
}
}  // namespace

cplx cell_contribution(const SurfacePhasors& s, Face face, const PlaneSpectra& sp, long ib, long ic,
                       const Vec3& r, double cell_guard) {
  check_outside(s, r);
  const FacePhasors& f = s.faces[std::size_t(face)];
  if (ib < 0 || ic < 0 || ib + 1 >= long(f.nb) || ic + 1 >= long(f.nc))
    throw Error(Errc::out_of_range, "cell index outside the plane");
  const double k = s.k;
  double xb = f.xb0 + (double(ib) + 0.5) * f.hb, xc = f.xc0 + (double(ic) + 0.5) * f.hc;
  CellGeom g = cell_geom(s, f, xb, xc, r);
  guard(k, std::max(f.hb, f.hc), g.R, cell_guard);
  int a = face_axis(face);
  auto [b, c] = face_tangents(face);
  cplx ipsi = 0, idpsi = 0;
  for (std::size_t i = 0; i < f.nb; ++i) {
    long si = fft::signed_index(i, f.nb);
    cplx eb = std::polar(1.0, 2 * pi * double(si) * (xb - f.xb0) / (double(f.nb) * f.hb)) * f.hb *
              sinc(pi * double(si) / double(f.nb) - k * f.hb * g.rhat[b] / 2);
    for (std::size_t j = 0; j < f.nc; ++j) {
      long sj = fft::signed_index(j, f.nc);
      cplx ec = std::polar(1.0, 2 * pi * double(sj) * (xc - f.xc0) / (double(f.nc) * f.hc)) * f.hc *
                sinc(pi * double(sj) / double(f.nc) - k * f.hc * g.rhat[c] / 2);
      cplx w = eb * ec;
      ipsi += sp.psi[i * f.nc + j] * w;
      idpsi += sp.dpsi[i * f.nc + j] * w;
    }
  }
  double norm = 1.0 / double(f.nb * f.nc);
  cplx integrand = (idpsi + (cplx(0, k) - 1.0 / g.R) * g.rhat[a] * ipsi) * norm;
  cplx pref = std::polar(1.0 / (4 * pi * g.R), k * g.R);
  return face_sign(face) * pref * integrand;
}

cplx evaluate_distant_direct(const SurfacePhasors& s, const Vec3& r, double cell_guard) {
  check_outside(s, r);
  cplx sum = 0;
  for (Face face : all_faces) {
    const FacePhasors& f = s.faces[std::size_t(face)];
    PlaneSpectra sp = plane_spectra(f);
    for (long ib = f.box_b0; ib < f.box_b1; ++ib)
      for (long ic = f.box_c0; ic < f.box_c1; ++ic)
        sum += cell_contribution(s, face, sp, ib, ic, r, cell_guard);
  }
  return sum;
}

int series_order(double k, double h, double tol) {
  // dropped terms of total degree P+1 are bounded by (k h)^(P+1) / (P+1)!
  double x = k * h, t = x;
  int P = 0;
  while (t > tol && P < 30) {
    ++P;
    t *= x / double(P + 1);
  }
  return P;
}

namespace {
// C_p(kappa) = integral over [-h/2, h/2] of exp(i kappa u) u^p du
std::vector<cplx> cell_moment_kernel(double kappa, double h, int P) {
  std::vector<cplx> out(std::size_t(P) + 1);
  const double hh = h / 2;
  for (int p = 0; p <= P; ++p) {
    cplx s = 0;
    cplx term = 1.0;  // (i kappa)^m / m!
    for (int m = 0; m < 80; ++m) {
      if (m > 0) term *= cplx(0, kappa) / double(m);
      int e = p + m;
      if (e % 2 == 0) {
        cplx add = term * (2 * std::pow(hh, e + 1) / double(e + 1));
        s += add;
        if (m > 4 && std::abs(add) < 1e-18 * std::abs(s)) break;
      }
    }
    out[std::size_t(p)] = s;
  }
  return out;
}

struct FaceMoments {
  int P = 0;
  std::vector<std::pair<int, int>> pq;
  // cell-major: m[(cell * pq.size() + t) * 2 + {0 psi, 1 dpsi}], already divided by p! q!
  std::vector<cplx> m;
  long cb = 0, cc = 0;
};

FaceMoments face_moments(const FacePhasors& f, int P) {
  FaceMoments M;
  M.P = P;
  M.cb = f.box_b1 - f.box_b0;
  M.cc = f.box_c1 - f.box_c0;
  for (int p = 0; p <= P; ++p)
    for (int q = 0; p + q <= P; ++q) M.pq.emplace_back(p, q);
  const std::size_t nt = M.pq.size();
  M.m.assign(std::size_t(M.cb * M.cc) * nt * 2, 0.0);
  PlaneSpectra sp = plane_spectra(f);
  std::vector<std::vector<cplx>> Cb(f.nb), Cc(f.nc);
  for (std::size_t i = 0; i < f.nb; ++i) {
    long si = fft::signed_index(i, f.nb);
    Cb[i] = cell_moment_kernel(2 * pi * double(si) / (double(f.nb) * f.hb), f.hb, P);
    cplx sh = std::polar(1.0, pi * double(si) / double(f.nb));
    for (auto& x : Cb[i]) x *= sh;
  }
  for (std::size_t j = 0; j < f.nc; ++j) {
    long sj = fft::signed_index(j, f.nc);
    Cc[j] = cell_moment_kernel(2 * pi * double(sj) / (double(f.nc) * f.hc), f.hc, P);
    cplx sh = std::polar(1.0, pi * double(sj) / double(f.nc));
    for (auto& x : Cc[j]) x *= sh;
  }
  std::vector<double> fact(std::size_t(P) + 1, 1.0);
  for (int p = 1; p <= P; ++p) fact[std::size_t(p)] = fact[std::size_t(p) - 1] * p;
  fft::Plan2D plan(f.nb, f.nc);
  auto buf = fft::make_buffer(f.nb * f.nc);
  for (std::size_t t = 0; t < nt; ++t) {
    auto [p, q] = M.pq[t];
    const double norm = 1.0 / (double(f.nb * f.nc) * fact[std::size_t(p)] * fact[std::size_t(q)]);
    for (int which = 0; which < 2; ++which) {
      const std::vector<cplx>& F = which == 0 ? sp.psi : sp.dpsi;
      for (std::size_t i = 0; i < f.nb; ++i)
        for (std::size_t j = 0; j < f.nc; ++j)
          buf[i * f.nc + j] = F[i * f.nc + j] * Cb[i][std::size_t(p)] * Cc[j][std::size_t(q)];
      plan.backward(buf.get());
      for (long ib = 0; ib < M.cb; ++ib)
        for (long ic = 0; ic < M.cc; ++ic) {
          std::size_t cell = std::size_t(ib * M.cc + ic);
          M.m[(cell * nt + t) * 2 + std::size_t(which)] =
              buf[std::size_t(ib + f.box_b0) * f.nc + std::size_t(ic + f.box_c0)] * norm;
        }
    }
  }
  return M;
}

// adds this face's contribution for points [i0, i1) into out; cells outermost so the moment
// table streams once per block of points
void face_block(const SurfacePhasors& s, const FacePhasors& f, const FaceMoments& M,
                const std::vector<Vec3>& pts, std::size_t i0, std::size_t i1, cplx* out,
                double cell_guard) {
  const double k = s.k;
  int a = face_axis(f.face);
  auto [b, c] = face_tangents(f.face);
  const double hmax = std::max(f.hb, f.hc);
  const std::size_t nt = M.pq.size();
  const std::size_t P1 = std::size_t(M.P) + 1;
  std::vector<cplx> pb(P1), pc(P1), acc(i1 - i0, 0.0);
  for (long ib = 0; ib < M.cb; ++ib) {
    double xb = f.xb0 + (double(ib + f.box_b0) + 0.5) * f.hb;
    for (long ic = 0; ic < M.cc; ++ic) {
      double xc = f.xc0 + (double(ic + f.box_c0) + 0.5) * f.hc;
      const cplx* mc = M.m.data() + std::size_t(ib * M.cc + ic) * nt * 2;
      for (std::size_t i = i0; i < i1; ++i) {
        CellGeom g = cell_geom(s, f, xb, xc, pts[i]);
        guard(k, hmax, g.R, cell_guard);
        const cplx ub(0, -k * g.rhat[b]), uc(0, -k * g.rhat[c]);
        pb[0] = pc[0] = 1.0;
        for (std::size_t p = 1; p < P1; ++p) {
          pb[p] = pb[p - 1] * ub;
          pc[p] = pc[p - 1] * uc;
        }
        cplx ipsi = 0, idpsi = 0;
        for (std::size_t t = 0; t < nt; ++t) {
          auto [p, q] = M.pq[t];
          cplx w = pb[std::size_t(p)] * pc[std::size_t(q)];
          ipsi += w * mc[2 * t];
          idpsi += w * mc[2 * t + 1];
        }
        cplx integrand = idpsi + (cplx(0, k) - 1.0 / g.R) * g.rhat[a] * ipsi;
        acc[i - i0] += std::polar(1.0 / (4 * pi * g.R), k * g.R) * integrand;
      }
    }
  }
  for (std::size_t i = i0; i < i1; ++i) out[i] += face_sign(f.face) * acc[i - i0];
}
}  // namespace

std::vector<cplx> evaluate_distant(const SurfacePhasors& s, const std::vector<Vec3>& pts,
                                   const NtdfOptions& opt) {
  for (const Vec3& r : pts) check_outside(s, r);
  std::vector<cplx> out(pts.size(), 0.0);
  const long np = long(pts.size());
  for (Face face : all_faces) {
    const FacePhasors& f = s.faces[std::size_t(face)];
    int P = series_order(s.k, std::max(f.hb, f.hc), opt.series_tol);
    FaceMoments M = face_moments(f, P);
    constexpr long blk = 16;
    const long nblk = (np + blk - 1) / blk;
    if (opt.parallel) {
      // exceptions cannot leave an OpenMP region; carry the first one out
      std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
      for (long q = 0; q < nblk; ++q) {
        try {
          face_block(s, f, M, pts, std::size_t(q * blk), std::size_t(std::min(np, (q + 1) * blk)),
                     out.data(), opt.cell_guard);
        } catch (...) {
#pragma omp critical
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);
    } else {
      for (long q = 0; q < nblk; ++q)
        face_block(s, f, M, pts, std::size_t(q * blk), std::size_t(std::min(np, (q + 1) * blk)),
                   out.data(), opt.cell_guard);
    }
  }
  return out;
}

cplx evaluate_distant(const SurfacePhasors& s, const Vec3& r, const NtdfOptions& opt) {
  return evaluate_distant(s, std::vector<Vec3>{r}, opt)[0];
}

// ---------------- observation geometry ----------------

Vec3 euler_direction(double alpha_deg, double beta_deg, double gamma_deg) {
  const double d = pi / 180;
  double ca = std::cos(alpha_deg * d), sa = std::sin(alpha_deg * d);
  double cb = std::cos(beta_deg * d), sb = std::sin(beta_deg * d);
  double cg = std::cos(gamma_deg * d), sg = std::sin(gamma_deg * d);
  Vec3 v{cb * cg, sg, -sb * cg};  // Ry(beta) (cos g, sin g, 0)
  return {ca * v[0] - sa * v[1], sa * v[0] + ca * v[1], v[2]};
}

EulerPlane euler_plane(const std::string& name) {
  if (name == "xy") return {name, 0, 0};
  if (name == "yz") return {name, 0, 90};
  if (name == "xz") return {name, 90, 90};
  throw Error(Errc::invalid_argument, "unknown observation plane '" + name + "' (xy, yz, xz)");
}

std::vector<double> gamma_grid(int points) {
  if (points < 1) throw Error(Errc::invalid_argument, "need at least one observation point");
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) g[std::size_t(i)] = 360.0 * i / points;
  return g;
}

std::vector<Vec3> observation_circle(double radius, const EulerPlane& p,
                                     const std::vector<double>& gammas) {
  if (!(radius > 0)) throw Error(Errc::invalid_argument, "radius must be positive");
  std::vector<Vec3> pts;
  for (double gm : gammas) {
    Vec3 d = euler_direction(p.alpha_deg, p.beta_deg, gm);
    pts.push_back({radius * d[0], radius * d[1], radius * d[2]});
  }
  return pts;
}

// ---------------- analytic surfaces ----------------

namespace {
template <class Fn>
SurfacePhasors analytic_surface(const std::array<double, 3>& hw, double h, double k, int margin,
                                int taper, Fn fn) {
  if (!(h > 0) || margin < 0 || taper < 0 || taper > margin)
    throw Error(Errc::invalid_argument, "analytic surface: need h > 0 and 0 <= taper <= margin");
  SurfacePhasors s;
  s.k = k;
  s.omega = k * k;
  s.incident = 1.0;
  s.scaled = true;
  std::array<long, 3> cells;
  for (int a = 0; a < 3; ++a) {
    if (!(hw[a] > 0)) throw Error(Errc::invalid_argument, "box half-width must be positive");
    s.box[a] = {-hw[a], hw[a]};
    cells[a] = std::lround(2 * hw[a] / h);
    if (std::abs(double(cells[a]) * h - 2 * hw[a]) > 1e-9 * hw[a])
      throw Error(Errc::invalid_argument, "box extent is not a whole number of cells");
  }
  auto window = [&](long m, long n) {
    // 1 except over the outer `taper` nodes of each side, 0 at the edge
    long dist = std::min(m, n - 1 - m);
    if (taper == 0 || dist >= taper) return 1.0;
    return taper_xi(double(dist) / double(taper));
  };
  for (Face face : all_faces) {
    FacePhasors& f = s.faces[std::size_t(face)];
    int a = face_axis(face);
    auto [b, c] = face_tangents(face);
    f.face = face;
    f.coord = face_is_upper(face) ? hw[a] : -hw[a];
    f.hb = f.hc = h;
    // extra nodes past the upper margin keep the transform lengths smooth
    f.nb = fft::good_size(std::size_t(cells[b] + 1 + 2 * margin));
    f.nc = fft::good_size(std::size_t(cells[c] + 1 + 2 * margin));
    f.xb0 = -hw[b] - margin * h;
    f.xc0 = -hw[c] - margin * h;
    f.box_b0 = margin;
    f.box_b1 = margin + cells[b];
    f.box_c0 = margin;
    f.box_c1 = margin + cells[c];
    f.psi.assign(f.nb * f.nc, 0.0);
    f.dpsi.assign(f.nb * f.nc, 0.0);
    for (std::size_t i = 0; i < f.nb; ++i)
      for (std::size_t j = 0; j < f.nc; ++j) {
        Vec3 r;
        r[a] = f.coord;
        r[b] = f.xb0 + double(i) * h;
        r[c] = f.xc0 + double(j) * h;
        double w = window(long(i), long(f.nb)) * window(long(j), long(f.nc));
        auto [v, grad] = fn(r);
        f.psi[i * f.nc + j] = w * v;
        f.dpsi[i * f.nc + j] = w * grad[a];
      }
  }
  return s;
}
}  // namespace

SurfacePhasors spherical_wave_surface(const std::array<double, 3>& hw, double h, double k, int margin,
                                      int taper) {
  return analytic_surface(hw, h, k, margin, taper, [k](const Vec3& r) {
    double R = std::hypot(r[0], r[1], r[2]);
    cplx v = std::polar(1.0 / R, k * R);
    cplx radial = v * (cplx(0, k) - 1.0 / R);
    std::array<cplx, 3> g{radial * r[0] / R, radial * r[1] / R, radial * r[2] / R};
    return std::pair{v, g};
  });
}

SurfacePhasors plane_wave_surface(const std::array<double, 3>& hw, double h, double k, const Vec3& kh,
                                  int margin, int taper) {
  return analytic_surface(hw, h, k, margin, taper, [k, kh](const Vec3& r) {
    cplx v = std::polar(1.0, k * (kh[0] * r[0] + kh[1] * r[1] + kh[2] * r[2]));
    std::array<cplx, 3> g{cplx(0, k * kh[0]) * v, cplx(0, k * kh[1]) * v, cplx(0, k * kh[2]) * v};
    return std::pair{v, g};
  });
}

// ---------------- archive ----------------

namespace {
constexpr char magic[8] = {'Q', 'S', 'C', 'P', 'H', 'S', 'R', '1'};

template <class T>
void put(std::ostream& o, const T& v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw Error(Errc::io_error, "truncated phasor archive");
  return v;
}
void put_cplx(std::ostream& o, const std::vector<cplx>& v) {
  for (const cplx& x : v) {
    put(o, x.real());
    put(o, x.imag());
  }
}
void get_cplx(std::istream& in, std::vector<cplx>& v, std::size_t n) {
  v.resize(n);
  for (auto& x : v) {
    double re = get<double>(in);
    double im = get<double>(in);
    x = {re, im};
  }
}
}  // namespace

void write_archive(const std::string& path, const SurfacePhasors& s) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw Error(Errc::io_error, "cannot write " + path);
  o.write(magic, 8);
  put<std::uint32_t>(o, 6);
  put(o, s.omega);
  put(o, s.k);
  put(o, s.incident.real());
  put(o, s.incident.imag());
  put<std::uint32_t>(o, s.scaled ? 1 : 0);
  for (auto& b : s.box) {
    put(o, b[0]);
    put(o, b[1]);
  }
  for (const FacePhasors& f : s.faces) {
    put<std::int32_t>(o, std::int32_t(f.face));
    put<std::uint64_t>(o, f.nb);
    put<std::uint64_t>(o, f.nc);
    put(o, f.coord);
    put(o, f.hb);
    put(o, f.hc);
    put(o, f.xb0);
    put(o, f.xc0);
    put<std::int64_t>(o, f.box_b0);
    put<std::int64_t>(o, f.box_b1);
    put<std::int64_t>(o, f.box_c0);
    put<std::int64_t>(o, f.box_c1);
    put_cplx(o, f.psi);
    put_cplx(o, f.dpsi);
  }
  if (!o) throw Error(Errc::io_error, "write failed: " + path);

  std::ofstream m(path + ".meta");
  m << std::setprecision(17);
  m << "format = qscat phasor archive v1\n";
  m << "byte_order = little-endian float64, interleaved re/im, row-major planes\n";
  m << "omega = " << s.omega << "\nk = " << s.k << "\n";
  m << "incident = " << s.incident.real() << " " << s.incident.imag() << "\n";
  m << "scaling = " << (s.scaled ? "divided by incident phasor" : "raw") << "\n";
  for (int a = 0; a < 3; ++a)
    m << "box." << "xyz"[a] << " = " << s.box[a][0] << " " << s.box[a][1] << "\n";
  for (const FacePhasors& f : s.faces)
    m << "face." << face_name(f.face) << " = dims " << f.nb << "x" << f.nc << " spacing " << f.hb
      << " " << f.hc << " origin " << f.xb0 << " " << f.xc0 << " plane " << f.coord << " box_nodes "
      << f.box_b0 << ".." << f.box_b1 << " " << f.box_c0 << ".." << f.box_c1 << "\n";
}

SurfacePhasors read_archive(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "missing phasor archive " + path);
  char mg[8];
  in.read(mg, 8);
  if (!in || std::memcmp(mg, magic, 8) != 0) throw Error(Errc::io_error, "not a phasor archive: " + path);
  if (get<std::uint32_t>(in) != 6) throw Error(Errc::io_error, "archive must hold six faces");
  SurfacePhasors s;
  s.omega = get<double>(in);
  s.k = get<double>(in);
  double re = get<double>(in);
  double im = get<double>(in);
  s.incident = {re, im};
  s.scaled = get<std::uint32_t>(in) != 0;
  for (auto& b : s.box) {
    b[0] = get<double>(in);
    b[1] = get<double>(in);
  }
  for (FacePhasors& f : s.faces) {
    int id = get<std::int32_t>(in);
    if (id < 0 || id > 5) throw Error(Errc::io_error, "bad face id in archive");
    f.face = Face(id);
    f.nb = get<std::uint64_t>(in);
    f.nc = get<std::uint64_t>(in);
    f.coord = get<double>(in);
    f.hb = get<double>(in);
    f.hc = get<double>(in);
    f.xb0 = get<double>(in);
    f.xc0 = get<double>(in);
    f.box_b0 = get<std::int64_t>(in);
    f.box_b1 = get<std::int64_t>(in);
    f.box_c0 = get<std::int64_t>(in);
    f.box_c1 = get<std::int64_t>(in);
    get_cplx(in, f.psi, f.nb * f.nc);
    get_cplx(in, f.dpsi, f.nb * f.nc);
  }
  return s;
}

void write_scan_csv(const std::string& path, const std::vector<ScanRow>& rows) {
  std::ofstream o(path);
  if (!o) throw Error(Errc::io_error, "cannot write " + path);
  o << "gamma_deg,re,im,abs2\n" << std::scientific << std::setprecision(16);
  for (const ScanRow& r : rows)
    o << r.gamma_deg << "," << r.value.real() << "," << r.value.imag() << "," << std::norm(r.value) << "\n";
}

}  // namespace qscat
