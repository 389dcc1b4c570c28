#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qscat/ntdf.hpp"

using namespace qscat;

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::invalid_argument;
}

namespace {
const double H = pi / 10;
const std::array<double, 3> HW{10 * H, 8 * H, 10 * H};

// Gauss-Legendre nodes and weights on [-1, 1]
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.resize(std::size_t(n));
  w.resize(std::size_t(n));
  for (int i = 0; i < n; ++i) {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5)), dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int l = 2; l <= n; ++l) {
        double p2 = ((2 * l - 1) * z * p1 - (l - 1) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[std::size_t(i)] = z;
    w[std::size_t(i)] = 2 / ((1 - z * z) * dp * dp);
  }
}

// two point sources inside the box
struct Field {
  double k = 1.0;
  Vec3 a{0.5, -0.3, 0.2}, b{-0.4, 0.6, -0.5};
  cplx value(const Vec3& r) const { return one(r, a, 1.0).first + one(r, b, 0.5).first; }
  std::array<cplx, 3> grad(const Vec3& r) const {
    auto g1 = one(r, a, 1.0).second, g2 = one(r, b, 0.5).second;
    return {g1[0] + g2[0], g1[1] + g2[1], g1[2] + g2[2]};
  }
  std::pair<cplx, std::array<cplx, 3>> one(const Vec3& r, const Vec3& c, double amp) const {
    Vec3 d{r[0] - c[0], r[1] - c[1], r[2] - c[2]};
    double R = std::hypot(d[0], d[1], d[2]);
    cplx v = amp * std::polar(1.0 / R, k * R);
    cplx rad = v * (cplx(0, k) - 1.0 / R);
    return {v, {rad * d[0] / R, rad * d[1] / R, rad * d[2] / R}};
  }
};

// exterior representation with Phi = exp(ikR)/(4 pi R) and the outward box normal
cplx kirchhoff_quadrature(const Field& u, const Vec3& x, int nq) {
  std::vector<double> gx, gw;
  gauss_legendre(nq, gx, gw);
  cplx sum = 0;
  for (Face f : all_faces) {
    int a = face_axis(f);
    auto [b, c] = face_tangents(f);
    double nsign = face_is_upper(f) ? 1.0 : -1.0;
    for (int i = 0; i < nq; ++i)
      for (int j = 0; j < nq; ++j) {
        Vec3 y;
        y[a] = nsign * HW[a];
        y[b] = HW[b] * gx[std::size_t(i)];
        y[c] = HW[c] * gx[std::size_t(j)];
        double wt = gw[std::size_t(i)] * gw[std::size_t(j)] * HW[b] * HW[c];
        Vec3 d{x[0] - y[0], x[1] - y[1], x[2] - y[2]};
        double R = std::hypot(d[0], d[1], d[2]);
        cplx phi = std::polar(1.0 / (4 * pi * R), u.k * R);
        // d Phi / d n_y = dPhi/dR * (-(x - y) . n) / R
        cplx dphi = phi * (cplx(0, u.k) - 1.0 / R) * (-d[a] * nsign / R);
        cplx dudn = u.grad(y)[std::size_t(a)] * nsign;
        sum += wt * (u.value(y) * dphi - dudn * phi);
      }
  }
  return sum;
}

// lattice surface of an arbitrary field on the same planes and windows as the analytic builder
SurfacePhasors surface_of(const Field& u) {
  SurfacePhasors s = spherical_wave_surface(HW, H, u.k);
  for (FacePhasors& f : s.faces) {
    int a = face_axis(f.face);
    auto [b, c] = face_tangents(f.face);
    for (std::size_t i = 0; i < f.nb; ++i)
      for (std::size_t j = 0; j < f.nc; ++j) {
        Vec3 r;
        r[a] = f.coord;
        r[b] = f.xb0 + double(i) * f.hb;
        r[c] = f.xc0 + double(j) * f.hc;
        double R = std::hypot(r[0], r[1], r[2]);
        double win = std::abs(f.psi[i * f.nc + j]) * R;  // the builder's window
        f.psi[i * f.nc + j] = win * u.value(r);
        f.dpsi[i * f.nc + j] = win * u.grad(r)[std::size_t(a)];
      }
  }
  return s;
}
}  // namespace

TEST_CASE("face helpers") {
  CHECK(face_axis(Face::bottom) == 2);
  CHECK(face_axis(Face::front) == 0);
  CHECK(face_axis(Face::left) == 1);
  CHECK(face_sign(Face::bottom) == 1.0);
  CHECK(face_sign(Face::back) == 1.0);
  CHECK(face_sign(Face::left) == 1.0);
  CHECK(face_sign(Face::top) == -1.0);
  CHECK(face_sign(Face::right) == -1.0);
  CHECK(face_is_upper(Face::front));
  CHECK(face_tangents(Face::left) == std::array<int, 2>{0, 2});
  CHECK(std::string(face_name(Face::top)) == "top");
}

TEST_CASE("green function and observation geometry") {
  cplx g = green({0, 0, 0}, {0, 3, 4}, 2.0);
  CHECK(std::abs(g + std::polar(0.2, 10.0)) < 1e-15);
  CHECK(code_of([] { green({1, 2, 3}, {1, 2, 3}, 1); }) == Errc::coincident_points);
  CHECK(gamma_grid(4) == std::vector<double>{0, 90, 180, 270});
  for (const char* p : {"xy", "yz", "xz"}) {
    auto ep = euler_plane(p);
    int zero = std::string(p) == "xy" ? 2 : (std::string(p) == "yz" ? 0 : 1);
    for (double gm : {0.0, 33.0, 200.0}) {
      Vec3 v = euler_direction(ep.alpha_deg, ep.beta_deg, gm);
      CHECK(std::hypot(v[0], v[1], v[2]) == doctest::Approx(1));
      CHECK(std::abs(v[std::size_t(zero)]) < 1e-15);
    }
  }
  Vec3 v = euler_direction(0, 0, 90);
  CHECK(v[1] == doctest::Approx(1));
  auto c = observation_circle(5.0, euler_plane("xy"), {0, 90});
  CHECK(c[0][0] == doctest::Approx(5));
  CHECK(c[1][1] == doctest::Approx(5));
}

TEST_CASE("series order bound") {
  for (double tol : {1e-6, 1e-9, 1e-12}) {
    int P = series_order(1.0, H, tol);
    double t = 1;
    for (int q = 1; q <= P + 1; ++q) t *= H / q;
    CHECK(t <= tol);
    double prev = 1;
    for (int q = 1; q <= P; ++q) prev *= H / q;
    CHECK(prev > tol);
  }
  CHECK(series_order(1.0, H, 1e-12) > series_order(1.0, H, 1e-6));
}

TEST_CASE("moment fast path agrees with the literal cell sum") {
  auto s = spherical_wave_surface(HW, H, 1.0);
  for (Vec3 r : {Vec3{0, 30, 0}, Vec3{12, -9, 20}}) {
    cplx fast = evaluate_distant(s, r);
    cplx direct = evaluate_distant_direct(s, r);
    CHECK(std::abs(fast - direct) < 1e-10 * std::abs(direct));
  }
}

TEST_CASE("dense quadrature oracle") {
  Field u;
  auto s = surface_of(u);
  for (Vec3 x : {Vec3{0, 0, 30}, Vec3{-25, 14, 3}, Vec3{60, 60, -10}}) {
    cplx exact = u.value(x);
    cplx quad = kirchhoff_quadrature(u, x, 48);
    CHECK(std::abs(quad - exact) < 1e-8 * std::abs(exact));
    cplx lat = evaluate_distant(s, x);
    CHECK(std::abs(lat - quad) < 5e-3 * std::abs(quad));
  }
}

TEST_CASE("plane waves carry no outgoing field (null test)") {
  auto s = plane_wave_surface(HW, H, 1.0, {0.6, 0.0, 0.8});
  for (Vec3 r : {Vec3{0, 100, 0}, Vec3{70, 0, 70}, Vec3{-100, 0, 0}}) {
    double R = std::hypot(r[0], r[1], r[2]);
    CHECK(std::abs(evaluate_distant(s, r)) * R < 1e-2);
  }
}

TEST_CASE("linearity") {
  auto a = spherical_wave_surface(HW, H, 1.0);
  auto b = plane_wave_surface(HW, H, 1.0, {0, 1, 0});
  SurfacePhasors c = a;
  const cplx ca(0.3, -1.2), cb(2.0, 0.5);
  for (std::size_t f = 0; f < 6; ++f)
    for (std::size_t e = 0; e < c.faces[f].psi.size(); ++e) {
      c.faces[f].psi[e] = ca * a.faces[f].psi[e] + cb * b.faces[f].psi[e];
      c.faces[f].dpsi[e] = ca * a.faces[f].dpsi[e] + cb * b.faces[f].dpsi[e];
    }
  std::vector<Vec3> pts{{0, 40, 0}, {30, -30, 5}};
  auto va = evaluate_distant(a, pts), vb = evaluate_distant(b, pts), vc = evaluate_distant(c, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    CHECK(std::abs(vc[i] - (ca * va[i] + cb * vb[i])) < 1e-12 * (std::abs(va[i]) + std::abs(vb[i])));
}

TEST_CASE("spherical wave reconstruction on a small box") {
  auto s = spherical_wave_surface(HW, H, 1.0);
  auto gam = gamma_grid(24);
  for (double R : {50.0, 2000.0})
    for (const char* p : {"xy", "yz", "xz"}) {
      auto pts = observation_circle(R, euler_plane(p), gam);
      auto v = evaluate_distant(s, pts);
      for (const cplx& x : v) {
        cplx u = x * R * std::polar(1.0, -R);
        CHECK(std::abs(std::abs(u) - 1) < 0.02);
        CHECK(std::abs(std::arg(u)) < 0.05);
      }
    }
}

TEST_CASE("observation preconditions") {
  auto s = spherical_wave_surface(HW, H, 1.0);
  CHECK(inside_box(s, {0, 0, 0}));
  CHECK_FALSE(inside_box(s, {0, 0, 10}));
  CHECK(code_of([&] { evaluate_distant(s, Vec3{0.1, 0.2, 0.3}); }) == Errc::observation_inside_box);
  CHECK(code_of([&] { evaluate_distant(s, Vec3{0, 0, HW[2] + 0.3}); }) == Errc::cell_size_violation);
  SurfacePhasors raw = s;
  raw.scaled = false;
  raw.incident = 0;
  CHECK(code_of([&] { scale_phasors(raw); }) == Errc::zero_incident_phasor);
  raw.incident = cplx(0, 2);
  auto sc = scale_phasors(raw);
  CHECK(std::abs(sc.faces[0].psi[500] - s.faces[0].psi[500] / cplx(0, 2)) < 1e-15);
}

TEST_CASE("plane spectra and Fourier interpolation") {
  auto s = spherical_wave_surface(HW, H, 1.0);
  const FacePhasors& f = s.faces[std::size_t(Face::top)];
  auto sp = plane_spectra(f);
  CHECK(sp.nb == f.nb);
  // on a node the interpolant returns the sample
  std::size_t i = 50, j = 47;
  cplx v = plane_interpolate(f, sp.psi, f.xb0 + double(i) * f.hb, f.xc0 + double(j) * f.hc);
  CHECK(std::abs(v - f.psi[i * f.nc + j]) < 1e-12);
  // between nodes inside the box it follows the analytic field
  double xb = f.xb0 + 50.5 * f.hb, xc = f.xc0 + 47.5 * f.hc;
  double R = std::hypot(xb, xc, f.coord);
  cplx w = plane_interpolate(f, sp.psi, xb, xc);
  CHECK(std::abs(w - std::polar(1.0 / R, R)) < 1e-6);
}

TEST_CASE("recorder phasors: orthogonality and normal derivative") {
  GridSpec g;
  g.n = {40, 40, 40};
  auto geom = build_geometry(g, RegionWidths{6, 4, 6, 15}, StepperKind::pstd);
  VirtualPlaneRecorder rec(geom, {1.0, 2.0});
  const long N = 2000;  // one period of omega = 1 at dtau = pi/1000
  const double ky = 2 * pi * 3 / (40 * g.spacing[1]);
  CField base(g.n);
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j)
      for (std::size_t k = 0; k < 40; ++k)
        base(i, j, k) = std::polar(1.0 + 0.01 * double(i), ky * double(j) * g.spacing[1]);
  CField f(g.n);
  for (long n = 0; n < N; ++n) {
    cplx ph = std::polar(1.0, -2.0 * double(n) * g.dtau);  // oscillates at omega = 2
    for (std::size_t e = 0; e < f.size(); ++e) f[e] = base[e] * ph;
    rec.accumulate(f, n, g.dtau, ph);
  }
  CHECK(rec.samples() == N);
  // omega = 1 is orthogonal to the omega = 2 signal over a whole period
  double off = 0;
  for (Face fc : all_faces)
    for (const cplx& x : rec.raw(0, fc).psi) off = std::max(off, std::abs(x));
  CHECK(off < 1e-9);
  CHECK(std::abs(rec.raw_incident(0)) < 1e-9);
  CHECK(std::abs(rec.raw_incident(1) - double(N)) < 1e-8);
  // matched frequency: psi phasor is N * base, derivative along y is i ky N base
  auto s = rec.finalize(1);
  const FacePhasors& L = s.faces[std::size_t(Face::left)];
  auto [b, c] = face_tangents(Face::left);
  CHECK(b == 0);
  CHECK(c == 2);
  const long jl = geom.axes[1].plane_lo;
  double worst = 0;
  for (std::size_t ib = 0; ib < L.nb; ++ib)
    for (std::size_t ic = 0; ic < L.nc; ++ic) {
      cplx want = base(ib, std::size_t(jl), ic);
      worst = std::max(worst, std::abs(L.psi[ib * L.nc + ic] - want));
      worst = std::max(worst, std::abs(L.dpsi[ib * L.nc + ic] - cplx(0, ky) * want));
    }
  CHECK(worst < 1e-9);
}

TEST_CASE("archive and scan CSV round trips") {
  auto s = spherical_wave_surface(HW, H, 1.0, 10, 5);
  s.omega = 1.0;
  std::string path = (std::filesystem::temp_directory_path() / "qscat_test.phs").string();
  write_archive(path, s);
  CHECK(std::filesystem::exists(path + ".meta"));
  auto r = read_archive(path);
  CHECK(r.k == s.k);
  CHECK(r.box == s.box);
  CHECK(r.scaled == s.scaled);
  for (std::size_t f = 0; f < 6; ++f) {
    CHECK(r.faces[f].face == s.faces[f].face);
    CHECK(r.faces[f].box_b1 == s.faces[f].box_b1);
    CHECK(r.faces[f].psi == s.faces[f].psi);
    CHECK(r.faces[f].dpsi == s.faces[f].dpsi);
  }
  {
    std::ofstream o(path, std::ios::binary);
    o << "QSCPHSR1";
  }
  CHECK(code_of([&] { read_archive(path); }) == Errc::io_error);
  CHECK(code_of([] { read_archive("/nonexistent/x.phs"); }) == Errc::io_error);
  std::remove(path.c_str());
  std::remove((path + ".meta").c_str());

  std::string csv = (std::filesystem::temp_directory_path() / "qscat_scan.csv").string();
  std::vector<ScanRow> rows{{0.0, {0.1, 1.0 / 3}}, {90.0, {-2.0 / 7, 1e-20}}};
  write_scan_csv(csv, rows);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "gamma_deg,re,im,abs2");
  for (const ScanRow& row : rows) {
    std::getline(in, line);
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    CHECK(v[0] == row.gamma_deg);
    CHECK(v[1] == row.value.real());  // 17 significant digits round-trip exactly
    CHECK(v[2] == row.value.imag());
  }
  std::remove(csv.c_str());
}
