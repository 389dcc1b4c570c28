#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qscat/boundary.hpp"
#include "qscat/stability.hpp"
#include "qscat/stepper.hpp"

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

TEST_CASE("stencil coefficients") {
  const auto& a = StencilCoefficients::alpha;
  double s = a[0];
  for (int m = 1; m <= 4; ++m) s += 2 * a[m];
  CHECK(std::abs(s) < 1e-15);
  // second-moment condition of a consistent second derivative
  double m2 = 0;
  for (int m = 1; m <= 4; ++m) m2 += a[m] * m * m;
  CHECK(m2 == doctest::Approx(1.0));
  CHECK(stencil_factor_f(0) == doctest::Approx(0).epsilon(1e-15));
  CHECK(stencil_factor_f(pi) == doctest::Approx(2048.0 / 315.0).epsilon(1e-14));
  for (double d : {0.1, 0.7, 2.0, 3.0}) {
    double ref = -a[0];
    for (int m = 1; m <= 4; ++m) ref -= 2 * a[m] * std::cos(m * d);
    CHECK(stencil_factor_f(d) == doctest::Approx(ref).epsilon(1e-14));
  }
  // 8th-order accurate at small delta
  CHECK(std::abs(stencil_factor_f(0.1) - 0.01) < 1e-10);
}

TEST_CASE("stability bounds") {
  const double h = pi / 10;
  Vec3 s{h, h, h};
  CHECK(stability_dtau_pstd(s, 0) == doctest::Approx(1.0 / (3 * pi * pi / (h * h))));
  CHECK(stability_dtau_fdtd(s, 0) == doctest::Approx(1.0 / (3 * 2048.0 / 315.0 / (h * h))));
  CHECK(stability_dtau_pstd(s, 0) < stability_dtau_fdtd(s, 0));
  CHECK(stability_dtau_pstd(s, 2) < stability_dtau_pstd(s, 0));
  Vec3 one{INFINITY, h, INFINITY};
  CHECK(stability_dtau_pstd(one, 0) == doctest::Approx(h * h / (pi * pi)));
  CHECK(code_of([&] { stability_dtau_pstd(s, -1); }) == Errc::invalid_argument);
  CHECK(code_of([] { stability_dtau_fdtd({0, 1, 1}, 0); }) == Errc::invalid_argument);
  CHECK(phase_eta(pi / 100) == doctest::Approx(std::sin(pi / 100) / (pi / 100)).epsilon(1e-15));
  CHECK(code_of([] { phase_eta(0); }) == Errc::out_of_range);
}

TEST_CASE("spectral laplacian is exact on lattice modes") {
  std::array<std::size_t, 3> n{12, 20, 9};
  Vec3 h{0.3, 0.25, 0.4};
  CField f(n);
  const double kx = 2 * pi * 3 / (12 * 0.3), ky = 2 * pi * 2 / (20 * 0.25), kz = 2 * pi * 1 / (9 * 0.4);
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k)
        f(i, j, k) = std::polar(1.0, kx * i * h[0] + ky * j * h[1] + kz * k * h[2]) +
                     0.5 * std::cos(kx * i * h[0]);
  CField L = laplacian_pstd(f, h);
  CField S = laplacian_pstd_serial(f, h);
  double worst = 0, diff = 0;
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        cplx ref = -(kx * kx + ky * ky + kz * kz) *
                       std::polar(1.0, kx * i * h[0] + ky * j * h[1] + kz * k * h[2]) -
                   0.5 * kx * kx * std::cos(kx * i * h[0]);
        worst = std::max(worst, std::abs(L(i, j, k) - ref));
        diff = std::max(diff, std::abs(L(i, j, k) - S(i, j, k)));
      }
  CHECK(worst < 1e-10);
  CHECK(diff < 1e-12);

  // a sub-box apply writes nothing outside the box
  SpectralLaplacian sl(n, h);
  CField out(n, cplx(7, 7));
  Box3 box{{2, 3, 1}, {5, 9, 4}};
  sl.apply(f, out, box);
  CHECK(out(0, 0, 0) == cplx(7, 7));
  CHECK(out(11, 19, 8) == cplx(7, 7));
  CHECK(std::abs(out(3, 4, 2) - L(3, 4, 2)) < 1e-12);
}

TEST_CASE("stencil laplacian eigenvalues") {
  std::array<std::size_t, 3> n{1, 32, 16};
  Vec3 h{1, 0.2, 0.3};
  const double dy = 2 * pi * 5 / 32, dz = 2 * pi * 3 / 16;
  CField f(n);
  for (std::size_t j = 0; j < n[1]; ++j)
    for (std::size_t k = 0; k < n[2]; ++k) f(0, j, k) = std::polar(1.0, dy * j + dz * k);
  CField L = laplacian_fdtd(f, h);
  CField S(n);
  laplacian_fdtd_serial(f, S, h);
  const double lam = -(stencil_factor_f(dy) / (h[1] * h[1]) + stencil_factor_f(dz) / (h[2] * h[2]));
  for (std::size_t j = 0; j < n[1]; ++j)
    for (std::size_t k = 0; k < n[2]; ++k) {
      CHECK(std::abs(L(0, j, k) - lam * f(0, j, k)) < 1e-10);
      CHECK(std::abs(L(0, j, k) - S(0, j, k)) < 1e-13);
    }
}

namespace {
struct Line {
  ModelGeometry geom;
  AbsorberMask mask;
};
Line line(StepperKind kind, std::size_t n = 200, double dtau = pi / 1000) {
  GridSpec g;
  g.n = {1, n, 1};
  g.dtau = dtau;
  int trans = kind == StepperKind::fdtd ? fdtd_transition_grids : 20;
  Line l{build_geometry(g, RegionWidths{20, 10, trans, 15}, kind), {}};
  l.mask = build_mask(AbsorberProfile::poschl_teller(5.0, 0.2, 20), l.geom, dtau);
  return l;
}

// max |psi| over the scattered-field zone, max ||psi| - 1| and max phase error over the TF
struct LineStats {
  double sf = 0, tf_amp = 0, tf_phase = 0;
};
LineStats line_stats(const Stepper& st) {
  const auto& g = st.geometry();
  CField f = st.gather_cur();
  LineStats s;
  for (long j = 0; j < long(g.grid.n[1]); ++j) {
    cplx v = f(0, std::size_t(j), 0);
    if (g.axes[1].classify(j) == Region::sf) s.sf = std::max(s.sf, std::abs(v));
    if (g.axes[1].in_tf(j)) {
      double d = project_distance({0, j, 0}, st.incident_origin(), g.grid.spacing,
                                  st.source()->direction());
      cplx want = st.source()->eval_1d(d, st.n()).first;
      s.tf_amp = std::max(s.tf_amp, std::abs(std::abs(v) - 1));
      s.tf_phase = std::max(s.tf_phase, std::abs(std::arg(v / want)));
    }
  }
  return s;
}
}  // namespace

TEST_CASE("stepper preconditions") {
  auto l = line(StepperKind::pstd);
  StepperOptions o;
  o.kind = StepperKind::fdtd;
  CHECK(code_of([&] { Stepper(l.geom, l.mask, PotentialSpec::none(), nullptr, o); }) ==
        Errc::invalid_argument);
  auto fast = line(StepperKind::pstd, 200, 0.02);
  CHECK(code_of([&] { Stepper(fast.geom, fast.mask, PotentialSpec::none(), nullptr, {}); }) ==
        Errc::invalid_argument);
  auto src = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), 0.002);
  CHECK(code_of([&] { Stepper(l.geom, l.mask, PotentialSpec::none(), &src, {}); }) ==
        Errc::invalid_argument);
  auto lf = line(StepperKind::fdtd);
  StepperOptions of;
  of.kind = StepperKind::fdtd;
  of.topology.p = {1, 2, 1};
  CHECK(code_of([&] { Stepper(lf.geom, lf.mask, PotentialSpec::none(), nullptr, of); }) ==
        Errc::invalid_argument);
  // a potential reaching outside the total-field zone
  PotentialSpec wide;
  wide.v = [](const Vec3&, double) { return 0.3; };
  wide.support_radius = 1.0;
  wide.vmax = 0.3;
  CHECK(code_of([&] { Stepper(l.geom, l.mask, wide, nullptr, {}); }) ==
        Errc::potential_support_violation);
  CField bad({3, 3, 3});
  Stepper ok(l.geom, l.mask, PotentialSpec::none(), nullptr, {});
  CHECK(code_of([&] { ok.set_state(bad, bad, 1); }) == Errc::shape_mismatch);
}

TEST_CASE("empty 1D run keeps the incident wave in the total field") {
  for (StepperKind kind : {StepperKind::pstd, StepperKind::fdtd}) {
    CAPTURE(stepper_name(kind));
    auto l = line(kind);
    auto src = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), l.geom.grid.dtau);
    StepperOptions o;
    o.kind = kind;
    Stepper st(l.geom, l.mask, PotentialSpec::none(), &src, o);
    st.initialize();
    for (int s = 0; s < 4000; ++s) st.step();
    CHECK(st.n() == 4001);
    auto s = line_stats(st);
    CHECK(s.sf < 1e-4);
    CHECK(s.tf_amp < 1e-4);
    CHECK(s.tf_phase < 1e-4);
  }
}

TEST_CASE("cold start builds the wave up from zero") {
  auto l = line(StepperKind::pstd);
  auto src = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), l.geom.grid.dtau);
  StepperOptions o;
  o.start = StartMode::cold;
  Stepper st(l.geom, l.mask, PotentialSpec::none(), &src, o);
  st.initialize();
  CHECK(st.core_norm() == 0.0);
  for (int s = 0; s < 10; ++s) st.step();
  CHECK(st.core_norm() > 0.0);
}

TEST_CASE("monochromatic correction removes the temporal phase error") {
  // coarse dtau: eta matters
  const double dt = 0.008;
  double err[2];
  for (int use = 0; use < 2; ++use) {
    auto l = line(StepperKind::pstd, 200, dt);
    auto src = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), dt);
    StepperOptions o;
    o.monochromatic_eta = use == 1;
    Stepper st(l.geom, l.mask, PotentialSpec::none(), &src, o);
    st.initialize();
    for (int s = 0; s < 1000; ++s) st.step();
    err[use] = line_stats(st).tf_phase;
  }
  CHECK(err[1] < 1e-5);
  CHECK(err[0] > 10 * err[1]);
}

TEST_CASE("serial reference kernels give the same trajectory") {
  for (StepperKind kind : {StepperKind::pstd, StepperKind::fdtd}) {
    CField out[2];
    for (int ser = 0; ser < 2; ++ser) {
      auto l = line(kind);
      auto src = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), l.geom.grid.dtau);
      StepperOptions o;
      o.kind = kind;
      o.serial_kernels = ser == 1;
      Stepper st(l.geom, l.mask, PotentialSpec::square_well(-0.5, 1.0), &src, o);
      st.initialize();
      for (int s = 0; s < 300; ++s) st.step();
      out[ser] = st.gather_cur();
    }
    double d = 0;
    for (std::size_t f = 0; f < out[0].size(); ++f) d = std::max(d, std::abs(out[0][f] - out[1][f]));
    CHECK(d < 1e-12);
  }
}

TEST_CASE("random fields stay bounded just under the bound and blow up above it") {
  for (StepperKind kind : {StepperKind::pstd, StepperKind::fdtd}) {
    CAPTURE(stepper_name(kind));
    GridSpec g;
    g.n = {1, 128, 1};
    Vec3 h{INFINITY, g.spacing[1], INFINITY};
    double bound = kind == StepperKind::pstd ? stability_dtau_pstd(h, 0) : stability_dtau_fdtd(h, 0);
    for (double frac : {0.99, 1.2}) {
      g.dtau = frac * bound;
      int trans = kind == StepperKind::fdtd ? fdtd_transition_grids : 12;
      auto geom = build_geometry(g, RegionWidths{20, 10, trans, 15}, kind);
      auto none = AbsorberProfile::custom([](double) { return 0.0; }, 20);
      auto mask = build_mask(none, geom, g.dtau);
      StepperOptions o;
      o.kind = kind;
      o.enforce_stability_bound = false;
      Stepper st(geom, mask, PotentialSpec::none(), nullptr, o);
      std::mt19937 rng(11);
      std::normal_distribution<double> N;
      // one random field; the second level comes from a forward-Euler start-up step
      CField a(g.n);
      for (std::size_t f = 0; f < a.size(); ++f) a[f] = {N(rng), N(rng)};
      CField L = kind == StepperKind::pstd ? laplacian_pstd(a, g.spacing) : laplacian_fdtd(a, g.spacing);
      CField b(g.n);
      for (std::size_t f = 0; f < a.size(); ++f) b[f] = a[f] + cplx(0, st.eta() * g.dtau) * L[f];
      st.set_state(a, b, 1);
      double n0 = st.core_norm(), peak = n0;
      bool blew = false;
      try {
        for (int s = 0; s < 3000; ++s) {
          st.step();
          peak = std::max(peak, st.core_norm());
        }
      } catch (const Error& e) {
        CHECK(e.code() == Errc::instability);
        blew = true;
      }
      if (frac < 1) {
        CHECK_FALSE(blew);
        CHECK(peak <= 2 * n0);
      } else {
        CHECK((blew || peak > 1e6 * n0));
      }
    }
  }
}

TEST_CASE("3D run with a centred well keeps the mirror symmetry across the incidence axis") {
  GridSpec g;
  g.n = {40, 40, 40};
  auto geom = build_geometry(g, RegionWidths{6, 4, 6, 15}, StepperKind::pstd, 0.9);
  auto mask = build_mask(AbsorberProfile::poschl_teller(5.0, 0.2, 6), geom, g.dtau);
  auto src = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), g.dtau);
  StepperOptions o;
  o.potential_ramp_periods = 0;
  Stepper st(geom, mask, PotentialSpec::square_well(-1.0, 0.9), &src, o);
  st.initialize();
  for (int s = 0; s < 100; ++s) st.step();
  CField f = st.gather_cur();
  double asym = 0, peak = 0;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j)
      for (std::size_t k = 0; k < 40; ++k) {
        peak = std::max(peak, std::abs(f(i, j, k)));
        asym = std::max(asym, std::abs(f(i, j, k) - f(39 - i, j, k)));
        asym = std::max(asym, std::abs(f(i, j, k) - f(i, j, 39 - k)));
      }
  CHECK(peak > 0.5);
  CHECK(asym < 1e-10);
}
