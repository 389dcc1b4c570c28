#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "qscat/source.hpp"

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

TEST_CASE("incidence direction") {
  auto d = IncidentDirection::from_degrees(90, 90);
  CHECK(d.khat[0] == doctest::Approx(0).epsilon(1e-15));
  CHECK(d.khat[1] == doctest::Approx(1));
  CHECK(std::abs(d.khat[2]) < 1e-15);
  auto z = IncidentDirection::from_degrees(0, 0);
  CHECK(z.khat[2] == doctest::Approx(1));
  auto o = IncidentDirection::from_degrees(37, 211);
  CHECK(std::hypot(o.khat[0], o.khat[1], o.khat[2]) == doctest::Approx(1));
  CHECK(code_of([] { IncidentDirection::from_degrees(181, 0); }) == Errc::out_of_range);
  CHECK(code_of([] { IncidentDirection::from_degrees(90, 360); }) == Errc::out_of_range);
  CHECK(code_of([] { IncidentDirection::from_degrees(-1, 0); }) == Errc::out_of_range);
}

TEST_CASE("every box grid lies downstream of the contact corner") {
  IndexBounds b{3, 40, 5, 30, 2, 44};
  Vec3 h{0.3, 0.3, 0.3};
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> th(0, 180), ph(0, 359.999);
  for (int t = 0; t < 200; ++t) {
    auto dir = IncidentDirection::from_degrees(th(rng), ph(rng));
    Idx3 o = contact_corner(dir, b);
    double mn = 1e300;
    for (long i : {b.i0, b.i1})
      for (long j : {b.j0, b.j1})
        for (long k : {b.k0, b.k1}) mn = std::min(mn, project_distance({i, j, k}, o, h, dir));
    CHECK(mn >= -1e-12);
    CHECK(std::abs(mn) < 1e-12);  // the corner itself is the minimum
  }
}

TEST_CASE("gaussian packet solves the free equation") {
  GaussianPulse p{-5.0, 3.0, 1.2};
  // shape at tau = 0
  for (double d : {-11.0, -5.0, -2.0, 4.0}) {
    double x = d - p.center;
    CHECK(std::abs(gaussian_packet(p, d, 0)) == doctest::Approx(std::exp(-x * x / (2 * 9.0))));
  }
  // i psi_tau + psi_dd = 0 by central differences
  const double e = 1e-3;
  for (double tau : {0.0, 0.7, 3.1})
    for (double d : {-7.0, -1.3, 2.2}) {
      cplx pt = (gaussian_packet(p, d, tau + e) - gaussian_packet(p, d, tau - e)) / (2 * e);
      cplx pdd = (gaussian_packet(p, d + e, tau) - 2.0 * gaussian_packet(p, d, tau) +
                  gaussian_packet(p, d - e, tau)) /
                 (e * e);
      CHECK(std::abs(cplx(0, 1) * pt + pdd) < 1e-4);
    }
}

TEST_CASE("pulse placement leaves the origin quiet") {
  for (double w : {2.0, 8.0, 20.0}) {
    GaussianPulse p{pulse_center_for_width(w), w, 1.0};
    CHECK(std::abs(gaussian_packet(p, 0.0, 0.0)) <= 1.0000001e-6);
    CHECK(std::abs(gaussian_packet(p, -1.0, 0.0)) > 1e-6);
  }
  GaussianPulse p{-20, 4, 1};
  CHECK(pulsed_lattice_size(50, 30, p, 0.3) % 2 == 0);
}

TEST_CASE("sinusoidal source values") {
  auto s = IncidentSource1D::sinusoidal(IncidentDirection::from_degrees(90, 90), pi / 1000);
  CHECK(s.mode() == IncidentMode::sinusoidal);
  for (long n : {0L, 17L, 4000L})
    for (double d : {0.0, 1.3, 9.9}) {
      auto [v, dv] = s.eval_1d(d, n);
      cplx ref = std::polar(1.0, d - double(n) * pi / 1000);
      CHECK(std::abs(v - ref) < 1e-12);
      CHECK(std::abs(dv - cplx(0, 1) * ref) < 1e-12);
    }
  auto smp = s.eval(2.0, 3);
  CHECK(std::abs(smp.grad[1] - cplx(0, 1) * smp.psi) < 1e-12);
  CHECK(std::abs(smp.grad[0]) < 1e-12);
}

TEST_CASE("pulsed 1D source follows the analytic packet") {
  const double dtau = pi / 1000, h = pi / 10;
  GaussianPulse p{-15.0, 4.0, 1.0};
  auto dir = IncidentDirection::from_degrees(90, 90);
  auto s = IncidentSource1D::pulsed(dir, dtau, h, 600, -50.0, p, false, 0);
  CHECK(s.level() == 1);
  const double norm0 = s.norm(1);
  const long steps = 3000;
  for (long n = 0; n < steps; ++n) s.step();
  double tau = double(s.level()) * dtau, worst = 0;
  for (double d = -30; d < 40; d += 0.77) {
    cplx v = s.eval_1d(d, s.level()).first;
    worst = std::max(worst, std::abs(v - gaussian_packet(p, d, tau)));
  }
  // spectral in space, O(dtau^2) in time
  CHECK(worst < 2e-4);
  // norm conserved without an absorber
  CHECK(s.norm(s.level()) == doctest::Approx(norm0).epsilon(1e-6));
  CHECK(code_of([&] { s.eval_1d(0.0, 5); }) == Errc::out_of_range);
  CHECK(code_of([&] { s.eval_1d(1e4, s.level()); }) == Errc::out_of_range);
}

TEST_CASE("spectral interpolation beats nearest-node lookup off the nodes") {
  const double dtau = pi / 1000, h = pi / 10;
  GaussianPulse p{-10.0, 4.0, 1.0};
  auto dir = IncidentDirection::from_degrees(90, 90);
  auto s = IncidentSource1D::pulsed(dir, dtau, h, 400, -40.0, p, false, 0);
  double e_sp = 0, e_nn = 0;
  for (double d = -20; d < 0; d += 0.371) {
    cplx ref = gaussian_packet(p, d, dtau);
    s.set_interpolation(Interp::spectral);
    e_sp = std::max(e_sp, std::abs(s.eval_1d(d, 1).first - ref));
    s.set_interpolation(Interp::nearest);
    e_nn = std::max(e_nn, std::abs(s.eval_1d(d, 1).first - ref));
  }
  CHECK(e_sp < 1e-9);
  CHECK(e_nn > 1e-2);
}

TEST_CASE("source from explicit samples") {
  auto dir = IncidentDirection::from_degrees(90, 90);
  CHECK(code_of([&] {
          IncidentSource1D::pulsed_from_samples(dir, 0.01, 0.3, 0, {1, 2}, {1, 2}, false);
        }) == Errc::invalid_argument);
  std::vector<cplx> z(64, 0.0);
  auto s = IncidentSource1D::pulsed_from_samples(dir, 0.01, 0.3, 0, z, z, false);
  s.step();
  CHECK(s.norm(s.level()) == 0.0);
}

TEST_CASE("recursive sinusoid stays on the unit circle") {
  const double dtau = pi / 1000;
  RecursiveSinusoid r(dtau);
  for (long n = 0; n < 100000; ++n) r.advance();
  CHECK(r.n() == 100000);
  CHECK(std::abs(r.sin() - std::sin(100000 * dtau)) < 1e-10);
  CHECK(std::abs(r.cos() - std::cos(100000 * dtau)) < 1e-10);
  auto [s, c] = recursive_sinusoid(2500, dtau);
  CHECK(std::abs(s - std::sin(2500 * dtau)) < 1e-12);
  CHECK(std::abs(c - std::cos(2500 * dtau)) < 1e-12);
}
