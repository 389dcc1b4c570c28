#include "qscat/oracle.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

namespace qscat {

CentralPotential CentralPotential::square_well(double s, double radius) {
  if (!(radius > 0)) throw Error(Errc::invalid_argument, "well radius must be positive");
  return {[s, radius](double r) { return r < radius ? s : 0.0; }, radius};
}

CentralPotential CentralPotential::none() {
  return {[](double) { return 0.0; }, 0.0};
}

std::vector<double> sph_bessel_j_all(int lmax, double x) {
  if (!(x > 0) || lmax < 0) throw Error(Errc::invalid_argument, "sph_bessel_j_all needs x > 0, lmax >= 0");
  std::vector<double> j(std::size_t(lmax) + 1);
  int L = std::max(lmax, int(std::ceil(x))) + 40 + int(std::sqrt(40.0 * std::max(x, 1.0)));
  double jp1 = 0.0, jl = 1e-300;
  std::vector<double> tmp(std::size_t(L) + 2, 0.0);
  tmp[std::size_t(L) + 1] = jp1;
  tmp[std::size_t(L)] = jl;
  for (int l = L; l >= 1; --l) {
    double jm1 = double(2 * l + 1) / x * tmp[std::size_t(l)] - tmp[std::size_t(l) + 1];
    tmp[std::size_t(l) - 1] = jm1;
    if (std::abs(jm1) > 1e250) {
      for (int m = l - 1; m <= L + 1; ++m) tmp[std::size_t(m)] *= 1e-250;
    }
  }
  double j0 = std::sin(x) / x, j1 = std::sin(x) / (x * x) - std::cos(x) / x;
  double scale = std::abs(j0) > std::abs(j1) ? j0 / tmp[0] : j1 / tmp[1];
  for (int l = 0; l <= lmax; ++l) j[std::size_t(l)] = tmp[std::size_t(l)] * scale;
  return j;
}

std::vector<double> sph_bessel_y_all(int lmax, double x) {
  if (!(x > 0) || lmax < 0) throw Error(Errc::invalid_argument, "sph_bessel_y_all needs x > 0, lmax >= 0");
  std::vector<double> y(std::size_t(lmax) + 1);
  y[0] = -std::cos(x) / x;
  if (lmax >= 1) y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int l = 1; l < lmax; ++l)
    y[std::size_t(l) + 1] = double(2 * l + 1) / x * y[std::size_t(l)] - y[std::size_t(l) - 1];
  return y;
}

std::vector<double> legendre_all(int lmax, double x) {
  std::vector<double> p(std::size_t(std::max(lmax, 1)) + 1);
  p[0] = 1.0;
  p[1] = x;
  for (int l = 1; l < lmax; ++l)
    p[std::size_t(l) + 1] = (double(2 * l + 1) * x * p[std::size_t(l)] - double(l) * p[std::size_t(l) - 1]) / double(l + 1);
  p.resize(std::size_t(lmax) + 1);
  return p;
}

double square_well_s_wave(double s, double a, double k) {
  if (!(k > 0) || !(a > 0)) throw Error(Errc::invalid_argument, "square_well_s_wave needs k, a > 0");
  double q2 = k * k - s;
  double t;  // tan(delta + k a)
  if (q2 > 0) {
    double q = std::sqrt(q2);
    t = k / q * std::tan(q * a);
  } else if (q2 == 0) {
    t = k * a;
  } else {
    double q = std::sqrt(-q2);
    t = k / q * std::tanh(q * a);
  }
  double d = std::atan(t) - k * a;
  d = std::remainder(d, pi);  // [-pi/2, pi/2]
  if (d <= -pi / 2) d += pi;
  return d;
}

double phase_shift(const CentralPotential& pot, double k, int l, double h) {
  if (!(k > 0)) throw Error(Errc::invalid_argument, "k must be positive");
  if (l < 0) throw Error(Errc::invalid_argument, "l must be >= 0");
  if (!(h > 0)) throw Error(Errc::invalid_argument, "radial step must be positive");
  const double a = pot.cutoff;
  if (!(a > 0)) return 0.0;
  const double L = double(l) * double(l + 1);
  const double k2 = k * k;

  // series start r^(l+1) sum c_2m r^2m with V taken as V(r_start) near the origin
  double r0 = std::min(0.5 * a, std::max(h, 0.1 * double(l + 1)));
  double v0 = pot.v(r0);
  double e = v0 - k2;
  double u = 0, du = 0, c = 1.0;
  for (int m = 0; m < 400; ++m) {
    if (m > 0) c *= e / (double(2 * m) * double(2 * m + 2 * l + 1));
    double pw = std::pow(r0, 2 * m);
    double tu = c * pw, tdu = c * double(2 * m + l + 1) * pw / r0;
    u += tu;
    du += tdu;
    if (m > 2 && std::abs(tu) < 1e-18 * std::abs(u) && std::abs(tdu) < 1e-18 * std::abs(du)) break;
  }
  // u now carries an overall factor r0^-(l+1), harmless for a log derivative

  long n = std::max(1L, long(std::ceil((a - r0) / h)));
  double step = (a - r0) / double(n);
  auto rhs = [&](double r, double vr, double uu) { return (L / (r * r) + vr - k2) * uu; };
  for (long i = 0; i < n; ++i) {
    double ra = r0 + double(i) * step;
    double rb = i + 1 == n ? a : r0 + double(i + 1) * step;
    double rm = 0.5 * (ra + rb);
    // one-sided samples keep a jump at a step end outside the step
    double va = pot.v(std::nextafter(ra, rb)), vm = pot.v(rm), vb = pot.v(std::nextafter(rb, ra));
    double k1u = du, k1v = rhs(ra, va, u);
    double k2u = du + 0.5 * step * k1v, k2v = rhs(rm, vm, u + 0.5 * step * k1u);
    double k3u = du + 0.5 * step * k2v, k3v = rhs(rm, vm, u + 0.5 * step * k2u);
    double k4u = du + step * k3v, k4v = rhs(rb, vb, u + step * k3u);
    u += step / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    du += step / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    double m = std::max(std::abs(u), std::abs(du));
    if (m > 1e200) {
      u /= m;
      du /= m;
    }
  }
  auto j = sph_bessel_j_all(l + 1, k * a);
  auto y = sph_bessel_y_all(l + 1, k * a);
  auto deriv = [&](const std::vector<double>& f) {
    // f_l' = f_{l-1} - (l+1)/x f_l; f_0' = -f_1
    double x = k * a;
    return l == 0 ? -f[1] : f[std::size_t(l) - 1] - double(l + 1) / x * f[std::size_t(l)];
  };
  double jl = j[std::size_t(l)], yl = y[std::size_t(l)];
  double jd = deriv(j), yd = deriv(y);
  // gamma = u'/u - 1/a, multiplied through by u
  double g = du - u / a;
  double num = k * jd * u - g * jl;
  double den = k * yd * u - g * yl;
  double d = std::atan2(num, den);
  d = std::remainder(d, pi);
  if (d <= -pi / 2) d += pi;
  return d;
}

PartialWaveSolution phase_shifts(const CentralPotential& pot, double k, const OracleOptions& opt) {
  if (!(k > 0)) throw Error(Errc::invalid_argument, "k must be positive");
  PartialWaveSolution sol;
  sol.k = k;
  if (opt.lmax_override >= 0) {
    sol.lmax = opt.lmax_override;
    for (int l = 0; l <= sol.lmax; ++l) sol.delta.push_back(phase_shift(pot, k, l, opt.radial_step));
    return sol;
  }
  int lmax = int(std::ceil(k * pot.cutoff)) + 12;
  for (int l = 0; l <= lmax; ++l) sol.delta.push_back(phase_shift(pot, k, l, opt.radial_step));
  while (std::abs(sol.delta.back()) > opt.tail_tol) {
    if (lmax >= opt.lmax_cap)
      throw Error(Errc::non_convergent, "phase shifts not converged at l = " + std::to_string(lmax) +
                                            " (|delta| = " + std::to_string(std::abs(sol.delta.back())) + ")");
    ++lmax;
    sol.delta.push_back(phase_shift(pot, k, lmax, opt.radial_step));
  }
  sol.lmax = lmax;
  return sol;
}

cplx PartialWaveSolution::amplitude(double theta) const {
  auto P = legendre_all(lmax, std::cos(theta));
  cplx f = 0;
  for (int l = 0; l <= lmax; ++l) {
    double d = delta[std::size_t(l)];
    f += double(2 * l + 1) * std::polar(std::sin(d), d) * P[std::size_t(l)];
  }
  return f / k;
}

double PartialWaveSolution::total_cross_section() const {
  double s = 0;
  for (int l = 0; l <= lmax; ++l) {
    double sd = std::sin(delta[std::size_t(l)]);
    s += double(2 * l + 1) * sd * sd;
  }
  return 4 * pi / (k * k) * s;
}

std::vector<double> differential_cross_section(const PartialWaveSolution& sol,
                                               const std::vector<double>& theta) {
  std::vector<double> out;
  out.reserve(theta.size());
  for (double t : theta) out.push_back(sol.dcs(t));
  return out;
}

double scattering_angle(const Vec3& d, const Vec3& kh) {
  double nd = std::hypot(d[0], d[1], d[2]), nk = std::hypot(kh[0], kh[1], kh[2]);
  double c = (d[0] * kh[0] + d[1] * kh[1] + d[2] * kh[2]) / (nd * nk);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

void write_dcs_csv(const std::string& path, const std::vector<double>& gamma_deg,
                   const std::vector<double>& dcs) {
  if (gamma_deg.size() != dcs.size()) throw Error(Errc::shape_mismatch, "gamma and dcs lengths differ");
  std::ofstream o(path);
  if (!o) throw Error(Errc::io_error, "cannot write " + path);
  o << "gamma_deg,dsigma_domega\n" << std::scientific << std::setprecision(16);
  for (std::size_t i = 0; i < dcs.size(); ++i) o << gamma_deg[i] << "," << dcs[i] << "\n";
}

}  // namespace qscat
