#include "qscat/source.hpp"

#include <cmath>

#include "qscat/stability.hpp"

namespace qscat {

IncidentDirection IncidentDirection::from_degrees(double theta, double phi) {
  if (!(theta >= 0.0 && theta <= 180.0) || !(phi >= 0.0 && phi < 360.0))
    throw Error(Errc::out_of_range, "incidence angles need 0<=theta<=180, 0<=phi<360");
  IncidentDirection d;
  d.theta_deg = theta;
  d.phi_deg = phi;
  double t = theta * pi / 180.0, p = phi * pi / 180.0;
  d.khat = {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
  // exact zeros on the axes keep d exactly grid-aligned for axis incidence
  for (auto& c : d.khat)
    if (std::abs(c) < 1e-15) c = 0.0;
  return d;
}

Idx3 contact_corner(const IncidentDirection& dir, const IndexBounds& b) {
  double th = dir.theta_deg, ph = dir.phi_deg;
  if (!(th >= 0.0 && th <= 180.0) || !(ph >= 0.0 && ph < 360.0))
    throw Error(Errc::out_of_range, "incidence angles need 0<=theta<=180, 0<=phi<360");
  long k = th <= 90.0 ? b.k0 : b.k1;
  if (ph <= 90.0) return {b.i0, b.j0, k};
  if (ph <= 180.0) return {b.i1, b.j0, k};
  if (ph <= 270.0) return {b.i1, b.j1, k};
  return {b.i0, b.j1, k};
}

double project_distance(const Idx3& idx, const Idx3& o, const Vec3& h, const IncidentDirection& dir) {
  return double(idx[0] - o[0]) * h[0] * dir.khat[0] + double(idx[1] - o[1]) * h[1] * dir.khat[1] +
         double(idx[2] - o[2]) * h[2] * dir.khat[2];
}

cplx gaussian_packet(const GaussianPulse& p, double d, double tau) {
  const cplx I(0, 1);
  double s2 = p.width * p.width;
  cplx w = s2 + 2.0 * I * tau;
  double x = d - p.center - 2.0 * p.k0 * tau;
  return std::sqrt(s2 / w) * std::exp(-x * x / (2.0 * w) + I * (p.k0 * d - p.k0 * p.k0 * tau));
}

double pulse_center_for_width(double width) {
  return -width * std::sqrt(2.0 * std::log(1e6));
}

std::size_t pulsed_lattice_size(double diagonal, double run_tau, const GaussianPulse& p,
                                double spacing) {
  double vmax = 2.0 * (std::abs(p.k0) + 6.0 / p.width);
  double behind = std::abs(std::min(p.center, 0.0)) + 8.0 * p.width;
  auto n = std::size_t(std::ceil((1.5 * (diagonal + run_tau * vmax) + behind) / spacing));
  return n + (n % 2);
}

IncidentSource1D IncidentSource1D::sinusoidal(const IncidentDirection& dir, double dtau) {
  IncidentSource1D s;
  s.mode_ = IncidentMode::sinusoidal;
  s.dir_ = dir;
  s.dtau_ = dtau;
  s.eta_ = phase_eta(dtau);
  return s;
}

IncidentSource1D IncidentSource1D::pulsed(const IncidentDirection& dir, double dtau, double spacing,
                                          std::size_t n, double d_start, const GaussianPulse& pulse,
                                          bool use_eta, int far_abc_grids) {
  std::vector<cplx> l0(n), l1(n);
  for (std::size_t m = 0; m < n; ++m) {
    double d = d_start + double(m) * spacing;
    l0[m] = gaussian_packet(pulse, d, 0.0);
    l1[m] = gaussian_packet(pulse, d, dtau);
  }
  return pulsed_from_samples(dir, dtau, spacing, d_start, std::move(l0), std::move(l1), use_eta,
                             far_abc_grids);
}

IncidentSource1D IncidentSource1D::pulsed_from_samples(const IncidentDirection& dir, double dtau,
                                                       double spacing, double d_start,
                                                       std::vector<cplx> level0,
                                                       std::vector<cplx> level1, bool use_eta,
                                                       int far_abc_grids) {
  if (level0.size() != level1.size() || level0.size() < 4)
    throw Error(Errc::invalid_argument, "1D source levels must have equal length >= 4");
  if (!(spacing > 0)) throw Error(Errc::invalid_argument, "1D spacing must be positive");
  IncidentSource1D s;
  s.mode_ = IncidentMode::pulsed;
  s.dir_ = dir;
  s.dtau_ = dtau;
  s.eta_ = use_eta ? phase_eta(dtau) : 1.0;
  s.spacing_ = spacing;
  s.d_start_ = d_start;
  s.prev_ = std::move(level0);
  s.cur_ = std::move(level1);
  s.level_ = 1;
  s.init_pulsed(far_abc_grids);
  return s;
}

void IncidentSource1D::init_pulsed(int far_abc_grids) {
  std::size_t n = cur_.size();
  plan_ = std::make_shared<fft::LinePlans>(n, 1);
  kappa_.resize(n);
  for (std::size_t l = 0; l < n; ++l)
    kappa_[l] = 2.0 * pi * double(fft::signed_index(l, n)) / (double(n) * spacing_);
  mask_.assign(n, 1.0);
  if (far_abc_grids > 0) {
    // Poschl-Teller profile measured from the far end, decayed by e^-8 at the layer's inner edge
    double alpha = 4.0 / far_abc_grids;
    for (std::size_t m = 0; m < n; ++m) {
      double d = double(n - 1 - m);
      if (d >= far_abc_grids) continue;
      double c = std::cosh(alpha * d);
      mask_[m] = std::exp(-5.0 / (c * c) * dtau_);
    }
  }
  norm0_ = norm(level_);
  refresh_spectra();
}

void IncidentSource1D::refresh_spectra() {
  std::size_t n = cur_.size();
  auto buf = fft::make_buffer(n);
  auto spectrum = [&](const std::vector<cplx>& src, std::vector<cplx>& spec, std::vector<cplx>& der) {
    std::copy(src.begin(), src.end(), buf.get());
    plan_->forward(buf.get());
    spec.assign(buf.get(), buf.get() + n);
    for (std::size_t l = 0; l < n; ++l) {
      bool nyq = (n % 2 == 0) && l == n / 2;
      buf[l] = nyq ? 0.0 : buf[l] * cplx(0, kappa_[l]) / double(n);
    }
    plan_->backward(buf.get());
    der.assign(buf.get(), buf.get() + n);
  };
  spectrum(prev_, spec_prev_, der_prev_);
  spectrum(cur_, spec_cur_, der_cur_);
}

const std::vector<cplx>& IncidentSource1D::samples(long n) const {
  if (n == level_) return cur_;
  if (n == level_ - 1) return prev_;
  throw Error(Errc::out_of_range, "1D source holds levels " + std::to_string(level_ - 1) + ", " +
                                      std::to_string(level_) + " only");
}

double IncidentSource1D::norm(long n) const {
  const auto& v = samples(n);
  double s = 0;
  for (auto& x : v) s += std::norm(x);
  return std::sqrt(s * spacing_);
}

std::pair<cplx, cplx> IncidentSource1D::eval_1d(double d, long n) const {
  const cplx I(0, 1);
  if (mode_ == IncidentMode::sinusoidal) {
    cplx v = std::exp(I * (d - double(n) * dtau_));
    return {v, I * v};
  }
  if (n != level_ && n != level_ - 1)
    throw Error(Errc::out_of_range, "1D source holds levels " + std::to_string(level_ - 1) + ", " +
                                        std::to_string(level_) + " only");
  std::size_t N = cur_.size();
  double x = (d - d_start_) / spacing_;
  if (!(x >= -1e-9 && x <= double(N - 1) + 1e-9))
    throw Error(Errc::out_of_range, "d = " + std::to_string(d) + " outside the 1D lattice");
  bool is_cur = n == level_;
  if (interp_ == Interp::nearest) {
    auto m = std::size_t(std::lround(std::clamp(x, 0.0, double(N - 1))));
    return {(is_cur ? cur_ : prev_)[m], (is_cur ? der_cur_ : der_prev_)[m]};
  }
  const auto& F = is_cur ? spec_cur_ : spec_prev_;
  // sum over signed l of F_l exp(i 2 pi l x / N); phasor rotation re-anchored every 32 terms
  cplx val = 0, der = 0;
  double theta = 2.0 * pi * x / double(N);
  cplx rot = std::polar(1.0, theta);
  long lmin = -long(N / 2), lmax = long(N) - long(N / 2) - 1;
  cplx e = 0;
  for (long l = lmin; l <= lmax; ++l) {
    if ((l - lmin) % 32 == 0)
      e = std::polar(1.0, theta * double(l));
    else
      e *= rot;
    std::size_t idx = std::size_t(l < 0 ? l + long(N) : l);
    cplx t = F[idx] * e;
    val += t;
    if (!(N % 2 == 0 && l == lmin)) der += kappa_[idx] * t;
  }
  return {val / double(N), I * der / double(N)};
}

IncidentSample IncidentSource1D::eval(double d, long n) const {
  auto [v, dv] = eval_1d(d, n);
  return {v, {dir_.khat[0] * dv, dir_.khat[1] * dv, dir_.khat[2] * dv}};
}

void IncidentSource1D::step() {
  if (mode_ != IncidentMode::pulsed) {
    ++level_;
    return;
  }
  std::size_t N = cur_.size();
  auto buf = fft::make_buffer(N);
  std::copy(cur_.begin(), cur_.end(), buf.get());
  plan_->forward(buf.get());
  for (std::size_t l = 0; l < N; ++l) buf[l] *= -kappa_[l] * kappa_[l] / double(N);
  plan_->backward(buf.get());
  const cplx c(0, 2.0 * eta_ * dtau_);
  for (std::size_t m = 0; m < N; ++m) prev_[m] = mask_[m] * (prev_[m] + c * buf[m]);
  std::swap(prev_, cur_);
  ++level_;
  double nrm = norm(level_);
  if (!std::isfinite(nrm) || nrm > growth_limit_ * std::max(norm0_, 1e-300))
    throw Error(Errc::instability, "1D incident source norm grew from " + std::to_string(norm0_) +
                                       " to " + std::to_string(nrm) + " at step " +
                                       std::to_string(level_));
  refresh_spectra();
}

std::pair<double, double> recursive_sinusoid(long n, double dtau) {
  if (n < 0) throw Error(Errc::invalid_argument, "negative step index");
  RecursiveSinusoid r(dtau);
  for (long i = 0; i < n; ++i) r.advance();
  return {r.sin(), r.cos()};
}

}  // namespace qscat
