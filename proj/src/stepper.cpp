#include "qscat/stepper.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <map>

namespace qscat {

// ---------------- stability ----------------

double stencil_factor_f(double delta) {
  double s2 = std::sin(delta / 2);
  s2 *= s2;
  double s4 = s2 * s2, s6 = s4 * s2, s8 = s4 * s4;
  return 16.0 / 35.0 * s8 + 32.0 / 45.0 * s6 + 4.0 / 3.0 * s4 + 4.0 * s2;
}

static double inv_sq_sum(const Vec3& h) {
  double s = 0;
  for (double x : h) {
    if (!(x > 0)) throw Error(Errc::invalid_argument, "spacing must be positive");
    if (std::isfinite(x)) s += 1.0 / (x * x);
  }
  return s;
}

double stability_dtau_fdtd(const Vec3& h, double vmax) {
  if (vmax < 0) throw Error(Errc::invalid_argument, "vmax must be >= 0");
  return 1.0 / (2048.0 / 315.0 * inv_sq_sum(h) + vmax);
}

double stability_dtau_pstd(const Vec3& h, double vmax) {
  if (vmax < 0) throw Error(Errc::invalid_argument, "vmax must be >= 0");
  return 1.0 / (pi * pi * inv_sq_sum(h) + vmax);
}

double phase_eta(double dtau) {
  if (!(dtau > 0 && dtau < pi)) throw Error(Errc::out_of_range, "phase_eta needs 0 < dtau < pi");
  return std::sin(dtau) / dtau;
}

// ---------------- spectral Laplacian ----------------

SpectralLaplacian::SpectralLaplacian(const std::array<std::size_t, 3>& n, const Vec3& h) : n_(n) {
  for (int a = 0; a < 3; ++a) {
    Axis& A = ax_[std::size_t(a)];
    A.n = n[a];
    A.active = n[a] > 1;
    if (!A.active) continue;
    A.factor.resize(A.n);
    for (std::size_t l = 0; l < A.n; ++l) {
      double k = 2 * pi * double(fft::signed_index(l, A.n)) / (double(A.n) * h[a]);
      A.factor[l] = -k * k / double(A.n);
    }
    // lines across the contiguous axis are gathered side by side
    A.batch = std::make_unique<fft::LinePlans>(A.n, lines_per_batch, a != 2);
    A.single = std::make_unique<fft::LinePlans>(A.n, 1);
  }
}

namespace {
// transverse (slow, fast) axes for lines along a
inline std::pair<int, int> transverse(int a) {
  return a == 0 ? std::pair{1, 2} : (a == 1 ? std::pair{0, 2} : std::pair{0, 1});
}
}  // namespace

void SpectralLaplacian::axis_pass(int a, const CField& in, CField& out, const Box3& box,
                                  bool accumulate) const {
  const Axis& A = ax_[std::size_t(a)];
  const std::size_t n = A.n, B = lines_per_batch;
  auto [s, f] = transverse(a);
  const std::size_t st_a = in.stride(a), st_s = in.stride(s), st_f = in.stride(f);
  const long us = box.hi[s] - box.lo[s];
  const long vf = box.hi[f] - box.lo[f];
  if (us <= 0 || vf <= 0) return;
  const long chunks = (vf + long(B) - 1) / long(B);
  const long nbatch = us * chunks;
  const cplx* src = in.data();
  cplx* dst = out.data();
  const long l0 = box.lo[a], l1 = box.hi[a];
#pragma omp parallel
  {
    auto buf = fft::make_buffer(n * B);
#pragma omp for schedule(static)
    for (long bi = 0; bi < nbatch; ++bi) {
      long u = box.lo[s] + bi / chunks;
      long v0 = box.lo[f] + (bi % chunks) * long(B);
      std::size_t cnt = std::size_t(std::min<long>(long(B), box.hi[f] - v0));
      std::size_t base = std::size_t(u) * st_s + std::size_t(v0) * st_f;
      cplx* w = buf.get();
      if (st_f == 1) {
        // interleaved: element l of line b at l * B + b
        if (cnt < B) std::fill(w, w + n * B, cplx(0));
        for (std::size_t l = 0; l < n; ++l) std::copy_n(src + base + l * st_a, cnt, w + l * B);
        A.batch->forward(w);
        for (std::size_t l = 0; l < n; ++l) {
          const double fl = A.factor[l];
          for (std::size_t b = 0; b < cnt; ++b) w[l * B + b] *= fl;
        }
        A.batch->backward(w);
        for (long l = l0; l < l1; ++l) {
          cplx* p = dst + base + std::size_t(l) * st_a;
          const cplx* q = w + std::size_t(l) * B;
          if (accumulate)
            for (std::size_t b = 0; b < cnt; ++b) p[b] += q[b];
          else
            std::copy_n(q, cnt, p);
        }
      } else {
        if (cnt < B) std::fill(w + cnt * n, w + n * B, cplx(0));
        for (std::size_t b = 0; b < cnt; ++b) {
          const cplx* p = src + base + b * st_f;
          for (std::size_t l = 0; l < n; ++l) w[b * n + l] = p[l * st_a];
        }
        A.batch->forward(w);
        for (std::size_t b = 0; b < cnt; ++b)
          for (std::size_t l = 0; l < n; ++l) w[b * n + l] *= A.factor[l];
        A.batch->backward(w);
        for (std::size_t b = 0; b < cnt; ++b) {
          cplx* p = dst + base + b * st_f;
          const cplx* q = w + b * n;
          if (accumulate)
            for (long l = l0; l < l1; ++l) p[std::size_t(l) * st_a] += q[l];
          else
            for (long l = l0; l < l1; ++l) p[std::size_t(l) * st_a] = q[l];
        }
      }
    }
  }
}

void SpectralLaplacian::apply(const CField& in, CField& out) const {
  apply(in, out, Box3::full(n_));
}

void SpectralLaplacian::apply(const CField& in, CField& out, const Box3& box) const {
  if (in.shape() != n_ || out.shape() != n_) throw Error(Errc::shape_mismatch, "laplacian shape");
  bool first = true;
  for (int a = 0; a < 3; ++a) {
    if (!ax_[std::size_t(a)].active) continue;
    axis_pass(a, in, out, box, !first);
    first = false;
  }
  if (first)
    for (long i = box.lo[0]; i < box.hi[0]; ++i)
      for (long j = box.lo[1]; j < box.hi[1]; ++j)
        for (long k = box.lo[2]; k < box.hi[2]; ++k) out(i, j, k) = 0.0;
}

void SpectralLaplacian::apply_serial(const CField& in, CField& out) const {
  if (in.shape() != n_ || out.shape() != n_) throw Error(Errc::shape_mismatch, "laplacian shape");
  out.fill(0.0);
  for (int a = 0; a < 3; ++a) {
    const Axis& A = ax_[std::size_t(a)];
    if (!A.active) continue;
    auto buf = fft::make_buffer(A.n);
    auto [s, f] = transverse(a);
    for (std::size_t u = 0; u < n_[s]; ++u)
      for (std::size_t v = 0; v < n_[f]; ++v) {
        std::size_t base = u * in.stride(s) + v * in.stride(f);
        for (std::size_t l = 0; l < A.n; ++l) buf[l] = in[base + l * in.stride(a)];
        A.single->forward(buf.get());
        for (std::size_t l = 0; l < A.n; ++l) buf[l] *= A.factor[l];
        A.single->backward(buf.get());
        for (std::size_t l = 0; l < A.n; ++l) out[base + l * in.stride(a)] += buf[l];
      }
  }
}

CField laplacian_pstd(const CField& f, const Vec3& h) {
  SpectralLaplacian L(f.shape(), h);
  CField out(f.shape());
  L.apply(f, out);
  return out;
}

CField laplacian_pstd_serial(const CField& f, const Vec3& h) {
  SpectralLaplacian L(f.shape(), h);
  CField out(f.shape());
  L.apply_serial(f, out);
  return out;
}

// ---------------- 8th-order stencil ----------------

namespace {
template <bool Parallel>
void stencil_impl(const CField& in, CField& out, const Vec3& h) {
  if (!in.same_shape(out)) throw Error(Errc::shape_mismatch, "laplacian shape");
  auto n = in.shape();
  const auto& al = StencilCoefficients::alpha;
  std::array<std::vector<std::array<std::size_t, 9>>, 3> nb;  // wrapped offsets -4..4
  for (int a = 0; a < 3; ++a) {
    nb[a].resize(n[a]);
    for (std::size_t i = 0; i < n[a]; ++i)
      for (int l = -4; l <= 4; ++l)
        nb[a][i][std::size_t(l + 4)] = std::size_t((long(i) + l + 4 * long(n[a])) % long(n[a]));
  }
  double w[3];
  for (int a = 0; a < 3; ++a) w[a] = n[a] > 1 ? 1.0 / (h[a] * h[a]) : 0.0;
  auto body = [&](std::size_t i) {
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        cplx c = in(i, j, k);
        cplx acc = 0;
        if (w[0] != 0) {
          cplx s = al[0] * c;
          for (int l = 1; l <= 4; ++l)
            s += al[l] * (in(nb[0][i][4 + l], j, k) + in(nb[0][i][4 - l], j, k));
          acc += w[0] * s;
        }
        if (w[1] != 0) {
          cplx s = al[0] * c;
          for (int l = 1; l <= 4; ++l)
            s += al[l] * (in(i, nb[1][j][4 + l], k) + in(i, nb[1][j][4 - l], k));
          acc += w[1] * s;
        }
        if (w[2] != 0) {
          cplx s = al[0] * c;
          for (int l = 1; l <= 4; ++l)
            s += al[l] * (in(i, j, nb[2][k][4 + l]) + in(i, j, nb[2][k][4 - l]));
          acc += w[2] * s;
        }
        out(i, j, k) = acc;
      }
  };
  if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < n[0]; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < n[0]; ++i) body(i);
  }
}
}  // namespace

void laplacian_fdtd(const CField& in, CField& out, const Vec3& h) { stencil_impl<true>(in, out, h); }
void laplacian_fdtd_serial(const CField& in, CField& out, const Vec3& h) {
  stencil_impl<false>(in, out, h);
}
CField laplacian_fdtd(const CField& f, const Vec3& h) {
  CField out(f.shape());
  laplacian_fdtd(f, out, h);
  return out;
}

// ---------------- stepper ----------------

namespace {
Vec3 effective_spacing(const GridSpec& g) {
  Vec3 h;
  for (int a = 0; a < 3; ++a) h[a] = g.active(a) ? g.spacing[a] : INFINITY;
  return h;
}
}  // namespace

Stepper::Stepper(const ModelGeometry& g, const AbsorberMask& mask, const PotentialSpec& v,
                 IncidentSource1D* src, const StepperOptions& opt)
    : geom_(g), opt_(opt), pot_(v), src_(src) {
  if (opt.kind != g.kind) throw Error(Errc::invalid_argument, "stepper kind differs from geometry");
  if (mask.n != g.grid.n) throw Error(Errc::shape_mismatch, "absorber mask vs lattice");
  dtau_ = g.grid.dtau;
  Vec3 h = effective_spacing(g.grid);
  double vmax = pot_.empty() ? 0.0 : pot_.vmax;
  bound_ = opt.kind == StepperKind::pstd ? stability_dtau_pstd(h, vmax) : stability_dtau_fdtd(h, vmax);
  if (opt.enforce_stability_bound && dtau_ > bound_)
    throw Error(Errc::invalid_argument, "dtau " + std::to_string(dtau_) +
                                            " exceeds the stability bound " + std::to_string(bound_));
  eta_ = opt.monochromatic_eta ? phase_eta(dtau_) : 1.0;
  if (src_ && std::abs(src_->dtau() - dtau_) > 1e-15 * dtau_)
    throw Error(Errc::invalid_argument, "source and lattice must share dtau");
  taper_ = build_zeta(g);
  if (src_) origin_ = contact_corner(src_->direction(), incident_bounds(g));

  Topology topo = opt.topology;
  if (opt.kind == StepperKind::fdtd && topo.count() != 1)
    throw Error(Errc::invalid_argument, "FDTD stepper runs on a single domain");
  weights_ = HaloWeights::make(topo.n_t);
  auto subs = decompose(g.grid.n, topo);

  SourcePlan plan;
  if (src_ && opt.kind == StepperKind::pstd) plan = build_source_plan(taper_, g, src_->direction(), origin_);
  if (src_ && opt.kind == StepperKind::fdtd)
    fdtd_plan_ = build_fdtd_plan(g, src_->direction(), origin_, 2.0 * eta_ * dtau_);

  auto gn = g.grid.n;
  for (const Subdomain& sd : subs) {
    Block b;
    b.sd = sd;
    b.state = WaveField(sd.local_n);
    b.work = CField(sd.local_n);
    for (int a = 0; a < 3; ++a) {
      b.core.lo[a] = sd.halo_lo[a];
      b.core.hi[a] = sd.halo_lo[a] + (sd.core_hi[a] - sd.core_lo[a]);
      b.gamma[a].resize(sd.local_n[a]);
      for (std::size_t l = 0; l < sd.local_n[a]; ++l)
        b.gamma[a][l] = mask.axis[a][std::size_t(sd.to_global(a, long(l)))];
    }
    auto local_flat = [&](long i, long j, long k) {
      return (std::size_t(sd.to_local(0, i)) * sd.local_n[1] + std::size_t(sd.to_local(1, j))) *
                 sd.local_n[2] +
             std::size_t(sd.to_local(2, k));
    };
    if (!pot_.empty()) {
      for (long i = sd.core_lo[0]; i < sd.core_hi[0]; ++i)
        for (long j = sd.core_lo[1]; j < sd.core_hi[1]; ++j)
          for (long k = sd.core_lo[2]; k < sd.core_hi[2]; ++k) {
            Vec3 r = g.grid.position(i, j, k);
            bool tf = g.in_tf(i, j, k);
            double val = pot_.v(r, 0.0);
            if (!tf) {
              if (val != 0.0)
                throw Error(Errc::potential_support_violation,
                            "V nonzero outside the TF at grid (" + std::to_string(i) + "," +
                                std::to_string(j) + "," + std::to_string(k) + ")");
              continue;
            }
            if (val == 0.0 && !pot_.time_dependent) continue;
            b.v_flat.push_back(local_flat(i, j, k));
            b.v_val.push_back(val);
            b.v_pos.push_back(r);
          }
    }
    for (std::size_t e = 0; e < plan.size(); ++e) {
      const Idx3& x = plan.idx[e];
      if (!sd.owns(x[0], x[1], x[2])) continue;
      b.s_flat.push_back(local_flat(x[0], x[1], x[2]));
      b.s0.push_back(plan.s0[e]);
      b.s_d.push_back(plan.d[e]);
      b.s_lap.push_back(plan.lap[e]);
      b.s_kgrad.push_back(plan.kgrad[e]);
    }
    blocks_.push_back(std::move(b));
    if (opt.kind == StepperKind::pstd)
      lap_.push_back(std::make_unique<SpectralLaplacian>(sd.local_n, g.grid.spacing));
  }
  (void)gn;
}

std::vector<Subdomain> Stepper::subdomains() const {
  std::vector<Subdomain> s;
  for (auto& b : blocks_) s.push_back(b.sd);
  return s;
}

void Stepper::exchange() {
  if (blocks_.size() < 2) return;
  std::vector<CField*> f;
  for (auto& b : blocks_) f.push_back(&b.state.cur);
  auto subs = subdomains();
  exchange_and_weight(subs, f, weights_);
}

void Stepper::initialize() {
  for (auto& b : blocks_) {
    b.state.prev.fill(0.0);
    b.state.cur.fill(0.0);
  }
  n_ = 1;
  bool warm = opt_.start == StartMode::warm && src_ && src_->mode() == IncidentMode::sinusoidal;
  if (warm) {
    const cplx I(0, 1);
    for (auto& b : blocks_) {
      const Subdomain& sd = b.sd;
      for (long i = sd.core_lo[0]; i < sd.core_hi[0]; ++i)
        for (long j = sd.core_lo[1]; j < sd.core_hi[1]; ++j)
          for (long k = sd.core_lo[2]; k < sd.core_hi[2]; ++k) {
            double w;
            if (opt_.kind == StepperKind::pstd)
              w = taper_.zeta(std::size_t(i), std::size_t(j), std::size_t(k));
            else
              w = geom_.holds_total(i, j, k) ? 1.0 : 0.0;
            if (w == 0.0) continue;
            double d = project_distance({i, j, k}, origin_, geom_.grid.spacing, src_->direction());
            auto li = std::size_t(sd.to_local(0, i)), lj = std::size_t(sd.to_local(1, j)),
                 lk = std::size_t(sd.to_local(2, k));
            b.state.prev(li, lj, lk) = w * std::exp(I * d);
            b.state.cur(li, lj, lk) = w * std::exp(I * (d - dtau_));
          }
    }
  }
  for (auto& b : blocks_) b.state.n = n_;
  exchange();
}

void Stepper::set_state(const CField& prev, const CField& cur, long n) {
  if (prev.shape() != geom_.grid.n || cur.shape() != geom_.grid.n)
    throw Error(Errc::shape_mismatch, "state vs lattice");
  auto subs = subdomains();
  std::vector<CField*> p, c;
  for (auto& b : blocks_) {
    p.push_back(&b.state.prev);
    c.push_back(&b.state.cur);
  }
  scatter_global(subs, prev, p);
  scatter_global(subs, cur, c);
  n_ = n;
  for (auto& b : blocks_) b.state.n = n;
  exchange();
}

CField Stepper::gather_cur() const {
  std::vector<const CField*> f;
  for (auto& b : blocks_) f.push_back(&b.state.cur);
  return gather_global(subdomains(), f, geom_.grid.n);
}

CField Stepper::gather_prev() const {
  std::vector<const CField*> f;
  for (auto& b : blocks_) f.push_back(&b.state.prev);
  return gather_global(subdomains(), f, geom_.grid.n);
}

double Stepper::core_norm() const {
  double s = 0;
  for (auto& b : blocks_)
    for (long i = b.core.lo[0]; i < b.core.hi[0]; ++i)
      for (long j = b.core.lo[1]; j < b.core.hi[1]; ++j)
        for (long k = b.core.lo[2]; k < b.core.hi[2]; ++k) s += std::norm(b.state.cur(i, j, k));
  return std::sqrt(s);
}

double Stepper::ramp() const {
  if (opt_.potential_ramp_periods <= 0) return 1.0;
  return std::min(1.0, tau() / (2 * pi * opt_.potential_ramp_periods));
}

void Stepper::refresh_time_dependent_potential() {
  if (pot_.empty() || !pot_.time_dependent) return;
  for (auto& b : blocks_)
    for (std::size_t e = 0; e < b.v_flat.size(); ++e) b.v_val[e] = pot_.v(b.v_pos[e], tau());
}

void Stepper::check_finite(const Block& b, double sum) const {
  if (std::isfinite(sum)) return;
  for (long i = b.core.lo[0]; i < b.core.hi[0]; ++i)
    for (long j = b.core.lo[1]; j < b.core.hi[1]; ++j)
      for (long k = b.core.lo[2]; k < b.core.hi[2]; ++k) {
        cplx x = b.state.cur(i, j, k);
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
          throw Error(Errc::instability,
                      "non-finite field at step " + std::to_string(n_) + ", grid (" +
                          std::to_string(b.sd.to_global(0, i)) + "," +
                          std::to_string(b.sd.to_global(1, j)) + "," +
                          std::to_string(b.sd.to_global(2, k)) + ")");
      }
  throw Error(Errc::instability, "non-finite norm at step " + std::to_string(n_));
}

void Stepper::step() {
  if (src_ && src_->mode() == IncidentMode::pulsed && src_->level() != n_)
    throw Error(Errc::invalid_argument, "1D source level out of step with the lattice");
  refresh_time_dependent_potential();
  if (opt_.kind == StepperKind::pstd)
    step_pstd();
  else
    step_fdtd();
  ++n_;
  for (auto& b : blocks_) b.state.n = n_;
  if (src_) src_->step();
  exchange();
}

namespace {
// new = Gamma (prev + ck * work) over the core, written into prev; returns sum |new|^2
double dense_update(Block& b, cplx ck, bool parallel) {
  double sum = 0;
  const Box3& c = b.core;
  auto& prev = b.state.prev;
  const auto& work = b.work;
  const auto& g = b.gamma;
  auto row = [&](long i, long j) {
    double gij = g[0][std::size_t(i)] * g[1][std::size_t(j)];
    std::size_t base = prev.flat(std::size_t(i), std::size_t(j), 0);
    double s = 0;
    for (long k = c.lo[2]; k < c.hi[2]; ++k) {
      std::size_t f = base + std::size_t(k);
      cplx x = gij * g[2][std::size_t(k)] * (prev[f] + ck * work[f]);
      prev[f] = x;
      s += std::norm(x);
    }
    return s;
  };
  if (parallel) {
#pragma omp parallel for collapse(2) reduction(+ : sum) schedule(static)
    for (long i = c.lo[0]; i < c.hi[0]; ++i)
      for (long j = c.lo[1]; j < c.hi[1]; ++j) sum += row(i, j);
  } else {
    for (long i = c.lo[0]; i < c.hi[0]; ++i)
      for (long j = c.lo[1]; j < c.hi[1]; ++j) sum += row(i, j);
  }
  return sum;
}

inline double gamma_at(const Block& b, std::size_t f) {
  auto ijk = b.state.prev.unflat(f);
  return b.gamma[0][ijk[0]] * b.gamma[1][ijk[1]] * b.gamma[2][ijk[2]];
}
}  // namespace

void Stepper::step_pstd() {
  const cplx I(0, 1);
  const cplx ck = 2.0 * I * eta_ * dtau_;
  const cplx cv = -2.0 * I * dtau_;
  const double r = ramp();
  const double tn = double(n_) * dtau_;
  const cplx time_factor = std::exp(-I * tn);
  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    Block& b = blocks_[bi];
    if (opt_.serial_kernels)
      lap_[bi]->apply_serial(b.state.cur, b.work);
    else
      lap_[bi]->apply(b.state.cur, b.work, b.core);
    double sum = dense_update(b, ck, !opt_.serial_kernels);
    auto& nw = b.state.prev;
    const auto& cur = b.state.cur;
    for (std::size_t e = 0; e < b.v_flat.size(); ++e) {
      std::size_t f = b.v_flat[e];
      nw[f] += gamma_at(b, f) * cv * r * b.v_val[e] * cur[f];
    }
    if (src_) {
      if (src_->mode() == IncidentMode::sinusoidal) {
        for (std::size_t e = 0; e < b.s_flat.size(); ++e) {
          std::size_t f = b.s_flat[e];
          nw[f] += gamma_at(b, f) * cv * b.s0[e] * time_factor;
        }
      } else {
        std::map<double, std::pair<cplx, cplx>> cache;
        for (std::size_t e = 0; e < b.s_flat.size(); ++e) {
          auto it = cache.find(b.s_d[e]);
          if (it == cache.end()) it = cache.emplace(b.s_d[e], src_->eval_1d(b.s_d[e], n_)).first;
          auto [psi, dpsi] = it->second;
          std::size_t f = b.s_flat[e];
          cplx s = b.s_lap[e] * psi + 2.0 * b.s_kgrad[e] * dpsi;
          nw[f] += gamma_at(b, f) * cv * s;
        }
      }
    }
    std::swap(b.state.prev, b.state.cur);
    check_finite(b, sum);
  }
}

void Stepper::step_fdtd() {
  const cplx I(0, 1);
  const cplx ck = 2.0 * I * eta_ * dtau_;
  const cplx cv = -2.0 * I * dtau_;
  const double r = ramp();
  const double tn = double(n_) * dtau_;
  const cplx time_factor = std::exp(-I * tn);
  Block& b = blocks_.front();
  if (opt_.serial_kernels)
    laplacian_fdtd_serial(b.state.cur, b.work, geom_.grid.spacing);
  else
    laplacian_fdtd(b.state.cur, b.work, geom_.grid.spacing);
  double sum = dense_update(b, ck, !opt_.serial_kernels);
  auto& nw = b.state.prev;
  const auto& cur = b.state.cur;
  for (std::size_t e = 0; e < b.v_flat.size(); ++e) {
    std::size_t f = b.v_flat[e];
    nw[f] += gamma_at(b, f) * cv * r * b.v_val[e] * cur[f];
  }
  if (src_) {
    if (src_->mode() == IncidentMode::sinusoidal) {
      for (std::size_t e = 0; e < fdtd_plan_.size(); ++e) {
        std::size_t f = fdtd_plan_.flat[e];
        nw[f] += gamma_at(b, f) * fdtd_plan_.c0[e] * time_factor;
      }
    } else {
      std::map<double, cplx> cache;
      for (std::size_t e = 0; e < fdtd_plan_.size(); ++e) {
        cplx s = 0;
        for (auto& [d, c] : fdtd_plan_.terms[e]) {
          auto it = cache.find(d);
          if (it == cache.end()) it = cache.emplace(d, src_->eval_1d(d, n_).first).first;
          s += c * it->second;
        }
        std::size_t f = fdtd_plan_.flat[e];
        nw[f] += gamma_at(b, f) * I * s;
      }
    }
  }
  std::swap(b.state.prev, b.state.cur);
  check_finite(b, sum);
}

}  // namespace qscat
