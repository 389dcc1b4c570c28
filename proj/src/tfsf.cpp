#include "qscat/tfsf.hpp"

#include <cmath>
#include <map>

#include "qscat/stability.hpp"

namespace qscat {

double taper_xi(double rho, int der) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(Errc::out_of_range, "taper argument outside [0,1]");
  const double a = 2 * pi * rho, b = 4 * pi * rho;
  switch (der) {
    case 0: return rho - 2.0 / (3 * pi) * std::sin(a) + 1.0 / (12 * pi) * std::sin(b);
    case 1: return 1.0 - 4.0 / 3 * std::cos(a) + 1.0 / 3 * std::cos(b);
    case 2: return 8 * pi / 3 * std::sin(a) - 4 * pi / 3 * std::sin(b);
    case 3: return 16 * pi * pi / 3 * (std::cos(a) - std::cos(b));
    case 4: return 32 * pi * pi * pi / 3 * (2 * std::sin(b) - std::sin(a));
    default: throw Error(Errc::invalid_argument, "taper derivative order must be 0..4");
  }
}

bool TaperMask::in_transition(std::size_t i, std::size_t j, std::size_t k) const {
  std::size_t ijk[3] = {i, j, k};
  bool all_tf = true;
  for (int a = 0; a < 3; ++a) {
    long x = long(ijk[a]);
    const auto& b = breaks[a];
    if (x <= b[0] || x >= b[3]) return false;
    if (x < b[1] || x > b[2]) all_tf = false;
  }
  return !all_tf;
}

RField TaperMask::zeta_lattice() const {
  RField out(n);
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) out(i, j, k) = zeta(i, j, k);
  return out;
}

RField TaperMask::lap_lattice() const {
  RField out(n);
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) out(i, j, k) = lap(i, j, k);
  return out;
}

std::array<RField, 3> TaperMask::grad_lattices() const {
  std::array<RField, 3> out{RField(n), RField(n), RField(n)};
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        Vec3 g = grad(i, j, k);
        for (int a = 0; a < 3; ++a) out[a](i, j, k) = g[a];
      }
  return out;
}

TaperMask build_zeta(const ModelGeometry& g) {
  TaperMask t;
  t.n = g.grid.n;
  for (int a = 0; a < 3; ++a) {
    const AxisLayout& L = g.axes[a];
    std::size_t n = g.grid.n[a];
    t.z[a].assign(n, 1.0);
    t.dz[a].assign(n, 0.0);
    t.d2z[a].assign(n, 0.0);
    t.breaks[a] = {L.y0, L.y1, L.y2, L.y3};
    if (!L.active) continue;
    long w_lo = L.y1 - L.y0, w_hi = L.y3 - L.y2;
    if (w_lo < 2 || w_hi < 2) throw Error(Errc::geometry_infeasible, "empty transition wall");
    double h = g.grid.spacing[a];
    for (long i = 0; i < long(n); ++i) {
      double z = 0, dz = 0, d2z = 0;
      if (i <= L.y0 || i >= L.y3) {
        z = 0;
      } else if (i < L.y1) {
        double rho = double(i - L.y0) / double(w_lo), s = 1.0 / (double(w_lo) * h);
        z = taper_xi(rho);
        dz = taper_xi(rho, 1) * s;
        d2z = taper_xi(rho, 2) * s * s;
      } else if (i <= L.y2) {
        z = 1;
      } else {
        double rho = double(i - L.y2) / double(w_hi), s = 1.0 / (double(w_hi) * h);
        z = 1.0 - taper_xi(rho);
        dz = -taper_xi(rho, 1) * s;
        d2z = -taper_xi(rho, 2) * s * s;
      }
      t.z[a][i] = z;
      t.dz[a][i] = dz;
      t.d2z[a][i] = d2z;
    }
  }
  return t;
}

CField pstd_source_term(const TaperMask& t, const CField& psi, const std::array<CField, 3>& grad) {
  if (psi.shape() != t.n) throw Error(Errc::shape_mismatch, "incident lattice shape");
  for (auto& gr : grad)
    if (gr.shape() != t.n) throw Error(Errc::shape_mismatch, "incident gradient lattice shape");
  CField out(t.n);
  for (std::size_t i = 0; i < t.n[0]; ++i)
    for (std::size_t j = 0; j < t.n[1]; ++j)
      for (std::size_t k = 0; k < t.n[2]; ++k) {
        if (!t.in_transition(i, j, k)) continue;
        Vec3 gz = t.grad(i, j, k);
        std::size_t f = psi.flat(i, j, k);
        out[f] = t.lap(i, j, k) * psi[f] +
                 2.0 * (gz[0] * grad[0][f] + gz[1] * grad[1][f] + gz[2] * grad[2][f]);
      }
  return out;
}

IndexBounds incident_bounds(const ModelGeometry& g) {
  long lo[3], hi[3];
  for (int a = 0; a < 3; ++a) {
    lo[a] = g.axes[a].active ? g.axes[a].y0 : 0;
    hi[a] = g.axes[a].active ? g.axes[a].y3 : 0;
  }
  return {lo[0], hi[0], lo[1], hi[1], lo[2], hi[2]};
}

SourcePlan build_source_plan(const TaperMask& t, const ModelGeometry& g, const IncidentDirection& dir,
                             const Idx3& origin) {
  SourcePlan p;
  const cplx I(0, 1);
  auto n = t.n;
  for (std::size_t i = 0; i < n[0]; ++i)
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t k = 0; k < n[2]; ++k) {
        if (!t.in_transition(i, j, k)) continue;
        Idx3 idx{long(i), long(j), long(k)};
        Vec3 gz = t.grad(i, j, k);
        double d = project_distance(idx, origin, g.grid.spacing, dir);
        double kg = gz[0] * dir.khat[0] + gz[1] * dir.khat[1] + gz[2] * dir.khat[2];
        double lp = t.lap(i, j, k);
        p.flat.push_back((i * n[1] + j) * n[2] + k);
        p.idx.push_back(idx);
        p.d.push_back(d);
        p.lap.push_back(lp);
        p.kgrad.push_back(kg);
        p.s0.push_back((lp + 2.0 * I * kg) * std::exp(I * d));
      }
  return p;
}

Wall wall_from_index(int w) {
  if (w < 0 || w > 5) throw Error(Errc::invalid_argument, "wall index must be 0..5");
  return all_walls[std::size_t(w)];
}

void for_each_wall_term(Wall w, const ModelGeometry& g,
                        const std::function<void(const Idx3&, const Idx3&, double)>& visit) {
  int wi = int(w);
  if (wi < 0 || wi > 5) throw Error(Errc::invalid_argument, "wall index must be 0..5");
  int a = wi / 2;
  bool upper = wi % 2 == 1;
  if (!g.axes[a].active) return;
  int b = (a + 1) % 3, c = (a + 2) % 3;
  const auto& La = g.axes[a];
  long t0 = La.t0, t1 = La.t1;
  const auto& alpha = StencilCoefficients::alpha;
  auto range = [&](int ax) -> std::pair<long, long> {
    return {g.axes[ax].t0, g.axes[ax].active ? g.axes[ax].t1 : 0};
  };
  auto [b0, b1] = range(b);
  auto [c0, c1] = range(c);
  for (long u = b0; u <= b1; ++u)
    for (long v = c0; v <= c1; ++v) {
      auto make = [&](long m) {
        Idx3 x{};
        x[a] = m;
        x[b] = u;
        x[c] = v;
        return x;
      };
      for (long s = 0; s < 4; ++s) {
        // total-field side: neighbour across the interface needs +psi_inc
        long m_tf = upper ? t1 - s : t0 + s;
        // scattered-field side: neighbour across needs -psi_inc
        long m_sf = upper ? t1 + 1 + s : t0 - 1 - s;
        for (int l = 1; l <= 4; ++l) {
          long nb_tf = upper ? m_tf + l : m_tf - l;
          if (upper ? nb_tf > t1 : nb_tf < t0) visit(make(m_tf), make(nb_tf), alpha[l]);
          long nb_sf = upper ? m_sf - l : m_sf + l;
          if (upper ? nb_sf <= t1 : nb_sf >= t0) visit(make(m_sf), make(nb_sf), -alpha[l]);
        }
      }
    }
}

void fdtd_consistency_update(Wall w, CField& field, const ModelGeometry& g,
                             const std::function<cplx(const Idx3&)>& psi_inc, double kinetic) {
  if (field.shape() != g.grid.n) throw Error(Errc::shape_mismatch, "field vs geometry");
  int a = int(w) / 2;
  double h = g.grid.spacing[a];
  const cplx coef(0, kinetic / (h * h));
  for_each_wall_term(w, g, [&](const Idx3& t, const Idx3& nb, double weight) {
    field(std::size_t(t[0]), std::size_t(t[1]), std::size_t(t[2])) += coef * weight * psi_inc(nb);
  });
}

FdtdCorrectionPlan build_fdtd_plan(const ModelGeometry& g, const IncidentDirection& dir,
                                   const Idx3& origin, double kinetic) {
  // merge walls per target, keeping wall order x_lo..z_hi inside each target
  std::map<std::size_t, std::size_t> slot;
  FdtdCorrectionPlan p;
  auto n = g.grid.n;
  for (Wall w : all_walls) {
    int a = int(w) / 2;
    double h = g.grid.spacing[a];
    for_each_wall_term(w, g, [&](const Idx3& t, const Idx3& nb, double weight) {
      std::size_t f = (std::size_t(t[0]) * n[1] + std::size_t(t[1])) * n[2] + std::size_t(t[2]);
      auto [it, fresh] = slot.emplace(f, p.flat.size());
      if (fresh) {
        p.flat.push_back(f);
        p.terms.emplace_back();
      }
      double d = project_distance(nb, origin, g.grid.spacing, dir);
      p.terms[it->second].emplace_back(d, weight * kinetic / (h * h));
    });
  }
  const cplx I(0, 1);
  p.c0.resize(p.flat.size());
  for (std::size_t e = 0; e < p.flat.size(); ++e) {
    cplx s = 0;
    for (auto& [d, c] : p.terms[e]) s += c * std::exp(I * d);
    p.c0[e] = I * s;
  }
  return p;
}

}  // namespace qscat
