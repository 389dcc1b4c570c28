#pragma once

#include <functional>

#include "qscat/lattice.hpp"
#include "qscat/source.hpp"

namespace qscat {

// xi(rho) = rho - 2/(3 pi) sin(2 pi rho) + 1/(12 pi) sin(4 pi rho); order 0..4
double taper_xi(double rho, int derivative = 0);

// Separable taper zeta = zx(x) zy(y) zz(z). Derivatives are per reduced length.
struct TaperMask {
  std::array<std::size_t, 3> n{1, 1, 1};
  std::array<std::vector<double>, 3> z, dz, d2z;
  std::array<std::array<long, 4>, 3> breaks{};  // y0, y1, y2, y3 per axis

  double zeta(std::size_t i, std::size_t j, std::size_t k) const {
    return z[0][i] * z[1][j] * z[2][k];
  }
  Vec3 grad(std::size_t i, std::size_t j, std::size_t k) const {
    return {dz[0][i] * z[1][j] * z[2][k], z[0][i] * dz[1][j] * z[2][k],
            z[0][i] * z[1][j] * dz[2][k]};
  }
  double lap(std::size_t i, std::size_t j, std::size_t k) const {
    return d2z[0][i] * z[1][j] * z[2][k] + z[0][i] * d2z[1][j] * z[2][k] +
           z[0][i] * z[1][j] * d2z[2][k];
  }
  // strictly inside (y0, y3) on every axis and outside the TF
  bool in_transition(std::size_t i, std::size_t j, std::size_t k) const;
  RField zeta_lattice() const;
  RField lap_lattice() const;
  std::array<RField, 3> grad_lattices() const;
};

TaperMask build_zeta(const ModelGeometry& g);

// grad(zeta)^2 psi_inc + 2 grad(zeta).grad(psi_inc) on the full lattice
CField pstd_source_term(const TaperMask& taper, const CField& psi_inc,
                        const std::array<CField, 3>& grad_psi_inc);

// Box that anchors the 1D incident axis: outer edges (y0, y3) of the transition layer.
IndexBounds incident_bounds(const ModelGeometry& g);

// Transition-layer points with their projected distance and taper factors, for the per-step
// source term. s0 is the sinusoidal source at n = 0: (lap + 2i khat.grad) e^{i d}.
struct SourcePlan {
  std::vector<std::size_t> flat;
  std::vector<Idx3> idx;
  std::vector<double> d;
  std::vector<double> lap;
  std::vector<double> kgrad;
  std::vector<cplx> s0;
  std::size_t size() const { return flat.size(); }
};

SourcePlan build_source_plan(const TaperMask& taper, const ModelGeometry& g,
                             const IncidentDirection& dir, const Idx3& origin);

enum class Wall { x_lo, x_hi, y_lo, y_hi, z_lo, z_hi };
inline constexpr std::array<Wall, 6> all_walls{Wall::x_lo, Wall::x_hi, Wall::y_lo,
                                               Wall::y_hi, Wall::z_lo, Wall::z_hi};
Wall wall_from_index(int w);

// Visits the consistency-condition terms of one FDTD wall: target grid, neighbour grid whose
// incident value is needed, and signed stencil weight (+alpha on the total-field side,
// -alpha on the scattered-field side).
void for_each_wall_term(Wall w, const ModelGeometry& g,
                        const std::function<void(const Idx3& target, const Idx3& neighbor,
                                                 double weight)>& visit);

// field(target) += i (kinetic / Delta_a^2) sum weight * psi_inc(neighbor), kinetic = 2 eta dtau.
// Must be called after the bulk update of the level it corrects.
void fdtd_consistency_update(Wall w, CField& field, const ModelGeometry& g,
                             const std::function<cplx(const Idx3&)>& psi_inc, double kinetic);

// Corrections of all six walls merged per target grid, for the sinusoidal fast path:
// correction at level n+1 = c0 * exp(-i n dtau).
struct FdtdCorrectionPlan {
  std::vector<std::size_t> flat;
  std::vector<std::vector<std::pair<double, double>>> terms;  // (neighbour d, weight kin / D^2)
  std::vector<cplx> c0;  // i sum coef e^{i d}
  std::size_t size() const { return flat.size(); }
};

FdtdCorrectionPlan build_fdtd_plan(const ModelGeometry& g, const IncidentDirection& dir,
                                   const Idx3& origin, double kinetic);

}  // namespace qscat
