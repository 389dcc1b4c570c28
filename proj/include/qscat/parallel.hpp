#pragma once

#include "qscat/core.hpp"

namespace qscat {

struct Topology {
  std::array<int, 3> p{1, 1, 1};
  int n_halo = 15;
  int n_t = 10;

  int count() const { return p[0] * p[1] * p[2]; }
  void validate() const;  // n_halo >= n_t + 5, counts >= 1
};

// w[l-1] = xi(l / (n_t + 1)), l = 1..n_t from the distal end
struct HaloWeights {
  std::vector<double> w;
  static HaloWeights make(int n_t);
};

struct Subdomain {
  int id = 0;
  std::array<int, 3> coord{0, 0, 0};
  std::array<long, 3> core_lo{0, 0, 0};  // global, half-open [core_lo, core_hi)
  std::array<long, 3> core_hi{0, 0, 0};
  std::array<long, 3> halo_lo{0, 0, 0};  // halo widths below/above the core
  std::array<long, 3> halo_hi{0, 0, 0};
  std::array<std::size_t, 3> local_n{1, 1, 1};
  std::array<int, 6> neighbor{-1, -1, -1, -1, -1, -1};  // (x-, x+, y-, y+, z-, z+)

  long to_global(int a, long l) const { return core_lo[a] - halo_lo[a] + l; }
  long to_local(int a, long g) const { return g - core_lo[a] + halo_lo[a]; }
  bool owns(long i, long j, long k) const {
    return i >= core_lo[0] && i < core_hi[0] && j >= core_lo[1] && j < core_hi[1] &&
           k >= core_lo[2] && k < core_hi[2];
  }
  std::size_t core_count() const {
    return std::size_t((core_hi[0] - core_lo[0]) * (core_hi[1] - core_lo[1]) *
                       (core_hi[2] - core_lo[2]));
  }
};

// Cores tile the global lattice (remainders go to the leading subdomains). Faces on the global
// boundary carry no halo. Error interior too small when a decomposed core is < 2 n_halo.
std::vector<Subdomain> decompose(const std::array<std::size_t, 3>& global_n, const Topology& t);

struct ExchangeStats {
  std::size_t messages = 0;
  std::size_t grid_points = 0;
  std::size_t layers = 0;  // grid layers per face message
};

// Fill every halo from the neighbours' cores, pass by pass along x, y, z. The outermost halo
// layer is 0, the next n_t layers are multiplied by w (distal to proximal), the rest are copied
// unweighted. Buffers are packed and unpacked as they would be for message passing.
ExchangeStats exchange_and_weight(const std::vector<Subdomain>& subs, std::vector<CField*>& fields,
                                  const HaloWeights& w);

// assemble / scatter between global and local lattices (cores only for gather)
CField gather_global(const std::vector<Subdomain>& subs, const std::vector<const CField*>& fields,
                     const std::array<std::size_t, 3>& global_n);
void scatter_global(const std::vector<Subdomain>& subs, const CField& global,
                    std::vector<CField*>& fields);

}  // namespace qscat
