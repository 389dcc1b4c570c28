#include "qscat/parallel.hpp"

#include "qscat/tfsf.hpp"

namespace qscat {

void Topology::validate() const {
  for (int a = 0; a < 3; ++a)
    if (p[a] < 1) throw Error(Errc::invalid_argument, "subdomain count must be >= 1");
  if (n_t < 1) throw Error(Errc::invalid_argument, "n_t must be >= 1");
  if (n_halo < n_t + 5)
    throw Error(Errc::invalid_argument, "n_halo must be at least n_t + 4 + 1 (n_halo=" +
                                            std::to_string(n_halo) + ", n_t=" +
                                            std::to_string(n_t) + ")");
}

HaloWeights HaloWeights::make(int n_t) {
  HaloWeights h;
  for (int l = 1; l <= n_t; ++l) h.w.push_back(taper_xi(double(l) / double(n_t + 1)));
  return h;
}

std::vector<Subdomain> decompose(const std::array<std::size_t, 3>& gn, const Topology& t) {
  t.validate();
  std::vector<Subdomain> subs;
  std::array<std::vector<long>, 3> cuts;
  for (int a = 0; a < 3; ++a) {
    long n = long(gn[a]), p = t.p[a];
    long base = n / p, rem = n % p;
    cuts[a].push_back(0);
    for (long c = 0; c < p; ++c) cuts[a].push_back(cuts[a].back() + base + (c < rem ? 1 : 0));
    if (p > 1 && base < 2 * t.n_halo)
      throw Error(Errc::invalid_argument, "interior too small: axis " + std::to_string(a) + " core " +
                                              std::to_string(base) + " < 2*n_halo");
  }
  auto id_of = [&](int x, int y, int z) { return (x * t.p[1] + y) * t.p[2] + z; };
  for (int x = 0; x < t.p[0]; ++x)
    for (int y = 0; y < t.p[1]; ++y)
      for (int z = 0; z < t.p[2]; ++z) {
        Subdomain s;
        s.id = id_of(x, y, z);
        s.coord = {x, y, z};
        for (int a = 0; a < 3; ++a) {
          int c = s.coord[a];
          s.core_lo[a] = cuts[a][std::size_t(c)];
          s.core_hi[a] = cuts[a][std::size_t(c) + 1];
          s.halo_lo[a] = c > 0 ? t.n_halo : 0;
          s.halo_hi[a] = c < t.p[a] - 1 ? t.n_halo : 0;
          s.local_n[a] = std::size_t(s.core_hi[a] - s.core_lo[a] + s.halo_lo[a] + s.halo_hi[a]);
          auto nb = s.coord;
          if (c > 0) {
            nb[a] = c - 1;
            s.neighbor[2 * a] = id_of(nb[0], nb[1], nb[2]);
          }
          nb = s.coord;
          if (c < t.p[a] - 1) {
            nb[a] = c + 1;
            s.neighbor[2 * a + 1] = id_of(nb[0], nb[1], nb[2]);
          }
        }
        subs.push_back(s);
      }
  return subs;
}

ExchangeStats exchange_and_weight(const std::vector<Subdomain>& subs, std::vector<CField*>& fields,
                                  const HaloWeights& hw) {
  if (fields.size() != subs.size()) throw Error(Errc::shape_mismatch, "one field per subdomain");
  ExchangeStats st;
  const long nt = long(hw.w.size());
  std::vector<cplx> msg;
  for (int a = 0; a < 3; ++a) {
    for (const Subdomain& s : subs) {
      for (int side = 0; side < 2; ++side) {
        long width = side == 0 ? s.halo_lo[a] : s.halo_hi[a];
        if (width == 0) continue;
        int nb_id = s.neighbor[2 * a + side];
        if (nb_id < 0) throw Error(Errc::missing_neighbor, "halo without neighbour");
        const Subdomain& nb = subs[std::size_t(nb_id)];
        const CField& src = *fields[std::size_t(nb_id)];
        CField& dst = *fields[std::size_t(s.id)];
        // transverse ranges (local indices of s): full for axes already exchanged, core otherwise
        std::array<long, 3> lo{}, hi{};
        for (int b = 0; b < 3; ++b) {
          if (b == a) continue;
          if (b < a) {
            lo[b] = 0;
            hi[b] = long(s.local_n[b]);
          } else {
            lo[b] = s.halo_lo[b];
            hi[b] = s.halo_lo[b] + (s.core_hi[b] - s.core_lo[b]);
          }
        }
        // halo layer h = 1 is adjacent to the core, h = width is outermost
        msg.clear();
        for (long h = 1; h < width; ++h) {
          long l_dst = side == 0 ? s.halo_lo[a] - h : s.halo_lo[a] + (s.core_hi[a] - s.core_lo[a]) + h - 1;
          long g = s.to_global(a, l_dst);
          long l_src = nb.to_local(a, g);
          // pack (neighbour side)
          std::array<long, 3> ix{};
          ix[a] = l_src;
          int b = (a + 1) % 3, c = (a + 2) % 3;
          for (long u = lo[b]; u < hi[b]; ++u)
            for (long v = lo[c]; v < hi[c]; ++v) {
              ix[b] = nb.to_local(b, s.to_global(b, u));
              ix[c] = nb.to_local(c, s.to_global(c, v));
              msg.push_back(src(std::size_t(ix[0]), std::size_t(ix[1]), std::size_t(ix[2])));
            }
        }
        // unpack (owner side) with weights
        std::size_t p = 0;
        for (long h = 1; h <= width; ++h) {
          long l_dst = side == 0 ? s.halo_lo[a] - h : s.halo_lo[a] + (s.core_hi[a] - s.core_lo[a]) + h - 1;
          long from_outer = width - h;  // 0 for the outermost layer
          double wgt = 1.0;
          if (from_outer == 0)
            wgt = 0.0;
          else if (from_outer <= nt)
            wgt = hw.w[std::size_t(from_outer - 1)];
          std::array<long, 3> ix{};
          ix[a] = l_dst;
          int b = (a + 1) % 3, c = (a + 2) % 3;
          for (long u = lo[b]; u < hi[b]; ++u)
            for (long v = lo[c]; v < hi[c]; ++v) {
              ix[b] = u;
              ix[c] = v;
              cplx& x = dst(std::size_t(ix[0]), std::size_t(ix[1]), std::size_t(ix[2]));
              x = h == width ? cplx(0.0) : wgt * msg[p++];
            }
        }
        st.messages += 1;
        st.grid_points += msg.size();
        st.layers = std::size_t(width - 1);
      }
    }
  }
  return st;
}

CField gather_global(const std::vector<Subdomain>& subs, const std::vector<const CField*>& fields,
                     const std::array<std::size_t, 3>& gn) {
  CField out(gn);
  for (const Subdomain& s : subs) {
    const CField& f = *fields[std::size_t(s.id)];
    for (long i = s.core_lo[0]; i < s.core_hi[0]; ++i)
      for (long j = s.core_lo[1]; j < s.core_hi[1]; ++j)
        for (long k = s.core_lo[2]; k < s.core_hi[2]; ++k)
          out(std::size_t(i), std::size_t(j), std::size_t(k)) =
              f(std::size_t(s.to_local(0, i)), std::size_t(s.to_local(1, j)),
                std::size_t(s.to_local(2, k)));
  }
  return out;
}

void scatter_global(const std::vector<Subdomain>& subs, const CField& g, std::vector<CField*>& fields) {
  for (const Subdomain& s : subs) {
    CField& f = *fields[std::size_t(s.id)];
    for (std::size_t i = 0; i < s.local_n[0]; ++i)
      for (std::size_t j = 0; j < s.local_n[1]; ++j)
        for (std::size_t k = 0; k < s.local_n[2]; ++k)
          f(i, j, k) = g(std::size_t(s.to_global(0, long(i))), std::size_t(s.to_global(1, long(j))),
                         std::size_t(s.to_global(2, long(k))));
  }
}

}  // namespace qscat
