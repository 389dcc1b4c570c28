#include "qscat/lattice.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace qscat {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::geometry_infeasible: return "geometry-infeasible";
    case Errc::potential_support_violation: return "potential-support-violation";
    case Errc::out_of_range: return "out-of-range";
    case Errc::shape_mismatch: return "shape-mismatch";
    case Errc::instability: return "instability";
    case Errc::observation_inside_box: return "observation-point-inside-box";
    case Errc::cell_size_violation: return "cell-size-violation";
    case Errc::zero_incident_phasor: return "zero-incident-phasor";
    case Errc::coincident_points: return "coincident-points";
    case Errc::non_convergent: return "non-convergent";
    case Errc::missing_neighbor: return "missing-neighbor";
    case Errc::config_error: return "config-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

double norm2(const CField& f) {
  double s = 0;
  for (std::size_t i = 0; i < f.size(); ++i) s += std::norm(f[i]);
  return std::sqrt(s);
}

double max_abs(const CField& f) {
  double m = 0;
  for (std::size_t i = 0; i < f.size(); ++i) m = std::max(m, std::abs(f[i]));
  return m;
}

double to_reduced(double x, double lambda0) {
  if (!(lambda0 > 0)) throw Error(Errc::invalid_argument, "wavelength must be positive");
  return 2 * pi * x / lambda0;
}

double from_reduced(double xbar, double lambda0) {
  if (!(lambda0 > 0)) throw Error(Errc::invalid_argument, "wavelength must be positive");
  return xbar * lambda0 / (2 * pi);
}

void GridSpec::validate(double min_ppw) const {
  for (int a = 0; a < 3; ++a) {
    if (n[a] == 0) throw Error(Errc::invalid_argument, "zero lattice extent");
    if (!(spacing[a] > 0)) throw Error(Errc::invalid_argument, "spacing must be positive");
    if (active(a) && 2 * pi / spacing[a] < min_ppw)
      throw Error(Errc::invalid_argument, "fewer than " + std::to_string(min_ppw) +
                                              " grids per wavelength on axis " +
                                              std::to_string(a));
  }
  if (!(dtau > 0)) throw Error(Errc::invalid_argument, "dtau must be positive");
}

const char* stepper_name(StepperKind k) { return k == StepperKind::pstd ? "pstd" : "fdtd"; }

StepperKind parse_stepper(const std::string& s) {
  if (s == "pstd") return StepperKind::pstd;
  if (s == "fdtd") return StepperKind::fdtd;
  throw Error(Errc::config_error, "unknown stepper mode '" + s + "'");
}

Region AxisLayout::classify(long i) const {
  if (!active) return Region::tf;
  if (i < abc || i >= n - abc) return Region::abc;
  if (i <= y0 || i >= y3) return Region::sf;
  if (i < y1 || i > y2) return Region::transition;
  return Region::tf;
}

Region ModelGeometry::classify(long i, long j, long k) const {
  Region r[3] = {axes[0].classify(i), axes[1].classify(j), axes[2].classify(k)};
  for (Region want : {Region::abc, Region::sf, Region::transition})
    for (auto x : r)
      if (x == want) return want;
  return Region::tf;
}

bool ModelGeometry::holds_total(long i, long j, long k) const {
  if (kind == StepperKind::pstd) return in_tf(i, j, k);
  return axes[0].in_total(i) && axes[1].in_total(j) && axes[2].in_total(k);
}

std::array<std::array<double, 2>, 3> ModelGeometry::virtual_box() const {
  std::array<std::array<double, 2>, 3> b{};
  for (int a = 0; a < 3; ++a) {
    if (!axes[a].active) continue;
    b[a] = {grid.coord(a, axes[a].plane_lo), grid.coord(a, axes[a].plane_hi)};
  }
  return b;
}

std::array<std::array<double, 2>, 3> ModelGeometry::tf_box() const {
  std::array<std::array<double, 2>, 3> b{};
  for (int a = 0; a < 3; ++a) {
    if (!axes[a].active) {
      b[a] = {-INFINITY, INFINITY};
      continue;
    }
    b[a] = {grid.coord(a, axes[a].y1), grid.coord(a, axes[a].y2)};
  }
  return b;
}

ModelGeometry build_geometry(const GridSpec& grid, const RegionWidths& w, StepperKind kind,
                             double support_radius) {
  ModelGeometry g;
  g.grid = grid;
  g.widths = w;
  g.kind = kind;
  if (w.abc < 1 || w.sf < 3 || w.trans < 1 || w.halo < 0)
    throw Error(Errc::geometry_infeasible,
                "need abc >= 1, sf >= 3, trans >= 1 (got abc=" + std::to_string(w.abc) +
                    " sf=" + std::to_string(w.sf) + " trans=" + std::to_string(w.trans) + ")");
  if (kind == StepperKind::fdtd && w.trans != fdtd_transition_grids)
    throw Error(Errc::geometry_infeasible,
                "FDTD transition layer must be exactly 8 grids, got " + std::to_string(w.trans));
  bool any = false;
  for (int a = 0; a < 3; ++a) {
    AxisLayout& L = g.axes[a];
    L.n = long(grid.n[a]);
    L.active = grid.active(a);
    if (!L.active) {
      L.t0 = L.y1 = 0;
      L.t1 = L.y2 = 0;
      continue;
    }
    any = true;
    L.abc = w.abc;
    L.y0 = w.abc + w.sf - 1;
    L.y1 = L.y0 + w.trans + 1;
    L.y3 = L.n - 1 - L.y0;
    L.y2 = L.y3 - w.trans - 1;
    if (L.y2 < L.y1)
      throw Error(Errc::geometry_infeasible,
                  "TF empty on axis " + std::to_string(a) + ": lattice " + std::to_string(L.n) +
                      " too small for the region widths");
    L.t0 = kind == StepperKind::fdtd ? L.y0 + 5 : L.y1;
    L.t1 = kind == StepperKind::fdtd ? L.y3 - 5 : L.y2;
    L.plane_lo = w.abc + w.sf / 2;
    L.plane_hi = L.n - 1 - L.plane_lo;
  }
  if (!any) throw Error(Errc::geometry_infeasible, "no active axis");
  if (support_radius > 0) {
    auto tf = g.tf_box();
    for (int a = 0; a < 3; ++a)
      if (g.axes[a].active && (support_radius > -tf[a][0] || support_radius > tf[a][1]))
        throw Error(Errc::potential_support_violation,
                    "potential support radius " + std::to_string(support_radius) +
                        " exceeds TF half-width " + std::to_string(tf[a][1]) + " on axis " +
                        std::to_string(a));
  }
  return g;
}

PotentialSpec PotentialSpec::none() { return {}; }

PotentialSpec PotentialSpec::square_well(double s, double radius) {
  PotentialSpec p;
  double a2 = radius * radius;
  p.v = [s, a2](const Vec3& r, double) {
    return r[0] * r[0] + r[1] * r[1] + r[2] * r[2] <= a2 ? s : 0.0;
  };
  p.support_radius = radius;
  p.vmax = std::abs(s);
  return p;
}

// ---- config ----

static std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& raw) {
  std::string s = trim(raw);
  if (s.empty()) throw Error(Errc::config_error, "empty number");
  // product of factors separated by '*', optionally one '/' divisor chain
  double value = 1.0;
  bool divide = false;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t next = s.find_first_of("*/", pos);
    std::string tok = trim(s.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    double f;
    if (tok == "pi")
      f = pi;
    else {
      std::size_t used = 0;
      try {
        f = std::stod(tok, &used);
      } catch (...) {
        throw Error(Errc::config_error, "bad number '" + raw + "'");
      }
      if (used != tok.size()) throw Error(Errc::config_error, "bad number '" + raw + "'");
    }
    value = divide ? value / f : value * f;
    if (next == std::string::npos) break;
    divide = s[next] == '/';
    pos = next + 1;
  }
  return value;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::config_error, "line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw Error(Errc::config_error, "line " + std::to_string(lineno) + ": empty key");
    c.kv_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(Errc::io_error, "cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string Config::get_string(const std::string& key, const std::string& def) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? def : it->second;
}

double Config::get_double(const std::string& key, double def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  try {
    return parse_number(it->second);
  } catch (const Error&) {
    throw Error(Errc::config_error, key + ": not a number: '" + it->second + "'");
  }
}

long Config::get_int(const std::string& key, long def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  double v = get_double(key, 0);
  if (v != std::floor(v)) throw Error(Errc::config_error, key + ": expected integer");
  return long(v);
}

bool Config::get_bool(const std::string& key, bool def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw Error(Errc::config_error, key + ": expected boolean");
}

std::vector<std::string> Config::get_words(const std::string& key,
                                           const std::vector<std::string>& def) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) return def;
  std::vector<std::string> out;
  std::stringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& def) const {
  if (!has(key)) return def;
  std::vector<double> out;
  for (auto& w : get_words(key, {})) out.push_back(parse_number(w));
  return out;
}

std::string Config::dump() const {
  std::string s;
  for (auto& [k, v] : kv_) s += k + " = " + v + "\n";
  return s;
}

}  // namespace qscat
