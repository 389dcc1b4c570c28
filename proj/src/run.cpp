#include "qscat/run.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

namespace qscat {

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "lattice.nx", "lattice.ny", "lattice.nz", "lattice.spacing", "lattice.min_grids_per_wavelength",
      "regions.abc", "regions.sf", "regions.halo", "tfsf.transition_grids",
      "abc.u0", "abc.alpha_per_grid", "abc.width_grids",
      "stepper.mode", "stepper.dtau", "stepper.monochromatic_eta", "stepper.start",
      "stepper.ramp_periods", "stepper.enforce_bound", "stepper.serial_kernels",
      "potential.kind", "potential.s", "potential.radius",
      "incidence.theta_deg", "incidence.phi_deg", "incidence.mode", "incidence.pulse.center",
      "incidence.pulse.width", "incidence.pulse.k0", "incidence.interpolation",
      "parallel.px", "parallel.py", "parallel.pz", "parallel.n_halo", "parallel.n_t", "parallel.workers",
      "run.warmup_periods", "run.accumulate_periods", "run.steps",
      "ntdf.omegas", "ntdf.radii", "ntdf.planes", "ntdf.points", "ntdf.series_tol",
      "oracle.lmax_override", "oracle.radial_step", "oracle.tail_tol",
      // consumed by the command-line front end
      "output.dir", "output.prefix", "archive.path", "compare.radius", "compare.plane",
      "compare.tolerance", "compare.floor", "validate.half_widths", "validate.spacing",
      "validate.margin", "validate.taper", "validate.amp_tol", "validate.phase_tol", "validate.k"};
  return keys;
}

RunConfig RunConfig::from(const Config& c) {
  std::set<std::string> known(known_config_keys().begin(), known_config_keys().end());
  for (auto& [k, v] : c.entries())
    if (!known.count(k)) throw Error(Errc::config_error, "unknown config key '" + k + "'");

  RunConfig r;
  r.grid.n = {std::size_t(c.get_int("lattice.nx", 176)), std::size_t(c.get_int("lattice.ny", 176)),
              std::size_t(c.get_int("lattice.nz", 176))};
  for (auto n : r.grid.n)
    if (n < 1) throw Error(Errc::config_error, "lattice sizes must be >= 1");
  double h = c.get_double("lattice.spacing", pi / 10);
  r.grid.spacing = {h, h, h};
  r.grid.dtau = c.get_double("stepper.dtau", pi / 1000);
  r.grid.validate(c.get_double("lattice.min_grids_per_wavelength", 4.0));

  r.widths.abc = int(c.get_int("abc.width_grids", c.get_int("regions.abc", r.widths.abc)));
  r.widths.sf = int(c.get_int("regions.sf", r.widths.sf));
  r.widths.trans = int(c.get_int("tfsf.transition_grids", r.widths.trans));
  r.widths.halo = int(c.get_int("regions.halo", r.widths.halo));
  r.abc_u0 = c.get_double("abc.u0", r.abc_u0);
  r.abc_alpha = c.get_double("abc.alpha_per_grid", r.abc_alpha);

  r.stepper.kind = parse_stepper(c.get_string("stepper.mode", "pstd"));
  if (r.stepper.kind == StepperKind::fdtd) r.widths.trans = fdtd_transition_grids;
  r.stepper.monochromatic_eta = c.get_bool("stepper.monochromatic_eta", true);
  std::string start = c.get_string("stepper.start", "warm");
  if (start != "warm" && start != "cold") throw Error(Errc::config_error, "stepper.start: warm or cold");
  r.stepper.start = start == "warm" ? StartMode::warm : StartMode::cold;
  r.stepper.potential_ramp_periods = c.get_double("stepper.ramp_periods", 1.0);
  r.stepper.enforce_stability_bound = c.get_bool("stepper.enforce_bound", true);
  r.stepper.serial_kernels = c.get_bool("stepper.serial_kernels", false);
  r.stepper.topology.p = {int(c.get_int("parallel.px", 1)), int(c.get_int("parallel.py", 1)),
                          int(c.get_int("parallel.pz", 1))};
  r.stepper.topology.n_halo = int(c.get_int("parallel.n_halo", r.widths.halo));
  r.stepper.topology.n_t = int(c.get_int("parallel.n_t", 10));
  r.workers = int(c.get_int("parallel.workers", 0));

  r.potential_kind = c.get_string("potential.kind", "none");
  if (r.potential_kind != "none" && r.potential_kind != "square_well")
    throw Error(Errc::config_error, "potential.kind: none or square_well");
  r.potential_s = c.get_double("potential.s", 0.0);
  r.potential_radius = c.get_double("potential.radius", 0.0);
  if (r.potential_kind == "square_well" && !(r.potential_radius > 0))
    throw Error(Errc::config_error, "potential.radius must be positive for a square well");

  r.dir = IncidentDirection::from_degrees(c.get_double("incidence.theta_deg", 90),
                                          c.get_double("incidence.phi_deg", 90));
  std::string mode = c.get_string("incidence.mode", "sinusoidal");
  if (mode == "sinusoidal")
    r.mode = IncidentMode::sinusoidal;
  else if (mode == "pulsed")
    r.mode = IncidentMode::pulsed;
  else
    throw Error(Errc::config_error, "incidence.mode: sinusoidal or pulsed");
  r.pulse.width = c.get_double("incidence.pulse.width", r.pulse.width);
  r.pulse.k0 = c.get_double("incidence.pulse.k0", 1.0);
  r.pulse.center = c.get_double("incidence.pulse.center", pulse_center_for_width(r.pulse.width));
  std::string interp = c.get_string("incidence.interpolation", "spectral");
  if (interp != "spectral" && interp != "nearest")
    throw Error(Errc::config_error, "incidence.interpolation: spectral or nearest");
  r.interp = interp == "spectral" ? Interp::spectral : Interp::nearest;

  r.warmup_periods = c.get_double("run.warmup_periods", 10);
  r.accumulate_periods = c.get_double("run.accumulate_periods", 1);
  r.pulsed_steps = c.get_int("run.steps", 0);
  r.omegas = c.get_list("ntdf.omegas", {1.0});
  r.radii = c.get_list("ntdf.radii", {100.0, 2e4});
  r.planes = c.get_words("ntdf.planes", {"xy"});
  r.scan_points = int(c.get_int("ntdf.points", 360));
  r.series_tol = c.get_double("ntdf.series_tol", 1e-9);
  r.oracle.lmax_override = int(c.get_int("oracle.lmax_override", -1));
  r.oracle.radial_step = c.get_double("oracle.radial_step", 1e-3);
  r.oracle.tail_tol = c.get_double("oracle.tail_tol", 1e-10);
  if (r.warmup_periods < 0 || r.accumulate_periods <= 0)
    throw Error(Errc::config_error, "run periods must be non-negative (accumulation positive)");
  return r;
}

PotentialSpec RunConfig::potential() const {
  if (potential_kind == "square_well") return PotentialSpec::square_well(potential_s, potential_radius);
  return PotentialSpec::none();
}

CentralPotential RunConfig::central_potential() const {
  if (potential_kind == "square_well") return CentralPotential::square_well(potential_s, potential_radius);
  return CentralPotential::none();
}

long RunConfig::steps_per_period() const { return std::lround(2 * pi / grid.dtau); }

FieldStats field_stats(const Stepper& st) {
  const ModelGeometry& g = st.geometry();
  CField f = st.blocks().size() == 1 ? st.blocks().front().state.cur : st.gather_cur();
  FieldStats s;
  s.tf_min = INFINITY;
  for (long i = 0; i < long(g.grid.n[0]); ++i)
    for (long j = 0; j < long(g.grid.n[1]); ++j)
      for (long k = 0; k < long(g.grid.n[2]); ++k) {
        double a = std::abs(f(std::size_t(i), std::size_t(j), std::size_t(k)));
        Region r = g.classify(i, j, k);
        if (r == Region::abc) continue;
        bool total = g.holds_total(i, j, k);
        if (g.kind == StepperKind::pstd ? r == Region::sf : !total) s.sf_max = std::max(s.sf_max, a);
        if (r == Region::tf) {
          s.tf_dev = std::max(s.tf_dev, std::abs(a - 1));
          s.tf_min = std::min(s.tf_min, a);
          s.tf_max = std::max(s.tf_max, a);
        }
      }
  return s;
}

ScatterResult run_scatter(const RunConfig& rc, const LogFn& log) {
  auto t0 = std::chrono::steady_clock::now();
  auto say = [&](const std::string& m) {
    if (log) log(m);
  };
  if (rc.workers > 0) omp_set_num_threads(rc.workers);
  PotentialSpec pot = rc.potential();
  ModelGeometry geom = build_geometry(rc.grid, rc.widths, rc.stepper.kind, pot.support_radius);
  AbsorberMask mask =
      build_mask(AbsorberProfile::poschl_teller(rc.abc_u0, rc.abc_alpha, rc.widths.abc), geom, rc.grid.dtau);

  IncidentSource1D src = IncidentSource1D::sinusoidal(rc.dir, rc.grid.dtau);
  long total_steps = 0, acc_from = 0;
  const long spp = rc.steps_per_period();
  if (rc.mode == IncidentMode::pulsed) {
    double diag = 0;
    for (int a = 0; a < 3; ++a) diag += std::pow(double(rc.grid.n[a]) * rc.grid.spacing[a], 2);
    diag = std::sqrt(diag);
    total_steps = rc.pulsed_steps;
    if (total_steps <= 0) {
      double vg = 2 * std::abs(rc.pulse.k0);
      total_steps = std::lround((diag + std::abs(rc.pulse.center) + 6 * rc.pulse.width) / vg / rc.grid.dtau);
    }
    double run_tau = double(total_steps) * rc.grid.dtau;
    double h1 = *std::min_element(rc.grid.spacing.begin(), rc.grid.spacing.end());
    std::size_t n1 = pulsed_lattice_size(diag, run_tau, rc.pulse, h1);
    double d_start = std::min(rc.pulse.center, 0.0) - 8 * rc.pulse.width;
    src = IncidentSource1D::pulsed(rc.dir, rc.grid.dtau, h1, n1, d_start, rc.pulse,
                                   rc.stepper.monochromatic_eta, 40);
    src.set_interpolation(rc.interp);
    acc_from = 0;
  } else {
    total_steps = std::lround((rc.warmup_periods + rc.accumulate_periods) * double(spp));
    acc_from = total_steps - std::lround(rc.accumulate_periods * double(spp));
  }

  Stepper st(geom, mask, pot, &src, rc.stepper);
  ScatterResult res;
  res.dtau = st.dtau();
  res.stability_bound = st.stability_bound();
  {
    std::ostringstream m;
    m << "lattice " << rc.grid.n[0] << "x" << rc.grid.n[1] << "x" << rc.grid.n[2] << ", "
      << stepper_name(rc.stepper.kind) << ", dtau " << st.dtau() << " (bound " << st.stability_bound()
      << "), " << st.blocks().size() << " subdomain(s), " << total_steps << " steps";
    say(m.str());
  }
  st.initialize();
  VirtualPlaneRecorder rec(geom, rc.omegas);
  // sinusoidal runs record exactly the last accumulate_periods; pulsed runs every level
  if (rc.mode == IncidentMode::pulsed) rec.accumulate(st);
  for (long s = 0; s < total_steps; ++s) {
    st.step();
    if (s + 1 > acc_from) rec.accumulate(st);
    if ((s + 1) % spp == 0 || s + 1 == total_steps) {
      double nrm = st.core_norm();
      res.period_norms.push_back(nrm);
      std::ostringstream m;
      double el = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      m << "step " << s + 1 << "/" << total_steps << "  norm " << nrm << "  " << el << " s";
      say(m.str());
    }
  }
  res.steps = total_steps;
  res.stats = field_stats(st);
  for (std::size_t w = 0; w < rc.omegas.size(); ++w) res.phasors.push_back(rec.finalize(w));
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<double> AngularScan::dcs() const {
  std::vector<double> out;
  for (const cplx& p : psi) out.push_back(std::norm(p * radius));
  return out;
}

std::vector<AngularScan> angular_scans(const SurfacePhasors& s, const std::vector<double>& radii,
                                       const std::vector<std::string>& planes, int points,
                                       const NtdfOptions& opt) {
  std::vector<AngularScan> scans;
  std::vector<Vec3> pts;
  auto gam = gamma_grid(points);
  for (double r : radii)
    for (const std::string& p : planes) {
      AngularScan sc{r, p, gam, {}};
      auto c = observation_circle(r, euler_plane(p), gam);
      pts.insert(pts.end(), c.begin(), c.end());
      scans.push_back(std::move(sc));
    }
  // one call so each face's moment table is built once
  auto vals = evaluate_distant(s, pts, opt);
  std::size_t off = 0;
  for (auto& sc : scans) {
    sc.psi.assign(vals.begin() + long(off), vals.begin() + long(off + sc.gamma_deg.size()));
    off += sc.gamma_deg.size();
  }
  return scans;
}

std::vector<double> oracle_on_scan(const PartialWaveSolution& sol, const AngularScan& scan,
                                   const Vec3& khat) {
  EulerPlane p = euler_plane(scan.plane);
  std::vector<double> out;
  for (double g : scan.gamma_deg)
    out.push_back(sol.dcs(scattering_angle(euler_direction(p.alpha_deg, p.beta_deg, g), khat)));
  return out;
}

Comparison compare_dcs(const std::vector<double>& a, const std::vector<double>& o, double floor_fraction) {
  if (a.size() != o.size() || a.empty()) throw Error(Errc::shape_mismatch, "profiles differ in length");
  Comparison c;
  c.oracle_max = *std::max_element(o.begin(), o.end());
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (o[i] < floor_fraction * c.oracle_max || o[i] <= 0) continue;
    double r = (a[i] - o[i]) / o[i];
    s += r * r;
    ++c.used;
  }
  c.rms_rel = c.used ? std::sqrt(s / double(c.used)) : 0.0;
  return c;
}

double profile_distance(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw Error(Errc::shape_mismatch, "profiles differ in length");
  double ma = *std::max_element(a.begin(), a.end()), mb = *std::max_element(b.begin(), b.end());
  if (!(ma > 0) || !(mb > 0)) throw Error(Errc::invalid_argument, "profile is identically zero");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double x = a[i] / ma, y = b[i] / mb;
    num += (x - y) * (x - y);
    den += y * y;
  }
  return std::sqrt(num / den);
}

}  // namespace qscat
