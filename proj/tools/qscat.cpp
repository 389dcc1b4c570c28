// qscat: scatter, ntdf-validate, oracle-compare, print-stability
// exit codes: 0 pass, 1 error, 2 acceptance fail

#include <omp.h>
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qscat/run.hpp"

#ifndef QSCAT_VERSION
#define QSCAT_VERSION "unknown"
#endif

using namespace qscat;
namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream o;
  for (unsigned i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return o.str();
}

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

Config load_config(const Common& c) {
  Config cfg = c.config.empty() ? Config() : Config::load(c.config);
  for (const std::string& kv : c.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(Errc::config_error, "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (const char* w = std::getenv("QSCAT_WORKERS")) cfg.set("parallel.workers", w);
  return cfg;
}

std::string out_dir(const Common& c, const Config& cfg) {
  std::string d = !c.out.empty() ? c.out : cfg.get_string("output.dir", ".");
  fs::create_directories(d);
  return d;
}

std::string radius_tag(double r) {
  std::ostringstream o;
  o << r;
  return o.str();
}

struct Manifest {
  json j;
  explicit Manifest(const Config& cfg, const std::string& command) {
    j["command"] = command;
    j["version"] = QSCAT_VERSION;
    json c = json::object();
    for (auto& [k, v] : cfg.entries()) c[k] = v;
    j["config"] = c;
    j["outputs"] = json::array();
  }
  void add(const std::string& path) {
    j["outputs"].push_back({{"path", fs::path(path).filename().string()}, {"sha256", sha256_file(path)}});
  }
  void write(const std::string& path) {
    std::ofstream o(path);
    o << j.dump(2) << "\n";
  }
};

void log_line(const std::string& m) { std::cerr << "[qscat] " << m << std::endl; }

int cmd_scatter(const Common& c) {
  Config cfg = load_config(c);
  RunConfig rc = RunConfig::from(cfg);
  std::string dir = out_dir(c, cfg), prefix = cfg.get_string("output.prefix", "scatter");
  auto t0 = std::chrono::system_clock::now();
  ScatterResult res = run_scatter(rc, log_line);
  Manifest man(cfg, "scatter");
  NtdfOptions nopt;
  nopt.series_tol = rc.series_tol;
  for (std::size_t w = 0; w < res.phasors.size(); ++w) {
    std::string tag = res.phasors.size() > 1 ? "_w" + std::to_string(w) : "";
    std::string arch = dir + "/" + prefix + tag + ".phs";
    write_archive(arch, res.phasors[w]);
    man.add(arch);
    man.add(arch + ".meta");
    auto scans = angular_scans(res.phasors[w], rc.radii, rc.planes, rc.scan_points, nopt);
    for (const AngularScan& s : scans) {
      std::vector<ScanRow> rows;
      for (std::size_t i = 0; i < s.psi.size(); ++i) rows.push_back({s.gamma_deg[i], s.psi[i]});
      std::string scan = dir + "/" + prefix + tag + "_r" + radius_tag(s.radius) + "_" + s.plane + ".csv";
      write_scan_csv(scan, rows);
      man.add(scan);
      std::string dcs = dir + "/" + prefix + tag + "_dcs_r" + radius_tag(s.radius) + "_" + s.plane + ".csv";
      write_dcs_csv(dcs, s.gamma_deg, s.dcs());
      man.add(dcs);
    }
  }
  man.j["wall_clock_start"] = std::chrono::duration<double>(t0.time_since_epoch()).count();
  man.j["wall_seconds"] = res.wall_seconds;
  man.j["dtau"] = res.dtau;
  man.j["stability_bound"] = res.stability_bound;
  man.j["steps"] = res.steps;
  man.j["topology"] = {rc.stepper.topology.p[0], rc.stepper.topology.p[1], rc.stepper.topology.p[2]};
  man.j["sf_max"] = res.stats.sf_max;
  man.write(dir + "/" + prefix + "_manifest.json");
  log_line("wrote " + std::to_string(man.j["outputs"].size()) + " files to " + dir);
  return 0;
}

int cmd_ntdf_validate(const Common& c) {
  Config cfg = load_config(c);
  RunConfig rc = RunConfig::from(cfg);  // rejects unknown keys
  double h = cfg.get_double("validate.spacing", pi / 10);
  auto hw = cfg.get_list("validate.half_widths", {41.3119, 36.5996, 41.3119});
  if (hw.size() != 3) throw Error(Errc::config_error, "validate.half_widths needs three values");
  // snap to whole cells so box faces sit on nodes
  std::array<double, 3> box;
  for (int a = 0; a < 3; ++a) box[a] = std::round(2 * hw[a] / h) * h / 2;
  double k = cfg.get_double("validate.k", 1.0);
  int margin = int(cfg.get_int("validate.margin", 40)), taper = int(cfg.get_int("validate.taper", 20));
  double amp_tol = cfg.get_double("validate.amp_tol", 0.02), ph_tol = cfg.get_double("validate.phase_tol", 0.05);
  auto radii = cfg.get_list("ntdf.radii", {100.0, 2000.0, 10000.0});
  auto planes = cfg.get_words("ntdf.planes", {"xy", "yz", "xz"});
  int points = int(cfg.get_int("ntdf.points", 72));
  if (rc.workers > 0) omp_set_num_threads(rc.workers);

  SurfacePhasors s = spherical_wave_surface(box, h, k, margin, taper);
  NtdfOptions opt;
  opt.series_tol = rc.series_tol;
  auto scans = angular_scans(s, radii, planes, points, opt);
  std::string dir = out_dir(c, cfg), prefix = cfg.get_string("output.prefix", "ntdf_validate");
  std::string csv = dir + "/" + prefix + ".csv";
  std::ofstream o(csv);
  o << "radius,plane,gamma_deg,abs_r_psi,phase_err\n" << std::scientific << std::setprecision(16);
  bool pass = true;
  double worst_amp = 0, worst_ph = 0;
  for (const AngularScan& sc : scans)
    for (std::size_t i = 0; i < sc.psi.size(); ++i) {
      cplx u = sc.psi[i] * sc.radius * std::polar(1.0, -k * sc.radius);
      double amp = std::abs(u), ph = std::abs(std::arg(u));
      worst_amp = std::max(worst_amp, std::abs(amp - 1));
      worst_ph = std::max(worst_ph, ph);
      if (std::abs(amp - 1) > amp_tol || ph > ph_tol) pass = false;
      o << sc.radius << "," << sc.plane << "," << sc.gamma_deg[i] << "," << amp << "," << ph << "\n";
    }
  o.close();
  Manifest man(cfg, "ntdf-validate");
  man.add(csv);
  man.j["max_amp_err"] = worst_amp;
  man.j["max_phase_err"] = worst_ph;
  man.j["pass"] = pass;
  man.write(dir + "/" + prefix + "_manifest.json");
  std::cout << (pass ? "PASS" : "FAIL") << " ntdf-validate: max ||r psi| - 1| = " << worst_amp
            << ", max phase error = " << worst_ph << " rad over " << scans.size() << " circles\n";
  return pass ? 0 : 2;
}

int cmd_oracle_compare(const Common& c, const std::string& archive_flag) {
  Config cfg = load_config(c);
  RunConfig rc = RunConfig::from(cfg);
  std::string archive = !archive_flag.empty() ? archive_flag : cfg.get_string("archive.path", "");
  if (archive.empty()) throw Error(Errc::io_error, "no phasor archive given (--archive or archive.path)");
  if (!fs::exists(archive)) throw Error(Errc::io_error, "missing phasor archive " + archive);
  SurfacePhasors s = read_archive(archive);
  double k = std::sqrt(rc.omegas.front());
  if (std::abs(k - s.k) > 1e-9 * std::max(1.0, k))
    throw Error(Errc::invalid_argument, "archive k = " + std::to_string(s.k) + " but oracle k = " +
                                            std::to_string(k));
  if (rc.workers > 0) omp_set_num_threads(rc.workers);
  double radius = cfg.get_double("compare.radius", 2e4);
  std::string plane = cfg.get_string("compare.plane", "xy");
  double tol = cfg.get_double("compare.tolerance", 0.05), floor = cfg.get_double("compare.floor", 0.01);
  NtdfOptions opt;
  opt.series_tol = rc.series_tol;
  AngularScan scan = angular_scans(s, {radius}, {plane}, rc.scan_points, opt).front();
  auto solver = scan.dcs();
  auto sol = phase_shifts(rc.central_potential(), k, rc.oracle);
  auto oracle = oracle_on_scan(sol, scan, rc.dir.khat);
  std::string dir = out_dir(c, cfg), prefix = cfg.get_string("output.prefix", "oracle_compare");
  std::string csv = dir + "/" + prefix + ".csv";
  {
    std::ofstream o(csv);
    o << "gamma_deg,solver_dsigma_domega,oracle_dsigma_domega\n" << std::scientific << std::setprecision(16);
    for (std::size_t i = 0; i < solver.size(); ++i)
      o << scan.gamma_deg[i] << "," << solver[i] << "," << oracle[i] << "\n";
  }
  bool pass;
  std::ostringstream summary;
  Comparison cmp;
  const double smax = *std::max_element(solver.begin(), solver.end());
  if (rc.potential_kind == "none" || *std::max_element(oracle.begin(), oracle.end()) < 1e-12) {
    // nothing scatters: absolute check
    pass = smax <= 1e-3;
    summary << "no scatterer: max solver dsigma/dOmega = " << smax << " (threshold 1e-3)";
  } else {
    cmp = compare_dcs(solver, oracle, floor);
    pass = cmp.rms_rel <= tol;
    summary << "RMS relative deviation " << cmp.rms_rel << " over " << cmp.used << " points (tolerance "
            << tol << ")";
  }
  Manifest man(cfg, "oracle-compare");
  man.add(csv);
  man.j["archive"] = archive;
  man.j["rms_rel"] = cmp.rms_rel;
  man.j["pass"] = pass;
  man.write(dir + "/" + prefix + "_manifest.json");
  std::cout << (pass ? "PASS" : "FAIL") << " oracle-compare: " << summary.str() << "\n";
  return pass ? 0 : 2;
}

int cmd_print_stability(const Common& c) {
  Config cfg = load_config(c);
  RunConfig rc = RunConfig::from(cfg);
  double vmax = rc.potential().empty() ? 0.0 : rc.potential().vmax;
  Vec3 h;
  for (int a = 0; a < 3; ++a) h[a] = rc.grid.active(a) ? rc.grid.spacing[a] : INFINITY;
  double bp = stability_dtau_pstd(h, vmax), bf = stability_dtau_fdtd(h, vmax);
  double bound = rc.stepper.kind == StepperKind::pstd ? bp : bf;
  std::cout << std::setprecision(10);
  std::cout << "spacing      " << rc.grid.spacing[0] << "\n";
  std::cout << "vmax         " << vmax << "\n";
  std::cout << "pstd bound   " << bp << "\n";
  std::cout << "fdtd bound   " << bf << "\n";
  std::cout << "dtau         " << rc.grid.dtau << " (" << stepper_name(rc.stepper.kind)
            << (rc.grid.dtau <= bound ? ", within bound" : ", EXCEEDS bound") << ")\n";
  std::cout << "eta          " << phase_eta(rc.grid.dtau) << "\n";
  return rc.grid.dtau <= bound ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain quantum scattering solver"};
  app.require_subcommand(1);
  Common common;
  std::string archive;
  auto add_common = [&](CLI::App* s) {
    s->add_option("-c,--config", common.config, "config file (key = value)");
    s->add_option("-s,--set", common.sets, "override a config key: key=value")->take_all();
    s->add_option("-o,--out", common.out, "output directory (default output.dir or .)");
  };
  auto* sc = app.add_subcommand("scatter", "run the internal model and emit phasors and scans");
  auto* nv = app.add_subcommand("ntdf-validate", "reconstruct an analytic spherical wave");
  auto* oc = app.add_subcommand("oracle-compare", "compare a scatter archive with partial waves");
  auto* ps = app.add_subcommand("print-stability", "print stability bounds for a config");
  for (auto* s : {sc, nv, oc, ps}) add_common(s);
  oc->add_option("-a,--archive", archive, "phasor archive from scatter");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }
  try {
    if (*sc) return cmd_scatter(common);
    if (*nv) return cmd_ntdf_validate(common);
    if (*oc) return cmd_oracle_compare(common, archive);
    if (*ps) return cmd_print_stability(common);
  } catch (const Error& e) {
    std::cerr << "qscat: error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "qscat: error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
