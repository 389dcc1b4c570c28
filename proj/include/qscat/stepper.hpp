#pragma once

#include <memory>

#include "qscat/boundary.hpp"
#include "qscat/fft.hpp"
#include "qscat/lattice.hpp"
#include "qscat/parallel.hpp"
#include "qscat/source.hpp"
#include "qscat/stability.hpp"
#include "qscat/tfsf.hpp"

namespace qscat {

// half-open index box
struct Box3 {
  std::array<long, 3> lo{0, 0, 0};
  std::array<long, 3> hi{0, 0, 0};
  static Box3 full(const std::array<std::size_t, 3>& n) {
    return {{0, 0, 0}, {long(n[0]), long(n[1]), long(n[2])}};
  }
};

// Sum over active axes of IFFT(-k^2 FFT(psi)) along each axis, wavenumbers in [-N/2, N/2).
class SpectralLaplacian {
 public:
  SpectralLaplacian(const std::array<std::size_t, 3>& n, const Vec3& spacing);

  // OpenMP over fixed batches of lines; only lines crossing `box` are transformed and only
  // `box` entries of out are written.
  void apply(const CField& in, CField& out) const;
  void apply(const CField& in, CField& out, const Box3& box) const;
  // one line at a time, single thread
  void apply_serial(const CField& in, CField& out) const;

  const std::array<std::size_t, 3>& shape() const { return n_; }

 private:
  struct Axis {
    bool active = false;
    std::size_t n = 1;
    std::vector<double> factor;  // -k^2 / N
    std::unique_ptr<fft::LinePlans> batch, single;
  };
  void axis_pass(int a, const CField& in, CField& out, const Box3& box, bool accumulate) const;
  std::array<std::size_t, 3> n_;
  std::array<Axis, 3> ax_;
  static constexpr std::size_t lines_per_batch = 16;
};

CField laplacian_pstd(const CField& f, const Vec3& spacing);
CField laplacian_pstd_serial(const CField& f, const Vec3& spacing);

// 8th-order stencil with periodic wrap
void laplacian_fdtd(const CField& in, CField& out, const Vec3& spacing);
void laplacian_fdtd_serial(const CField& in, CField& out, const Vec3& spacing);
CField laplacian_fdtd(const CField& f, const Vec3& spacing);

enum class StartMode { cold, warm };

struct StepperOptions {
  StepperKind kind = StepperKind::pstd;
  bool monochromatic_eta = true;
  StartMode start = StartMode::warm;
  double potential_ramp_periods = 1.0;  // 0 switches V on at tau = 0
  Topology topology;                    // PSTD only; 1x1x1 for a single domain
  bool enforce_stability_bound = true;
  bool serial_kernels = false;          // run the reference kernels instead of OpenMP ones
};

struct Block {
  Subdomain sd;
  WaveField state;
  CField work;
  Box3 core;  // local core box
  std::array<std::vector<double>, 3> gamma;  // local absorber factors
  // sparse potential: local flat index, V/E0 (static) and reduced position
  std::vector<std::size_t> v_flat;
  std::vector<double> v_val;
  std::vector<Vec3> v_pos;
  // sparse TF/SF terms
  std::vector<std::size_t> s_flat;
  std::vector<cplx> s0;
  std::vector<double> s_d, s_lap, s_kgrad;
};

class Stepper {
 public:
  // src may be null (no incident wave). The source object must outlive the stepper and is
  // advanced by it in pulsed mode.
  Stepper(const ModelGeometry& g, const AbsorberMask& mask, const PotentialSpec& v,
          IncidentSource1D* src, const StepperOptions& opt);

  void initialize();  // cold or warm per options
  void set_state(const CField& prev, const CField& cur, long n);
  void step();

  long n() const { return n_; }
  double tau() const { return double(n_) * dtau_; }
  double dtau() const { return dtau_; }
  double eta() const { return eta_; }
  double stability_bound() const { return bound_; }
  const ModelGeometry& geometry() const { return geom_; }
  const StepperOptions& options() const { return opt_; }
  const TaperMask& taper() const { return taper_; }
  const IncidentSource1D* source() const { return src_; }
  const Idx3& incident_origin() const { return origin_; }

  const std::vector<Block>& blocks() const { return blocks_; }
  std::vector<Subdomain> subdomains() const;
  CField gather_cur() const;
  CField gather_prev() const;
  double core_norm() const;  // L2 over all cores of the current level (grid sum)

 private:
  void step_pstd();
  void step_fdtd();
  void exchange();
  double ramp() const;
  void refresh_time_dependent_potential();
  void check_finite(const Block& b, double sum) const;

  ModelGeometry geom_;
  StepperOptions opt_;
  PotentialSpec pot_;
  IncidentSource1D* src_;
  TaperMask taper_;
  Idx3 origin_{0, 0, 0};
  double dtau_, eta_, bound_;
  long n_ = 1;
  std::vector<Block> blocks_;
  std::vector<std::unique_ptr<SpectralLaplacian>> lap_;
  HaloWeights weights_;
  FdtdCorrectionPlan fdtd_plan_;
};

}  // namespace qscat
