#include "qscat/fft.hpp"

#include <mutex>

namespace qscat::fft {

namespace {
// the FFTW planner is not thread-safe
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
}  // namespace

AlignedBuffer make_buffer(std::size_t n) {
  auto* p = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * (n ? n : 1)));
  if (!p) throw std::bad_alloc();
  for (std::size_t i = 0; i < n; ++i) p[i] = 0.0;
  return AlignedBuffer(p);
}

LinePlans::LinePlans(std::size_t n, std::size_t howmany, bool interleaved) : n_(n), howmany_(howmany) {
  auto buf = make_buffer(n * howmany);
  int len = int(n);
  int stride = interleaved ? int(howmany) : 1, dist = interleaved ? 1 : len;
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_many_dft(1, &len, int(howmany), as_fftw(buf.get()), nullptr, stride, dist,
                            as_fftw(buf.get()), nullptr, stride, dist, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_many_dft(1, &len, int(howmany), as_fftw(buf.get()), nullptr, stride, dist,
                            as_fftw(buf.get()), nullptr, stride, dist, FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!fwd_ || !bwd_) throw std::runtime_error("fftw planning failed");
}

LinePlans::~LinePlans() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(fwd_);
  if (bwd_) fftw_destroy_plan(bwd_);
}

void LinePlans::forward(cplx* buf) const { fftw_execute_dft(fwd_, as_fftw(buf), as_fftw(buf)); }
void LinePlans::backward(cplx* buf) const { fftw_execute_dft(bwd_, as_fftw(buf), as_fftw(buf)); }

Plan2D::Plan2D(std::size_t n0, std::size_t n1) {
  auto buf = make_buffer(n0 * n1);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fwd_ = fftw_plan_dft_2d(int(n0), int(n1), as_fftw(buf.get()), as_fftw(buf.get()), FFTW_FORWARD,
                          FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_2d(int(n0), int(n1), as_fftw(buf.get()), as_fftw(buf.get()),
                          FFTW_BACKWARD, FFTW_ESTIMATE);
  if (!fwd_ || !bwd_) throw std::runtime_error("fftw planning failed");
}

Plan2D::~Plan2D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (fwd_) fftw_destroy_plan(fwd_);
  if (bwd_) fftw_destroy_plan(bwd_);
}

void Plan2D::forward(cplx* buf) const { fftw_execute_dft(fwd_, as_fftw(buf), as_fftw(buf)); }
void Plan2D::backward(cplx* buf) const { fftw_execute_dft(bwd_, as_fftw(buf), as_fftw(buf)); }

}  // namespace qscat::fft
