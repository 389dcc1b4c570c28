#pragma once

#include <fftw3.h>

#include <memory>

#include "qscat/core.hpp"

namespace qscat::fft {

// signed frequency index in [-n/2, n/2)
inline long signed_index(std::size_t l, std::size_t n) {
  return l < (n + 1) / 2 ? long(l) : long(l) - long(n);
}

// smallest n' >= n whose prime factors are all <= 7
inline std::size_t good_size(std::size_t n) {
  for (std::size_t m = std::max<std::size_t>(n, 1);; ++m) {
    std::size_t r = m;
    for (std::size_t f : {2, 3, 5, 7})
      while (r % f == 0) r /= f;
    if (r == 1) return m;
  }
}

struct AlignedDeleter {
  void operator()(cplx* p) const { fftw_free(p); }
};
using AlignedBuffer = std::unique_ptr<cplx[], AlignedDeleter>;
AlignedBuffer make_buffer(std::size_t n);

// In-place batched 1D transforms over `howmany` lines of length n, stored one after another
// or, when interleaved, element l of line b at l * howmany + b.
// Planned with FFTW_ESTIMATE so the algorithm choice is reproducible. Execution on
// any aligned buffer of the same layout is thread-safe. Backward is unnormalized.
class LinePlans {
 public:
  LinePlans(std::size_t n, std::size_t howmany, bool interleaved = false);
  ~LinePlans();
  LinePlans(const LinePlans&) = delete;
  LinePlans& operator=(const LinePlans&) = delete;

  void forward(cplx* buf) const;
  void backward(cplx* buf) const;
  std::size_t length() const { return n_; }
  std::size_t howmany() const { return howmany_; }

 private:
  std::size_t n_, howmany_;
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

// In-place 2D transform of an n0 x n1 row-major array.
class Plan2D {
 public:
  Plan2D(std::size_t n0, std::size_t n1);
  ~Plan2D();
  Plan2D(const Plan2D&) = delete;
  Plan2D& operator=(const Plan2D&) = delete;
  void forward(cplx* buf) const;
  void backward(cplx* buf) const;

 private:
  fftw_plan fwd_ = nullptr, bwd_ = nullptr;
};

}  // namespace qscat::fft
