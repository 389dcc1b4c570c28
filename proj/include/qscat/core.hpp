#pragma once

#include <algorithm>
#include <array>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qscat {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Idx3 = std::array<long, 3>;

inline constexpr double pi = 3.14159265358979323846;

enum class Errc {
  invalid_argument,
  geometry_infeasible,
  potential_support_violation,
  out_of_range,
  shape_mismatch,
  instability,
  observation_inside_box,
  cell_size_violation,
  zero_incident_phasor,
  coincident_points,
  non_convergent,
  missing_neighbor,
  config_error,
  io_error,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc c, const std::string& msg)
      : std::runtime_error(std::string(errc_name(c)) + ": " + msg), code_(c) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

// Row-major 3D array, k fastest. Extent 1 marks an inactive axis.
template <class T>
class Array3 {
 public:
  Array3() = default;
  Array3(std::array<std::size_t, 3> n, T fill = T{})
      : n_(n), data_(n[0] * n[1] * n[2], fill) {}

  const std::array<std::size_t, 3>& shape() const { return n_; }
  std::size_t extent(int a) const { return n_[a]; }
  std::size_t size() const { return data_.size(); }

  std::size_t flat(std::size_t i, std::size_t j, std::size_t k) const {
    return (i * n_[1] + j) * n_[2] + k;
  }
  std::array<std::size_t, 3> unflat(std::size_t f) const {
    std::size_t k = f % n_[2];
    std::size_t j = (f / n_[2]) % n_[1];
    return {f / (n_[1] * n_[2]), j, k};
  }
  // memory stride of axis a
  std::size_t stride(int a) const {
    return a == 0 ? n_[1] * n_[2] : (a == 1 ? n_[2] : 1);
  }

  T& operator()(std::size_t i, std::size_t j, std::size_t k) { return data_[flat(i, j, k)]; }
  const T& operator()(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[flat(i, j, k)];
  }
  T& operator[](std::size_t f) { return data_[f]; }
  const T& operator[](std::size_t f) const { return data_[f]; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& vec() { return data_; }
  const std::vector<T>& vec() const { return data_; }

  void fill(const T& v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Array3& o) const { return n_ == o.n_; }

 private:
  std::array<std::size_t, 3> n_{0, 0, 0};
  std::vector<T> data_;
};

using CField = Array3<cplx>;
using RField = Array3<double>;

double norm2(const CField& f);
double max_abs(const CField& f);

}  // namespace qscat
