/**
 * @file tensor.hpp
 * @brief Dense row-major tensor of 64-bit floats.
 */
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gfscma {

/// Contiguous row-major array with an explicit shape. Value semantics.
struct Tensor {
  std::vector<int64_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<int64_t> s, std::vector<double> d);

  static Tensor zeros(std::vector<int64_t> s);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int64_t dim(int i) const { return shape[static_cast<size_t>(i)]; }
  int ndim() const { return static_cast<int>(shape.size()); }

  double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }

  /// 2-D access; tensor must be rank 2.
  double& at2(int64_t r, int64_t c) { return data[static_cast<size_t>(r * shape[1] + c)]; }
  double at2(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * shape[1] + c)]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;

  /// Throws if any element is NaN or infinite.
  void check_finite(const char* what) const;

  void fill(double v);
};

int64_t shape_product(const std::vector<int64_t>& s);

}  // namespace gfscma
