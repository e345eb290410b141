#include "gfscma/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "gfscma/error.hpp"

namespace gfscma {

int64_t shape_product(const std::vector<int64_t>& s) {
  int64_t p = 1;
  for (int64_t d : s) p *= d;
  return p;
}

Tensor::Tensor(std::vector<int64_t> s, std::vector<double> d)
    : shape(std::move(s)), data(std::move(d)) {
  if (shape_product(shape) != static_cast<int64_t>(data.size())) {
    throw Error("numeric", "tensor data length does not match shape " + shape_str());
  }
}

Tensor Tensor::zeros(std::vector<int64_t> s) {
  Tensor t;
  t.shape = std::move(s);
  t.data.assign(static_cast<size_t>(shape_product(t.shape)), 0.0);
  return t;
}

std::string Tensor::shape_str() const {
  std::string out = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

void Tensor::check_finite(const char* what) const {
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw Error("numeric", std::string(what) + ": non-finite value encountered");
    }
  }
}

void Tensor::fill(double v) {
  for (double& x : data) x = v;
}

}  // namespace gfscma
