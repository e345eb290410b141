#include "gfscma/param_store.hpp"

#include <cmath>

#include "gfscma/error.hpp"

namespace gfscma {

Tensor& ParamStore::create(const std::string& name, std::vector<int64_t> shape) {
  if (params_.count(name) || buffers_.count(name)) {
    throw Error("numeric", "duplicate parameter name: " + name);
  }
  Param p;
  p.value = Tensor::zeros(shape);
  p.grad = Tensor::zeros(shape);
  p.m = Tensor::zeros(shape);
  p.v = Tensor::zeros(std::move(shape));
  auto [it, ok] = params_.emplace(name, std::move(p));
  (void)ok;
  return it->second.value;
}

Tensor& ParamStore::create_buffer(const std::string& name, std::vector<int64_t> shape,
                                  double init_value) {
  if (params_.count(name) || buffers_.count(name)) {
    throw Error("numeric", "duplicate buffer name: " + name);
  }
  Tensor t = Tensor::zeros(std::move(shape));
  t.fill(init_value);
  auto [it, ok] = buffers_.emplace(name, std::move(t));
  (void)ok;
  return it->second;
}

Param& ParamStore::param(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("numeric", "unknown parameter: " + name);
  return it->second;
}

const Param& ParamStore::param(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error("numeric", "unknown parameter: " + name);
  return it->second;
}

Tensor& ParamStore::buffer(const std::string& name) {
  auto it = buffers_.find(name);
  if (it == buffers_.end()) throw Error("numeric", "unknown buffer: " + name);
  return it->second;
}

const Tensor& ParamStore::buffer(const std::string& name) const {
  auto it = buffers_.find(name);
  if (it == buffers_.end()) throw Error("numeric", "unknown buffer: " + name);
  return it->second;
}

void ParamStore::zero_grads() {
  for (auto& [name, p] : params_) p.grad.fill(0.0);
}

int64_t ParamStore::total_params() const {
  int64_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

bool ParamStore::identical(const ParamStore& other) const {
  if (params_.size() != other.params_.size() || buffers_.size() != other.buffers_.size()) {
    return false;
  }
  for (const auto& [name, p] : params_) {
    auto it = other.params_.find(name);
    if (it == other.params_.end()) return false;
    const Param& q = it->second;
    if (p.step != q.step || p.value.data != q.value.data || p.m.data != q.m.data ||
        p.v.data != q.v.data) {
      return false;
    }
  }
  for (const auto& [name, b] : buffers_) {
    auto it = other.buffers_.find(name);
    if (it == other.buffers_.end() || it->second.data != b.data) return false;
  }
  return true;
}

void adam_step(ParamStore& store, double learning_rate, double beta1, double beta2, double eps) {
  if (!(learning_rate > 0.0)) {
    throw Error("config_invalid", "adam_step: learning rate must be positive");
  }
  for (auto& [name, p] : store.params()) {
    p.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(p.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(p.step));
    const int64_t n = p.value.size();
    for (int64_t i = 0; i < n; ++i) {
      const double g = p.grad[i];
      p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * g;
      p.v[i] = beta2 * p.v[i] + (1.0 - beta2) * g * g;
      const double mhat = p.m[i] / bc1;
      const double vhat = p.v[i] / bc2;
      p.value[i] -= learning_rate * mhat / (std::sqrt(vhat) + eps);
    }
    p.grad.fill(0.0);
  }
}

}  // namespace gfscma
