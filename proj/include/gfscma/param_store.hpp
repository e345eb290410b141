/**
 * @file param_store.hpp
 * @brief Named parameter tensors with gradients and Adam state.
 */
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gfscma/tensor.hpp"

namespace gfscma {

struct Param {
  Tensor value;
  Tensor grad;
  Tensor m;  // Adam first moment
  Tensor v;  // Adam second moment
  int64_t step = 0;
};

/**
 * Owns the parameters and non-trainable buffers of one network. Map storage
 * keeps iteration order deterministic. An instance is exclusively owned
 * during an update step; copies are cheap enough for snapshotting.
 */
class ParamStore {
 public:
  Tensor& create(const std::string& name, std::vector<int64_t> shape);
  Tensor& create_buffer(const std::string& name, std::vector<int64_t> shape, double init_value);

  bool has(const std::string& name) const { return params_.count(name) > 0; }
  Param& param(const std::string& name);
  const Param& param(const std::string& name) const;
  Tensor& buffer(const std::string& name);
  const Tensor& buffer(const std::string& name) const;

  std::map<std::string, Param>& params() { return params_; }
  const std::map<std::string, Param>& params() const { return params_; }
  std::map<std::string, Tensor>& buffers() { return buffers_; }
  const std::map<std::string, Tensor>& buffers() const { return buffers_; }

  void zero_grads();
  int64_t total_params() const;
  bool empty() const { return params_.empty() && buffers_.empty(); }

  /// True when both stores hold bit-identical values, moments, steps, buffers.
  bool identical(const ParamStore& other) const;

 private:
  std::map<std::string, Param> params_;
  std::map<std::string, Tensor> buffers_;
};

/// Bias-corrected Adam update over every parameter in the store; increments
/// each step counter and clears gradients.
void adam_step(ParamStore& store, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

}  // namespace gfscma
