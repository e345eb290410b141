/**
 * @file layers.hpp
 * @brief Layer kinds with reverse-mode differentiation.
 *
 * Parameters live in a ParamStore under names fixed at layer construction;
 * layer objects themselves hold only structure. forward() in train mode
 * caches what backward() needs; backward() accumulates parameter gradients
 * into the store and returns the gradient with respect to the layer input,
 * so networks can be chained end to end.
 */
#pragma once

#include <memory>
#include <string>
#include <vector>

#include "gfscma/param_store.hpp"
#include "gfscma/rng.hpp"
#include "gfscma/tensor.hpp"

namespace gfscma {

enum class Mode { kTrain, kEval };

/// Per-layer cache; `children` nests for composite layers.
struct LayerCache {
  std::vector<Tensor> t;
  std::vector<LayerCache> children;
};

class Layer {
 public:
  virtual ~Layer() = default;
  /// Registers this layer's parameters/buffers.
  virtual void init(ParamStore& ps) const {}
  /// Fills fresh parameter values. Called once after init, in layer order.
  virtual void init_weights(ParamStore& ps, Rng& rng) const {}
  virtual Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                         LayerCache* cache) const = 0;
  virtual Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const = 0;
  virtual int64_t param_count() const { return 0; }
  virtual std::string describe() const = 0;
};

/// y[b,o] = b_o + sum_i W[o,i] x[b,i] on rows of a [B, in] tensor.
class Dense : public Layer {
 public:
  Dense(std::string prefix, int in_dim, int out_dim);
  void init(ParamStore& ps) const override;
  void init_weights(ParamStore& ps, Rng& rng) const override;
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  int64_t param_count() const override;
  std::string describe() const override;

 private:
  std::string w_name_, b_name_;
  int in_dim_, out_dim_;
};

/// Slot-shared affine map: [B, L, D] -> [B, L, K] with kernel width D and
/// stride D (each kernel spans exactly one slot; weights shared over slots).
class Conv1d : public Layer {
 public:
  Conv1d(std::string prefix, int in_width, int kernels);
  void init(ParamStore& ps) const override;
  void init_weights(ParamStore& ps, Rng& rng) const override;
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  int64_t param_count() const override;
  std::string describe() const override;

 private:
  std::string w_name_, b_name_;
  int in_width_, kernels_;
};

/// Per-feature batch normalization over the last axis; leading axes are the
/// batch. Train mode uses biased batch statistics and updates running
/// statistics with momentum 0.9; eval mode uses the running statistics.
class BatchNorm : public Layer {
 public:
  BatchNorm(std::string prefix, int features, double momentum = 0.9, double eps = 1e-5);
  void init(ParamStore& ps) const override;
  void init_weights(ParamStore& ps, Rng& rng) const override;
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  int64_t param_count() const override;
  std::string describe() const override;

 private:
  std::string gamma_name_, beta_name_, rmean_name_, rvar_name_;
  int features_;
  double momentum_, eps_;
};

class Relu : public Layer {
 public:
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  std::string describe() const override { return "relu"; }
};

class Sigmoid : public Layer {
 public:
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  std::string describe() const override { return "sigmoid"; }
};

/// Inverted dropout: train mode zeroes entries with probability p and scales
/// survivors by 1/(1-p); eval mode and p == 0 are exactly identity.
class Dropout : public Layer {
 public:
  explicit Dropout(double p);
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  std::string describe() const override;

 private:
  double p_;
};

/// [B, L, D] -> [B, L*D].
class Flatten : public Layer {
 public:
  Flatten(int l_slots, int width) : l_slots_(l_slots), width_(width) {}
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  std::string describe() const override;

 private:
  int l_slots_, width_;
};

class Sequential : public Layer {
 public:
  Sequential() = default;
  void add(std::unique_ptr<Layer> layer) { layers_.push_back(std::move(layer)); }
  size_t size() const { return layers_.size(); }
  const Layer& layer(size_t i) const { return *layers_[i]; }

  void init(ParamStore& ps) const override;
  void init_weights(ParamStore& ps, Rng& rng) const override;
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  int64_t param_count() const override;
  std::string describe() const override;

 private:
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// y = x + inner(x); the skip spans the whole inner block.
class Residual : public Layer {
 public:
  explicit Residual(std::unique_ptr<Sequential> inner) : inner_(std::move(inner)) {}
  void init(ParamStore& ps) const override { inner_->init(ps); }
  void init_weights(ParamStore& ps, Rng& rng) const override { inner_->init_weights(ps, rng); }
  Tensor forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                 LayerCache* cache) const override;
  Tensor backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const override;
  int64_t param_count() const override { return inner_->param_count(); }
  std::string describe() const override { return "residual{" + inner_->describe() + "}"; }

 private:
  std::unique_ptr<Sequential> inner_;
};

/// Glorot-uniform bound for a weight matrix.
double glorot_bound(int fan_in, int fan_out);

}  // namespace gfscma
