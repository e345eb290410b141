#include "gfscma/layers.hpp"

#include <cmath>

#include "gfscma/error.hpp"

namespace gfscma {

double glorot_bound(int fan_in, int fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

// ---------------------------------------------------------------- Dense

Dense::Dense(std::string prefix, int in_dim, int out_dim)
    : w_name_(prefix + ".w"), b_name_(prefix + ".b"), in_dim_(in_dim), out_dim_(out_dim) {
  if (in_dim < 1 || out_dim < 1) throw Error("config_invalid", "dense: nonpositive size");
}

void Dense::init(ParamStore& ps) const {
  ps.create(w_name_, {out_dim_, in_dim_});
  ps.create(b_name_, {out_dim_});
}

void Dense::init_weights(ParamStore& ps, Rng& rng) const {
  Tensor& w = ps.param(w_name_).value;
  const double bound = glorot_bound(in_dim_, out_dim_);
  for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.next_uniform(-bound, bound);
  // biases stay zero
}

Tensor Dense::forward(ParamStore& ps, const Tensor& x, Mode, Rng*, LayerCache* cache) const {
  if (x.ndim() != 2 || x.dim(1) != in_dim_) {
    throw Error("numeric", "dense: input shape " + x.shape_str() + " does not match in_dim " +
                               std::to_string(in_dim_));
  }
  const Tensor& w = ps.param(w_name_).value;
  const Tensor& b = ps.param(b_name_).value;
  const int64_t batch = x.dim(0);
  Tensor y = Tensor::zeros({batch, out_dim_});
  for (int64_t r = 0; r < batch; ++r) {
    const double* xr = x.data.data() + r * in_dim_;
    double* yr = y.data.data() + r * out_dim_;
    for (int o = 0; o < out_dim_; ++o) {
      const double* wo = w.data.data() + static_cast<int64_t>(o) * in_dim_;
      double acc = b[o];
      for (int i = 0; i < in_dim_; ++i) acc += wo[i] * xr[i];
      yr[o] = acc;
    }
  }
  if (cache) cache->t = {x};
  return y;
}

Tensor Dense::backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.t.empty()) throw Error("numeric", "dense: backward without cached forward");
  const Tensor& x = cache.t[0];
  Param& w = ps.param(w_name_);
  Param& b = ps.param(b_name_);
  const int64_t batch = x.dim(0);
  Tensor gin = Tensor::zeros({batch, in_dim_});
  for (int64_t r = 0; r < batch; ++r) {
    const double* xr = x.data.data() + r * in_dim_;
    const double* gr = grad_out.data.data() + r * out_dim_;
    double* gxr = gin.data.data() + r * in_dim_;
    for (int o = 0; o < out_dim_; ++o) {
      const double g = gr[o];
      if (g == 0.0) continue;
      const double* wo = w.value.data.data() + static_cast<int64_t>(o) * in_dim_;
      double* gwo = w.grad.data.data() + static_cast<int64_t>(o) * in_dim_;
      for (int i = 0; i < in_dim_; ++i) {
        gwo[i] += g * xr[i];
        gxr[i] += g * wo[i];
      }
      b.grad[o] += g;
    }
  }
  return gin;
}

int64_t Dense::param_count() const {
  return static_cast<int64_t>(out_dim_) * in_dim_ + out_dim_;
}

std::string Dense::describe() const {
  return "dense(in=" + std::to_string(in_dim_) + ", out=" + std::to_string(out_dim_) + ")";
}

// ---------------------------------------------------------------- Conv1d

Conv1d::Conv1d(std::string prefix, int in_width, int kernels)
    : w_name_(prefix + ".w"), b_name_(prefix + ".b"), in_width_(in_width), kernels_(kernels) {
  if (in_width < 1 || kernels < 1) throw Error("config_invalid", "conv1d: nonpositive size");
}

void Conv1d::init(ParamStore& ps) const {
  ps.create(w_name_, {kernels_, in_width_});
  ps.create(b_name_, {kernels_});
}

void Conv1d::init_weights(ParamStore& ps, Rng& rng) const {
  Tensor& w = ps.param(w_name_).value;
  const double bound = glorot_bound(in_width_, kernels_);
  for (int64_t i = 0; i < w.size(); ++i) w[i] = rng.next_uniform(-bound, bound);
}

Tensor Conv1d::forward(ParamStore& ps, const Tensor& x, Mode, Rng*, LayerCache* cache) const {
  if (x.ndim() != 3 || x.dim(2) != in_width_) {
    throw Error("numeric", "conv1d: input shape " + x.shape_str() + " does not match width " +
                               std::to_string(in_width_));
  }
  const Tensor& w = ps.param(w_name_).value;
  const Tensor& b = ps.param(b_name_).value;
  const int64_t batch = x.dim(0), slots = x.dim(1);
  Tensor y = Tensor::zeros({batch, slots, kernels_});
  for (int64_t s = 0; s < batch * slots; ++s) {
    const double* xs = x.data.data() + s * in_width_;
    double* ys = y.data.data() + s * kernels_;
    for (int k = 0; k < kernels_; ++k) {
      const double* wk = w.data.data() + static_cast<int64_t>(k) * in_width_;
      double acc = b[k];
      for (int d = 0; d < in_width_; ++d) acc += wk[d] * xs[d];
      ys[k] = acc;
    }
  }
  if (cache) cache->t = {x};
  return y;
}

Tensor Conv1d::backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.t.empty()) throw Error("numeric", "conv1d: backward without cached forward");
  const Tensor& x = cache.t[0];
  Param& w = ps.param(w_name_);
  Param& b = ps.param(b_name_);
  const int64_t batch = x.dim(0), slots = x.dim(1);
  Tensor gin = Tensor::zeros({batch, slots, in_width_});
  for (int64_t s = 0; s < batch * slots; ++s) {
    const double* xs = x.data.data() + s * in_width_;
    const double* gs = grad_out.data.data() + s * kernels_;
    double* gxs = gin.data.data() + s * in_width_;
    for (int k = 0; k < kernels_; ++k) {
      const double g = gs[k];
      if (g == 0.0) continue;
      const double* wk = w.value.data.data() + static_cast<int64_t>(k) * in_width_;
      double* gwk = w.grad.data.data() + static_cast<int64_t>(k) * in_width_;
      for (int d = 0; d < in_width_; ++d) {
        gwk[d] += g * xs[d];
        gxs[d] += g * wk[d];
      }
      b.grad[k] += g;
    }
  }
  return gin;
}

int64_t Conv1d::param_count() const {
  return static_cast<int64_t>(kernels_) * in_width_ + kernels_;
}

std::string Conv1d::describe() const {
  return "conv1d(width=" + std::to_string(in_width_) + ", kernels=" + std::to_string(kernels_) +
         ")";
}

// ---------------------------------------------------------------- BatchNorm

BatchNorm::BatchNorm(std::string prefix, int features, double momentum, double eps)
    : gamma_name_(prefix + ".gamma"),
      beta_name_(prefix + ".beta"),
      rmean_name_(prefix + ".running_mean"),
      rvar_name_(prefix + ".running_var"),
      features_(features),
      momentum_(momentum),
      eps_(eps) {
  if (features < 1) throw Error("config_invalid", "batchnorm: nonpositive feature count");
}

void BatchNorm::init(ParamStore& ps) const {
  ps.create(gamma_name_, {features_});
  ps.create(beta_name_, {features_});
  ps.create_buffer(rmean_name_, {features_}, 0.0);
  ps.create_buffer(rvar_name_, {features_}, 1.0);
}

void BatchNorm::init_weights(ParamStore& ps, Rng&) const {
  ps.param(gamma_name_).value.fill(1.0);
}

Tensor BatchNorm::forward(ParamStore& ps, const Tensor& x, Mode mode, Rng*,
                          LayerCache* cache) const {
  if (x.ndim() < 2 || x.shape.back() != features_) {
    throw Error("numeric", "batchnorm: input shape " + x.shape_str() +
                               " does not end in feature dim " + std::to_string(features_));
  }
  const int64_t rows = x.size() / features_;
  const Tensor& gamma = ps.param(gamma_name_).value;
  const Tensor& beta = ps.param(beta_name_).value;
  Tensor y = Tensor::zeros(x.shape);
  if (mode == Mode::kEval) {
    const Tensor& rmean = ps.buffer(rmean_name_);
    const Tensor& rvar = ps.buffer(rvar_name_);
    for (int64_t r = 0; r < rows; ++r) {
      const double* xr = x.data.data() + r * features_;
      double* yr = y.data.data() + r * features_;
      for (int f = 0; f < features_; ++f) {
        yr[f] = gamma[f] * (xr[f] - rmean[f]) / std::sqrt(rvar[f] + eps_) + beta[f];
      }
    }
    return y;
  }
  if (rows < 1) throw Error("numeric", "batchnorm: empty batch");
  std::vector<double> mean(static_cast<size_t>(features_), 0.0);
  std::vector<double> var(static_cast<size_t>(features_), 0.0);
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * features_;
    for (int f = 0; f < features_; ++f) mean[static_cast<size_t>(f)] += xr[f];
  }
  for (int f = 0; f < features_; ++f) mean[static_cast<size_t>(f)] /= static_cast<double>(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * features_;
    for (int f = 0; f < features_; ++f) {
      const double d = xr[f] - mean[static_cast<size_t>(f)];
      var[static_cast<size_t>(f)] += d * d;
    }
  }
  for (int f = 0; f < features_; ++f) var[static_cast<size_t>(f)] /= static_cast<double>(rows);

  Tensor xhat = Tensor::zeros(x.shape);
  Tensor inv_std = Tensor::zeros({features_});
  for (int f = 0; f < features_; ++f) {
    inv_std[f] = 1.0 / std::sqrt(var[static_cast<size_t>(f)] + eps_);
  }
  for (int64_t r = 0; r < rows; ++r) {
    const double* xr = x.data.data() + r * features_;
    double* hr = xhat.data.data() + r * features_;
    double* yr = y.data.data() + r * features_;
    for (int f = 0; f < features_; ++f) {
      hr[f] = (xr[f] - mean[static_cast<size_t>(f)]) * inv_std[f];
      yr[f] = gamma[f] * hr[f] + beta[f];
    }
  }
  Tensor& rmean = ps.buffer(rmean_name_);
  Tensor& rvar = ps.buffer(rvar_name_);
  for (int f = 0; f < features_; ++f) {
    rmean[f] = momentum_ * rmean[f] + (1.0 - momentum_) * mean[static_cast<size_t>(f)];
    rvar[f] = momentum_ * rvar[f] + (1.0 - momentum_) * var[static_cast<size_t>(f)];
  }
  if (cache) {
    cache->t = {std::move(xhat), std::move(inv_std)};
  }
  return y;
}

Tensor BatchNorm::backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.t.size() != 2) throw Error("numeric", "batchnorm: backward without cached forward");
  const Tensor& xhat = cache.t[0];
  const Tensor& inv_std = cache.t[1];
  Param& gamma = ps.param(gamma_name_);
  Param& beta = ps.param(beta_name_);
  const int64_t rows = xhat.size() / features_;
  std::vector<double> sum_g(static_cast<size_t>(features_), 0.0);
  std::vector<double> sum_gx(static_cast<size_t>(features_), 0.0);
  for (int64_t r = 0; r < rows; ++r) {
    const double* gr = grad_out.data.data() + r * features_;
    const double* hr = xhat.data.data() + r * features_;
    for (int f = 0; f < features_; ++f) {
      sum_g[static_cast<size_t>(f)] += gr[f];
      sum_gx[static_cast<size_t>(f)] += gr[f] * hr[f];
    }
  }
  for (int f = 0; f < features_; ++f) {
    gamma.grad[f] += sum_gx[static_cast<size_t>(f)];
    beta.grad[f] += sum_g[static_cast<size_t>(f)];
  }
  Tensor gin = Tensor::zeros(xhat.shape);
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (int64_t r = 0; r < rows; ++r) {
    const double* gr = grad_out.data.data() + r * features_;
    const double* hr = xhat.data.data() + r * features_;
    double* or_ = gin.data.data() + r * features_;
    for (int f = 0; f < features_; ++f) {
      const double mg = sum_g[static_cast<size_t>(f)] * inv_rows;
      const double mgx = sum_gx[static_cast<size_t>(f)] * inv_rows;
      or_[f] = gamma.value[f] * inv_std[f] * (gr[f] - mg - hr[f] * mgx);
    }
  }
  return gin;
}

int64_t BatchNorm::param_count() const { return 2LL * features_; }

std::string BatchNorm::describe() const { return "batchnorm(" + std::to_string(features_) + ")"; }

// ---------------------------------------------------------------- Relu

Tensor Relu::forward(ParamStore&, const Tensor& x, Mode, Rng*, LayerCache* cache) const {
  Tensor y = x;
  for (double& v : y.data) v = v > 0.0 ? v : 0.0;
  if (cache) cache->t = {x};
  return y;
}

Tensor Relu::backward(ParamStore&, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.t.empty()) throw Error("numeric", "relu: backward without cached forward");
  const Tensor& x = cache.t[0];
  Tensor gin = grad_out;
  for (int64_t i = 0; i < gin.size(); ++i) {
    if (x[i] <= 0.0) gin[i] = 0.0;
  }
  return gin;
}

// ---------------------------------------------------------------- Sigmoid

Tensor Sigmoid::forward(ParamStore&, const Tensor& x, Mode, Rng*, LayerCache* cache) const {
  Tensor y = x;
  for (double& v : y.data) v = 1.0 / (1.0 + std::exp(-v));
  if (cache) cache->t = {y};
  return y;
}

Tensor Sigmoid::backward(ParamStore&, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.t.empty()) throw Error("numeric", "sigmoid: backward without cached forward");
  const Tensor& y = cache.t[0];
  Tensor gin = grad_out;
  for (int64_t i = 0; i < gin.size(); ++i) gin[i] *= y[i] * (1.0 - y[i]);
  return gin;
}

// ---------------------------------------------------------------- Dropout

Dropout::Dropout(double p) : p_(p) {
  if (p < 0.0 || p >= 1.0) throw Error("config_invalid", "dropout: probability must be in [0,1)");
}

Tensor Dropout::forward(ParamStore&, const Tensor& x, Mode mode, Rng* rng,
                        LayerCache* cache) const {
  if (mode == Mode::kEval || p_ == 0.0) {
    if (cache) cache->t.clear();  // identity marker
    return x;
  }
  if (!rng) throw Error("numeric", "dropout: train mode requires an rng");
  const double scale = 1.0 / (1.0 - p_);
  Tensor mask = Tensor::zeros(x.shape);
  Tensor y = x;
  for (int64_t i = 0; i < x.size(); ++i) {
    const double keep = rng->next_bernoulli(p_) ? 0.0 : scale;
    mask[i] = keep;
    y[i] *= keep;
  }
  if (cache) cache->t = {std::move(mask)};
  return y;
}

Tensor Dropout::backward(ParamStore&, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.t.empty()) return grad_out;  // identity path
  const Tensor& mask = cache.t[0];
  Tensor gin = grad_out;
  for (int64_t i = 0; i < gin.size(); ++i) gin[i] *= mask[i];
  return gin;
}

std::string Dropout::describe() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "dropout(p=%g)", p_);
  return buf;
}

// ---------------------------------------------------------------- Flatten

Tensor Flatten::forward(ParamStore&, const Tensor& x, Mode, Rng*, LayerCache*) const {
  if (x.ndim() != 3 || x.dim(1) != l_slots_ || x.dim(2) != width_) {
    throw Error("numeric", "flatten: input shape " + x.shape_str() + " does not match " +
                               std::to_string(l_slots_) + "x" + std::to_string(width_));
  }
  Tensor y = x;
  y.shape = {x.dim(0), static_cast<int64_t>(l_slots_) * width_};
  return y;
}

Tensor Flatten::backward(ParamStore&, const LayerCache&, const Tensor& grad_out) const {
  Tensor gin = grad_out;
  gin.shape = {grad_out.dim(0), l_slots_, width_};
  return gin;
}

std::string Flatten::describe() const {
  return "flatten(" + std::to_string(l_slots_) + "x" + std::to_string(width_) + " -> " +
         std::to_string(static_cast<int64_t>(l_slots_) * width_) + ")";
}

// ---------------------------------------------------------------- Sequential

void Sequential::init(ParamStore& ps) const {
  for (const auto& l : layers_) l->init(ps);
}

void Sequential::init_weights(ParamStore& ps, Rng& rng) const {
  for (const auto& l : layers_) l->init_weights(ps, rng);
}

Tensor Sequential::forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                           LayerCache* cache) const {
  if (cache) cache->children.assign(layers_.size(), LayerCache{});
  Tensor cur = x;
  for (size_t i = 0; i < layers_.size(); ++i) {
    cur = layers_[i]->forward(ps, cur, mode, rng, cache ? &cache->children[i] : nullptr);
  }
  return cur;
}

Tensor Sequential::backward(ParamStore& ps, const LayerCache& cache,
                            const Tensor& grad_out) const {
  if (cache.children.size() != layers_.size()) {
    throw Error("numeric", "sequential: backward without cached forward");
  }
  Tensor g = grad_out;
  for (size_t i = layers_.size(); i-- > 0;) {
    g = layers_[i]->backward(ps, cache.children[i], g);
  }
  return g;
}

int64_t Sequential::param_count() const {
  int64_t n = 0;
  for (const auto& l : layers_) n += l->param_count();
  return n;
}

std::string Sequential::describe() const {
  std::string s;
  for (size_t i = 0; i < layers_.size(); ++i) {
    if (i) s += " -> ";
    s += layers_[i]->describe();
  }
  return s;
}

// ---------------------------------------------------------------- Residual

Tensor Residual::forward(ParamStore& ps, const Tensor& x, Mode mode, Rng* rng,
                         LayerCache* cache) const {
  if (cache) cache->children.assign(1, LayerCache{});
  Tensor y = inner_->forward(ps, x, mode, rng, cache ? &cache->children[0] : nullptr);
  if (!y.same_shape(x)) {
    throw Error("numeric", "residual: inner block must preserve shape");
  }
  for (int64_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return y;
}

Tensor Residual::backward(ParamStore& ps, const LayerCache& cache, const Tensor& grad_out) const {
  if (cache.children.size() != 1) {
    throw Error("numeric", "residual: backward without cached forward");
  }
  Tensor g = inner_->backward(ps, cache.children[0], grad_out);
  for (int64_t i = 0; i < g.size(); ++i) g[i] += grad_out[i];
  return g;
}

}  // namespace gfscma
