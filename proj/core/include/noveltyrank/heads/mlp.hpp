#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "noveltyrank/error.hpp"
#include "noveltyrank/rng.hpp"

namespace noveltyrank::heads {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class HeadMode { train, infer };

template <typename T>
struct DenseLayer {
  Matrix<T> weights;  // out x in
  Vector<T> bias;     // out
};

/// Per-layer parameter gradients, shaped like the head's layers.
template <typename T>
using HeadGradients = std::vector<DenseLayer<T>>;

/// Everything backward() needs from a forward pass.
template <typename T>
struct ForwardCache {
  std::vector<Vector<T>> layer_inputs;  // input seen by each affine layer
  std::vector<Vector<T>> hidden_pre;    // pre-ReLU values of hidden layers
  std::vector<Vector<T>> dropout_scale; // 0 or 1/(1-p) per hidden unit; empty when no dropout ran
  Vector<T> output;
};

/// Feed-forward head: affine -> ReLU -> dropout per hidden layer, affine output.
///
/// Dropout is inverted (kept units scaled by 1/(1-p) at train time) so
/// inference needs no rescaling.
template <typename T>
class BasicMlp {
 public:
  BasicMlp(std::vector<std::size_t> layer_sizes, double dropout_rate) : sizes_(std::move(layer_sizes)), dropout_(dropout_rate) {
    if (sizes_.size() < 2) throw ValidationError("MLP needs at least an input and an output size");
    for (auto s : sizes_) {
      if (s == 0) throw ValidationError("MLP layer sizes must be positive");
    }
    if (!(dropout_ >= 0.0 && dropout_ < 1.0)) throw ValidationError("dropout rate must be in [0, 1)");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
      layers_.push_back({Matrix<T>::Zero(static_cast<Eigen::Index>(sizes_[l + 1]), static_cast<Eigen::Index>(sizes_[l])),
                         Vector<T>::Zero(static_cast<Eigen::Index>(sizes_[l + 1]))});
    }
  }

  /// Weights uniform in +-sqrt(6/(fan_in+fan_out)), zero biases.
  static BasicMlp glorot(std::vector<std::size_t> layer_sizes, double dropout_rate, std::uint64_t seed) {
    BasicMlp mlp(std::move(layer_sizes), dropout_rate);
    Rng rng(seed);
    for (auto& layer : mlp.layers_) {
      const double limit = std::sqrt(6.0 / static_cast<double>(layer.weights.rows() + layer.weights.cols()));
      for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
        layer.weights.data()[i] = static_cast<T>((2.0 * rng.uniform() - 1.0) * limit);
      }
    }
    return mlp;
  }

  const std::vector<std::size_t>& layer_sizes() const { return sizes_; }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  double dropout_rate() const { return dropout_; }

  HeadMode mode() const { return mode_; }
  void set_mode(HeadMode mode) { mode_ = mode; }

  std::vector<DenseLayer<T>>& layers() { return layers_; }
  const std::vector<DenseLayer<T>>& layers() const { return layers_; }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers_) n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
    return n;
  }

  HeadGradients<T> zero_gradients() const {
    HeadGradients<T> g;
    for (const auto& l : layers_) {
      g.push_back({Matrix<T>::Zero(l.weights.rows(), l.weights.cols()), Vector<T>::Zero(l.bias.size())});
    }
    return g;
  }

  /// Parameters in checkpoint order: per layer, weights row-major then bias.
  template <typename F>
  void for_each_tensor(F&& fn) {
    for (auto& l : layers_) {
      fn(std::span<T>(l.weights.data(), static_cast<std::size_t>(l.weights.size())));
      fn(std::span<T>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
    }
  }
  template <typename F>
  void for_each_tensor(F&& fn) const {
    for (const auto& l : layers_) {
      fn(std::span<const T>(l.weights.data(), static_cast<std::size_t>(l.weights.size())));
      fn(std::span<const T>(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
    }
  }

  /// `dropout_rng` is required when mode()==train and dropout_rate()>0.
  ForwardCache<T> forward(std::span<const T> x, Rng* dropout_rng = nullptr) const {
    if (x.size() != input_size()) {
      throw ValidationError("input has width " + std::to_string(x.size()) + ", head expects " +
                            std::to_string(input_size()));
    }
    for (T v : x) {
      if (!std::isfinite(static_cast<double>(v))) throw ValidationError("non-finite head input");
    }
    const bool drop = mode_ == HeadMode::train && dropout_ > 0.0;
    if (drop && dropout_rng == nullptr) throw ValidationError("train-mode dropout requires an RNG");

    ForwardCache<T> cache;
    Vector<T> h = Eigen::Map<const Vector<T>>(x.data(), static_cast<Eigen::Index>(x.size()));
    const T keep_scale = static_cast<T>(1.0 / (1.0 - dropout_));
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Vector<T> z = layers_[l].weights * h + layers_[l].bias;
      cache.layer_inputs.push_back(std::move(h));
      if (l + 1 == layers_.size()) {
        cache.output = std::move(z);
        break;
      }
      h = z.cwiseMax(T(0));
      if (drop) {
        Vector<T> scale(h.size());
        for (Eigen::Index i = 0; i < h.size(); ++i) scale[i] = dropout_rng->uniform() < dropout_ ? T(0) : keep_scale;
        h = h.cwiseProduct(scale);
        cache.dropout_scale.push_back(std::move(scale));
      }
      cache.hidden_pre.push_back(std::move(z));
    }
    return cache;
  }

  Vector<T> infer(std::span<const T> x) const {
    if (mode_ == HeadMode::train) throw ValidationError("infer() requires a head in infer mode");
    return forward(x).output;
  }

  /// Adds d(loss)/d(params) into `grads` given d(loss)/d(output).
  void backward(const ForwardCache<T>& cache, const Vector<T>& grad_output, HeadGradients<T>& grads) const {
    if (grad_output.size() != static_cast<Eigen::Index>(output_size())) {
      throw ValidationError("output gradient width mismatch");
    }
    Vector<T> delta = grad_output;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      grads[l].weights.noalias() += delta * cache.layer_inputs[l].transpose();
      grads[l].bias += delta;
      if (l == 0) break;
      Vector<T> up = layers_[l].weights.transpose() * delta;
      const std::size_t hidden = l - 1;
      if (!cache.dropout_scale.empty()) up = up.cwiseProduct(cache.dropout_scale[hidden]);
      const Vector<T>& pre = cache.hidden_pre[hidden];
      for (Eigen::Index i = 0; i < up.size(); ++i) {
        if (!(pre[i] > T(0))) up[i] = T(0);
      }
      delta = std::move(up);
    }
  }

 private:
  std::vector<std::size_t> sizes_;
  double dropout_;
  HeadMode mode_ = HeadMode::infer;
  std::vector<DenseLayer<T>> layers_;
};

/// Production heads hold 32-bit parameters.
using MlpHead = BasicMlp<float>;

inline constexpr double kClassifierDropout = 0.1;
inline constexpr double kRankerDropout = 0.5;

/// [input, 512, 128, 2]
inline std::vector<std::size_t> classifier_layers(std::size_t input) { return {input, 512, 128, 2}; }
/// [input, 256, 64, 1]
inline std::vector<std::size_t> ranker_layers(std::size_t input) { return {input, 256, 64, 1}; }

}  // namespace noveltyrank::heads
