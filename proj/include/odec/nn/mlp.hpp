#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "odec/error.hpp"

namespace odec::nn {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Activation { Tanh, Relu, Linear };

inline std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Linear: return "linear";
  }
  return "?";
}

inline Activation activation_from_string(std::string_view s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "linear") return Activation::Linear;
  throw Error(ErrorCode::ParseError, "unknown activation '" + std::string(s) + "'");
}

/// Intermediates of one forward pass; columns are batch samples.
struct ForwardCache {
  std::uint64_t net_id = 0;
  std::uint64_t version = 0;
  std::vector<Matrix> inputs;  // inputs[l] feeds layer l
  std::vector<Matrix> outputs;  // post-activation output of layer l
};

/// Fully connected network. Hidden layers share one activation; the final
/// layer is affine. All weights and biases live in one flat vector so the
/// optimizer, checkpoints and gradient checks can treat them uniformly.
///
/// Layer l stores its (out × in) weight matrix column-major, followed by its
/// bias vector.
class Mlp {
 public:
  Mlp() = default;

  Mlp(std::vector<int> layer_sizes, Activation hidden, std::uint64_t seed = 0, double output_gain = 0.01)
      : sizes_(std::move(layer_sizes)), hidden_(hidden), id_(next_id()) {
    if (sizes_.size() < 2) throw Error(ErrorCode::ShapeError, "an Mlp needs at least input and output widths");
    for (int w : sizes_)
      if (w <= 0) throw Error(ErrorCode::ShapeError, "layer widths must be positive");
    layout();
    init(seed, output_gain);
  }

  int layer_count() const noexcept { return static_cast<int>(sizes_.size()) - 1; }
  int input_size() const noexcept { return sizes_.front(); }
  int output_size() const noexcept { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const noexcept { return sizes_; }
  Activation hidden_activation() const noexcept { return hidden_; }
  Activation activation_of(int layer) const noexcept {
    return layer + 1 == layer_count() ? Activation::Linear : hidden_;
  }

  Eigen::Index parameter_count() const noexcept { return params_.size(); }
  const Vector& parameters() const noexcept { return params_; }

  /// Replaces all parameters; invalidates outstanding caches.
  void set_parameters(const Vector& p) {
    if (p.size() != params_.size()) throw Error(ErrorCode::ShapeError, "parameter vector size mismatch");
    params_ = p;
    ++version_;
  }
  /// Mutable access for in-place updates; callers must call `touch()` afterwards.
  Vector& mutable_parameters() noexcept { return params_; }
  void touch() noexcept { ++version_; }
  std::uint64_t version() const noexcept { return version_; }

  Eigen::Map<const Matrix> weight(int l) const {
    return {params_.data() + w_off_[l], sizes_[l + 1], sizes_[l]};
  }
  Eigen::Map<Matrix> weight(int l) { return {params_.data() + w_off_[l], sizes_[l + 1], sizes_[l]}; }
  Eigen::Map<const Vector> bias(int l) const { return {params_.data() + b_off_[l], sizes_[l + 1]}; }
  Eigen::Map<Vector> bias(int l) { return {params_.data() + b_off_[l], sizes_[l + 1]}; }

  Eigen::Index weight_offset(int l) const { return w_off_[l]; }
  Eigen::Index bias_offset(int l) const { return b_off_[l]; }

  /// Batched forward pass; `input` is (input_size × batch).
  Matrix forward(const Matrix& input, ForwardCache* cache = nullptr) const {
    if (input.rows() != input_size())
      throw Error(ErrorCode::ShapeError, "input has " + std::to_string(input.rows()) + " rows, expected " +
                                             std::to_string(input_size()));
    if (cache) {
      cache->net_id = id_;
      cache->version = version_;
      cache->inputs.clear();
      cache->outputs.clear();
    }
    Matrix x = input;
    for (int l = 0; l < layer_count(); ++l) {
      Matrix z = weight(l) * x;
      z.colwise() += bias(l);
      apply(activation_of(l), z);
      if (cache) {
        cache->inputs.push_back(std::move(x));
        cache->outputs.push_back(z);
      }
      x = std::move(z);
    }
    return x;
  }

  Vector forward(const Vector& input, ForwardCache* cache = nullptr) const {
    Matrix out = forward(Matrix(input), cache);
    return out.col(0);
  }

  /// Gradient of Σ_batch ⟨upstream, output⟩ with respect to the flat parameters.
  /// When `input_grad` is given it receives the gradient with respect to the input.
  Vector backward(const ForwardCache& cache, const Matrix& upstream, Matrix* input_grad = nullptr) const {
    if (cache.net_id != id_ || cache.version != version_ ||
        static_cast<int>(cache.outputs.size()) != layer_count())
      throw Error(ErrorCode::CacheMismatch, "forward cache does not belong to the current parameters");
    if (upstream.rows() != output_size() || upstream.cols() != cache.outputs.back().cols())
      throw Error(ErrorCode::ShapeError, "upstream gradient shape mismatch");
    Vector grad = Vector::Zero(params_.size());
    Matrix delta = upstream;
    for (int l = layer_count() - 1; l >= 0; --l) {
      apply_derivative(activation_of(l), cache.outputs[l], delta);
      Eigen::Map<Matrix>(grad.data() + w_off_[l], sizes_[l + 1], sizes_[l]).noalias() =
          delta * cache.inputs[l].transpose();
      Eigen::Map<Vector>(grad.data() + b_off_[l], sizes_[l + 1]) = delta.rowwise().sum();
      if (l > 0 || input_grad) {
        Matrix prev = weight(l).transpose() * delta;
        delta = std::move(prev);
      }
    }
    if (input_grad) *input_grad = delta;
    return grad;
  }

  friend bool operator==(const Mlp& a, const Mlp& b) {
    return a.sizes_ == b.sizes_ && a.hidden_ == b.hidden_ && a.params_ == b.params_;
  }

 private:
  static std::uint64_t next_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter++;
  }

  void layout() {
    Eigen::Index off = 0;
    w_off_.clear();
    b_off_.clear();
    for (int l = 0; l < layer_count(); ++l) {
      w_off_.push_back(off);
      off += static_cast<Eigen::Index>(sizes_[l]) * sizes_[l + 1];
      b_off_.push_back(off);
      off += sizes_[l + 1];
    }
    params_ = Vector::Zero(off);
  }

  // Scaled orthogonal initialization (gain √2 for hidden layers), zero biases.
  void init(std::uint64_t seed, double output_gain) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int l = 0; l < layer_count(); ++l) {
      const int rows = sizes_[l + 1], cols = sizes_[l];
      const bool tall = rows >= cols;
      Matrix a(tall ? rows : cols, tall ? cols : rows);
      for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
      Eigen::HouseholderQR<Matrix> qr(a);
      Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
      Matrix r = qr.matrixQR().topRows(a.cols()).template triangularView<Eigen::Upper>();
      for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (r(j, j) < 0) q.col(j) *= -1.0;
      const double gain = (l + 1 == layer_count()) ? output_gain : std::sqrt(2.0);
      weight(l) = gain * (tall ? q : Matrix(q.transpose()));
    }
  }

  static void apply(Activation a, Matrix& z) {
    switch (a) {
      case Activation::Tanh: z = z.array().tanh(); break;
      case Activation::Relu: z = z.array().max(0.0); break;
      case Activation::Linear: break;
    }
  }

  static void apply_derivative(Activation a, const Matrix& out, Matrix& delta) {
    switch (a) {
      case Activation::Tanh: delta.array() *= 1.0 - out.array().square(); break;
      case Activation::Relu: delta.array() *= (out.array() > 0.0).cast<double>(); break;
      case Activation::Linear: break;
    }
  }

  std::vector<int> sizes_;
  Activation hidden_ = Activation::Tanh;
  Vector params_;
  std::vector<Eigen::Index> w_off_, b_off_;
  std::uint64_t id_ = 0;
  std::uint64_t version_ = 0;
};

}  // namespace odec::nn
