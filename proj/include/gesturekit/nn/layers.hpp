#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "gesturekit/nn/tensor.hpp"

namespace gk::nn {

enum class Padding { Same, Valid };

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;
  virtual Tensor<T> forward(const Tensor<T>& x, bool train) = 0;
  virtual Tensor<T> backward(const Tensor<T>& dy) = 0;
  virtual std::vector<Tensor<T>*> parameters() { return {}; }
  // non-trainable state that still belongs in checkpoints (BN running stats)
  virtual std::vector<Tensor<T>*> state_tensors() { return {}; }
  // Kaiming fan-in init for conv/dense weights; no-op elsewhere.
  virtual void init_params(std::mt19937_64& rng) { (void)rng; }
  virtual std::string kind() const = 0;
  // weight layers as counted in architecture names (conv + dense)
  virtual int weight_layer_count() const { return 0; }
};

template <typename T>
class Conv2d : public Layer<T> {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride = 1,
         Padding padding = Padding::Same);

  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::vector<Tensor<T>*> parameters() override { return {&w_, &b_}; }
  void init_params(std::mt19937_64& rng) override;
  std::string kind() const override { return "conv2d"; }
  int weight_layer_count() const override { return 1; }

  Tensor<T>& weights() { return w_; }
  Tensor<T>& bias() { return b_; }
  int out_channels() const { return out_c_; }

 private:
  int in_c_, out_c_, k_, stride_, pad_;
  Tensor<T> w_;  // {k, k, in_c, out_c}
  Tensor<T> b_;  // {out_c}
  std::vector<int> in_shape_;
  typename Tensor<T>::Matrix col_;  // cached im2col of the last forward
};

template <typename T>
class MaxPool2d : public Layer<T> {
 public:
  MaxPool2d() = default;
  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::string kind() const override { return "maxpool2d"; }

 private:
  std::vector<int> in_shape_;
  std::vector<std::size_t> argmax_;  // winner index per output element
};

template <typename T>
class BatchNorm : public Layer<T> {
 public:
  explicit BatchNorm(int channels, double momentum = 0.1, double eps = 1e-5);

  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::vector<Tensor<T>*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Tensor<T>*> state_tensors() override {
    return {&running_mean_, &running_var_};
  }
  std::string kind() const override { return "batchnorm"; }

  Tensor<T>& gamma() { return gamma_; }
  Tensor<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

 private:
  int c_;
  double momentum_, eps_;
  bool train_mode_ = true;
  Tensor<T> gamma_, beta_, running_mean_, running_var_;
  Tensor<T> x_cache_;
  std::vector<T> mean_, inv_std_;
};

template <typename T>
class Relu : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::string kind() const override { return "relu"; }

 private:
  std::vector<char> mask_;
  std::vector<int> in_shape_;
};

template <typename T>
class Dense : public Layer<T> {
 public:
  Dense(int in_features, int out_features);
  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::vector<Tensor<T>*> parameters() override { return {&w_, &b_}; }
  void init_params(std::mt19937_64& rng) override;
  std::string kind() const override { return "dense"; }
  int weight_layer_count() const override { return 1; }

  Tensor<T>& weights() { return w_; }
  Tensor<T>& bias() { return b_; }

 private:
  int in_f_, out_f_;
  Tensor<T> w_;  // {in, out}
  Tensor<T> b_;  // {out}
  Tensor<T> x_cache_;
};

template <typename T>
class Flatten : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::string kind() const override { return "flatten"; }

 private:
  std::vector<int> in_shape_;
};

template <typename T>
class GlobalAvgPool : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::string kind() const override { return "gap"; }

 private:
  std::vector<int> in_shape_;
};

template <typename T>
class Softmax : public Layer<T> {
 public:
  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::string kind() const override { return "softmax"; }

 private:
  Tensor<T> y_cache_;
};

// Two conv3x3+BN branches with identity or 1x1 stride-s projection shortcut:
// out = relu(bn2(conv2(relu(bn1(conv1(x))))) + shortcut(x)).
template <typename T>
class ResidualBlock : public Layer<T> {
 public:
  ResidualBlock(int in_channels, int out_channels, int stride = 1);

  Tensor<T> forward(const Tensor<T>& x, bool train) override;
  Tensor<T> backward(const Tensor<T>& dy) override;
  std::vector<Tensor<T>*> parameters() override;
  std::vector<Tensor<T>*> state_tensors() override;
  void init_params(std::mt19937_64& rng) override;
  std::string kind() const override { return "residual-block"; }
  int weight_layer_count() const override { return 2; }
  bool has_projection() const { return proj_ != nullptr; }

  // direct access for tests that zero the branch
  Conv2d<T>& conv1() { return *conv1_; }
  Conv2d<T>& conv2() { return *conv2_; }
  BatchNorm<T>& bn1() { return *bn1_; }
  BatchNorm<T>& bn2() { return *bn2_; }

 private:
  std::unique_ptr<Conv2d<T>> conv1_, conv2_, proj_;
  std::unique_ptr<BatchNorm<T>> bn1_, bn2_, proj_bn_;
  std::unique_ptr<Relu<T>> relu1_;
  std::vector<char> out_mask_;
  std::vector<int> out_shape_;
};

}  // namespace gk::nn
