#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "gesturekit/nn/layers.hpp"

namespace gk::nn {

template <typename T>
class Model {
 public:
  Model() = default;

  template <typename L, typename... Args>
  L& add(Args&&... args) {
    auto layer = std::make_unique<L>(std::forward<Args>(args)...);
    L& ref = *layer;
    layers_.push_back(std::move(layer));
    return ref;
  }

  Tensor<T> forward(const Tensor<T>& x, bool train) {
    Tensor<T> h = x;
    for (auto& l : layers_) h = l->forward(h, train);
    return h;
  }

  Tensor<T> backward(const Tensor<T>& dy) {
    Tensor<T> g = dy;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
      g = (*it)->backward(g);
    return g;
  }

  std::vector<Tensor<T>*> parameters() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_)
      for (auto* p : l->parameters()) out.push_back(p);
    return out;
  }

  std::vector<Tensor<T>*> state_tensors() {
    std::vector<Tensor<T>*> out;
    for (auto& l : layers_)
      for (auto* p : l->state_tensors()) out.push_back(p);
    return out;
  }

  void init_params(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (auto& l : layers_) l->init_params(rng);
  }

  std::size_t param_count() {
    std::size_t n = 0;
    for (auto* p : parameters()) n += p->size();
    return n;
  }

  int weight_layer_count() const {
    int n = 0;
    for (const auto& l : layers_) n += l->weight_layer_count();
    return n;
  }

  std::vector<std::unique_ptr<Layer<T>>>& layers() { return layers_; }
  const std::vector<std::unique_ptr<Layer<T>>>& layers() const { return layers_; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Numerically stable mean softmax cross-entropy; fills dlogits (softmax - onehot)/N.
template <typename T>
T softmax_crossentropy(const Tensor<T>& logits, const std::vector<int>& labels,
                       Tensor<T>* dlogits);

// Row-wise softmax probabilities of a {N, K} logit tensor.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

}  // namespace gk::nn
