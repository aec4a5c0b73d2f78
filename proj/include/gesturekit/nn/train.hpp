#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gesturekit/nn/model.hpp"

namespace gk::nn {

// Adam with bias correction. Moment buffers are allocated on first use.
template <typename T>
struct AdamState {
  std::vector<std::vector<T>> m, v;
  long t = 0;
};

template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, AdamState<T>& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

struct TrainSchedule {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 32;
  int max_epochs = 60;
  int stop_patience = 7;    // epochs without val-loss improvement before stop
  int lr_patience = 3;      // epochs without improvement before lr reduction
  double lr_factor = 0.5;
  std::uint64_t seed = 0;
  // optional early exit once validation accuracy reaches this level (>1 = off)
  double stop_at_val_accuracy = 2.0;
  bool verbose = false;

  void validate() const;
};

// Borrowed views of 128x128x3 images (any h*w*c, consistent across samples).
struct DataView {
  std::vector<const float*> x;
  std::vector<int> y;
  int h = 128, w = 128, c = 3;

  std::size_t size() const { return x.size(); }
};

struct EpochStats {
  int epoch;
  double train_loss, val_loss, val_acc, lr;
};

struct TrainResult {
  std::vector<EpochStats> history;
  double best_val_loss = 0.0;
  double best_val_acc = 0.0;
  int best_epoch = -1;
};

// Seeded-shuffle minibatch training with reduce-on-plateau and early stopping.
// The model is left at the best-validation-loss snapshot.
TrainResult train(Model<float>& model, const DataView& train_set,
                  const DataView& val_set, const TrainSchedule& schedule);

// Mean loss and accuracy of the model on a dataset (inference mode).
double evaluate_accuracy(Model<float>& model, const DataView& data,
                         double* mean_loss = nullptr,
                         std::vector<int>* predictions = nullptr,
                         int batch_size = 32);

// Softmax class probabilities for one image.
std::vector<float> predict(Model<float>& model, const float* image,
                           int h = 128, int w = 128, int c = 3);

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history);

}  // namespace gk::nn
