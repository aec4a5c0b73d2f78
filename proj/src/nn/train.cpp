#include "gesturekit/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace gk::nn {

template <typename T>
void adam_step(const std::vector<Tensor<T>*>& params, AdamState<T>& state,
               double lr, double beta1, double beta2, double eps) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i]->size(), T(0));
      state.v[i].assign(params[i]->size(), T(0));
    }
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state/param count mismatch");
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, state.t);
  const double bc2 = 1.0 - std::pow(beta2, state.t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<T>& p = *params[i];
    if (!p.has_grad()) continue;
    if (state.m[i].size() != p.size())
      throw std::invalid_argument("adam_step: moment shape mismatch");
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double g = p.g[j];
      state.m[i][j] = static_cast<T>(beta1 * state.m[i][j] + (1.0 - beta1) * g);
      state.v[i][j] = static_cast<T>(beta2 * state.v[i][j] + (1.0 - beta2) * g * g);
      const double mhat = state.m[i][j] / bc1;
      const double vhat = state.v[i][j] / bc2;
      p.v[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + eps));
    }
  }
}

template void adam_step<float>(const std::vector<Tensor<float>*>&,
                               AdamState<float>&, double, double, double, double);
template void adam_step<double>(const std::vector<Tensor<double>*>&,
                                AdamState<double>&, double, double, double, double);

void TrainSchedule::validate() const {
  if (!(lr > 0.0)) throw std::invalid_argument("TrainSchedule: lr <= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
    throw std::invalid_argument("TrainSchedule: betas outside (0, 1)");
  if (batch_size < 2) throw std::invalid_argument("TrainSchedule: batch_size < 2");
  if (max_epochs < 1) throw std::invalid_argument("TrainSchedule: max_epochs < 1");
  if (stop_patience < 1 || lr_patience < 1)
    throw std::invalid_argument("TrainSchedule: patience < 1");
  if (!(lr_factor > 0.0 && lr_factor < 1.0))
    throw std::invalid_argument("TrainSchedule: lr_factor outside (0, 1)");
}

namespace {

Tensor<float> make_batch(const DataView& data, const std::vector<int>& order,
                         std::size_t begin, std::size_t end,
                         std::vector<int>* labels) {
  const int n = static_cast<int>(end - begin);
  Tensor<float> x({n, data.h, data.w, data.c});
  const std::size_t stride = static_cast<std::size_t>(data.h) * data.w * data.c;
  labels->resize(n);
  for (int i = 0; i < n; ++i) {
    const int s = order[begin + i];
    std::copy_n(data.x[s], stride, x.v.data() + i * stride);
    (*labels)[i] = data.y[s];
  }
  return x;
}

std::vector<Tensor<float>> snapshot(const std::vector<Tensor<float>*>& params) {
  std::vector<Tensor<float>> out;
  out.reserve(params.size());
  for (auto* p : params) out.push_back(*p);
  return out;
}

void restore(const std::vector<Tensor<float>*>& params,
             const std::vector<Tensor<float>>& snap) {
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->v = snap[i].v;
}

}  // namespace

double evaluate_accuracy(Model<float>& model, const DataView& data,
                         double* mean_loss, std::vector<int>* predictions,
                         int batch_size) {
  if (data.size() == 0) throw std::invalid_argument("evaluate_accuracy: empty set");
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t correct = 0;
  double loss_sum = 0.0;
  if (predictions) predictions->assign(data.size(), -1);
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    std::vector<int> labels;
    Tensor<float> x = make_batch(data, order, begin, end, &labels);
    Tensor<float> logits = model.forward(x, false);
    loss_sum += softmax_crossentropy<float>(logits, labels, nullptr) * (end - begin);
    const int k = logits.dim(1);
    auto lm = logits.mat(static_cast<int>(end - begin), k);
    for (std::size_t i = 0; i < end - begin; ++i) {
      int arg = 0;
      lm.row(static_cast<int>(i)).maxCoeff(&arg);
      if (arg == labels[i]) ++correct;
      if (predictions) (*predictions)[begin + i] = arg;
    }
  }
  if (mean_loss) *mean_loss = loss_sum / data.size();
  return static_cast<double>(correct) / data.size();
}

std::vector<float> predict(Model<float>& model, const float* image, int h,
                           int w, int c) {
  Tensor<float> x({1, h, w, c});
  std::copy_n(image, x.size(), x.v.data());
  Tensor<float> logits = model.forward(x, false);
  Tensor<float> probs = softmax_rows(logits);
  return probs.v;
}

TrainResult train(Model<float>& model, const DataView& train_set,
                  const DataView& val_set, const TrainSchedule& schedule) {
  schedule.validate();
  if (train_set.size() == 0 || val_set.size() == 0)
    throw std::invalid_argument("train: empty dataset");
  if (train_set.y.size() != train_set.x.size() ||
      val_set.y.size() != val_set.x.size())
    throw std::invalid_argument("train: label count mismatch");

  auto params = model.parameters();
  AdamState<float> adam;
  std::mt19937_64 rng(schedule.seed);
  double lr = schedule.lr;

  TrainResult result;
  result.best_val_loss = std::numeric_limits<double>::max();
  std::vector<Tensor<float>> best = snapshot(params);
  int since_best = 0, since_lr_drop = 0;

  std::vector<int> order(train_set.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 1; epoch <= schedule.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < train_set.size();
         begin += schedule.batch_size) {
      const std::size_t end =
          std::min(train_set.size(), begin + schedule.batch_size);
      if (end - begin < 2) break;  // BN needs batch >= 2; drop the remainder
      std::vector<int> labels;
      Tensor<float> x = make_batch(train_set, order, begin, end, &labels);
      Tensor<float> logits = model.forward(x, true);
      Tensor<float> dlogits;
      loss_sum += softmax_crossentropy(logits, labels, &dlogits) * (end - begin);
      model.backward(dlogits);
      adam_step(params, adam, lr, schedule.beta1, schedule.beta2, schedule.eps);
    }
    const double train_loss = loss_sum / train_set.size();

    double val_loss = 0.0;
    const double val_acc = evaluate_accuracy(model, val_set, &val_loss, nullptr,
                                             schedule.batch_size);
    result.history.push_back({epoch, train_loss, val_loss, val_acc, lr});
    if (schedule.verbose)
      std::fprintf(stderr,
                   "epoch %3d  train_loss %.4f  val_loss %.4f  val_acc %.4f  lr %g\n",
                   epoch, train_loss, val_loss, val_acc, lr);

    if (val_loss < result.best_val_loss - 1e-9) {
      result.best_val_loss = val_loss;
      result.best_val_acc = val_acc;
      result.best_epoch = epoch;
      best = snapshot(params);
      since_best = since_lr_drop = 0;
    } else {
      ++since_best;
      ++since_lr_drop;
    }

    if (val_acc >= schedule.stop_at_val_accuracy) {
      // keep the snapshot that reached the target
      result.best_val_loss = val_loss;
      result.best_val_acc = val_acc;
      result.best_epoch = epoch;
      best = snapshot(params);
      break;
    }
    if (since_best >= schedule.stop_patience) break;
    if (since_lr_drop >= schedule.lr_patience) {
      lr *= schedule.lr_factor;
      since_lr_drop = 0;
    }
  }

  restore(params, best);
  return result;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "epoch,train_loss,val_loss,val_acc,lr\n";
  char line[160];
  for (const auto& e : history) {
    std::snprintf(line, sizeof(line), "%d,%.9g,%.9g,%.9g,%.9g\n", e.epoch,
                  e.train_loss, e.val_loss, e.val_acc, e.lr);
    f << line;
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace gk::nn
