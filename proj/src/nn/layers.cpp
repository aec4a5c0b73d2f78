#include "gesturekit/nn/layers.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "gesturekit/nn/model.hpp"

namespace gk::nn {

namespace {

template <typename T>
void check_nhwc(const Tensor<T>& x) {
  if (x.shape.size() != 4)
    throw std::invalid_argument("expected NHWC tensor, got rank " +
                                std::to_string(x.shape.size()));
}

int rows_of(const std::vector<int>& shape) {
  int n = 1;
  for (std::size_t i = 0; i + 1 < shape.size(); ++i) n *= shape[i];
  return n;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

template <typename T>
Conv2d<T>::Conv2d(int in_channels, int out_channels, int kernel, int stride,
                  Padding padding)
    : in_c_(in_channels),
      out_c_(out_channels),
      k_(kernel),
      stride_(stride),
      pad_(padding == Padding::Same ? (kernel - 1) / 2 : 0),
      w_({kernel, kernel, in_channels, out_channels}),
      b_({out_channels}) {
  if (in_channels < 1 || out_channels < 1 || kernel < 1 || stride < 1)
    throw std::invalid_argument("Conv2d: bad hyperparameters");
  if (padding == Padding::Same && kernel % 2 == 0)
    throw std::invalid_argument("Conv2d: same padding needs odd kernel");
}

template <typename T>
void Conv2d<T>::init_params(std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(k_) * k_ * in_c_;
  std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / fan_in));
  for (auto& w : w_.v) w = static_cast<T>(gauss(rng));
  std::fill(b_.v.begin(), b_.v.end(), T(0));
}

template <typename T>
Tensor<T> Conv2d<T>::forward(const Tensor<T>& x, bool) {
  check_nhwc(x);
  if (x.dim(3) != in_c_)
    throw std::invalid_argument("Conv2d: channel mismatch");
  const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = in_c_;
  const int OH = (H + 2 * pad_ - k_) / stride_ + 1;
  const int OW = (W + 2 * pad_ - k_) / stride_ + 1;
  if (OH < 1 || OW < 1) throw std::invalid_argument("Conv2d: input too small");
  in_shape_ = x.shape;

  const int patch = k_ * k_ * C;
  col_.resize(static_cast<long>(N) * OH * OW, patch);
  const T* xd = x.v.data();
  for (int n = 0; n < N; ++n)
    for (int oh = 0; oh < OH; ++oh)
      for (int ow = 0; ow < OW; ++ow) {
        T* dst = col_.row((static_cast<long>(n) * OH + oh) * OW + ow).data();
        for (int kh = 0; kh < k_; ++kh) {
          const int h = oh * stride_ - pad_ + kh;
          for (int kw = 0; kw < k_; ++kw) {
            const int w = ow * stride_ - pad_ + kw;
            T* cell = dst + (kh * k_ + kw) * C;
            if (h < 0 || h >= H || w < 0 || w >= W) {
              std::memset(cell, 0, sizeof(T) * C);
            } else {
              std::memcpy(cell, xd + ((static_cast<long>(n) * H + h) * W + w) * C,
                          sizeof(T) * C);
            }
          }
        }
      }

  Tensor<T> out({N, OH, OW, out_c_});
  auto wmat = w_.mat(patch, out_c_);
  auto omat = out.mat(static_cast<int>(col_.rows()), out_c_);
  omat.noalias() = col_ * wmat;
  auto bias = Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b_.v.data(), out_c_);
  omat.rowwise() += bias;
  return out;
}

template <typename T>
Tensor<T> Conv2d<T>::backward(const Tensor<T>& dy) {
  const int N = in_shape_[0], H = in_shape_[1], W = in_shape_[2], C = in_c_;
  const int rows = static_cast<int>(col_.rows());
  const int patch = k_ * k_ * C;
  auto dmat = dy.mat(rows, out_c_);

  w_.ensure_grad();
  b_.ensure_grad();
  w_.grad_mat(patch, out_c_).noalias() = col_.transpose() * dmat;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(b_.g.data(), out_c_) =
      dmat.colwise().sum();

  typename Tensor<T>::Matrix dcol(rows, patch);
  dcol.noalias() = dmat * w_.mat(patch, out_c_).transpose();

  Tensor<T> dx(in_shape_);
  T* xd = dx.v.data();
  const int OH = (H + 2 * pad_ - k_) / stride_ + 1;
  const int OW = (W + 2 * pad_ - k_) / stride_ + 1;
  for (int n = 0; n < N; ++n)
    for (int oh = 0; oh < OH; ++oh)
      for (int ow = 0; ow < OW; ++ow) {
        const T* src = dcol.row((static_cast<long>(n) * OH + oh) * OW + ow).data();
        for (int kh = 0; kh < k_; ++kh) {
          const int h = oh * stride_ - pad_ + kh;
          if (h < 0 || h >= H) continue;
          for (int kw = 0; kw < k_; ++kw) {
            const int w = ow * stride_ - pad_ + kw;
            if (w < 0 || w >= W) continue;
            T* cell = xd + ((static_cast<long>(n) * H + h) * W + w) * C;
            const T* scell = src + (kh * k_ + kw) * C;
            for (int c = 0; c < C; ++c) cell[c] += scell[c];
          }
        }
      }
  return dx;
}

// -------------------------------------------------------------- MaxPool2d

template <typename T>
Tensor<T> MaxPool2d<T>::forward(const Tensor<T>& x, bool) {
  check_nhwc(x);
  const int N = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const int OH = (H + 1) / 2, OW = (W + 1) / 2;
  in_shape_ = x.shape;
  Tensor<T> out({N, OH, OW, C});
  argmax_.assign(out.size(), 0);

  auto idx = [&](int n, int h, int w, int c) {
    return ((static_cast<std::size_t>(n) * H + h) * W + w) * C + c;
  };
  std::size_t o = 0;
  for (int n = 0; n < N; ++n)
    for (int oh = 0; oh < OH; ++oh)
      for (int ow = 0; ow < OW; ++ow)
        for (int c = 0; c < C; ++c, ++o) {
          T best{};
          std::size_t best_i = 0;
          bool first = true;
          for (int dh = 0; dh < 2; ++dh)
            for (int dw = 0; dw < 2; ++dw) {
              // replicate padding on the far edge
              const int h = std::min(2 * oh + dh, H - 1);
              const int w = std::min(2 * ow + dw, W - 1);
              const std::size_t i = idx(n, h, w, c);
              if (first || x.v[i] > best) {
                best = x.v[i];
                best_i = i;
                first = false;
              }
            }
          out.v[o] = best;
          argmax_[o] = best_i;
        }
  return out;
}

template <typename T>
Tensor<T> MaxPool2d<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dx(in_shape_);
  for (std::size_t o = 0; o < dy.size(); ++o) dx.v[argmax_[o]] += dy.v[o];
  return dx;
}

// -------------------------------------------------------------- BatchNorm

template <typename T>
BatchNorm<T>::BatchNorm(int channels, double momentum, double eps)
    : c_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_({channels}),
      beta_({channels}),
      running_mean_({channels}),
      running_var_({channels}) {
  std::fill(gamma_.v.begin(), gamma_.v.end(), T(1));
  std::fill(running_var_.v.begin(), running_var_.v.end(), T(1));
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, bool train) {
  if (x.shape.empty() || x.shape.back() != c_)
    throw std::invalid_argument("BatchNorm: channel mismatch");
  const int rows = rows_of(x.shape);
  train_mode_ = train;
  mean_.assign(c_, T(0));
  inv_std_.assign(c_, T(0));
  if (train) {
    if (x.dim(0) < 2)
      throw std::invalid_argument("BatchNorm: train mode needs batch >= 2");
    auto xm = x.mat(rows, c_);
    Eigen::Matrix<T, 1, Eigen::Dynamic> mu = xm.colwise().mean();
    Eigen::Matrix<T, 1, Eigen::Dynamic> var =
        (xm.rowwise() - mu).array().square().colwise().mean();
    for (int c = 0; c < c_; ++c) {
      mean_[c] = mu(c);
      inv_std_[c] = T(1) / std::sqrt(var(c) + static_cast<T>(eps_));
      running_mean_.v[c] = static_cast<T>((1.0 - momentum_) * running_mean_.v[c] +
                                          momentum_ * mu(c));
      running_var_.v[c] = static_cast<T>((1.0 - momentum_) * running_var_.v[c] +
                                         momentum_ * var(c));
    }
  } else {
    for (int c = 0; c < c_; ++c) {
      mean_[c] = running_mean_.v[c];
      inv_std_[c] = T(1) / std::sqrt(running_var_.v[c] + static_cast<T>(eps_));
    }
  }
  x_cache_ = x;
  Tensor<T> out(x.shape);
  auto xm = x.mat(rows, c_);
  auto om = out.mat(rows, c_);
  for (int c = 0; c < c_; ++c)
    om.col(c) = ((xm.col(c).array() - mean_[c]) * inv_std_[c] * gamma_.v[c] +
                 beta_.v[c]).matrix();
  return out;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& dy) {
  const int rows = rows_of(x_cache_.shape);
  auto xm = x_cache_.mat(rows, c_);
  auto dm = dy.mat(rows, c_);
  gamma_.ensure_grad();
  beta_.ensure_grad();
  Tensor<T> dx(x_cache_.shape);
  auto dxm = dx.mat(rows, c_);
  const T m = static_cast<T>(rows);
  for (int c = 0; c < c_; ++c) {
    auto xhat = ((xm.col(c).array() - mean_[c]) * inv_std_[c]).eval();
    const T dg = (dm.col(c).array() * xhat).sum();
    const T db = dm.col(c).sum();
    gamma_.g[c] = dg;
    beta_.g[c] = db;
    if (train_mode_) {
      dxm.col(c) = ((gamma_.v[c] * inv_std_[c] / m) *
                    (m * dm.col(c).array() - db - xhat * dg)).matrix();
    } else {
      dxm.col(c) = (dm.col(c).array() * (gamma_.v[c] * inv_std_[c])).matrix();
    }
  }
  return dx;
}

// ------------------------------------------------------------------ Relu

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x, bool) {
  in_shape_ = x.shape;
  mask_.assign(x.size(), 0);
  Tensor<T> out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x.v[i] > T(0)) {
      out.v[i] = x.v[i];
      mask_[i] = 1;
    }
  }
  return out;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dx(in_shape_);
  for (std::size_t i = 0; i < dy.size(); ++i)
    dx.v[i] = mask_[i] ? dy.v[i] : T(0);
  return dx;
}

// ----------------------------------------------------------------- Dense

template <typename T>
Dense<T>::Dense(int in_features, int out_features)
    : in_f_(in_features), out_f_(out_features),
      w_({in_features, out_features}), b_({out_features}) {}

template <typename T>
void Dense<T>::init_params(std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(2.0 / in_f_));
  for (auto& w : w_.v) w = static_cast<T>(gauss(rng));
  std::fill(b_.v.begin(), b_.v.end(), T(0));
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, bool) {
  if (x.shape.size() != 2 || x.dim(1) != in_f_)
    throw std::invalid_argument("Dense: expected {N, " + std::to_string(in_f_) + "}");
  x_cache_ = x;
  const int N = x.dim(0);
  Tensor<T> out({N, out_f_});
  out.mat(N, out_f_).noalias() = x.mat(N, in_f_) * w_.mat(in_f_, out_f_);
  out.mat(N, out_f_).rowwise() +=
      Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>>(b_.v.data(), out_f_);
  return out;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& dy) {
  const int N = x_cache_.dim(0);
  auto dm = dy.mat(N, out_f_);
  w_.ensure_grad();
  b_.ensure_grad();
  w_.grad_mat(in_f_, out_f_).noalias() = x_cache_.mat(N, in_f_).transpose() * dm;
  Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>>(b_.g.data(), out_f_) =
      dm.colwise().sum();
  Tensor<T> dx(x_cache_.shape);
  dx.mat(N, in_f_).noalias() = dm * w_.mat(in_f_, out_f_).transpose();
  return dx;
}

// --------------------------------------------------------------- Flatten

template <typename T>
Tensor<T> Flatten<T>::forward(const Tensor<T>& x, bool) {
  in_shape_ = x.shape;
  const int N = x.dim(0);
  Tensor<T> out({N, static_cast<int>(x.size()) / N});
  out.v = x.v;
  return out;
}

template <typename T>
Tensor<T> Flatten<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dx(in_shape_);
  dx.v = dy.v;
  return dx;
}

// ---------------------------------------------------------- GlobalAvgPool

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, bool) {
  check_nhwc(x);
  in_shape_ = x.shape;
  const int N = x.dim(0), HW = x.dim(1) * x.dim(2), C = x.dim(3);
  Tensor<T> out({N, C});
  for (int n = 0; n < N; ++n) {
    auto block = typename Tensor<T>::ConstMatMap(
        x.v.data() + static_cast<std::size_t>(n) * HW * C, HW, C);
    out.mat(N, C).row(n) = block.colwise().mean();
  }
  return out;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& dy) {
  const int N = in_shape_[0], HW = in_shape_[1] * in_shape_[2], C = in_shape_[3];
  Tensor<T> dx(in_shape_);
  const T scale = T(1) / static_cast<T>(HW);
  for (int n = 0; n < N; ++n) {
    auto block = typename Tensor<T>::MatMap(
        dx.v.data() + static_cast<std::size_t>(n) * HW * C, HW, C);
    block.rowwise() = dy.mat(N, C).row(n) * scale;
  }
  return dx;
}

// --------------------------------------------------------------- Softmax

template <typename T>
Tensor<T> Softmax<T>::forward(const Tensor<T>& x, bool) {
  if (x.shape.size() != 2) throw std::invalid_argument("Softmax: expected {N, K}");
  const int N = x.dim(0), K = x.dim(1);
  Tensor<T> out(x.shape);
  auto xm = x.mat(N, K);
  auto om = out.mat(N, K);
  for (int n = 0; n < N; ++n) {
    auto row = (xm.row(n).array() - xm.row(n).maxCoeff()).exp().eval();
    om.row(n) = row / row.sum();
  }
  y_cache_ = out;
  return out;
}

template <typename T>
Tensor<T> Softmax<T>::backward(const Tensor<T>& dy) {
  const int N = y_cache_.dim(0), K = y_cache_.dim(1);
  Tensor<T> dx(y_cache_.shape);
  auto ym = y_cache_.mat(N, K);
  auto dm = dy.mat(N, K);
  auto dxm = dx.mat(N, K);
  for (int n = 0; n < N; ++n) {
    const T dot = (dm.row(n).array() * ym.row(n).array()).sum();
    dxm.row(n) = ym.row(n).array() * (dm.row(n).array() - dot);
  }
  return dx;
}

// --------------------------------------------------------- ResidualBlock

template <typename T>
ResidualBlock<T>::ResidualBlock(int in_channels, int out_channels, int stride) {
  conv1_ = std::make_unique<Conv2d<T>>(in_channels, out_channels, 3, stride);
  bn1_ = std::make_unique<BatchNorm<T>>(out_channels);
  relu1_ = std::make_unique<Relu<T>>();
  conv2_ = std::make_unique<Conv2d<T>>(out_channels, out_channels, 3, 1);
  bn2_ = std::make_unique<BatchNorm<T>>(out_channels);
  if (stride != 1 || in_channels != out_channels) {
    proj_ = std::make_unique<Conv2d<T>>(in_channels, out_channels, 1, stride,
                                        Padding::Valid);
    proj_bn_ = std::make_unique<BatchNorm<T>>(out_channels);
  }
}

template <typename T>
std::vector<Tensor<T>*> ResidualBlock<T>::parameters() {
  std::vector<Tensor<T>*> out;
  for (Layer<T>* l : std::initializer_list<Layer<T>*>{
           conv1_.get(), bn1_.get(), conv2_.get(), bn2_.get(), proj_.get(),
           proj_bn_.get()}) {
    if (!l) continue;
    for (auto* p : l->parameters()) out.push_back(p);
  }
  return out;
}

template <typename T>
std::vector<Tensor<T>*> ResidualBlock<T>::state_tensors() {
  std::vector<Tensor<T>*> out;
  for (Layer<T>* l : std::initializer_list<Layer<T>*>{
           conv1_.get(), bn1_.get(), conv2_.get(), bn2_.get(), proj_.get(),
           proj_bn_.get()}) {
    if (!l) continue;
    for (auto* p : l->state_tensors()) out.push_back(p);
  }
  return out;
}

template <typename T>
void ResidualBlock<T>::init_params(std::mt19937_64& rng) {
  conv1_->init_params(rng);
  conv2_->init_params(rng);
  if (proj_) proj_->init_params(rng);
}

template <typename T>
Tensor<T> ResidualBlock<T>::forward(const Tensor<T>& x, bool train) {
  Tensor<T> h = conv1_->forward(x, train);
  h = bn1_->forward(h, train);
  h = relu1_->forward(h, train);
  h = conv2_->forward(h, train);
  h = bn2_->forward(h, train);
  Tensor<T> sc = proj_ ? proj_bn_->forward(proj_->forward(x, train), train) : x;
  if (h.shape != sc.shape)
    throw std::invalid_argument("ResidualBlock: branch/shortcut shape mismatch");
  Tensor<T> out(h.shape);
  out_shape_ = h.shape;
  out_mask_.assign(h.size(), 0);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const T s = h.v[i] + sc.v[i];
    if (s > T(0)) {
      out.v[i] = s;
      out_mask_[i] = 1;
    }
  }
  return out;
}

template <typename T>
Tensor<T> ResidualBlock<T>::backward(const Tensor<T>& dy) {
  Tensor<T> dz(out_shape_);
  for (std::size_t i = 0; i < dy.size(); ++i)
    dz.v[i] = out_mask_[i] ? dy.v[i] : T(0);

  Tensor<T> db = bn2_->backward(dz);
  db = conv2_->backward(db);
  db = relu1_->backward(db);
  db = bn1_->backward(db);
  Tensor<T> dx = conv1_->backward(db);

  if (proj_) {
    Tensor<T> ds = proj_bn_->backward(dz);
    ds = proj_->backward(ds);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.v[i] += ds.v[i];
  } else {
    for (std::size_t i = 0; i < dx.size(); ++i) dx.v[i] += dz.v[i];
  }
  return dx;
}

// --------------------------------------------------------- loss helpers

template <typename T>
T softmax_crossentropy(const Tensor<T>& logits, const std::vector<int>& labels,
                       Tensor<T>* dlogits) {
  if (logits.shape.size() != 2)
    throw std::invalid_argument("softmax_crossentropy: expected {N, K}");
  const int N = logits.dim(0), K = logits.dim(1);
  if (static_cast<int>(labels.size()) != N)
    throw std::invalid_argument("softmax_crossentropy: label count mismatch");
  auto lm = logits.mat(N, K);
  if (dlogits) *dlogits = Tensor<T>(logits.shape);
  T loss = T(0);
  for (int n = 0; n < N; ++n) {
    if (labels[n] < 0 || labels[n] >= K)
      throw std::invalid_argument("softmax_crossentropy: label out of range");
    const T mx = lm.row(n).maxCoeff();
    auto z = (lm.row(n).array() - mx).exp().eval();
    const T sum = z.sum();
    loss += -(lm(n, labels[n]) - mx - std::log(sum));
    if (dlogits) {
      auto dm = dlogits->mat(N, K);
      dm.row(n) = (z / sum).matrix() / static_cast<T>(N);
      dm(n, labels[n]) -= T(1) / static_cast<T>(N);
    }
  }
  return loss / static_cast<T>(N);
}

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  Softmax<T> sm;
  return sm.forward(logits, false);
}

// explicit instantiations
#define GK_INSTANTIATE(T)                                                   \
  template class Conv2d<T>;                                                 \
  template class MaxPool2d<T>;                                              \
  template class BatchNorm<T>;                                              \
  template class Relu<T>;                                                   \
  template class Dense<T>;                                                  \
  template class Flatten<T>;                                                \
  template class GlobalAvgPool<T>;                                          \
  template class Softmax<T>;                                                \
  template class ResidualBlock<T>;                                          \
  template T softmax_crossentropy<T>(const Tensor<T>&, const std::vector<int>&, \
                                     Tensor<T>*);                           \
  template Tensor<T> softmax_rows<T>(const Tensor<T>&);

GK_INSTANTIATE(float)
GK_INSTANTIATE(double)
#undef GK_INSTANTIATE

}  // namespace gk::nn
