#include "gesturekit/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gk {

using nn::BatchNorm;
using nn::Conv2d;
using nn::Dense;
using nn::Flatten;
using nn::GlobalAvgPool;
using nn::MaxPool2d;
using nn::Model;
using nn::Relu;
using nn::ResidualBlock;

Model<float> build_vgg10(std::uint64_t init_seed) {
  Model<float> m;
  const int widths[4] = {16, 32, 64, 128};
  int in_c = 3;
  for (int stage = 0; stage < 4; ++stage) {
    const int c = widths[stage];
    m.add<Conv2d<float>>(in_c, c, 3, stage == 0 ? 2 : 1);
    m.add<Relu<float>>();
    m.add<Conv2d<float>>(c, c, 3);
    m.add<Relu<float>>();
    m.add<MaxPool2d<float>>();
    in_c = c;
  }
  m.add<Flatten<float>>();
  m.add<Dense<float>>(4 * 4 * 128, 256);
  m.add<Relu<float>>();
  m.add<Dense<float>>(256, kNumClasses);
  m.init_params(init_seed);
  return m;
}

Model<float> build_resnet20(std::uint64_t init_seed) {
  Model<float> m;
  m.add<Conv2d<float>>(3, 16, 3, 2);
  m.add<BatchNorm<float>>(16);
  m.add<Relu<float>>();
  m.add<MaxPool2d<float>>();
  const int widths[3] = {16, 32, 64};
  int in_c = 16;
  for (int stage = 0; stage < 3; ++stage) {
    const int c = widths[stage];
    for (int block = 0; block < 3; ++block) {
      const int stride = (block == 0 && stage > 0) ? 2 : 1;
      m.add<ResidualBlock<float>>(in_c, c, stride);
      in_c = c;
    }
  }
  m.add<GlobalAvgPool<float>>();
  m.add<Dense<float>>(64, kNumClasses);
  m.init_params(init_seed);
  return m;
}

Model<float> build_model(const std::string& arch, std::uint64_t init_seed) {
  if (arch == "vgg10") return build_vgg10(init_seed);
  if (arch == "resnet20") return build_resnet20(init_seed);
  throw std::invalid_argument("unknown architecture: " + arch);
}

Eigen::Matrix<float, Eigen::Dynamic, 3> reduce_profile(const RsaImage& img) {
  // temporal median of the intensity channel per range bin
  Eigen::VectorXf median(kRsaRange);
  std::vector<float> column(kRsaTime);
  for (int r = 0; r < kRsaRange; ++r) {
    for (int t = 0; t < kRsaTime; ++t) column[t] = img.at(t, r, 0);
    std::nth_element(column.begin(), column.begin() + kRsaTime / 2, column.end());
    median(r) = column[kRsaTime / 2];
  }
  Eigen::Matrix<float, Eigen::Dynamic, 3> profile(kRsaTime, 3);
  for (int t = 0; t < kRsaTime; ++t) {
    int best = 0;
    float best_v = -1.0f;
    for (int r = 0; r < kRsaRange; ++r) {
      const float v = img.at(t, r, 0) - median(r);
      if (v > best_v) {
        best_v = v;
        best = r;
      }
    }
    profile(t, 0) = img.at(t, best, 0);
    profile(t, 1) = img.at(t, best, 1);
    profile(t, 2) = img.at(t, best, 2);
  }
  return profile;
}

GestureTemplateSet fit_templates(const std::vector<const RsaImage*>& images,
                                 const std::vector<int>& labels) {
  if (images.size() != labels.size() || images.empty())
    throw std::invalid_argument("fit_templates: bad training data");
  GestureTemplateSet t;
  std::array<int, kNumClasses> counts{};
  for (auto& p : t.profiles) p = Eigen::Matrix<float, Eigen::Dynamic, 3>::Zero(kRsaTime, 3);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= kNumClasses)
      throw std::invalid_argument("fit_templates: label out of range");
    t.profiles[y] += reduce_profile(*images[i]);
    ++counts[y];
  }
  for (int c = 0; c < kNumClasses; ++c) {
    if (counts[c] == 0)
      throw std::invalid_argument(std::string("fit_templates: no samples for ") +
                                  gesture_name(static_cast<GestureClass>(c)));
    t.profiles[c] /= static_cast<float>(counts[c]);
  }
  return t;
}

double dtw_distance(const Eigen::Ref<const Eigen::VectorXf>& a,
                    const Eigen::Ref<const Eigen::VectorXf>& b) {
  const int n = static_cast<int>(a.size());
  const int m = static_cast<int>(b.size());
  if (n == 0 || m == 0) throw std::invalid_argument("dtw_distance: empty input");
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(m + 1, inf), cur(m + 1, inf);
  prev[0] = 0.0;
  for (int i = 1; i <= n; ++i) {
    cur[0] = inf;
    for (int j = 1; j <= m; ++j) {
      const double cost = std::abs(static_cast<double>(a(i - 1)) - b(j - 1));
      cur[j] = cost + std::min({prev[j], cur[j - 1], prev[j - 1]});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double template_distance(
    const Eigen::Matrix<float, Eigen::Dynamic, 3>& profile,
    const Eigen::Matrix<float, Eigen::Dynamic, 3>& reference) {
  double d = 0.0;
  for (int c = 0; c < 3; ++c) d += dtw_distance(profile.col(c), reference.col(c));
  return d;
}

GestureClass template_classify(const RsaImage& img, const GestureTemplateSet& t) {
  const auto profile = reduce_profile(img);
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kNumClasses; ++c) {
    const double d = template_distance(profile, t.profiles[c]);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return static_cast<GestureClass>(best);
}

std::array<double, kNumClasses> template_scores(const RsaImage& img,
                                                const GestureTemplateSet& t) {
  const auto profile = reduce_profile(img);
  std::array<double, kNumClasses> d{};
  double lo = std::numeric_limits<double>::infinity();
  for (int c = 0; c < kNumClasses; ++c) {
    d[c] = template_distance(profile, t.profiles[c]);
    lo = std::min(lo, d[c]);
  }
  // softmin of distances, scaled by the nearest distance
  const double tau = std::max(lo, 1e-9);
  double sum = 0.0;
  for (auto& v : d) {
    v = std::exp(-(v - lo) / tau);
    sum += v;
  }
  for (auto& v : d) v /= sum;
  return d;
}

}  // namespace gk
