#pragma once

#include <array>
#include <string>
#include <vector>

#include "gesturekit/gesture.hpp"
#include "gesturekit/nn/model.hpp"
#include "gesturekit/rsa.hpp"

namespace gk {

// 10 weight layers: 4 x {conv3x3-C, conv3x3-C, maxpool} with C = 16/32/64/128
// (first conv stride 2 for CPU-scale input), dense-256, dense-4.
nn::Model<float> build_vgg10(std::uint64_t init_seed = 0);

// conv3x3-16 stem (stride 2) + maxpool, 3 stages x 3 residual blocks with
// 16/32/64 channels and stride-2 projection at stage entry, global average
// pool, dense-4: 20 weight layers.
nn::Model<float> build_resnet20(std::uint64_t init_seed = 0);

nn::Model<float> build_model(const std::string& arch, std::uint64_t init_seed = 0);

// Parameter counts of the builders above, frozen as constants.
inline constexpr std::size_t kVgg10ParamCount = 819092;
inline constexpr std::size_t kResnet20ParamCount = 272868;

// ------------------------------------------------------- template baseline

// Per-class reference trajectories: range/speed/azimuth profiles over time.
struct GestureTemplateSet {
  // [class][time][channel]
  std::array<Eigen::Matrix<float, Eigen::Dynamic, 3>, kNumClasses> profiles;
};

// Trajectory extraction: per time row, the range bin maximizing the
// motion-compensated intensity (temporal median removed per range bin), then
// that bin's three channel values.
Eigen::Matrix<float, Eigen::Dynamic, 3> reduce_profile(const RsaImage& img);

// Per-class mean of the training profiles. Throws if a class is absent.
GestureTemplateSet fit_templates(const std::vector<const RsaImage*>& images,
                                 const std::vector<int>& labels);

// Unconstrained DTW with |a - b| local cost.
double dtw_distance(const Eigen::Ref<const Eigen::VectorXf>& a,
                    const Eigen::Ref<const Eigen::VectorXf>& b);

// Sum of the per-channel DTW distances between profiles.
double template_distance(
    const Eigen::Matrix<float, Eigen::Dynamic, 3>& profile,
    const Eigen::Matrix<float, Eigen::Dynamic, 3>& reference);

// Nearest template; ties broken by class index.
GestureClass template_classify(const RsaImage& img, const GestureTemplateSet& t);
// Softmin pseudo-probabilities over the four template distances.
std::array<double, kNumClasses> template_scores(const RsaImage& img,
                                                const GestureTemplateSet& t);

// ------------------------------------------------------------- checkpoints
// GNN1 container: magic, u32 JSON header length, JSON header, f32 blobs in
// declaration order.

void save_model_checkpoint(const std::string& path, const std::string& arch,
                           nn::Model<float>& model);
nn::Model<float> load_model_checkpoint(const std::string& path,
                                       std::string* arch = nullptr);
void save_template_checkpoint(const std::string& path,
                              const GestureTemplateSet& templates);
GestureTemplateSet load_template_checkpoint(const std::string& path);
// "vgg10", "resnet20", or "template"
std::string checkpoint_kind(const std::string& path);

}  // namespace gk
