#include "gesturekit/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "gesturekit/models.hpp"
#include "gesturekit/nn/gradcheck.hpp"
#include "gesturekit/rsa.hpp"

namespace gk {

namespace {

struct Check {
  const char* name;
  std::function<void()> run;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

void peak_cell(const Eigen::MatrixXd& power, int* d, int* r) {
  Eigen::Index pd, pr;
  power.maxCoeff(&pd, &pr);
  *d = static_cast<int>(pd);
  *r = static_cast<int>(pr);
}

void check_shape_chain() {
  ChirpConfig cfg;
  cfg.noise_std = 0.5;
  GestureParams params = GestureParams::defaults(GestureClass::Left);
  auto cubes = synthesize_recording(cfg, GestureClass::Left, params, kRsaTime, 11);
  require(cubes.size() == kRsaTime, "recording is not 128 frames");
  const auto& cube = cubes.front();
  require(cube.rx_count() == 4 && cube.chirps() == 16 && cube.samples() == 128,
          "raw cube is not 4 x 16 x 128");
  auto rdms = range_doppler_map(cube, cfg);
  require(rdms.size() == 4, "one map per receiver expected");
  require(rdms[0].cells.rows() == kDopplerBins && rdms[0].cells.cols() == kRangeBins,
          "spectrum is not 64 x 256");
  auto cropped = crop_rdm(rdms[0]);
  require(cropped.cells.rows() == kDopplerBins &&
              cropped.cells.cols() == kCroppedRangeBins,
          "cropped spectrum is not 64 x 128");
  auto frames = process_frames(cubes, cfg);
  require(frames.size() == kRsaTime, "frame count changed in processing");
  require(frames[0].channels.rows() == kRsaRange && frames[0].channels.cols() == 3,
          "reduced frame is not 1 x 128 x 3");
  auto img = merge_rsa(frames);
  require(img.data.size() ==
              static_cast<std::size_t>(kRsaTime) * kRsaRange * kRsaChannels,
          "merged image is not 128 x 128 x 3");
  for (float v : img.data)
    require(v >= 0.0f && v <= 1.0f, "image value outside [0, 1]");
}

void check_range_velocity() {
  ChirpConfig cfg;
  cfg.noise_std = 0.0;
  ScattererState s{0.45, 0.9, 0.15, 1.0};
  auto cube = synthesize_frame(cfg, {s}, 1);
  auto rdms = range_doppler_map(cube, cfg);
  int d, r;
  peak_cell(mean_power(rdms), &d, &r);
  require(std::abs(r - range_bin(cfg, s.range)) <= 1, "range peak off by > 1 bin");
  require(std::abs(d - doppler_bin(cfg, s.velocity)) <= 1,
          "Doppler peak off by > 1 bin");
}

void check_aoa() {
  ChirpConfig cfg;
  cfg.noise_std = 0.0;
  for (double theta : {-0.6, -0.2, 0.0, 0.3, 0.7}) {
    ScattererState s{0.35, 0.0, theta, 1.0};
    auto rdms = range_doppler_map(synthesize_frame(cfg, {s}, 2), cfg);
    int d, r;
    peak_cell(mean_power(rdms), &d, &r);
    const double est = aoa_at_cell(rdms, d, r, cfg);
    require(std::abs(est - theta) < 2.0 * M_PI / 180.0,
            "azimuth estimate off by > 2 deg");
  }
}

void check_parseval() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd x(16, 128);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) x(i, j) = {gauss(rng), gauss(rng)};
  const auto X = fft_2d(x, kDopplerBins, kRangeBins, false);
  const double lhs = X.squaredNorm();
  const double rhs = static_cast<double>(kDopplerBins) * kRangeBins * x.squaredNorm();
  require(std::abs(lhs - rhs) <= 1e-9 * rhs, "Parseval identity violated");
}

void check_cfar() {
  CfarParams params;
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(kDopplerBins, kRangeBins, 2.0);
  auto det = cfar_detect(flat, params);
  require(!det.mask.any(), "detections on a constant map");
  Eigen::MatrixXd spike = flat;
  spike(20, 70) *= 100.0;
  det = cfar_detect(spike, params);
  require(det.mask(20, 70), "missed a 100x spike");
}

void check_gradients() {
  std::mt19937_64 rng(17);
  double worst = 0.0;
  auto run = [&](nn::Layer<double>& l, std::vector<int> shape) {
    const auto r = nn::check_layer_gradients(l, shape, rng, 12);
    worst = std::max(worst, r.max_rel_err);
  };
  {
    nn::Conv2d<double> l(3, 4, 3);
    run(l, {2, 6, 6, 3});
  }
  {
    nn::Conv2d<double> l(3, 4, 3, 2);
    run(l, {2, 7, 7, 3});
  }
  {
    nn::MaxPool2d<double> l;
    run(l, {2, 5, 6, 3});
  }
  {
    nn::BatchNorm<double> l(3);
    run(l, {4, 3, 3, 3});
  }
  {
    nn::Relu<double> l;
    run(l, {2, 4, 4, 3});
  }
  {
    nn::Dense<double> l(10, 5);
    run(l, {3, 10});
  }
  {
    nn::GlobalAvgPool<double> l;
    run(l, {2, 4, 4, 3});
  }
  {
    nn::Softmax<double> l;
    run(l, {3, 4});
  }
  {
    nn::ResidualBlock<double> l(3, 6, 2);
    run(l, {4, 6, 6, 3});
  }
  require(worst < 1e-5,
          "gradient check failed, max relative error " + std::to_string(worst));
}

void check_round_trips() {
  ChirpConfig cfg;
  cfg.noise_std = 1.0;
  auto cube = synthesize_frame(cfg, {{0.3, 0.5, 0.1, 1.0}}, 5);
  std::stringstream buf;
  write_cube(buf, cube);
  auto cube2 = read_cube(buf);
  require(cube2.rx_count() == cube.rx_count(), "cube round-trip lost receivers");
  for (int l = 0; l < cube.rx_count(); ++l)
    for (int p = 0; p < cube.chirps(); ++p)
      for (int n = 0; n < cube.samples(); ++n) {
        const auto a = cube.rx[l](p, n), b = cube2.rx[l](p, n);
        require(static_cast<float>(a.real()) == static_cast<float>(b.real()) &&
                    static_cast<float>(a.imag()) == static_cast<float>(b.imag()),
                "cube round-trip not bit-exact");
      }

  RsaImage img;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  for (auto& v : img.data) v = uni(rng);
  img.label = 2;
  std::stringstream buf2;
  write_rsa(buf2, img);
  auto img2 = read_rsa(buf2);
  require(img2.label == img.label &&
              std::memcmp(img2.data.data(), img.data.data(),
                          img.data.size() * sizeof(float)) == 0,
          "image round-trip not bit-exact");
}

void check_model_contracts() {
  auto vgg = build_vgg10(1);
  require(vgg.weight_layer_count() == 10, "vgg10 weight layer count");
  require(vgg.param_count() == kVgg10ParamCount, "vgg10 parameter count");
  auto res = build_resnet20(1);
  require(res.weight_layer_count() == 20, "resnet20 weight layer count");
  require(res.param_count() == kResnet20ParamCount, "resnet20 parameter count");
}

}  // namespace

bool run_selftest(bool verbose) {
  const Check checks[] = {
      {"shape chain 16x128 -> 64x256 -> 64x128 -> 1x128x3 -> 128x128x3",
       check_shape_chain},
      {"range/velocity peak bins", check_range_velocity},
      {"azimuth estimation", check_aoa},
      {"fft parseval identity", check_parseval},
      {"cfar detector", check_cfar},
      {"layer gradients (f64)", check_gradients},
      {"serialization round-trips", check_round_trips},
      {"model contracts", check_model_contracts},
  };
  bool ok = true;
  for (const auto& c : checks) {
    try {
      c.run();
      if (verbose) std::fprintf(stderr, "selftest: %s: ok\n", c.name);
    } catch (const std::exception& e) {
      ok = false;
      std::fprintf(stderr, "selftest: %s: FAIL (%s)\n", c.name, e.what());
    }
  }
  return ok;
}

}  // namespace gk
