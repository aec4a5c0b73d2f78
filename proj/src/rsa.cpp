#include "gesturekit/rsa.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace gk {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr char kRsaMagic[4] = {'R', 'S', 'A', '1'};
}  // namespace

RsaFrame rsa_frame(const std::vector<RangeDopplerMap>& cropped_rdms,
                   const DetectionMask& cropped_mask, const ChirpConfig& cfg) {
  if (cropped_rdms.empty())
    throw std::invalid_argument("rsa_frame: no receiver maps");
  const int D = static_cast<int>(cropped_rdms[0].cells.rows());
  const int R = static_cast<int>(cropped_rdms[0].cells.cols());
  if (R != kRsaRange || D != kDopplerBins)
    throw std::invalid_argument("rsa_frame: expected 64 x 128 input");
  if (cropped_mask.mask.rows() != D || cropped_mask.mask.cols() != R)
    throw std::invalid_argument("rsa_frame: mask shape mismatch");

  Eigen::MatrixXd mag = Eigen::MatrixXd::Zero(D, R);
  for (const auto& m : cropped_rdms) mag += m.cells.cwiseAbs();
  mag /= static_cast<double>(cropped_rdms.size());

  RsaFrame frame;
  frame.channels.resize(kRsaRange, 3);
  for (int r = 0; r < R; ++r) {
    int dmax = 0;
    const double peak = mag.col(r).maxCoeff(&dmax);
    frame.channels(r, 0) = static_cast<float>(std::log1p(peak));

    double speed = 0.5;
    if (peak > 0.0)
      speed = 0.5 + (dmax - kZeroDopplerBin) / static_cast<double>(kDopplerBins);
    frame.channels(r, 1) = static_cast<float>(std::clamp(speed, 0.0, 1.0));

    double theta_sum = 0.0;
    int detections = 0;
    for (int d = 0; d < D; ++d)
      if (cropped_mask.mask(d, r)) {
        theta_sum += aoa_at_cell(cropped_rdms, d, r, cfg);
        ++detections;
      }
    double az = 0.5;
    if (detections > 0) az = 0.5 + (theta_sum / detections) / kPi;
    frame.channels(r, 2) = static_cast<float>(std::clamp(az, 0.0, 1.0));
  }
  return frame;
}

RsaImage merge_rsa(const std::vector<RsaFrame>& frames) {
  if (static_cast<int>(frames.size()) != kRsaTime)
    throw std::invalid_argument("merge_rsa: need exactly 128 frames");
  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  for (const auto& f : frames) {
    if (f.channels.rows() != kRsaRange)
      throw std::invalid_argument("merge_rsa: bad frame length");
    lo = std::min(lo, f.channels.col(0).minCoeff());
    hi = std::max(hi, f.channels.col(0).maxCoeff());
  }
  const float span = hi - lo;
  RsaImage img;
  for (int t = 0; t < kRsaTime; ++t)
    for (int r = 0; r < kRsaRange; ++r) {
      float v = frames[t].channels(r, 0);
      img.at(t, r, 0) = span > 0.0f ? std::clamp((v - lo) / span, 0.0f, 1.0f) : 0.0f;
      img.at(t, r, 1) = std::clamp(frames[t].channels(r, 1), 0.0f, 1.0f);
      img.at(t, r, 2) = std::clamp(frames[t].channels(r, 2), 0.0f, 1.0f);
    }
  return img;
}

std::vector<RsaFrame> process_frames(const std::vector<RadarCube>& cubes,
                                     const ChirpConfig& cfg,
                                     const CfarParams& cfar, bool window) {
  std::vector<RsaFrame> frames;
  frames.reserve(cubes.size());
  for (const auto& cube : cubes) {
    auto rdms = range_doppler_map(cube, cfg, window);
    DetectionMask mask = cfar_detect(mean_power(rdms), cfar);
    std::vector<RangeDopplerMap> cropped;
    cropped.reserve(rdms.size());
    for (const auto& m : rdms) cropped.push_back(crop_rdm(m));
    frames.push_back(rsa_frame(cropped, crop_mask(mask), cfg));
  }
  return frames;
}

RsaImage process_recording(const std::vector<RadarCube>& cubes,
                           const ChirpConfig& cfg, const CfarParams& cfar) {
  if (static_cast<int>(cubes.size()) != kRsaTime)
    throw std::invalid_argument("process_recording: need exactly 128 cubes");
  return merge_rsa(process_frames(cubes, cfg, cfar));
}

void write_rsa(std::ostream& out, const RsaImage& img) {
  out.write(kRsaMagic, 4);
  const std::uint8_t label = static_cast<std::uint8_t>(
      img.label >= 0 && img.label < kNumClasses ? img.label : 255);
  out.write(reinterpret_cast<const char*>(&label), 1);
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size() * sizeof(float)));
}

RsaImage read_rsa(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kRsaMagic, 4) != 0)
    throw std::runtime_error("RSA1: bad magic");
  std::uint8_t label = 255;
  in.read(reinterpret_cast<char*>(&label), 1);
  RsaImage img;
  in.read(reinterpret_cast<char*>(img.data.data()),
          static_cast<std::streamsize>(img.data.size() * sizeof(float)));
  if (!in) throw std::runtime_error("RSA1: truncated payload");
  img.label = label == 255 ? -1 : label;
  return img;
}

void save_rsa(const std::string& path, const RsaImage& img) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  write_rsa(f, img);
  if (!f) throw std::runtime_error("write failed: " + path);
}

RsaImage load_rsa(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  try {
    return read_rsa(f);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_pgm(const std::string& path, const RsaImage& img, int channel) {
  if (channel < 0 || channel >= kRsaChannels)
    throw std::invalid_argument("save_pgm: bad channel");
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  f << "P5\n" << kRsaRange << " " << kRsaTime << "\n255\n";
  for (int t = 0; t < kRsaTime; ++t)
    for (int r = 0; r < kRsaRange; ++r) {
      const float v = std::clamp(img.at(t, r, channel), 0.0f, 1.0f);
      f.put(static_cast<char>(std::lround(v * 255.0f)));
    }
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace gk
