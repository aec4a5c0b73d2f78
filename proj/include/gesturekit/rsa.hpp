#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gesturekit/dsp.hpp"

namespace gk {

inline constexpr int kRsaTime = 128;
inline constexpr int kRsaRange = 128;
inline constexpr int kRsaChannels = 3;

// One processed frame: per range bin (range intensity, speed, azimuth).
// Channels 1 and 2 are final values in [0,1] (0.5 neutral); channel 0 is the
// log-compressed magnitude, min-max normalized later over the whole recording.
struct RsaFrame {
  Eigen::Matrix<float, Eigen::Dynamic, 3> channels;  // kRsaRange x 3
};

RsaFrame rsa_frame(const std::vector<RangeDopplerMap>& cropped_rdms,
                   const DetectionMask& cropped_mask, const ChirpConfig& cfg);

// 128 x 128 x 3 range/speed/azimuth image, row-major (time, range, channel).
struct RsaImage {
  std::vector<float> data;
  int label = -1;  // GestureClass index, -1 if unlabeled

  RsaImage() : data(kRsaTime * kRsaRange * kRsaChannels, 0.0f) {}
  float& at(int t, int r, int c) {
    return data[(t * kRsaRange + r) * kRsaChannels + c];
  }
  float at(int t, int r, int c) const {
    return data[(t * kRsaRange + r) * kRsaChannels + c];
  }
};

// Stack exactly 128 frames as time rows and min-max normalize channel 0.
RsaImage merge_rsa(const std::vector<RsaFrame>& frames);

// Table-style steps 1-4 applied to each cube.
std::vector<RsaFrame> process_frames(const std::vector<RadarCube>& cubes,
                                     const ChirpConfig& cfg,
                                     const CfarParams& cfar = {},
                                     bool window = true);

// Full pipeline for a 128-frame recording.
RsaImage process_recording(const std::vector<RadarCube>& cubes,
                           const ChirpConfig& cfg, const CfarParams& cfar = {});

// RSA1 container: magic, u8 label, f32 values in (time, range, channel) order.
void write_rsa(std::ostream& out, const RsaImage& img);
RsaImage read_rsa(std::istream& in);  // throws std::runtime_error
void save_rsa(const std::string& path, const RsaImage& img);
RsaImage load_rsa(const std::string& path);

// 8-bit grayscale PGM of one channel (values scaled from [0,1]).
void save_pgm(const std::string& path, const RsaImage& img, int channel);

}  // namespace gk
