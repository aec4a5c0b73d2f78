#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "gesturekit/config.hpp"
#include "gesturekit/radar_sim.hpp"

namespace gk {

inline constexpr int kDopplerBins = 64;
inline constexpr int kRangeBins = 256;
inline constexpr int kCroppedRangeBins = 128;
inline constexpr int kZeroDopplerBin = kDopplerBins / 2;

// 2D spectrum, rows = Doppler (centered, zero velocity at kZeroDopplerBin),
// cols = range.
struct RangeDopplerMap {
  Eigen::MatrixXcd cells;
  Eigen::MatrixXd magnitude() const { return cells.cwiseAbs(); }
};

// Hann window (optional), zero-pad rows/cols to pad_rows x pad_cols, FFT both
// axes, circular shift of the row (Doppler) axis. Pads must be powers of two
// and >= the input dims.
Eigen::MatrixXcd fft_2d(const Eigen::MatrixXcd& in, int pad_rows = kDopplerBins,
                        int pad_cols = kRangeBins, bool window = true);

std::vector<RangeDopplerMap> range_doppler_map(const RadarCube& cube,
                                               const ChirpConfig& cfg,
                                               bool window = true);

// Axis maps for the padded spectrum.
double range_of_bin(const ChirpConfig& cfg, double bin);
int range_bin(const ChirpConfig& cfg, double range);
double velocity_of_bin(const ChirpConfig& cfg, double bin);
int doppler_bin(const ChirpConfig& cfg, double velocity);

struct CfarParams {
  double pfa = 1e-3;
  int guard_doppler = 1;
  int guard_range = 2;
  int train_doppler = 4;
  int train_range = 8;
};

struct DetectionMask {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> mask;
  Eigen::ArrayXXd noise;  // per-cell mean training power
};

// Cell-averaging CFAR on a power (squared magnitude) map. Edge cells use the
// truncated training window; the threshold multiplier T = M*(pfa^(-1/M)-1) is
// recomputed for the per-cell training count M.
DetectionMask cfar_detect(const Eigen::MatrixXd& power, const CfarParams& params);
DetectionMask cfar_detect(const RangeDopplerMap& rdm, const CfarParams& params);

// Mean power across receivers, the detection statistic of the pipeline.
Eigen::MatrixXd mean_power(const std::vector<RangeDopplerMap>& rdms);

// Keep the near half of the range axis (bins 0..127).
RangeDopplerMap crop_rdm(const RangeDopplerMap& rdm);
DetectionMask crop_mask(const DetectionMask& mask);

double wrap_phase(double phi);  // to (-pi, pi]

// Two-receiver interferometric azimuth at one cell value pair:
// dbeta = arg(a) - arg(b), theta = asin(dbeta * lambda / (2 pi d)).
double aoa_estimate(std::complex<double> a, std::complex<double> b,
                    const ChirpConfig& cfg, bool* clamped = nullptr);

// Phase-slope azimuth across all receivers at cell (d, r): mean of the wrapped
// successive-pair phase differences.
double aoa_at_cell(const std::vector<RangeDopplerMap>& rdms, int d, int r,
                   const ChirpConfig& cfg);

}  // namespace gk
