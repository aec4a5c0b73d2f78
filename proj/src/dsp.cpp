#include "gesturekit/dsp.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gk {

namespace {
constexpr double kPi = 3.14159265358979323846;

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

Eigen::VectorXd hann(int len) {
  Eigen::VectorXd w(len);
  if (len == 1) {
    w(0) = 1.0;
    return w;
  }
  for (int i = 0; i < len; ++i)
    w(i) = 0.5 * (1.0 - std::cos(2.0 * kPi * i / (len - 1)));
  return w;
}
}  // namespace

Eigen::MatrixXcd fft_2d(const Eigen::MatrixXcd& in, int pad_rows, int pad_cols,
                        bool window) {
  const int rows = static_cast<int>(in.rows());
  const int cols = static_cast<int>(in.cols());
  if (!power_of_two(pad_rows) || !power_of_two(pad_cols))
    throw std::invalid_argument("fft_2d: pad dims must be powers of two");
  if (pad_rows < rows || pad_cols < cols)
    throw std::invalid_argument("fft_2d: pad dims smaller than input");

  Eigen::MatrixXcd buf = Eigen::MatrixXcd::Zero(pad_rows, pad_cols);
  if (window) {
    Eigen::VectorXd wr = hann(rows), wc = hann(cols);
    buf.topLeftCorner(rows, cols) =
        in.cwiseProduct(wr * wc.transpose());
  } else {
    buf.topLeftCorner(rows, cols) = in;
  }

  Eigen::FFT<double> fft;
  Eigen::VectorXcd tmp(pad_cols), out(pad_cols);
  for (int r = 0; r < pad_rows; ++r) {
    tmp = buf.row(r);
    fft.fwd(out, tmp);
    buf.row(r) = out;
  }
  Eigen::VectorXcd ctmp(pad_rows), cout(pad_rows);
  for (int c = 0; c < pad_cols; ++c) {
    ctmp = buf.col(c);
    fft.fwd(cout, ctmp);
    buf.col(c) = cout;
  }

  // center the Doppler axis: zero frequency to row pad_rows/2
  Eigen::MatrixXcd shifted(pad_rows, pad_cols);
  const int half = pad_rows / 2;
  shifted.topRows(half) = buf.bottomRows(half);
  shifted.bottomRows(pad_rows - half) = buf.topRows(pad_rows - half);
  return shifted;
}

std::vector<RangeDopplerMap> range_doppler_map(const RadarCube& cube,
                                               const ChirpConfig& cfg,
                                               bool window) {
  if (cube.chirps() != cfg.chirps_per_frame ||
      cube.samples() != cfg.samples_per_chirp ||
      cube.rx_count() != cfg.rx_count)
    throw std::invalid_argument("range_doppler_map: cube shape != config");
  std::vector<RangeDopplerMap> maps;
  maps.reserve(cube.rx_count());
  for (const auto& m : cube.rx)
    maps.push_back({fft_2d(m, kDopplerBins, kRangeBins, window)});
  return maps;
}

double range_of_bin(const ChirpConfig& cfg, double bin) {
  const double fb = bin * cfg.sample_rate() / kRangeBins;
  return fb * kSpeedOfLight / (2.0 * cfg.slope());
}

int range_bin(const ChirpConfig& cfg, double range) {
  const double fb = 2.0 * cfg.slope() * range / kSpeedOfLight;
  return static_cast<int>(std::lround(fb / cfg.sample_rate() * kRangeBins));
}

double velocity_of_bin(const ChirpConfig& cfg, double bin) {
  const double fd = (bin - kZeroDopplerBin) * cfg.prf() / kDopplerBins;
  return fd * cfg.wavelength() / 2.0;
}

int doppler_bin(const ChirpConfig& cfg, double velocity) {
  const double fd = 2.0 * velocity / cfg.wavelength();
  return kZeroDopplerBin +
         static_cast<int>(std::lround(fd / cfg.prf() * kDopplerBins));
}

DetectionMask cfar_detect(const Eigen::MatrixXd& power, const CfarParams& params) {
  if (!(params.pfa > 0.0 && params.pfa < 0.5))
    throw std::invalid_argument("cfar_detect: pfa outside (0, 0.5)");
  if (params.train_doppler < 0 || params.train_range < 0 ||
      params.guard_doppler < 0 || params.guard_range < 0 ||
      params.train_doppler + params.train_range == 0)
    throw std::invalid_argument("cfar_detect: degenerate training window");

  const int D = static_cast<int>(power.rows());
  const int R = static_cast<int>(power.cols());

  // integral image, S(i, j) = sum of power block [0, i) x [0, j)
  Eigen::MatrixXd integral = Eigen::MatrixXd::Zero(D + 1, R + 1);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < R; ++j)
      integral(i + 1, j + 1) = power(i, j) + integral(i, j + 1) +
                               integral(i + 1, j) - integral(i, j);

  auto rect_sum = [&](int r0, int r1, int c0, int c1) {  // inclusive, clipped
    r0 = std::max(r0, 0);
    c0 = std::max(c0, 0);
    r1 = std::min(r1, D - 1);
    c1 = std::min(c1, R - 1);
    return integral(r1 + 1, c1 + 1) - integral(r0, c1 + 1) -
           integral(r1 + 1, c0) + integral(r0, c0);
  };
  auto rect_count = [&](int r0, int r1, int c0, int c1) {
    r0 = std::max(r0, 0);
    c0 = std::max(c0, 0);
    r1 = std::min(r1, D - 1);
    c1 = std::min(c1, R - 1);
    return (r1 - r0 + 1) * (c1 - c0 + 1);
  };

  const int od = params.guard_doppler + params.train_doppler;
  const int orr = params.guard_range + params.train_range;
  std::vector<double> scale_cache((2 * od + 1) * (2 * orr + 1) + 1, -1.0);
  DetectionMask out;
  out.mask.resize(D, R);
  out.noise.resize(D, R);
  for (int d = 0; d < D; ++d)
    for (int r = 0; r < R; ++r) {
      const double train_sum =
          rect_sum(d - od, d + od, r - orr, r + orr) -
          rect_sum(d - params.guard_doppler, d + params.guard_doppler,
                   r - params.guard_range, r + params.guard_range);
      const int m =
          rect_count(d - od, d + od, r - orr, r + orr) -
          rect_count(d - params.guard_doppler, d + params.guard_doppler,
                     r - params.guard_range, r + params.guard_range);
      const double mean = train_sum / m;
      if (scale_cache[m] < 0.0)
        scale_cache[m] = m * (std::pow(params.pfa, -1.0 / m) - 1.0);
      const double scale = scale_cache[m];
      out.noise(d, r) = mean;
      out.mask(d, r) = power(d, r) > scale * mean;
    }
  return out;
}

DetectionMask cfar_detect(const RangeDopplerMap& rdm, const CfarParams& params) {
  return cfar_detect(rdm.cells.cwiseAbs2().eval(), params);
}

Eigen::MatrixXd mean_power(const std::vector<RangeDopplerMap>& rdms) {
  if (rdms.empty()) throw std::invalid_argument("mean_power: no maps");
  Eigen::MatrixXd p = rdms[0].cells.cwiseAbs2();
  for (std::size_t i = 1; i < rdms.size(); ++i) p += rdms[i].cells.cwiseAbs2();
  return p / static_cast<double>(rdms.size());
}

RangeDopplerMap crop_rdm(const RangeDopplerMap& rdm) {
  if (rdm.cells.cols() < kCroppedRangeBins)
    throw std::invalid_argument("crop_rdm: too few range bins");
  return {rdm.cells.leftCols(kCroppedRangeBins)};
}

DetectionMask crop_mask(const DetectionMask& mask) {
  if (mask.mask.cols() < kCroppedRangeBins)
    throw std::invalid_argument("crop_mask: too few range bins");
  DetectionMask out;
  out.mask = mask.mask.leftCols(kCroppedRangeBins);
  out.noise = mask.noise.leftCols(kCroppedRangeBins);
  return out;
}

double wrap_phase(double phi) {
  phi = std::fmod(phi, 2.0 * kPi);
  if (phi > kPi) phi -= 2.0 * kPi;
  if (phi <= -kPi) phi += 2.0 * kPi;
  return phi;
}

double aoa_estimate(std::complex<double> a, std::complex<double> b,
                    const ChirpConfig& cfg, bool* clamped) {
  const double dbeta = wrap_phase(std::arg(a) - std::arg(b));
  double s = dbeta * cfg.wavelength() / (2.0 * kPi * cfg.spacing());
  bool clip = s < -1.0 || s > 1.0;
  if (clamped) *clamped = clip;
  s = std::clamp(s, -1.0, 1.0);
  return std::asin(s);
}

double aoa_at_cell(const std::vector<RangeDopplerMap>& rdms, int d, int r,
                   const ChirpConfig& cfg) {
  const int n = static_cast<int>(rdms.size());
  if (n < 2) throw std::invalid_argument("aoa_at_cell: need >= 2 receivers");
  double dbeta = 0.0;
  for (int l = 0; l + 1 < n; ++l)
    dbeta += wrap_phase(std::arg(rdms[l + 1].cells(d, r)) -
                        std::arg(rdms[l].cells(d, r)));
  dbeta /= (n - 1);
  double s = std::clamp(dbeta * cfg.wavelength() / (2.0 * kPi * cfg.spacing()),
                        -1.0, 1.0);
  return std::asin(s);
}

}  // namespace gk
