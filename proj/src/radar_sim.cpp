#include "gesturekit/radar_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <stdexcept>

namespace gk {

namespace {
constexpr double kTwoPi = 6.283185307179586476925;
constexpr char kCubeMagic[4] = {'F', 'M', 'C', '1'};
}  // namespace

double doppler_frequency(const ChirpConfig& cfg, const ScattererState& s) {
  return 2.0 * s.velocity / cfg.wavelength();
}

double beat_frequency(const ChirpConfig& cfg, const ScattererState& s) {
  return 2.0 * cfg.slope() * s.range / kSpeedOfLight + doppler_frequency(cfg, s);
}

double signal_phase(const ChirpConfig& cfg, const ScattererState& s,
                    int rx, int chirp, int sample) {
  const double fd = doppler_frequency(cfg, s);
  const double fast = beat_frequency(cfg, s) * sample / cfg.sample_rate();
  const double array = cfg.center_frequency() * rx * cfg.spacing() *
                       std::sin(s.azimuth) / kSpeedOfLight;
  const double slow = fd * chirp * cfg.chirp_duration;
  const double offset = 2.0 * cfg.center_frequency() * s.range / kSpeedOfLight;
  return kTwoPi * (fast + array + slow + offset);
}

double noise_std_for_peak_snr(const ChirpConfig& cfg, double snr_db,
                              double reflectivity, bool windowed) {
  const int n = cfg.samples_per_chirp, p = cfg.chirps_per_frame;
  double sum_n = n, sum_p = p, sq_n = n, sq_p = p;
  if (windowed) {
    auto hann = [](int len, double& sum, double& sq) {
      sum = sq = 0.0;
      for (int i = 0; i < len; ++i) {
        double w = 0.5 * (1.0 - std::cos(kTwoPi * i / (len - 1)));
        sum += w;
        sq += w * w;
      }
    };
    hann(n, sum_n, sq_n);
    hann(p, sum_p, sq_p);
  }
  const double peak_power = reflectivity * reflectivity * cfg.amplitude *
                            cfg.amplitude * sum_n * sum_n * sum_p * sum_p;
  const double snr = std::pow(10.0, snr_db / 10.0);
  return std::sqrt(peak_power / (snr * sq_n * sq_p));
}

RadarCube synthesize_frame(const ChirpConfig& cfg,
                           const std::vector<ScattererState>& scatterers,
                           std::uint64_t seed) {
  cfg.validate();
  for (const auto& s : scatterers) {
    if (!(s.range > 0.0)) throw std::invalid_argument("scatterer range <= 0");
    if (std::abs(s.azimuth) >= 1.5707963267948966)
      throw std::invalid_argument("scatterer |azimuth| >= pi/2");
  }
  const int L = cfg.rx_count, P = cfg.chirps_per_frame, N = cfg.samples_per_chirp;
  RadarCube cube;
  cube.rx.assign(L, Eigen::MatrixXcd::Zero(P, N));

  for (const auto& s : scatterers) {
    const double amp = cfg.amplitude * s.reflectivity;
    const double fd = doppler_frequency(cfg, s);
    const double dphi = kTwoPi * beat_frequency(cfg, s) / cfg.sample_rate();
    const std::complex<double> step = std::polar(1.0, dphi);
    const double base = kTwoPi * 2.0 * cfg.center_frequency() * s.range / kSpeedOfLight;
    for (int l = 0; l < L; ++l) {
      const double aphase = kTwoPi * cfg.center_frequency() * l * cfg.spacing() *
                            std::sin(s.azimuth) / kSpeedOfLight;
      for (int p = 0; p < P; ++p) {
        double phi0 = base + aphase + kTwoPi * fd * p * cfg.chirp_duration;
        std::complex<double> v = std::polar(amp, phi0);
        auto row = cube.rx[l].row(p);
        for (int n = 0; n < N; ++n) {
          row(n) += v;
          v *= step;
        }
      }
    }
  }

  if (cfg.noise_std > 0.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, cfg.noise_std / std::sqrt(2.0));
    for (int l = 0; l < L; ++l)
      for (int p = 0; p < P; ++p)
        for (int n = 0; n < N; ++n) {
          double re = gauss(rng), im = gauss(rng);
          cube.rx[l](p, n) += std::complex<double>(re, im);
        }
  }
  return cube;
}

ScattererState recording_hand_state(GestureClass g, const GestureParams& params,
                                    double t) {
  double tg = t - params.start_time;
  bool idle = tg < 0.0 || tg > params.duration;
  ScattererState s = gesture_trajectory(
      g, params, std::clamp(tg, 0.0, params.duration));
  if (idle) s.velocity = 0.0;
  return s;
}

std::vector<RadarCube> synthesize_recording(const ChirpConfig& cfg, GestureClass g,
                                            const GestureParams& params, int frames,
                                            std::uint64_t seed) {
  if (frames < 1) throw std::invalid_argument("synthesize_recording: frames < 1");
  std::mt19937_64 master(seed);
  std::vector<RadarCube> out;
  out.reserve(frames);
  for (int k = 0; k < frames; ++k) {
    const double t = k * cfg.frame_period;
    std::vector<ScattererState> sc;
    sc.push_back(recording_hand_state(g, params, t));
    if (params.body_enabled) {
      ScattererState body;
      body.range = params.body_range;
      body.velocity = 0.0;
      body.azimuth = 0.0;
      body.reflectivity = params.body_reflectivity;
      sc.push_back(body);
    }
    RadarCube cube = synthesize_frame(cfg, sc, master());
    cube.timestamp = t;
    out.push_back(std::move(cube));
  }
  return out;
}

void write_cube(std::ostream& out, const RadarCube& cube) {
  out.write(kCubeMagic, 4);
  std::uint32_t dims[3] = {static_cast<std::uint32_t>(cube.rx_count()),
                           static_cast<std::uint32_t>(cube.chirps()),
                           static_cast<std::uint32_t>(cube.samples())};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  for (const auto& m : cube.rx)
    for (int p = 0; p < m.rows(); ++p)
      for (int n = 0; n < m.cols(); ++n) {
        float v[2] = {static_cast<float>(m(p, n).real()),
                      static_cast<float>(m(p, n).imag())};
        out.write(reinterpret_cast<const char*>(v), sizeof(v));
      }
}

RadarCube read_cube(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCubeMagic, 4) != 0)
    throw std::runtime_error("FMC1: bad magic");
  std::uint32_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in || dims[0] == 0 || dims[1] == 0 || dims[2] == 0 ||
      dims[0] > 64 || dims[1] > 4096 || dims[2] > 65536)
    throw std::runtime_error("FMC1: bad dims");
  RadarCube cube;
  cube.rx.assign(dims[0], Eigen::MatrixXcd(dims[1], dims[2]));
  for (auto& m : cube.rx)
    for (int p = 0; p < m.rows(); ++p)
      for (int n = 0; n < m.cols(); ++n) {
        float v[2];
        in.read(reinterpret_cast<char*>(v), sizeof(v));
        if (!in) throw std::runtime_error("FMC1: truncated cube data");
        m(p, n) = std::complex<double>(v[0], v[1]);
      }
  return cube;
}

void save_cubes(const std::string& path, const std::vector<RadarCube>& cubes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + path);
  for (const auto& c : cubes) write_cube(f, c);
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<RadarCube> load_cubes(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open: " + path);
  std::vector<RadarCube> cubes;
  while (f.peek() != EOF) cubes.push_back(read_cube(f));
  return cubes;
}

}  // namespace gk
