#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gesturekit/config.hpp"
#include "gesturekit/gesture.hpp"

namespace gk {

// One frame of complex baseband samples: per receiver a P x N matrix,
// rows = chirps (slow time), cols = samples (fast time).
struct RadarCube {
  std::vector<Eigen::MatrixXcd> rx;
  double timestamp = 0.0;

  int rx_count() const { return static_cast<int>(rx.size()); }
  int chirps() const { return rx.empty() ? 0 : static_cast<int>(rx[0].rows()); }
  int samples() const { return rx.empty() ? 0 : static_cast<int>(rx[0].cols()); }
};

// Analytic phase of the deterministic signal model at sample (l, p, n) for one
// scatterer, in radians (not reduced mod 2pi).
double signal_phase(const ChirpConfig& cfg, const ScattererState& s,
                    int rx, int chirp, int sample);

// Beat frequency in fast time for a scatterer: 2*slope*R/c + f_d.
double beat_frequency(const ChirpConfig& cfg, const ScattererState& s);
double doppler_frequency(const ChirpConfig& cfg, const ScattererState& s);

RadarCube synthesize_frame(const ChirpConfig& cfg,
                           const std::vector<ScattererState>& scatterers,
                           std::uint64_t seed);

// frames cubes at t = k * frame_period: hand scatterer from gesture_trajectory
// (held at its endpoint pose outside [start_time, start_time + duration])
// plus an optional static body scatterer. Deterministic in seed.
std::vector<RadarCube> synthesize_recording(const ChirpConfig& cfg, GestureClass g,
                                            const GestureParams& params, int frames,
                                            std::uint64_t seed);

// Hand scatterer pose used by synthesize_recording at absolute time t.
ScattererState recording_hand_state(GestureClass g, const GestureParams& params,
                                    double t);

// FMC1 container: magic, u32 dims (L, P, N), interleaved f32 re/im in
// (l, p, n) row-major order. A stream may hold several concatenated cubes.
void write_cube(std::ostream& out, const RadarCube& cube);
RadarCube read_cube(std::istream& in);  // throws std::runtime_error on bad data
void save_cubes(const std::string& path, const std::vector<RadarCube>& cubes);
std::vector<RadarCube> load_cubes(const std::string& path);

}  // namespace gk
