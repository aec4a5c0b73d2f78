#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace gk {

enum class GestureClass { Left = 0, Right = 1, Click = 2, Wrist = 3 };
inline constexpr int kNumClasses = 4;

const char* gesture_name(GestureClass g);
GestureClass gesture_from_name(const std::string& name);  // throws on unknown

// Point-scatterer state of the hand at one instant.
struct ScattererState {
  double range = 0.0;         // m
  double velocity = 0.0;      // dR/dt, m/s
  double azimuth = 0.0;       // rad
  double reflectivity = 1.0;
};

// Kinematic parameters of one gesture execution. Meaning of range_excursion:
// LEFT/RIGHT/CLICK mid-gesture range dip depth; WRIST oscillation amplitude.
struct GestureParams {
  double start_range = 0.30;        // m
  double azimuth_amplitude = 0.5235987755982988;  // rad, 30 deg sweep half-width
  double azimuth_bias = 0.0;        // rad
  double range_excursion = 0.05;    // m
  double duration = 1.0;            // s
  double wrist_frequency = 4.0;     // Hz
  double reflectivity = 1.0;
  double start_time = 0.1;          // s, gesture onset within a recording
  double body_range = 0.5;          // m, static torso clutter
  double body_reflectivity = 3.0;
  bool body_enabled = true;

  static GestureParams defaults(GestureClass g);
  // Inter-subject variation: draws amplitudes, timing, ranges from g-specific
  // intervals. block_duration bounds start_time so the gesture fits.
  static GestureParams randomized(GestureClass g, std::mt19937_64& rng,
                                  double block_duration);
};

// Hand scatterer state at time t since gesture onset (0 <= t <= duration).
// velocity is the exact analytic derivative of range.
ScattererState gesture_trajectory(GestureClass g, const GestureParams& p, double t);

}  // namespace gk
