#include "gesturekit/gesture.hpp"

#include <cmath>
#include <stdexcept>

namespace gk {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}
}  // namespace

const char* gesture_name(GestureClass g) {
  switch (g) {
    case GestureClass::Left: return "LEFT";
    case GestureClass::Right: return "RIGHT";
    case GestureClass::Click: return "CLICK";
    case GestureClass::Wrist: return "WRIST";
  }
  throw std::invalid_argument("unknown gesture class");
}

GestureClass gesture_from_name(const std::string& name) {
  if (name == "LEFT") return GestureClass::Left;
  if (name == "RIGHT") return GestureClass::Right;
  if (name == "CLICK") return GestureClass::Click;
  if (name == "WRIST") return GestureClass::Wrist;
  throw std::invalid_argument("unknown gesture name: " + name);
}

GestureParams GestureParams::defaults(GestureClass g) {
  GestureParams p;
  switch (g) {
    case GestureClass::Left:
    case GestureClass::Right:
      p.range_excursion = 0.05;
      break;
    case GestureClass::Click:
      p.range_excursion = 0.10;
      p.duration = 0.9;
      break;
    case GestureClass::Wrist:
      p.range_excursion = 0.03;
      p.duration = 1.0;
      break;
  }
  return p;
}

GestureParams GestureParams::randomized(GestureClass g, std::mt19937_64& rng,
                                        double block_duration) {
  GestureParams p = defaults(g);
  p.start_range = uniform(rng, 0.20, 0.35);
  p.azimuth_amplitude = uniform(rng, 20.0, 40.0) * kDeg;
  p.azimuth_bias = uniform(rng, -5.0, 5.0) * kDeg;
  // handedness: mirror of the resting azimuth offset
  if (rng() & 1) p.azimuth_bias = -p.azimuth_bias;
  p.duration = uniform(rng, 0.80, 1.15);
  p.reflectivity = uniform(rng, 0.8, 1.2);
  p.body_range = uniform(rng, 0.45, 0.60);
  p.body_reflectivity = uniform(rng, 2.5, 3.5);
  switch (g) {
    case GestureClass::Left:
    case GestureClass::Right:
      p.range_excursion = uniform(rng, 0.03, 0.06);
      break;
    case GestureClass::Click:
      p.range_excursion = uniform(rng, 0.08, 0.12);
      p.azimuth_amplitude = 0.0;
      break;
    case GestureClass::Wrist:
      p.range_excursion = uniform(rng, 0.02, 0.04);
      p.wrist_frequency = uniform(rng, 3.0, 5.0);
      p.azimuth_amplitude = 0.0;
      break;
  }
  double latest = block_duration - p.duration - 0.1;
  p.start_time = uniform(rng, 0.1, std::max(0.1, latest));
  return p;
}

ScattererState gesture_trajectory(GestureClass g, const GestureParams& p, double t) {
  if (t < 0.0 || t > p.duration)
    throw std::invalid_argument("gesture_trajectory: t outside [0, duration]");
  const double u = t / p.duration;
  ScattererState s;
  s.reflectivity = p.reflectivity;
  switch (g) {
    case GestureClass::Left: {
      // azimuth sweeps +amp -> -amp; slight mid-gesture approach
      s.azimuth = p.azimuth_bias + p.azimuth_amplitude * std::cos(kPi * u);
      s.range = p.start_range - p.range_excursion * std::sin(kPi * u);
      s.velocity = -p.range_excursion * (kPi / p.duration) * std::cos(kPi * u);
      break;
    }
    case GestureClass::Right: {
      ScattererState m = gesture_trajectory(GestureClass::Left, p, t);
      s = m;
      s.azimuth = -m.azimuth;
      break;
    }
    case GestureClass::Click: {
      s.azimuth = p.azimuth_bias;
      s.range = p.start_range - p.range_excursion * std::sin(kPi * u);
      s.velocity = -p.range_excursion * (kPi / p.duration) * std::cos(kPi * u);
      break;
    }
    case GestureClass::Wrist: {
      const double w = 2.0 * kPi * p.wrist_frequency;
      const double env = std::sin(kPi * u);
      const double denv = (kPi / p.duration) * std::cos(kPi * u);
      s.azimuth = p.azimuth_bias;
      s.range = p.start_range + p.range_excursion * std::sin(w * t) * env;
      s.velocity = p.range_excursion *
                   (w * std::cos(w * t) * env + std::sin(w * t) * denv);
      break;
    }
    default:
      throw std::invalid_argument("unknown gesture class");
  }
  return s;
}

}  // namespace gk
