#pragma once

#include <cmath>
#include <stdexcept>

namespace gk {

inline constexpr double kSpeedOfLight = 299792458.0;

// FMCW waveform and array geometry. Defaults model a 57-64 GHz radar with
// 4 receivers on a half-wavelength baseline, 16 chirps x 128 samples per frame.
struct ChirpConfig {
  double f_min = 57e9;            // Hz
  double f_max = 64e9;            // Hz
  double chirp_duration = 64e-6;  // T_c, seconds; also the chirp repetition T_0
  int samples_per_chirp = 128;    // N (fast time)
  int chirps_per_frame = 16;      // P (slow time)
  double frame_period = 10e-3;    // T_f, seconds
  int rx_count = 4;
  double rx_spacing = 0.0;        // meters; 0 selects lambda/2
  double amplitude = 1.0;
  double noise_std = 3.0;         // std of the complex noise sample, sqrt(E|n|^2)

  double bandwidth() const { return f_max - f_min; }
  double slope() const { return bandwidth() / chirp_duration; }
  double center_frequency() const { return 0.5 * (f_min + f_max); }
  double wavelength() const { return kSpeedOfLight / center_frequency(); }
  double sample_rate() const { return samples_per_chirp / chirp_duration; }
  double prf() const { return 1.0 / chirp_duration; }
  double spacing() const {
    return rx_spacing > 0.0 ? rx_spacing : 0.5 * wavelength();
  }

  // Width of one range bin after zero-padding the fast-time FFT to nfft.
  double range_bin_width(int nfft = 256) const {
    return kSpeedOfLight * sample_rate() / (2.0 * slope() * nfft);
  }
  // Velocity per Doppler bin after zero-padding the slow-time FFT to nfft.
  double velocity_bin_width(int nfft = 64) const {
    return prf() / nfft * wavelength() / 2.0;
  }
  // Unambiguous velocity, PRF*lambda/4.
  double max_velocity() const { return prf() * wavelength() / 4.0; }

  void validate() const {
    if (f_max <= f_min) throw std::invalid_argument("ChirpConfig: f_max <= f_min");
    if (chirp_duration <= 0) throw std::invalid_argument("ChirpConfig: chirp_duration <= 0");
    if (samples_per_chirp < 1 || chirps_per_frame < 1)
      throw std::invalid_argument("ChirpConfig: empty frame");
    if (rx_count < 1) throw std::invalid_argument("ChirpConfig: rx_count < 1");
    if (frame_period <= 0) throw std::invalid_argument("ChirpConfig: frame_period <= 0");
    if (noise_std < 0) throw std::invalid_argument("ChirpConfig: negative noise_std");
  }
};

// noise_std that puts the windowed RDM peak of a unit scatterer at snr_db.
double noise_std_for_peak_snr(const ChirpConfig& cfg, double snr_db,
                              double reflectivity = 1.0, bool windowed = true);

}  // namespace gk
