#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gesturekit/rsa.hpp"

namespace gk {

enum class Split { Train = 0, Val = 1, Test = 2 };
const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct SampleRecord {
  RsaImage image;
  GestureClass label = GestureClass::Left;
  std::uint64_t recording_id = 0;  // subject surrogate; crops share it
  Split split = Split::Train;
  std::uint64_t seed = 0;          // generator seed of the recording
  GestureParams params;
};

struct GenerateOptions {
  int per_class = 250;
  int crops_per_recording = 8;
  int block_frames = 160;
  std::uint64_t seed = 7;
  ChirpConfig cfg;
  CfarParams cfar;
  bool verbose = false;
};

// Synthesize per_class recordings per gesture with randomized kinematics, run
// the radar and processing pipeline, and emit crops_per_recording random crops
// of each 160-frame block. Deterministic in seed.
std::vector<SampleRecord> generate_dataset(const GenerateOptions& opt);

// Random 128-frame windows containing the gesture nucleus
// [nucleus_begin, nucleus_end), with optional +-range_jitter bin shifts
// (edge-replicated). Throws if the block is shorter than 128 frames.
std::vector<RsaImage> random_crop_augment(const std::vector<RsaFrame>& block,
                                          int nucleus_begin, int nucleus_end,
                                          int crops, std::mt19937_64& rng,
                                          int range_jitter = 4);

// Stratified by class, split by recording id so crops of one recording never
// straddle the split.
void split_dataset(std::vector<SampleRecord>& records, double val_ratio,
                   std::uint64_t seed);

// Directory layout: one RSA1 file per sample plus manifest.json (written
// last) listing file, label, split, recording id, seed and kinematics.
void save_dataset(const std::string& dir, const std::vector<SampleRecord>& records);
std::vector<SampleRecord> load_dataset(const std::string& dir);

}  // namespace gk
