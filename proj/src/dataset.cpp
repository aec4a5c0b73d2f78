#include "gesturekit/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

namespace gk {

namespace fs = std::filesystem;

const char* split_name(Split s) {
  switch (s) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  throw std::invalid_argument("unknown split");
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw std::invalid_argument("unknown split name: " + name);
}

std::vector<RsaImage> random_crop_augment(const std::vector<RsaFrame>& block,
                                          int nucleus_begin, int nucleus_end,
                                          int crops, std::mt19937_64& rng,
                                          int range_jitter) {
  const int n = static_cast<int>(block.size());
  if (n < kRsaTime)
    throw std::invalid_argument("random_crop_augment: block shorter than 128 frames");
  int lo = std::max(0, nucleus_end - kRsaTime);
  int hi = std::min(n - kRsaTime, std::max(0, nucleus_begin));
  if (hi < lo) hi = lo;  // nucleus longer than the window: fixed best-effort crop

  std::vector<RsaImage> out;
  out.reserve(crops);
  for (int i = 0; i < crops; ++i) {
    const int start = std::uniform_int_distribution<int>(lo, hi)(rng);
    const int jitter =
        range_jitter > 0
            ? std::uniform_int_distribution<int>(-range_jitter, range_jitter)(rng)
            : 0;
    std::vector<RsaFrame> window(kRsaTime);
    for (int t = 0; t < kRsaTime; ++t) {
      window[t].channels.resize(kRsaRange, 3);
      for (int r = 0; r < kRsaRange; ++r) {
        const int src = std::clamp(r - jitter, 0, kRsaRange - 1);
        window[t].channels.row(r) = block[start + t].channels.row(src);
      }
    }
    out.push_back(merge_rsa(window));
  }
  return out;
}

std::vector<SampleRecord> generate_dataset(const GenerateOptions& opt) {
  if (opt.per_class < 1) throw std::invalid_argument("generate_dataset: per_class < 1");
  if (opt.crops_per_recording < 1)
    throw std::invalid_argument("generate_dataset: crops < 1");
  opt.cfg.validate();
  const double block_duration = opt.block_frames * opt.cfg.frame_period;

  std::vector<SampleRecord> records;
  records.reserve(static_cast<std::size_t>(kNumClasses) * opt.per_class *
                  opt.crops_per_recording);
  for (int c = 0; c < kNumClasses; ++c) {
    const auto g = static_cast<GestureClass>(c);
    for (int i = 0; i < opt.per_class; ++i) {
      const std::uint64_t recording_id =
          static_cast<std::uint64_t>(c) * opt.per_class + i;
      const std::uint64_t rec_seed =
          opt.seed ^ (0x9E3779B97F4A7C15ULL * (recording_id + 1));
      std::mt19937_64 rng(rec_seed);
      GestureParams params = GestureParams::randomized(g, rng, block_duration);
      auto cubes = synthesize_recording(opt.cfg, g, params, opt.block_frames, rng());
      auto frames = process_frames(cubes, opt.cfg, opt.cfar);
      const int nucleus_begin =
          static_cast<int>(std::floor(params.start_time / opt.cfg.frame_period));
      const int nucleus_end = static_cast<int>(
          std::ceil((params.start_time + params.duration) / opt.cfg.frame_period));
      auto crops = random_crop_augment(frames, nucleus_begin, nucleus_end,
                                       opt.crops_per_recording, rng);
      for (auto& img : crops) {
        SampleRecord rec;
        img.label = c;
        rec.image = std::move(img);
        rec.label = g;
        rec.recording_id = recording_id;
        rec.seed = rec_seed;
        rec.params = params;
        records.push_back(std::move(rec));
      }
      if (opt.verbose && (i + 1) % 50 == 0)
        std::fprintf(stderr, "%s: %d/%d recordings\n", gesture_name(g), i + 1,
                     opt.per_class);
    }
  }
  return records;
}

void split_dataset(std::vector<SampleRecord>& records, double val_ratio,
                   std::uint64_t seed) {
  if (!(val_ratio > 0.0 && val_ratio < 1.0))
    throw std::invalid_argument("split_dataset: ratio outside (0, 1)");
  std::mt19937_64 rng(seed);
  for (int c = 0; c < kNumClasses; ++c) {
    std::map<std::uint64_t, int> rec_sizes;  // recording -> sample count
    int total = 0;
    for (const auto& r : records)
      if (static_cast<int>(r.label) == c) {
        ++rec_sizes[r.recording_id];
        ++total;
      }
    if (total == 0) continue;
    if (rec_sizes.size() < 2)
      throw std::invalid_argument("split_dataset: class needs >= 2 recordings");
    std::vector<std::uint64_t> ids;
    ids.reserve(rec_sizes.size());
    for (const auto& [id, count] : rec_sizes) ids.push_back(id);
    std::shuffle(ids.begin(), ids.end(), rng);
    const int target = static_cast<int>(std::lround(val_ratio * total));
    std::map<std::uint64_t, bool> in_val;
    int assigned = 0;
    for (auto id : ids) {
      const bool take = assigned < target;
      in_val[id] = take;
      if (take) assigned += rec_sizes[id];
    }
    for (auto& r : records)
      if (static_cast<int>(r.label) == c)
        r.split = in_val[r.recording_id] ? Split::Val : Split::Train;
  }
}

namespace {

nlohmann::json params_to_json(const GestureParams& p) {
  return {
      {"start_range", p.start_range},
      {"azimuth_amplitude", p.azimuth_amplitude},
      {"azimuth_bias", p.azimuth_bias},
      {"range_excursion", p.range_excursion},
      {"duration", p.duration},
      {"wrist_frequency", p.wrist_frequency},
      {"reflectivity", p.reflectivity},
      {"start_time", p.start_time},
      {"body_range", p.body_range},
      {"body_reflectivity", p.body_reflectivity},
      {"body_enabled", p.body_enabled},
  };
}

GestureParams params_from_json(const nlohmann::json& j) {
  GestureParams p;
  p.start_range = j.at("start_range").get<double>();
  p.azimuth_amplitude = j.at("azimuth_amplitude").get<double>();
  p.azimuth_bias = j.at("azimuth_bias").get<double>();
  p.range_excursion = j.at("range_excursion").get<double>();
  p.duration = j.at("duration").get<double>();
  p.wrist_frequency = j.at("wrist_frequency").get<double>();
  p.reflectivity = j.at("reflectivity").get<double>();
  p.start_time = j.at("start_time").get<double>();
  p.body_range = j.at("body_range").get<double>();
  p.body_reflectivity = j.at("body_reflectivity").get<double>();
  p.body_enabled = j.at("body_enabled").get<bool>();
  return p;
}

}  // namespace

void save_dataset(const std::string& dir, const std::vector<SampleRecord>& records) {
  fs::create_directories(dir);
  nlohmann::json manifest = nlohmann::json::array();
  char name[64];
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    std::snprintf(name, sizeof(name), "s%06zu_%s.rsa", i, gesture_name(r.label));
    RsaImage img = r.image;
    img.label = static_cast<int>(r.label);
    save_rsa((fs::path(dir) / name).string(), img);
    manifest.push_back({
        {"file", name},
        {"label", gesture_name(r.label)},
        {"split", split_name(r.split)},
        {"recording_id", r.recording_id},
        {"seed", r.seed},
        {"params", params_to_json(r.params)},
    });
  }
  // manifest last, as the commit point
  std::ofstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("cannot write manifest in " + dir);
  f << manifest.dump(2) << "\n";
  if (!f) throw std::runtime_error("manifest write failed in " + dir);
}

std::vector<SampleRecord> load_dataset(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "manifest.json");
  if (!f) throw std::runtime_error("cannot open manifest in " + dir);
  nlohmann::json manifest = nlohmann::json::parse(f);
  std::vector<SampleRecord> records;
  records.reserve(manifest.size());
  for (const auto& e : manifest) {
    SampleRecord r;
    const std::string file = e.at("file").get<std::string>();
    r.image = load_rsa((fs::path(dir) / file).string());
    r.label = gesture_from_name(e.at("label").get<std::string>());
    if (r.image.label >= 0 && r.image.label != static_cast<int>(r.label))
      throw std::runtime_error(file + ": label disagrees with manifest");
    r.split = split_from_name(e.at("split").get<std::string>());
    r.recording_id = e.at("recording_id").get<std::uint64_t>();
    r.seed = e.at("seed").get<std::uint64_t>();
    r.params = params_from_json(e.at("params"));
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace gk
