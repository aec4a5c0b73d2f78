#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <map>
#include <set>

#include "gesturekit/dataset.hpp"

using namespace gk;

namespace {

GenerateOptions tiny(std::uint64_t seed = 3) {
  GenerateOptions opt;
  opt.per_class = 2;
  opt.crops_per_recording = 2;
  opt.seed = seed;
  return opt;
}

std::vector<RsaFrame> marked_block(int n) {
  // channel 1 encodes the source frame index so crops are traceable
  std::vector<RsaFrame> block(n);
  for (int t = 0; t < n; ++t) {
    block[t].channels.resize(kRsaRange, 3);
    block[t].channels.col(0).setConstant(0.2f);
    block[t].channels.col(1).setConstant(static_cast<float>(t) / 255.0f);
    block[t].channels.col(2).setConstant(0.5f);
  }
  block[0].channels(0, 0) = 1.0f;  // fix the normalization span
  block[0].channels(1, 0) = 0.0f;
  return block;
}

}  // namespace

TEST_CASE("random crops cover the gesture nucleus") {
  auto block = marked_block(160);
  std::mt19937_64 rng(1);
  const int nucleus_begin = 30, nucleus_end = 110;
  auto crops = random_crop_augment(block, nucleus_begin, nucleus_end, 16, rng,
                                   /*range_jitter=*/0);
  REQUIRE(crops.size() == 16);
  std::set<int> starts;
  for (const auto& img : crops) {
    const int start = static_cast<int>(std::lround(img.at(0, 5, 1) * 255.0));
    starts.insert(start);
    CHECK(start <= nucleus_begin);          // window begins before the gesture
    CHECK(start + kRsaTime >= nucleus_end); // and ends after it
    // rows are a contiguous window of the block
    for (int t = 0; t < kRsaTime; ++t)
      CHECK(img.at(t, 5, 1) ==
            doctest::Approx(static_cast<float>(start + t) / 255.0f));
  }
  CHECK(starts.size() > 1);  // actually randomized

  CHECK_THROWS_AS(random_crop_augment(marked_block(100), 0, 50, 1, rng),
                  std::invalid_argument);
}

TEST_CASE("range jitter shifts the range axis with edge replication") {
  auto block = marked_block(160);
  // paint a range landmark
  for (auto& f : block) f.channels(40, 2) = 0.9f;
  std::mt19937_64 rng(2);
  auto crops = random_crop_augment(block, 0, 128, 24, rng, /*range_jitter=*/4);
  bool shifted = false;
  for (const auto& img : crops) {
    int found = -1;
    for (int r = 0; r < kRsaRange; ++r)
      if (img.at(10, r, 2) > 0.8f) {
        found = r;
        break;
      }
    REQUIRE(found >= 0);
    CHECK(std::abs(found - 40) <= 4);
    if (found != 40) shifted = true;
  }
  CHECK(shifted);
}

TEST_CASE("generation is deterministic and labels are consistent") {
  auto a = generate_dataset(tiny());
  auto b = generate_dataset(tiny());
  auto c = generate_dataset(tiny(99));
  REQUIRE(a.size() == 16);  // 4 classes x 2 recordings x 2 crops
  REQUIRE(a.size() == b.size());
  bool identical = true, differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    identical = identical && a[i].image.data == b[i].image.data &&
                a[i].seed == b[i].seed;
    differs = differs || a[i].image.data != c[i].image.data;
    CHECK(a[i].image.label == static_cast<int>(a[i].label));
  }
  CHECK(identical);
  CHECK(differs);

  // crops of one recording share ids, params, and the class label
  std::map<std::uint64_t, std::set<int>> by_recording;
  for (const auto& r : a) by_recording[r.recording_id].insert(static_cast<int>(r.label));
  CHECK(by_recording.size() == 8);
  for (const auto& [id, labels] : by_recording) CHECK(labels.size() == 1);
}

TEST_CASE("generated kinematics differ between recordings") {
  auto records = generate_dataset(tiny());
  bool vary = false;
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].recording_id != records[0].recording_id &&
        records[i].params.start_range != records[0].params.start_range)
      vary = true;
  CHECK(vary);
  CHECK_THROWS_AS(generate_dataset([] {
                    auto o = tiny();
                    o.per_class = 0;
                    return o;
                  }()),
                  std::invalid_argument);
}

TEST_CASE("the split is stratified and never divides a recording") {
  GenerateOptions opt;
  opt.per_class = 5;
  opt.crops_per_recording = 2;
  opt.seed = 8;
  auto records = generate_dataset(opt);
  split_dataset(records, 0.3, 1);

  std::map<int, std::map<Split, int>> counts;
  std::map<std::uint64_t, std::set<Split>> rec_split;
  for (const auto& r : records) {
    ++counts[static_cast<int>(r.label)][r.split];
    rec_split[r.recording_id].insert(r.split);
  }
  for (const auto& [id, splits] : rec_split) CHECK(splits.size() == 1);
  for (int c = 0; c < kNumClasses; ++c) {
    const int val = counts[c][Split::Val];
    const int total = val + counts[c][Split::Train];
    CHECK(total == 10);
    // 0.3 of 10 samples in 5 recordings of 2: expect 2 or 4 in val
    CHECK(val >= 2);
    CHECK(val <= 4);
  }

  CHECK_THROWS_AS(split_dataset(records, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(records, 1.0, 1), std::invalid_argument);
}

TEST_CASE("datasets round-trip through the directory format bit-exactly") {
  namespace fs = std::filesystem;
  auto records = generate_dataset(tiny());
  split_dataset(records, 0.3, 2);
  const auto dir = (fs::temp_directory_path() / "gk_dataset_test").string();
  fs::remove_all(dir);
  save_dataset(dir, records);
  CHECK(fs::exists(fs::path(dir) / "manifest.json"));

  auto loaded = load_dataset(dir);
  REQUIRE(loaded.size() == records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(std::memcmp(loaded[i].image.data.data(), records[i].image.data.data(),
                      records[i].image.data.size() * sizeof(float)) == 0);
    CHECK(loaded[i].label == records[i].label);
    CHECK(loaded[i].split == records[i].split);
    CHECK(loaded[i].recording_id == records[i].recording_id);
    CHECK(loaded[i].seed == records[i].seed);
    CHECK(loaded[i].params.start_range == records[i].params.start_range);
    CHECK(loaded[i].params.duration == records[i].params.duration);
  }
  fs::remove_all(dir);
  CHECK_THROWS_AS(load_dataset(dir), std::runtime_error);
}

TEST_CASE("split names round-trip") {
  for (auto s : {Split::Train, Split::Val, Split::Test})
    CHECK(split_from_name(split_name(s)) == s);
  CHECK_THROWS_AS(split_from_name("holdout"), std::invalid_argument);
}
