#include <gtest/gtest.h>

#include <filesystem>

#include "fluentnet/features/dataset_io.hpp"
#include "test_signals.hpp"

using namespace fluentnet;
using namespace fluentnet::features;
using synthesis::DisfluencyType;

namespace {

audio::Waveform noise_file(double seconds, std::uint64_t seed) { return fluentnet::testing::white_noise(seconds, seed); }

Spectrogram grid(std::size_t frames, std::size_t bins, std::vector<float> values) {
  Spectrogram s;
  s.frames = frames;
  s.bins = bins;
  s.values = std::move(values);
  return s;
}

}  // namespace

TEST(ExtractClips, PositiveThenNegative) {
  const auto w = noise_file(8.0, 1);
  const auto clips = extract_clips(w, {{"th-this", 1.0, 1.6, DisfluencyType::S}}, DisfluencyType::S);
  ASSERT_EQ(clips.size(), 2u);
  EXPECT_EQ(clips[0].label, 1);
  EXPECT_EQ(clips[0].dtype, DisfluencyType::S);
  EXPECT_EQ(clips[1].label, 0);
  EXPECT_EQ(clips[1].dtype, DisfluencyType::CLEAN);
  EXPECT_EQ(clips[0].spectrogram.frames, 398u);
  EXPECT_EQ(clips[0].spectrogram.bins, 256u);
}

TEST(ExtractClips, OtherTypeWindowExcluded) {
  const auto w = noise_file(8.0, 2);
  const auto clips = extract_clips(w, {{"go go", 1.0, 1.6, DisfluencyType::W}}, DisfluencyType::S);
  ASSERT_EQ(clips.size(), 1u);
  EXPECT_EQ(clips[0].label, 0);
  EXPECT_DOUBLE_EQ(clips[0].offset_s, 4.0);
}

TEST(ExtractClips, ShortFileZeroPadded) {
  const auto w = noise_file(3.0, 3);
  const auto clips = extract_clips(w, {}, DisfluencyType::PR);
  ASSERT_EQ(clips.size(), 1u);
  const auto& s = clips[0].spectrogram;
  EXPECT_EQ(s.frames, 398u);
  // Frames starting at or after 3 s only see the padding.
  const std::size_t first_pad = (48000 + 159) / 160;
  for (std::size_t f = first_pad; f < s.frames; ++f)
    for (std::size_t k = 0; k < s.bins; ++k) ASSERT_EQ(s.at(f, k), 0.0f);
  EXPECT_GT(s.at(0, 10), 0.0f);
}

TEST(ExtractClips, StraddlingLabelExcludesNeighbour) {
  // Midpoint 3.9 s: owned by window 0, tail spills into window 1.
  const auto classes = classify_windows(8.0, {{"x", 3.7, 4.1, DisfluencyType::PR}}, DisfluencyType::PR);
  ASSERT_EQ(classes.size(), 2u);
  EXPECT_EQ(classes[0], WindowClass::positive);
  EXPECT_EQ(classes[1], WindowClass::excluded);
}

TEST(ExtractClips, WindowsPartitionPaddedDuration) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const double seconds = rng.uniform(0.5, 17.0);
    const auto w = noise_file(seconds, static_cast<std::uint64_t>(trial));
    const auto clips = extract_clips(w, {}, DisfluencyType::S);
    const auto expected = static_cast<std::size_t>(std::ceil(static_cast<double>(w.size()) / 64000.0));
    ASSERT_EQ(clips.size(), expected);
    for (std::size_t i = 0; i < clips.size(); ++i) EXPECT_DOUBLE_EQ(clips[i].offset_s, 4.0 * static_cast<double>(i));
  }
}

TEST(Normalization, ConstantSpectrogramsBecomeZero) {
  std::vector<Clip> clips(3);
  for (auto& c : clips) c.spectrogram = grid(4, 3, std::vector<float>(12, 2.5f));
  const auto stats = normalize_spectrograms(clips);
  for (const auto& c : clips)
    for (float v : c.spectrogram.values) EXPECT_EQ(v, 0.0f);
  EXPECT_DOUBLE_EQ(stats.mean[0], 2.5);
}

TEST(Normalization, TrainMomentsAndHeldOutUsesTrainStats) {
  Rng rng(5);
  std::vector<Clip> train(6), test(2);
  for (auto& c : train) {
    std::vector<float> v(50 * 8);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(rng.normal() * (1 + i % 8) + 3.0 * (i % 8));
    c.spectrogram = grid(50, 8, v);
  }
  for (auto& c : test) c.spectrogram = grid(50, 8, std::vector<float>(400, 1.0f));
  const auto raw_test = test;
  const auto stats = normalize_spectrograms(train, {&test});
  for (std::size_t k = 0; k < 8; ++k) {
    double sum = 0, sq = 0;
    std::size_t n = 0;
    for (const auto& c : train)
      for (std::size_t f = 0; f < 50; ++f) {
        sum += c.spectrogram.at(f, k);
        ++n;
      }
    const double mean = sum / n;
    for (const auto& c : train)
      for (std::size_t f = 0; f < 50; ++f) sq += (c.spectrogram.at(f, k) - mean) * (c.spectrogram.at(f, k) - mean);
    EXPECT_NEAR(mean, 0.0, 1e-6);
    EXPECT_NEAR(sq / n, 1.0, 1e-4);
    // Held-out split: (1 - train mean) / train stddev, not its own all-zero result.
    EXPECT_NEAR(test[0].spectrogram.at(0, k), (1.0 - stats.mean[k]) / stats.stddev[k], 1e-5);
  }
  EXPECT_NE(test[0].spectrogram.values, NormalizationStats::fit(raw_test).apply(raw_test)[0].spectrogram.values);
}

TEST(Cosine, Examples) {
  const auto a = grid(2, 2, {1, 2, 3, 4});
  EXPECT_NEAR(cosine_similarity(a, a), 1.0, 1e-12);
  EXPECT_EQ(cosine_similarity(grid(1, 2, {1, 0}), grid(1, 2, {0, 1})), 0.0);
  EXPECT_EQ(cosine_similarity(a, grid(2, 2, {0, 0, 0, 0})), 0.0);
  EXPECT_THROW(cosine_similarity(a, grid(1, 4, {1, 2, 3, 4})), std::invalid_argument);
}

TEST(Cosine, SymmetricBoundedScaleInvariant) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<float> va(60), vb(60), vs(60);
    const double alpha = rng.uniform(0.01, 100.0);
    for (std::size_t i = 0; i < 60; ++i) {
      va[i] = static_cast<float>(rng.normal());
      vb[i] = static_cast<float>(rng.normal());
      vs[i] = static_cast<float>(alpha * va[i]);
    }
    const auto a = grid(6, 10, va), b = grid(6, 10, vb), s = grid(6, 10, vs);
    const double ab = cosine_similarity(a, b);
    EXPECT_EQ(ab, cosine_similarity(b, a));
    EXPECT_GE(ab, -1.0);
    EXPECT_LE(ab, 1.0);
    EXPECT_NEAR(cosine_similarity(s, b), ab, 1e-6);
  }
}

TEST(DatasetIo, RoundTrip) {
  const auto w = noise_file(8.0, 4);
  ClipDataset data;
  data.clips = extract_clips(w, {{"a", 5.0, 5.5, DisfluencyType::I}}, DisfluencyType::I, {}, "spk01", "file_a");
  data.stats = NormalizationStats::fit(data.clips);
  const auto stem = (std::filesystem::temp_directory_path() / "fluentnet_dataset").string();
  write_dataset(data, stem);
  const auto back = read_dataset(stem);
  EXPECT_EQ(back.stats, data.stats);
  ASSERT_EQ(back.clips.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(back.clips[i].spectrogram.values, data.clips[i].spectrogram.values);
    EXPECT_EQ(back.clips[i].label, data.clips[i].label);
    EXPECT_EQ(back.clips[i].dtype, data.clips[i].dtype);
    EXPECT_EQ(back.clips[i].subject_id, "spk01");
    EXPECT_EQ(back.clips[i].source, "file_a");
  }
  EXPECT_EQ(back.clips[1].label, 1);
}

TEST(DatasetIo, EmptyAndCorrupt) {
  const auto stem = (std::filesystem::temp_directory_path() / "fluentnet_empty").string();
  write_dataset({}, stem);
  EXPECT_TRUE(read_dataset(stem).clips.empty());
  std::ofstream(stem + ".bin", std::ios::binary | std::ios::trunc) << "garbage!";
  EXPECT_THROW(read_dataset(stem), DataError);
}
