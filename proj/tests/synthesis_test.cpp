#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "fluentnet/audio/pitch.hpp"
#include "fluentnet/synthesis/csv_io.hpp"
#include "fluentnet/synthesis/speech_fixture.hpp"
#include "fluentnet/synthesis/synthesizer.hpp"
#include "test_signals.hpp"

using namespace fluentnet;
using namespace fluentnet::synthesis;
using audio::Waveform;

namespace {

const int kRate = 16000;

std::string temp_file(const std::string& name, const std::string& body) {
  const auto path = (std::filesystem::temp_directory_path() / ("fluentnet_synth_" + name)).string();
  std::ofstream(path) << body;
  return path;
}

/// Silence with tone "words" at the given [start, end) second spans.
Waveform tone_track(double seconds, const std::vector<std::pair<double, double>>& spans, double f0 = 200.0) {
  Waveform w(std::vector<double>(static_cast<std::size_t>(seconds * kRate), 0.0), kRate);
  const auto v = fluentnet::testing::vowel(f0, seconds);
  for (auto [a, b] : spans)
    for (auto i = audio::seconds_to_samples(a, kRate); i < audio::seconds_to_samples(b, kRate); ++i) w.samples[i] = v.samples[i];
  return w;
}

SynthesisConfig fixed_config() {
  SynthesisConfig cfg;
  cfg.seed = 7;
  return cfg;
}

double normalized_correlation(const std::vector<double>& a, std::size_t ia, const std::vector<double>& b, std::size_t ib,
                              std::size_t n) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ab += a[ia + i] * b[ib + i];
    aa += a[ia + i] * a[ia + i];
    bb += b[ib + i] * b[ib + i];
  }
  return ab / std::sqrt(aa * bb);
}

/// Independent replay: output length predicted from the recorded pieces.
long long replay_length(std::size_t clean_len, const std::vector<InsertionRecord>& records) {
  long long len = static_cast<long long>(clean_len);
  for (const auto& r : records) {
    long long added = 0;
    for (auto p : r.pieces) added += static_cast<long long>(p);
    len += added - static_cast<long long>(r.removed) - static_cast<long long>(r.crossfade_loss);
  }
  return len;
}

}  // namespace

TEST(Timestamps, ParsesTwoRows) {
  const auto words = read_timestamps_csv(temp_file("two.csv", "word,start_s,end_s\nhi,0.0,0.4\nthere,0.5,0.9\n"));
  ASSERT_EQ(words.size(), 2u);
  EXPECT_EQ(words[0], (WordTimestamp{"hi", 0.0, 0.4}));
  EXPECT_EQ(words[1], (WordTimestamp{"there", 0.5, 0.9}));
}

TEST(Timestamps, EmptyBody) {
  EXPECT_TRUE(read_timestamps_csv(temp_file("empty.csv", "word,start_s,end_s\n")).empty());
}

TEST(Timestamps, OutOfOrderRowsAreSorted) {
  const auto words = read_timestamps_csv(temp_file("order.csv", "word,start_s,end_s\nthere,0.5,0.9\nhi,0.0,0.4\n"));
  EXPECT_EQ(words[0].word, "hi");
  EXPECT_EQ(words[1].word, "there");
}

TEST(Timestamps, Errors) {
  EXPECT_THROW(read_timestamps_csv(temp_file("overlap.csv", "word,start_s,end_s\na,0.0,0.6\nb,0.5,0.9\n")), DataError);
  EXPECT_THROW(read_timestamps_csv(temp_file("mono.csv", "word,start_s,end_s\na,0.7,0.6\n")), DataError);
  EXPECT_THROW(read_timestamps_csv(temp_file("parse.csv", "word,start_s,end_s\na,zero,0.6\n")), DataError);
  EXPECT_THROW(read_timestamps_csv(temp_file("header.csv", "w,s,e\na,0.0,0.6\n")), DataError);
}

TEST(SoundRepetition, ExactLengthWithoutCrossfade) {
  auto cfg = fixed_config();
  cfg.sound_rep_count = {1, 1};
  cfg.sound_fraction = {0.2, 0.2};
  cfg.pause_ms = {200, 200};
  cfg.crossfade_ms = 0;
  const auto w = tone_track(2.0, {{0.5, 1.0}});
  Rng rng(1);
  const auto inj = inject_sound_repetition(w, {"word", 0.5, 1.0}, cfg, rng);
  EXPECT_EQ(inj.audio.size(), w.size() + audio::ms_to_samples(300, kRate));
  EXPECT_EQ(inj.label.dtype, DisfluencyType::S);
}

TEST(SoundRepetition, LabelBookkeepingMatchesReplay) {
  const auto cfg = fixed_config();
  const auto w = tone_track(2.0, {{0.5, 1.1}});
  Rng rng(2);
  const WordTimestamp word{"word", 0.5, 1.1};
  const auto inj = inject_sound_repetition(w, word, cfg, rng);
  EXPECT_LT(inj.label.start_s, word.start_s);
  const long long net = replay_length(w.size(), {inj.record}) - static_cast<long long>(w.size());
  EXPECT_EQ(static_cast<long long>(inj.audio.size()) - static_cast<long long>(w.size()), net);
  EXPECT_NEAR(inj.label.end_s, word.end_s + static_cast<double>(net) / kRate, 1e-12);
  const auto n_copies = inj.record.pieces.size() / 2;
  EXPECT_GE(n_copies, 1u);
  EXPECT_LE(n_copies, 3u);
  for (std::size_t c = 0; c < n_copies; ++c) {
    const double frag_ms = 1000.0 * inj.record.pieces[2 * c] / kRate;
    EXPECT_GE(frag_ms, 0.15 * 600 - 1);
    EXPECT_LE(frag_ms, 0.35 * 600 + 1);
    const double pause_ms = 1000.0 * inj.record.pieces[2 * c + 1] / kRate;
    EXPECT_GE(pause_ms, 100 - 0.1);
    EXPECT_LE(pause_ms, 350 + 0.1);
  }
}

TEST(SoundRepetition, DeterministicAndRejectsShortWords) {
  const auto cfg = fixed_config();
  const auto w = tone_track(2.0, {{0.5, 1.0}, {1.2, 1.3}});
  Rng a(9), b(9);
  EXPECT_EQ(inject_sound_repetition(w, {"x", 0.5, 1.0}, cfg, a).audio, inject_sound_repetition(w, {"x", 0.5, 1.0}, cfg, b).audio);
  Rng c(1);
  EXPECT_THROW(inject_sound_repetition(w, {"y", 1.2, 1.3}, cfg, c), std::invalid_argument);
  EXPECT_THROW(inject_sound_repetition(w, {"z", 1.5, 2.5}, cfg, c), std::invalid_argument);
}

TEST(WordRepetition, LengthAndCorrelation) {
  auto cfg = fixed_config();
  cfg.word_rep_count = {2, 2};
  cfg.pause_ms = {150, 150};
  const auto w = tone_track(2.0, {{0.6, 1.0}});
  Rng rng(3);
  const auto inj = inject_word_repetition(w, {"word", 0.6, 1.0}, cfg, rng);
  const auto ov = audio::ms_to_samples(10, kRate);
  EXPECT_EQ(inj.audio.size(), w.size() + audio::ms_to_samples(1100, kRate) - 2 * ov);
  // First inserted copy against the original word, skipping the fades.
  const auto ws = audio::seconds_to_samples(0.6, kRate);
  const std::size_t copy_start = ws;  // left part keeps ws - ov samples, then a blend of ov
  const std::size_t n = audio::ms_to_samples(400, kRate) - 3 * ov;
  EXPECT_GT(normalized_correlation(inj.audio.samples, copy_start + ov, w.samples, ws + ov, n), 0.999);
  Rng again(3);
  EXPECT_EQ(inject_word_repetition(w, {"word", 0.6, 1.0}, cfg, again).audio, inj.audio);
}

TEST(PhraseRepetition, LengthAndSampleEquality) {
  auto cfg = fixed_config();
  cfg.pause_ms = {100, 100};
  const auto w = tone_track(3.0, {{1.0, 1.35}, {1.45, 1.8}});
  Rng rng(4);
  const std::vector<WordTimestamp> phrase{{"a", 1.0, 1.35}, {"b", 1.45, 1.8}};
  const auto inj = inject_phrase_repetition(w, phrase, cfg, rng);
  const auto ov = audio::ms_to_samples(10, kRate);
  EXPECT_EQ(inj.audio.size(), w.size() + audio::ms_to_samples(900, kRate) - 2 * ov);
  EXPECT_EQ(inj.label.word, "a b");
  EXPECT_EQ(inj.label.dtype, DisfluencyType::PH);
  const auto ps = audio::seconds_to_samples(1.0, kRate);
  const auto plen = audio::ms_to_samples(800, kRate);
  // Inserted copy occupies [ps - ov, ps - ov + plen); interior samples equal the source.
  for (std::size_t i = ov; i + ov < plen; ++i) ASSERT_EQ(inj.audio.samples[ps - ov + i], w.samples[ps + i]) << i;
  Rng again(4);
  EXPECT_EQ(inject_phrase_repetition(w, phrase, cfg, again).audio, inj.audio);
  Rng r(1);
  EXPECT_THROW(inject_phrase_repetition(w, {phrase[0]}, cfg, r), std::invalid_argument);
}

TEST(Prolongation, LengthFormulaAndPitch) {
  const auto cfg = fixed_config();
  const auto w = tone_track(2.0, {{0.5, 1.0}});
  Rng rng(5);
  const auto inj = inject_prolongation(w, {"word", 0.5, 1.0}, cfg, rng);
  EXPECT_NEAR(inj.label.end_s - inj.label.start_s, 0.9, 1e-9);
  EXPECT_EQ(inj.audio.size(), w.size() + audio::ms_to_samples(400, kRate));
  EXPECT_TRUE(inj.record.pitch_corrected);
  const auto tail = inj.audio.slice(audio::seconds_to_samples(0.9, kRate), audio::seconds_to_samples(1.4, kRate));
  const auto p = audio::estimate_mean_pitch(tail);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, 200.0, 10.0);
}

TEST(Prolongation, UnitFactorIsIdentityAndShortWordRejected) {
  auto cfg = fixed_config();
  cfg.prolong_factor = 1.0;
  const auto w = tone_track(2.0, {{0.5, 1.0}, {1.2, 1.25}});
  Rng rng(6);
  EXPECT_EQ(inject_prolongation(w, {"word", 0.5, 1.0}, cfg, rng).audio, w);
  EXPECT_THROW(inject_prolongation(w, {"short", 1.2, 1.25}, fixed_config(), rng), std::invalid_argument);
}

TEST(Interjection, LengthPitchAndDeterminism) {
  auto cfg = fixed_config();
  cfg.pause_ms = {100, 100};
  const auto w = tone_track(3.0, {{0.5, 1.0}, {1.2, 1.7}}, 180.0);
  const std::vector<Filler> pool{{"um", fluentnet::testing::vowel(120.0, 0.3)}};
  Rng rng(8);
  const auto inj = inject_interjection(w, {"a", 0.5, 1.0}, {"b", 1.2, 1.7}, pool, cfg, rng);
  const auto ov = audio::ms_to_samples(10, kRate);
  EXPECT_EQ(inj.audio.size(), w.size() + audio::ms_to_samples(400, kRate) - 2 * ov);
  EXPECT_EQ(inj.label.word, "um");
  const auto filler = inj.audio.slice(audio::seconds_to_samples(inj.label.start_s, kRate) + ov,
                                      audio::seconds_to_samples(inj.label.end_s, kRate));
  const auto p = audio::estimate_mean_pitch(filler);
  ASSERT_TRUE(p.has_value());
  EXPECT_NEAR(*p, 180.0, 0.05 * 180.0);
  Rng again(8);
  EXPECT_EQ(inject_interjection(w, {"a", 0.5, 1.0}, {"b", 1.2, 1.7}, pool, cfg, again).audio, inj.audio);
  EXPECT_THROW(inject_interjection(w, {"a", 0.5, 1.0}, {"b", 1.2, 1.7}, {}, cfg, again), std::invalid_argument);
}

namespace {

Utterance fixture_utterance(double seconds, std::uint64_t seed, double word_min = 0.3) {
  Rng rng(seed);
  const auto spk = make_speaker(0, rng);
  FixtureOptions opt;
  opt.word_min_s = word_min;
  return synthesize_utterance(seconds, spk, rng, kRate, opt);
}

}  // namespace

TEST(SynthesizeFile, ZeroProbabilityIsIdentity) {
  const auto u = fixture_utterance(12.0, 1);
  auto cfg = fixed_config();
  cfg.insert_prob = 0.0;
  const auto r = synthesize_file(u.audio, u.words, cfg, placeholder_fillers());
  EXPECT_EQ(r.audio, u.audio);
  EXPECT_TRUE(r.labels.empty());
  EXPECT_EQ(r.words, u.words);
  EXPECT_EQ(r.stats.windows, 3u);
}

TEST(SynthesizeFile, QuotaModeExactCounts) {
  const auto u = fixture_utterance(80.0, 2, 0.42);
  auto cfg = fixed_config();
  cfg.quotas = std::array<int, 5>{2, 2, 2, 2, 2};
  cfg.insert_prob = 1.0;
  const auto r = synthesize_file(u.audio, u.words, cfg, placeholder_fillers());
  ASSERT_EQ(r.labels.size(), 10u);
  std::array<int, 5> counts{};
  for (const auto& l : r.labels) ++counts[stutter_index(l.dtype)];
  EXPECT_EQ(counts, (std::array<int, 5>{2, 2, 2, 2, 2}));
  EXPECT_EQ(static_cast<long long>(r.audio.size()), replay_length(u.audio.size(), r.insertions));
}

TEST(SynthesizeFile, TimelineAndLabelInvariants) {
  const auto u = fixture_utterance(60.0, 3);
  const auto cfg = fixed_config();
  const auto r = synthesize_file(u.audio, u.words, cfg, placeholder_fillers());
  EXPECT_GT(r.labels.size(), 5u);
  EXPECT_EQ(static_cast<long long>(r.audio.size()), replay_length(u.audio.size(), r.insertions));
  for (const auto& l : r.labels) {
    EXPECT_LT(l.start_s, l.end_s);
    EXPECT_LE(l.end_s, r.audio.duration_s() + 1e-9);
    const auto seg = r.audio.slice(audio::seconds_to_samples(l.start_s, kRate), audio::seconds_to_samples(l.end_s, kRate));
    EXPECT_GT(audio::rms(seg), 1e-3) << to_string(l.dtype);
  }
  // Shifted clean words keep their durations unless prolonged, and stay ordered.
  for (std::size_t i = 1; i < r.words.size(); ++i) EXPECT_GE(r.words[i].start_s, r.words[i - 1].end_s - 1e-9);
  const auto rows = r.rows();
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(rows[i - 1].start_s, rows[i].start_s);
}

TEST(SynthesizeFile, FixedSeedIsBitIdentical) {
  const auto u = fixture_utterance(30.0, 4);
  const auto cfg = fixed_config();
  const auto a = synthesize_file(u.audio, u.words, cfg, placeholder_fillers());
  const auto b = synthesize_file(u.audio, u.words, cfg, placeholder_fillers());
  EXPECT_EQ(a.audio, b.audio);
  EXPECT_EQ(a.labels, b.labels);
}

TEST(SynthesizeFile, ProbabilityModeTypeFrequencies) {
  // 1000 single-window files through one synthesizer; every type is always eligible.
  const auto u = fixture_utterance(4.0, 5, 0.45);
  auto cfg = fixed_config();
  Synthesizer synth(cfg, placeholder_fillers());
  std::array<std::size_t, 5> counts{};
  std::size_t windows = 0;
  for (int f = 0; f < 1000; ++f) {
    const auto r = synth.synthesize(u.audio, u.words);
    windows += r.stats.windows;
    EXPECT_EQ(r.stats.no_target, 0u);
    for (std::size_t t = 0; t < 5; ++t) counts[t] += r.stats.per_type[t];
  }
  ASSERT_EQ(windows, 1000u);
  const double p = cfg.insert_prob / 5.0;
  const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(windows));
  for (std::size_t t = 0; t < 5; ++t)
    EXPECT_NEAR(static_cast<double>(counts[t]) / windows, p, 3.0 * se) << to_string(kStutterTypes[t]);
}

TEST(LabelsCsv, WriteReadRoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "fluentnet_labels.csv").string();
  write_labels_csv({{"there", 0.5, 0.9, DisfluencyType::CLEAN}, {"hi", 0.0, 0.4, DisfluencyType::S}}, path);
  std::ifstream in(path);
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  EXPECT_EQ(header, "word,start_s,end_s,type");
  EXPECT_EQ(first, "hi,0.000,0.400,S");
  EXPECT_EQ(second, "there,0.500,0.900,CLEAN");
  const auto rows = read_labels_csv(path);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], (LabelRow{"hi", 0.0, 0.4, DisfluencyType::S}));
  EXPECT_EQ(rows[1], (LabelRow{"there", 0.5, 0.9, DisfluencyType::CLEAN}));
}

TEST(Config, Validation) {
  SynthesisConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_NEAR(cfg.insert_prob, 0.8333, 1e-4);
  cfg.insert_prob = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.prolong_factor = 1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.pause_ms = {300, 100};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}
