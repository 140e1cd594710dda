// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "svtk/emg.hpp"
#include "svtk/error.hpp"
#include "svtk/signal.hpp"

using namespace svtk;

namespace {

std::vector<double> tone(double hz, int fs, std::size_t n, double amp = 1.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / fs);
  }
  return x;
}

EmgRecording noise_recording(std::size_t channels, std::size_t n, std::uint64_t seed, int fs = 1000) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 50.0);
  EmgRecording rec;
  rec.channels = Matrix(channels, n);
  for (auto& v : rec.channels.data()) v = g(rng) + 3.0;
  rec.sample_rate = fs;
  rec.session_id = "s";
  rec.speaker_id = "spk";
  return rec;
}

}  // namespace

TEST(EmgFilter, MainsToneIsRejected) {
  for (int mains : {50, 60}) {
    EmgPreprocessConfig cfg;
    cfg.mains_hz = mains;
    for (int h = 1; h <= 2; ++h) {
      const auto x = tone(mains * h, 1000, 10000);
      const auto y = filter_channel(x, 1000, cfg);
      EXPECT_LT(rms(y) / rms(x), 0.05) << mains << " x" << h;
    }
  }
}

TEST(EmgFilter, PassbandIsKept) {
  const auto x = tone(150.0, 1000, 5000);
  const auto y = filter_channel(x, 1000, {});
  EXPECT_NEAR(rms(y) / rms(x), 1.0, 0.02);
}

TEST(EmgFilter, DriftIsRemoved) {
  std::vector<double> x(5000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 4.0 + 0.001 * static_cast<double>(i);
  const auto y = filter_channel(x, 1000, {});
  // interior only; the ends see the reflected extension
  std::vector<double> mid(y.begin() + 1000, y.end() - 1000);
  EXPECT_LT(rms(mid), 0.01);
}

TEST(EmgFilter, ZeroPhase) {
  std::vector<double> x(2001, 0.0);
  for (int k = -10; k <= 10; ++k) x[1000 + k] = std::exp(-0.05 * k * k);
  const auto y = filter_channel(x, 1000, {});
  for (std::size_t k = 1; k < 300; ++k) {
    EXPECT_NEAR(y[1000 - k], y[1000 + k], 1e-9) << k;
  }
  const auto peak = std::max_element(y.begin(), y.end()) - y.begin();
  EXPECT_EQ(peak, 1000);
}

TEST(EmgFilter, DespikeClipsToRobustLimit) {
  std::vector<double> x{0, 1, -1, 0, 1, -1, 0, 100, -100};
  const auto n = despike(x, 2.0);
  EXPECT_EQ(n, 2u);
  // median 0, MAD 1 -> limit 2 * 1.4826
  EXPECT_DOUBLE_EQ(x[7], 2.0 * 1.4826);
  EXPECT_DOUBLE_EQ(x[8], -2.0 * 1.4826);
  EXPECT_EQ(x[1], 1.0);
}

TEST(EmgPreprocess, WhiteNoiseIsStandardized) {
  const auto rec = noise_recording(4, 20000, 77);
  const auto cond = condition(rec);
  for (std::size_t c = 0; c < 4; ++c) {
    double m = 0.0, s = 0.0;
    for (double v : cond.channels.row(c)) m += v;
    m /= 20000.0;
    for (double v : cond.channels.row(c)) s += (v - m) * (v - m);
    s = std::sqrt(s / 20000.0);
    EXPECT_LT(std::abs(m), 0.05);
    EXPECT_GE(s, 0.9);
    EXPECT_LE(s, 1.1);
    EXPECT_GT(cond.channel_stats[c].std, 0.0);
  }
}

TEST(EmgPreprocess, FrameCountAndShape) {
  const auto rec = noise_recording(3, 2345, 5);
  const auto f = preprocess(rec);
  EXPECT_EQ(f.frames.rows(), 234u);  // floor(2345 / 10)
  EXPECT_EQ(f.frames.cols(), 3 * kEmgFeaturesPerChannel);
  EXPECT_EQ(f.frame_rate, 100.0);
  ASSERT_EQ(f.channel_stats.size(), 3u);

  EmgPreprocessConfig cfg;
  cfg.target_frame_rate = 30.0;
  EXPECT_EQ(preprocess(rec, cfg).frames.rows(), 70u);  // floor(2345 / (1000 / 30))
}

TEST(EmgPreprocess, FeatureValues) {
  // A hand-built conditioned signal: alternating +-1 in one 10-sample frame.
  ConditionedEmg c{Matrix(1, 10), {ChannelStats{}}};
  for (std::size_t i = 0; i < 10; ++i) c.channels(0, i) = i % 2 == 0 ? 1.0 : -1.0;
  const auto f = frame_features(c, 1000, 100.0);
  ASSERT_EQ(f.frames.rows(), 1u);
  EXPECT_DOUBLE_EQ(f.frames(0, 0), 1.0);  // RMS
  EXPECT_DOUBLE_EQ(f.frames(0, 1), 1.0);  // MAV
  EXPECT_EQ(f.frames(0, 2), 9.0);         // zero crossings
  // 5-point moving average, shrinking at the edges: 1/3, 0, 1/5, -1/5, ...
  double low = 0.0;
  for (std::size_t i = 0; i < 10; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0, hi = std::min<std::size_t>(9, i + 2);
    double s = 0.0;
    for (std::size_t k = lo; k <= hi; ++k) s += c.channels(0, k);
    low += s / static_cast<double>(hi - lo + 1);
  }
  EXPECT_DOUBLE_EQ(f.frames(0, 3), low / 10.0);
}

TEST(EmgPreprocess, Deterministic) {
  const auto rec = noise_recording(2, 3000, 6);
  EXPECT_EQ(preprocess(rec).frames, preprocess(rec).frames);
}

TEST(EmgPreprocess, DeadChannel) {
  auto rec = noise_recording(3, 3000, 1);
  for (auto& v : rec.channels.row(1)) v = 0.7;
  try {
    preprocess(rec);
    FAIL() << "expected dead channel error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("dead channel"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('1'), std::string::npos);
  }
  for (auto& v : rec.channels.row(1)) v = 0.0;
  EXPECT_THROW(preprocess(rec), DomainError);
}

TEST(EmgPreprocess, ConfigValidation) {
  EmgPreprocessConfig cfg;
  EXPECT_NO_THROW(cfg.validate(1000));
  EXPECT_THROW(cfg.validate(200), DomainError);  // below 2 * 60 * 2
  cfg.mains_hz = 55;
  EXPECT_THROW(cfg.validate(1000), DomainError);
  cfg = {};
  cfg.highpass_hz = 70.0;
  EXPECT_THROW(cfg.validate(1000), DomainError);
  cfg = {};
  cfg.target_frame_rate = 2000.0;
  EXPECT_THROW(cfg.validate(1000), DomainError);

  auto rec = noise_recording(1, 100, 2);
  rec.channels(0, 5) = std::nan("");
  EXPECT_THROW(rec.validate(), DataError);
}

TEST(LeadShift, Examples) {
  EmgRecording rec;
  rec.sample_rate = 1000;
  rec.channels = Matrix(2, 1000);
  rec.channels(0, 100) = 1.0;
  rec.channels(1, 0) = 2.0;
  EXPECT_EQ(apply_lead_shift(rec, 0.0).channels, rec.channels);

  const auto out = apply_lead_shift(rec, 60.0);
  EXPECT_EQ(out.n_samples(), 1000u);
  EXPECT_EQ(out.channels(0, 160), 1.0);
  EXPECT_EQ(out.channels(0, 100), 0.0);
  EXPECT_EQ(out.channels(1, 60), 2.0);
  for (std::size_t i = 0; i < 60; ++i) EXPECT_EQ(out.channels(1, i), 0.0);

  EXPECT_THROW(apply_lead_shift(rec, 1000.0), DomainError);
}

TEST(LeadShift, Composes) {
  EmgRecording rec;
  rec.sample_rate = 2000;
  rec.channels = Matrix(1, 4000);
  rec.channels(0, 10) = 1.0;
  const auto twice = apply_lead_shift(apply_lead_shift(rec, 12.3), 7.6);
  // round(24.6) + round(15.2) = 25 + 15
  EXPECT_EQ(twice.channels(0, 50), 1.0);
}

TEST(EmgMode, Parse) {
  EXPECT_EQ(parse_emg_mode("voiced"), EmgMode::voiced);
  EXPECT_EQ(parse_emg_mode("silent"), EmgMode::silent);
  EXPECT_EQ(to_string(EmgMode::silent), "silent");
  EXPECT_THROW(parse_emg_mode("whisper"), FormatError);
}
