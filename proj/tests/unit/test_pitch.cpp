// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "svtk/error.hpp"
#include "svtk/pitch.hpp"
#include "svtk/signal.hpp"

using namespace svtk;

namespace {

// Frames whose whole analysis window lies inside the signal.
std::vector<std::size_t> interior(const F0Contour& c, std::size_t len, const PitchConfig& cfg,
                                  int fs) {
  const auto half = cfg.window_samples(fs) / 2;
  const auto hop = cfg.hop_samples(fs);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto centre = i * hop;
    if (centre >= half && centre + half <= len) out.push_back(i);
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST(TrackPitch, Sine220) {
  const PitchConfig cfg;
  const auto s = synthesize(SynthSpec::sine(220.0, 1.0), 16000);
  const auto c = track_pitch(s.audio, cfg);
  ASSERT_EQ(c.size(), s.contour.size());
  const auto idx = interior(c, s.audio.size(), cfg, 16000);
  std::vector<double> f;
  for (auto i : idx) {
    if (c[i].voiced) f.push_back(c[i].f0_hz);
  }
  EXPECT_GE(f.size(), static_cast<std::size_t>(std::ceil(0.95 * idx.size())));
  EXPECT_NEAR(median(f), 220.0, 2.0);
}

TEST(TrackPitch, SilenceIsUnvoiced) {
  const auto c = track_pitch(AudioBuffer(std::vector<double>(16000, 0.0), 16000));
  EXPECT_EQ(c.size(), 100u);
  EXPECT_EQ(c.voiced_count(), 0u);
  for (const auto& f : c.frames()) EXPECT_EQ(f.f0_hz, 0.0);
}

TEST(TrackPitch, GlideWithinThreePercent) {
  const PitchConfig cfg;
  const auto s = synthesize(SynthSpec::glide(100.0, 200.0, 1.0), 16000);
  const auto c = track_pitch(s.audio, cfg);
  for (auto i : interior(c, s.audio.size(), cfg, 16000)) {
    if (!c[i].voiced) continue;
    EXPECT_LE(std::abs(c[i].f0_hz - s.contour[i].f0_hz), 0.03 * s.contour[i].f0_hz) << i;
  }
}

TEST(TrackPitch, PulseTrainAndVibratoAt8k) {
  const PitchConfig cfg;
  for (const auto& spec : {SynthSpec::pulse_train(120.0, 0.6), SynthSpec::vibrato(180.0, 15.0, 5.0, 0.6)}) {
    const auto s = synthesize(spec, 8000);
    const auto c = track_pitch(s.audio, cfg);
    std::size_t good = 0;
    const auto idx = interior(c, s.audio.size(), cfg, 8000);
    for (auto i : idx) {
      if (c[i].voiced && std::abs(c[i].f0_hz - s.contour[i].f0_hz) <= 0.03 * s.contour[i].f0_hz) {
        ++good;
      }
    }
    EXPECT_GE(good, static_cast<std::size_t>(std::ceil(0.95 * idx.size())));
  }
}

TEST(TrackPitch, VoicedFramesRespectBounds) {
  PitchConfig cfg;
  cfg.floor_hz = 75.0;
  cfg.ceiling_hz = 300.0;
  const auto s = synthesize(SynthSpec::glide(90.0, 280.0, 0.8), 16000);
  for (const auto& f : track_pitch(s.audio, cfg).frames()) {
    if (!f.voiced) continue;
    EXPECT_GE(f.f0_hz, cfg.floor_hz);
    EXPECT_LE(f.f0_hz, cfg.ceiling_hz);
  }
}

TEST(TrackPitch, ToneAfterSilenceSwitchesVoicing) {
  std::vector<double> x(8000, 0.0);
  const auto tone = synthesize(SynthSpec::sine(150.0, 0.5), 16000);
  x.insert(x.end(), tone.audio.samples().begin(), tone.audio.samples().end());
  const auto c = track_pitch(AudioBuffer(std::move(x), 16000));
  ASSERT_EQ(c.size(), 100u);
  for (std::size_t i = 0; i < 40; ++i) EXPECT_FALSE(c[i].voiced) << i;
  for (std::size_t i = 60; i < 97; ++i) {
    EXPECT_TRUE(c[i].voiced) << i;
    EXPECT_NEAR(c[i].f0_hz, 150.0, 3.0);
  }
}

TEST(TrackPitch, AmplitudeInvariance) {
  const auto s = synthesize(SynthSpec::vibrato(140.0, 12.0, 5.5, 0.7, 0.4), 16000);
  const auto ref = track_pitch(s.audio);
  for (double k : {0.1, 0.5, 2.0}) {
    EXPECT_EQ(track_pitch(s.audio.scaled(k)), ref) << k;
  }
}

TEST(TrackPitch, Deterministic) {
  const auto s = synthesize(SynthSpec::pulse_train(95.0, 0.5), 16000);
  EXPECT_EQ(track_pitch(s.audio), track_pitch(s.audio));
}

TEST(TrackPitch, ShorterThanWindowGivesEmptyContour) {
  PitchConfig cfg;  // 3 / 60 Hz = 50 ms = 800 samples
  EXPECT_TRUE(track_pitch(AudioBuffer(std::vector<double>(799, 0.1), 16000), cfg).empty());
  EXPECT_FALSE(track_pitch(AudioBuffer(std::vector<double>(800, 0.1), 16000), cfg).empty());
}

TEST(PitchConfig, Validation) {
  PitchConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.floor_hz = 30.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.ceiling_hz = cfg.floor_hz;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.voicing_threshold = 1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_candidates = 1;
  EXPECT_THROW(cfg.validate(), DomainError);
  EXPECT_THROW(track_pitch(AudioBuffer(std::vector<double>(2000, 0.0), 16000), cfg), DomainError);
}

TEST(GlobalPitch, Examples) {
  const std::vector<F0Contour> one{test::voiced_contour({150, 150, 150})};
  EXPECT_EQ(global_pitch(one).value_hz, 150.0);

  const std::vector<F0Contour> mixed{test::voiced_contour({100, 200, 0})};
  EXPECT_EQ(global_pitch(mixed).value_hz, 150.0);
  EXPECT_EQ(global_pitch(mixed).n_voiced_frames, 2u);

  const std::vector<F0Contour> pooled{test::voiced_contour({100}), test::voiced_contour({200, 300})};
  const auto g = global_pitch(pooled, "spk1");
  EXPECT_EQ(g.value_hz, 200.0);
  EXPECT_EQ(g.n_voiced_frames, 3u);
  EXPECT_EQ(g.speaker_id, "spk1");
}

TEST(GlobalPitch, OrderInvariant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(60.0, 400.0);
  std::vector<F0Contour> cs;
  for (int k = 0; k < 6; ++k) {
    std::vector<F0Frame> fr;
    for (int i = 0; i < 37; ++i) fr.push_back(i % 5 == 0 ? F0Frame{} : F0Frame{u(rng), true});
    cs.emplace_back(std::move(fr), 0.01);
  }
  const double ref = global_pitch(cs).value_hz;
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(cs.begin(), cs.end(), rng);
    EXPECT_EQ(global_pitch(cs).value_hz, ref);
  }
}

TEST(GlobalPitch, NoSpeechFramesIsAnError) {
  const std::vector<F0Contour> silent{test::voiced_contour({0, 0, 0})};
  try {
    global_pitch(silent, "spk");
    FAIL() << "expected an error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("no speech frames"), std::string::npos);
  }
  EXPECT_THROW(global_pitch(std::vector<F0Contour>{}), DomainError);
}
