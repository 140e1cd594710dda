// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "svtk/contour.hpp"

namespace svtk {

inline constexpr int kMinSampleRate = 8000;
inline constexpr double kDefaultHopMs = 10.0;
inline constexpr double kDefaultWindowMs = 40.0;

/// Mono audio, normalized to [-1, 1].
class AudioBuffer {
 public:
  AudioBuffer() = default;
  /// Throws DomainError on non-finite or out-of-range samples, or a sample
  /// rate below kMinSampleRate.
  AudioBuffer(std::vector<double> samples, int sample_rate);

  /// Clips to [-1, 1] instead of rejecting; clipped() reports how many
  /// samples were affected. Non-finite samples are still rejected.
  static AudioBuffer clipped_from(std::vector<double> samples, int sample_rate);

  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  int sample_rate() const { return sample_rate_; }
  double duration_s() const;
  std::size_t clipped() const { return clipped_; }

  /// Multiply by a gain; the result must stay within [-1, 1].
  AudioBuffer scaled(double gain) const;

 private:
  std::vector<double> samples_;
  int sample_rate_ = 16000;
  std::size_t clipped_ = 0;
};

struct FrameGrid {
  std::size_t hop = 1;
  std::size_t window_len = 1;
  std::size_t n_frames = 0;

  /// n_frames = floor((len - window_len) / hop) + 1, or 0 when len < window_len.
  static FrameGrid make(std::size_t len, std::size_t hop, std::size_t window_len);
  std::size_t start(std::size_t frame) const { return frame * hop; }
};

struct Frames {
  FrameGrid grid;
  /// views[i] covers samples [i*hop, i*hop + window_len) of the source buffer
  /// and is only valid while that buffer is alive.
  std::vector<std::span<const double>> views;
};

Frames frame(const AudioBuffer& audio, double hop_ms, double window_ms);

std::size_t ms_to_samples(double ms, int sample_rate);

/// Number of contour frames for `n_samples` at `hop` samples per frame, with
/// frame i centred on sample i*hop.
std::size_t centered_frame_count(std::size_t n_samples, std::size_t hop);

enum class SynthKind { sine, pulse_train, vibrato, glide };

/// Deterministic test signal description. Which frequency fields apply
/// depends on the kind:
///   sine, pulse_train: base_hz
///   vibrato:           base_hz, depth_hz, rate_hz
///   glide:             start_hz, end_hz (linear in time)
struct SynthSpec {
  SynthKind kind = SynthKind::sine;
  double base_hz = 220.0;
  double depth_hz = 0.0;
  double rate_hz = 5.0;
  double start_hz = 100.0;
  double end_hz = 200.0;
  double duration_s = 1.0;
  double amplitude = 0.5;

  static SynthSpec sine(double hz, double duration_s, double amplitude = 0.5);
  static SynthSpec pulse_train(double hz, double duration_s, double amplitude = 0.5);
  static SynthSpec vibrato(double base_hz, double depth_hz, double rate_hz, double duration_s,
                           double amplitude = 0.5);
  static SynthSpec glide(double start_hz, double end_hz, double duration_s,
                         double amplitude = 0.5);

  /// Instantaneous f0 at time t seconds.
  double f0_at(double t) const;
};

struct Synthesized {
  AudioBuffer audio;
  /// Exact instantaneous f0 on the default hop, frame i at t = i * hop.
  F0Contour contour;
};

Synthesized synthesize(const SynthSpec& spec, int sample_rate);

double rms(std::span<const double> x);

}  // namespace svtk
