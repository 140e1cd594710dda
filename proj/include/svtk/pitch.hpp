// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>

#include "svtk/contour.hpp"
#include "svtk/signal.hpp"

namespace svtk {

/// Parameters of the autocorrelation pitch tracker.
///
/// Path costs are specified for a 10 ms hop and rescaled internally by
/// 0.01 / hop_s so that changing the hop does not change path preferences.
struct PitchConfig {
  double floor_hz = 60.0;
  double ceiling_hz = 500.0;
  double hop_ms = 10.0;
  double silence_threshold = 0.03;
  double voicing_threshold = 0.45;
  double octave_cost = 0.01;
  double octave_jump_cost = 0.35;
  double voiced_unvoiced_cost = 0.14;
  std::size_t max_candidates = 15;
  double periods_per_window = 3.0;

  /// Throws DomainError when any field is out of range.
  void validate() const;
  std::size_t window_samples(int sample_rate) const;
  std::size_t hop_samples(int sample_rate) const;
};

/// Frame-wise f0 and voicing of `audio`.
///
/// Each frame is a Hann-windowed stretch of periods_per_window / floor_hz
/// seconds centred on sample i * hop. Its normalized autocorrelation (divided
/// by the window's own autocorrelation) yields up to max_candidates - 1
/// voiced candidates from parabolically interpolated local maxima, plus one
/// unvoiced candidate whose strength grows as the frame's peak falls below
/// silence_threshold of the global peak. A Viterbi pass picks the path that
/// maximises total strength net of octave-jump and voicing-transition costs.
///
/// The analysis runs on a peak-normalized copy of the input rounded to 24-bit
/// resolution, which makes the result independent of input gain.
///
/// Returns an empty contour when the audio is shorter than one window.
F0Contour track_pitch(const AudioBuffer& audio, const PitchConfig& cfg = {});

struct GlobalPitch {
  double value_hz = 0.0;
  std::size_t n_voiced_frames = 0;
  std::string speaker_id;
};

/// Mean f0 over all voiced frames pooled across `contours`. Throws
/// DomainError("no speech frames") when nothing is voiced.
GlobalPitch global_pitch(std::span<const F0Contour> contours, const std::string& speaker_id = {});

}  // namespace svtk
