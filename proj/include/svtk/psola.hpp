// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "svtk/contour.hpp"
#include "svtk/pitch.hpp"
#include "svtk/signal.hpp"

namespace svtk {

/// Analysis epochs. positions are strictly increasing sample indices.
struct PitchMarks {
  std::vector<std::size_t> positions;
  std::vector<std::uint8_t> voiced;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
};

struct MarkConfig {
  /// Bounds on voiced mark spacing, sample_rate/ceiling .. sample_rate/floor.
  double floor_hz = 60.0;
  double ceiling_hz = 500.0;
  double unvoiced_step_ms = 10.0;
  /// Peak search radius around the predicted mark, as a fraction of the period.
  double snap_fraction = 0.2;
  // a walk stops at a peak below this fraction of the region's strongest one
  double min_peak_ratio = 0.1;

  static MarkConfig from(const PitchConfig& cfg);
};

PitchMarks find_pitch_marks(const AudioBuffer& audio, const F0Contour& contour,
                            const MarkConfig& cfg = {});

enum class FlattenMode { speaker_mean, speaker_median, fixed_hz };

struct FlattenTarget {
  FlattenMode mode = FlattenMode::speaker_mean;
  double value_hz = 0.0;

  static FlattenTarget fixed(double hz) { return {FlattenMode::fixed_hz, hz}; }
  void validate() const;
};

/// Constant target frequency for a set of contours from one speaker.
double resolve_target_hz(const FlattenTarget& target, std::span<const F0Contour> contours);

/// TD-PSOLA onto a time-varying target. Voiced runs of marks are rebuilt
/// from two-period Hann-windowed segments taken at the nearest analysis mark
/// and placed at synthesis epochs spaced by the target period; everything
/// else is copied through untouched. Output length equals input length.
AudioBuffer resynthesize(const AudioBuffer& audio, const PitchMarks& marks,
                         const F0Contour& target_contour);

/// Resynthesize onto a constant pitch. `target` is resolved against `contour`
/// alone; use the overload taking a Hz value for corpus-level targets.
AudioBuffer flatten_pitch(const AudioBuffer& audio, const F0Contour& contour,
                          const FlattenTarget& target = {}, const MarkConfig& marks = {});
AudioBuffer flatten_pitch_to(const AudioBuffer& audio, const F0Contour& contour, double target_hz,
                             const MarkConfig& marks = {});

}  // namespace svtk
