// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svtk {

struct F0Frame {
  double f0_hz = 0.0;
  bool voiced = false;

  bool operator==(const F0Frame&) const = default;
};

/// Frame-wise fundamental frequency with a voicing flag per frame.
///
/// Frame i is centred at `start_s + i * hop_s`. Unvoiced frames always store
/// an f0 of exactly 0.0 so that voicing-masked sums can be taken literally;
/// voiced frames carry a finite, strictly positive f0. The constructor
/// enforces both rules and throws DomainError otherwise.
class F0Contour {
 public:
  F0Contour() = default;
  F0Contour(std::vector<F0Frame> frames, double hop_s, int sample_rate = 0,
            double start_s = 0.0);

  std::span<const F0Frame> frames() const { return frames_; }
  const F0Frame& operator[](std::size_t i) const { return frames_[i]; }
  std::size_t size() const { return frames_.size(); }
  bool empty() const { return frames_.empty(); }

  double hop_s() const { return hop_s_; }
  /// Sample rate of the audio the contour was measured on; 0 when unknown.
  int sample_rate() const { return sample_rate_; }
  double start_s() const { return start_s_; }
  double time_s(std::size_t i) const { return start_s_ + static_cast<double>(i) * hop_s_; }

  std::size_t voiced_count() const;
  std::vector<double> voiced_f0() const;

  /// Same grid, new frames. Frame count may differ.
  F0Contour with_frames(std::vector<F0Frame> frames) const;

  bool operator==(const F0Contour&) const = default;

 private:
  std::vector<F0Frame> frames_;
  double hop_s_ = 0.01;
  int sample_rate_ = 0;
  double start_s_ = 0.0;
};

}  // namespace svtk
