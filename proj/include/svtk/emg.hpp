// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "svtk/matrix.hpp"

namespace svtk {

enum class EmgMode { voiced, silent };

/// C x N multi-channel biosignal. Rows are channels.
struct EmgRecording {
  Matrix channels;
  int sample_rate = 1000;
  std::string session_id;
  std::string speaker_id;
  EmgMode mode = EmgMode::voiced;

  std::size_t n_channels() const { return channels.rows(); }
  std::size_t n_samples() const { return channels.cols(); }
  /// Throws DataError on non-finite samples, DomainError on shape problems.
  void validate() const;
};

struct ChannelStats {
  double mean = 0.0;
  double std = 1.0;
};

inline constexpr std::size_t kEmgFeaturesPerChannel = 4;

/// Frame features; column c*4 + k holds feature k of channel c, with
/// k = 0 RMS, 1 mean absolute value, 2 zero-crossing count,
/// 3 mean of the 5-point moving average.
struct EmgFeatures {
  Matrix frames;
  double frame_rate = 100.0;
  std::vector<ChannelStats> channel_stats;
};

struct EmgPreprocessConfig {
  double highpass_hz = 2.0;
  int mains_hz = 60;
  int notch_harmonics = 2;
  double notch_q = 30.0;
  double target_frame_rate = 100.0;
  double despike_threshold = 5.0;
  double lead_shift_ms = 60.0;

  void validate(int sample_rate) const;
};

/// Channels after filtering, despiking and z-normalization.
struct ConditionedEmg {
  Matrix channels;
  std::vector<ChannelStats> channel_stats;
};

/// Zero-phase highpass followed by zero-phase mains notches.
std::vector<double> filter_channel(std::span<const double> x, int sample_rate,
                                   const EmgPreprocessConfig& cfg);

/// Clip samples further than threshold * 1.4826 * MAD from the median.
/// Returns the number of clipped samples.
std::size_t despike(std::vector<double>& x, double threshold);

/// filter -> despike -> z-normalize, per channel. Throws DomainError naming
/// every channel whose post-filter standard deviation vanishes.
ConditionedEmg condition(const EmgRecording& rec, const EmgPreprocessConfig& cfg = {});

/// T = floor(N / (sample_rate / target_frame_rate)) frames of features.
EmgFeatures frame_features(const ConditionedEmg& conditioned, int sample_rate,
                           double target_frame_rate);

EmgFeatures preprocess(const EmgRecording& rec, const EmgPreprocessConfig& cfg = {});

/// Delay the channels by round(lead_ms * sample_rate / 1000) samples, zero
/// filling the vacated head (negative lead advances and zero fills the tail).
/// Length is unchanged; |shift| >= N throws DomainError.
EmgRecording apply_lead_shift(const EmgRecording& rec, double lead_ms);

std::string to_string(EmgMode mode);
EmgMode parse_emg_mode(const std::string& text);

}  // namespace svtk
