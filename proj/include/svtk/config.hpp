// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "svtk/emg.hpp"
#include "svtk/pitch.hpp"
#include "svtk/psola.hpp"

namespace svtk {

/// Settings loaded from a `key = value` file. Keys are namespaced:
///
///   pitch.floor_hz, pitch.ceiling_hz, pitch.hop_ms, pitch.silence_threshold,
///   pitch.voicing_threshold, pitch.octave_cost, pitch.octave_jump_cost,
///   pitch.voiced_unvoiced_cost, pitch.max_candidates
///   emg.highpass_hz, emg.mains_hz, emg.notch_harmonics, emg.target_frame_rate,
///   emg.despike_threshold, emg.lead_shift_ms
///   flatten.mode (speaker_mean | speaker_median | fixed_hz), flatten.value_hz
///
/// `#` starts a comment. Unknown keys are a FormatError.
struct ToolkitConfig {
  PitchConfig pitch;
  EmgPreprocessConfig emg;
  FlattenTarget flatten;

  static ToolkitConfig parse(std::string_view text);
  static ToolkitConfig load(const std::filesystem::path& path);

  /// Flat key -> value snapshot, keys as accepted by parse().
  std::map<std::string, std::string> snapshot() const;
};

std::string to_string(FlattenMode mode);
FlattenMode parse_flatten_mode(std::string_view text);

}  // namespace svtk
