// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "svtk/contour.hpp"
#include "svtk/pitch.hpp"

namespace svtk {

struct SpeakerEmbedding {
  std::vector<double> vector;
  std::string speaker_id;
};

enum class DeviationDomain {
  /// RMS over frames voiced in both contours.
  jointly_voiced,
  /// RMS over every frame, unvoiced frames entering with their 0.0 f0.
  all_frames,
};

struct F0DeviationReport {
  double local_dev_hz = 0.0;
  std::size_t n_eval_frames = 0;
  double pred_mean_hz = 0.0;
  double gt_mean_hz = 0.0;
};

/// Local F0 deviation: each contour has its voiced mean subtracted, then the
/// RMS difference is taken. `pred` is nearest-interpolated to gt's length
/// when they differ.
F0DeviationReport local_f0_deviation(const F0Contour& pred, const F0Contour& gt,
                                     DeviationDomain domain = DeviationDomain::jointly_voiced);

double global_f0_error(const GlobalPitch& pred, const GlobalPitch& gt);

/// Mean squared f0 difference over all frames of two equal-length contours.
double frame_f0_loss(const F0Contour& pred, const F0Contour& gt);

/// (gt - pred)^2
double global_pitch_loss(double pred_hz, double gt_hz);

double speaker_consistency(const SpeakerEmbedding& a, const SpeakerEmbedding& b);

enum class ErrorUnit { word, character };

struct ErrorRateReport {
  double rate = 0.0;
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_len = 0;

  std::size_t edits() const { return substitutions + insertions + deletions; }
};

struct EditCounts {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;

  bool operator==(const EditCounts&) const = default;
};

/// Lowercase ASCII, drop punctuation, collapse whitespace runs to one space
/// and trim.
std::string normalize_transcript(std::string_view text);

/// Words (whitespace split) or characters (UTF-8 code points, spaces kept)
/// of the normalized text.
std::vector<std::string> tokenize(std::string_view text, ErrorUnit unit);

/// Levenshtein alignment of token sequences. Of the optimal alignments the
/// one found by backtracking with substitution/match preferred over insertion
/// over deletion is reported.
EditCounts edit_counts(std::span<const std::string> ref, std::span<const std::string> hyp);

ErrorRateReport error_rate(std::string_view ref, std::string_view hyp, ErrorUnit unit);

}  // namespace svtk
