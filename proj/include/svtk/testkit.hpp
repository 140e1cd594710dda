// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "svtk/align.hpp"
#include "svtk/contour.hpp"
#include "svtk/metrics.hpp"

namespace svtk::testkit {

inline constexpr std::size_t kBruteForceDtwMaxLen = 10;
inline constexpr std::size_t kBruteForceEditMaxLen = 6;

/// Exhaustive minimum over every monotonic boundary-complete warp path.
DtwResult brute_force_dtw(const FeatureSequence& ref, const FeatureSequence& src,
                          DtwMetric metric = DtwMetric::euclidean);

/// Exhaustive search over all alignments. Among optimal ones, the alignment
/// whose operation sequence read from the end is lexicographically smallest
/// under match/substitution < insertion < deletion is reported.
EditCounts brute_force_edit(std::span<const std::string> ref, std::span<const std::string> hyp);

struct PerturbResult {
  F0Contour contour;
  std::size_t clamped = 0;
};

/// Voiced frames get `global_shift_hz` plus seeded N(0, local_noise_hz^2)
/// noise, clamped to [1, 1000] Hz. Voicing is unchanged.
PerturbResult perturb_contour(const F0Contour& contour, double global_shift_hz,
                              double local_noise_hz, std::uint64_t seed);

}  // namespace svtk::testkit
