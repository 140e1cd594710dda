// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "svtk/contour.hpp"
#include "svtk/matrix.hpp"

namespace svtk {

/// T x D matrix of frame features. Every entry must be finite and D >= 1.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  explicit FeatureSequence(Matrix data, double frame_rate = 0.0);

  const Matrix& data() const { return data_; }
  std::size_t frames() const { return data_.rows(); }
  std::size_t dims() const { return data_.cols(); }
  std::span<const double> frame(std::size_t t) const { return data_.row(t); }
  double frame_rate() const { return frame_rate_; }

  bool operator==(const FeatureSequence&) const = default;

 private:
  Matrix data_;
  double frame_rate_ = 0.0;
};

enum class DtwMetric { euclidean, cosine_distance };

double frame_distance(std::span<const double> a, std::span<const double> b, DtwMetric metric);

struct DtwOptions {
  DtwMetric metric = DtwMetric::euclidean;
  /// Sakoe-Chiba radius around the length-scaled diagonal; unset = no band.
  std::optional<std::size_t> band;
};

struct DtwResult {
  /// (ref index, src index) pairs from (0,0) to (T_ref-1, T_src-1).
  std::vector<std::pair<std::size_t, std::size_t>> path;
  double cost = 0.0;
  double normalized_cost = 0.0;
};

/// Minimum-cost monotonic alignment with steps (1,0), (0,1), (1,1).
/// Backtracking breaks ties by preferring the diagonal, then (0,1), then (1,0).
DtwResult dtw(const FeatureSequence& ref, const FeatureSequence& src, const DtwOptions& opts = {});

/// True when `path` is boundary-complete for the given lengths and uses only
/// unit steps.
bool is_valid_warp_path(std::span<const std::pair<std::size_t, std::size_t>> path,
                        std::size_t ref_len, std::size_t src_len);

enum class WarpReduce { mean, first };

/// Resample `src` onto the reference time axis along `result.path`.
FeatureSequence warp_to_reference(const FeatureSequence& src, const DtwResult& result,
                                  std::size_t ref_len, WarpReduce reduce = WarpReduce::mean);

/// Mean per-frame Euclidean distance between `c` and `c_emg` warped onto c.
double content_loss(const FeatureSequence& c, const FeatureSequence& c_emg);

/// Index map k -> round(k*(T-1)/(L-1)); L = 1 picks frame (T-1)/2.
F0Contour nearest_interpolate(const F0Contour& contour, std::size_t target_len);

}  // namespace svtk
