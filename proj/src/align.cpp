// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "svtk/error.hpp"

namespace svtk {

FeatureSequence::FeatureSequence(Matrix data, double frame_rate)
    : data_(std::move(data)), frame_rate_(frame_rate) {
  if (data_.cols() < 1) throw DomainError("feature sequences need at least one dimension");
  for (double v : data_.data()) {
    if (!std::isfinite(v)) throw DomainError("feature sequence contains a non-finite value");
  }
  if (frame_rate_ < 0.0 || !std::isfinite(frame_rate_)) {
    throw DomainError("feature frame rate must be non-negative");
  }
}

double frame_distance(std::span<const double> a, std::span<const double> b, DtwMetric metric) {
  if (metric == DtwMetric::euclidean) {
    double acc = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double d = a[k] - b[k];
      acc += d * d;
    }
    return std::sqrt(acc);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  // Zero vectors have no direction; treat them as maximally dissimilar
  // to anything but another zero vector.
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

void check_pair(const FeatureSequence& ref, const FeatureSequence& src) {
  if (ref.frames() == 0 || src.frames() == 0) throw DomainError("dtw on an empty sequence");
  if (ref.dims() != src.dims()) {
    throw DomainError("dtw dimension mismatch: " + std::to_string(ref.dims()) + " vs " +
                      std::to_string(src.dims()));
  }
}

bool in_band(std::size_t i, std::size_t j, std::size_t n, std::size_t m, std::size_t radius) {
  // Distance from the straight line joining (0,0) and (n-1,m-1), in src frames.
  const double centre = n > 1 ? static_cast<double>(i) * static_cast<double>(m - 1) /
                                    static_cast<double>(n - 1)
                              : 0.0;
  return std::abs(static_cast<double>(j) - centre) <= static_cast<double>(radius) + 0.5;
}

}  // namespace

DtwResult dtw(const FeatureSequence& ref, const FeatureSequence& src, const DtwOptions& opts) {
  check_pair(ref, src);
  const std::size_t n = ref.frames();
  const std::size_t m = src.frames();
  constexpr double inf = std::numeric_limits<double>::infinity();

  Matrix acc(n, m, inf);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (opts.band && !in_band(i, j, n, m, *opts.band)) continue;
      const double d = frame_distance(ref.frame(i), src.frame(j), opts.metric);
      if (i == 0 && j == 0) {
        acc(i, j) = d;
        continue;
      }
      double best = inf;
      if (i > 0 && j > 0) best = std::min(best, acc(i - 1, j - 1));
      if (j > 0) best = std::min(best, acc(i, j - 1));
      if (i > 0) best = std::min(best, acc(i - 1, j));
      acc(i, j) = best + d;
    }
  }
  if (!std::isfinite(acc(n - 1, m - 1))) {
    throw DomainError("dtw band is too narrow to connect the sequence ends");
  }

  DtwResult result;
  result.cost = acc(n - 1, m - 1);
  std::size_t i = n - 1;
  std::size_t j = m - 1;
  result.path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    // Diagonal first, then (0,1), then (1,0).
    double best = inf;
    std::size_t bi = i, bj = j;
    if (i > 0 && j > 0 && acc(i - 1, j - 1) < best) {
      best = acc(i - 1, j - 1);
      bi = i - 1;
      bj = j - 1;
    }
    if (j > 0 && acc(i, j - 1) < best) {
      best = acc(i, j - 1);
      bi = i;
      bj = j - 1;
    }
    if (i > 0 && acc(i - 1, j) < best) {
      bi = i - 1;
      bj = j;
    }
    i = bi;
    j = bj;
    result.path.emplace_back(i, j);
  }
  std::reverse(result.path.begin(), result.path.end());
  result.normalized_cost = result.cost / static_cast<double>(result.path.size());
  return result;
}

bool is_valid_warp_path(std::span<const std::pair<std::size_t, std::size_t>> path,
                        std::size_t ref_len, std::size_t src_len) {
  if (path.empty() || ref_len == 0 || src_len == 0) return false;
  if (path.front() != std::pair<std::size_t, std::size_t>{0, 0}) return false;
  if (path.back() != std::pair<std::size_t, std::size_t>{ref_len - 1, src_len - 1}) return false;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const auto [pi, pj] = path[k - 1];
    const auto [ci, cj] = path[k];
    if (ci < pi || cj < pj) return false;
    const auto di = ci - pi;
    const auto dj = cj - pj;
    if (di > 1 || dj > 1 || (di == 0 && dj == 0)) return false;
  }
  return true;
}

FeatureSequence warp_to_reference(const FeatureSequence& src, const DtwResult& result,
                                  std::size_t ref_len, WarpReduce reduce) {
  if (!is_valid_warp_path(result.path, ref_len, src.frames())) {
    throw DomainError("warp path does not match reference length " + std::to_string(ref_len) +
                      " and source length " + std::to_string(src.frames()));
  }
  const std::size_t d = src.dims();
  Matrix out(ref_len, d, 0.0);
  std::vector<std::size_t> counts(ref_len, 0);
  for (const auto& [i, j] : result.path) {
    if (reduce == WarpReduce::first && counts[i] > 0) continue;
    auto row = out.row(i);
    const auto s = src.frame(j);
    for (std::size_t k = 0; k < d; ++k) row[k] += s[k];
    ++counts[i];
  }
  for (std::size_t i = 0; i < ref_len; ++i) {
    if (counts[i] == 1) continue;
    for (auto& v : out.row(i)) v /= static_cast<double>(counts[i]);
  }
  return FeatureSequence(std::move(out), src.frame_rate());
}

double content_loss(const FeatureSequence& c, const FeatureSequence& c_emg) {
  const auto result = dtw(c, c_emg);
  const auto warped = warp_to_reference(c_emg, result, c.frames());
  double total = 0.0;
  for (std::size_t i = 0; i < c.frames(); ++i) {
    total += frame_distance(c.frame(i), warped.frame(i), DtwMetric::euclidean);
  }
  return total / static_cast<double>(c.frames());
}

F0Contour nearest_interpolate(const F0Contour& contour, std::size_t target_len) {
  if (contour.empty()) throw DomainError("cannot interpolate an empty contour");
  if (target_len < 1) throw DomainError("target length must be at least 1");
  const std::size_t n = contour.size();
  std::vector<F0Frame> frames(target_len);
  if (target_len == 1) {
    frames[0] = contour[(n - 1) / 2];
  } else {
    for (std::size_t k = 0; k < target_len; ++k) {
      const double src = static_cast<double>(k) * static_cast<double>(n - 1) /
                         static_cast<double>(target_len - 1);
      frames[k] = contour[static_cast<std::size_t>(std::round(src))];
    }
  }
  const double hop = contour.hop_s() * static_cast<double>(n) / static_cast<double>(target_len);
  return F0Contour(std::move(frames), hop, contour.sample_rate(), contour.start_s());
}

}  // namespace svtk
