// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "svtk/align.hpp"
#include "svtk/error.hpp"

namespace svtk {

namespace {

double voiced_mean(const F0Contour& c, const char* which) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& f : c.frames()) {
    sum += f.f0_hz * (f.voiced ? 1.0 : 0.0);
    n += f.voiced ? 1 : 0;
  }
  if (n == 0) throw DomainError(std::string(which) + " contour has no voiced frames");
  return sum / static_cast<double>(n);
}

}  // namespace

F0DeviationReport local_f0_deviation(const F0Contour& pred, const F0Contour& gt,
                                     DeviationDomain domain) {
  if (pred.empty() || gt.empty()) throw DomainError("local F0 deviation on an empty contour");
  const F0Contour aligned = pred.size() == gt.size() ? pred : nearest_interpolate(pred, gt.size());

  F0DeviationReport report;
  report.pred_mean_hz = voiced_mean(aligned, "predicted");
  report.gt_mean_hz = voiced_mean(gt, "ground-truth");

  double acc = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& p = aligned[i];
    const auto& g = gt[i];
    if (domain == DeviationDomain::jointly_voiced && !(p.voiced && g.voiced)) continue;
    const double diff = (p.f0_hz - report.pred_mean_hz) - (g.f0_hz - report.gt_mean_hz);
    acc += diff * diff;
    ++n;
  }
  if (n == 0) throw DomainError("no jointly voiced frames between prediction and ground truth");
  report.n_eval_frames = n;
  report.local_dev_hz = std::sqrt(acc / static_cast<double>(n));
  return report;
}

double global_f0_error(const GlobalPitch& pred, const GlobalPitch& gt) {
  return std::abs(pred.value_hz - gt.value_hz);
}

double frame_f0_loss(const F0Contour& pred, const F0Contour& gt) {
  if (pred.size() != gt.size()) {
    throw DomainError("frame F0 loss needs equal lengths, got " + std::to_string(pred.size()) +
                      " and " + std::to_string(gt.size()));
  }
  if (gt.empty()) throw DomainError("frame F0 loss on empty contours");
  double acc = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt[i].f0_hz - pred[i].f0_hz;
    acc += d * d;
  }
  return acc / static_cast<double>(gt.size());
}

double global_pitch_loss(double pred_hz, double gt_hz) {
  if (!(pred_hz > 0.0) || !(gt_hz > 0.0)) throw DomainError("global pitch values must be positive");
  const double d = gt_hz - pred_hz;
  return d * d;
}

double speaker_consistency(const SpeakerEmbedding& a, const SpeakerEmbedding& b) {
  if (a.vector.size() != b.vector.size()) {
    throw DomainError("embedding dimensions differ: " + std::to_string(a.vector.size()) + " vs " +
                      std::to_string(b.vector.size()));
  }
  if (a.vector.empty()) throw DomainError("empty speaker embedding");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.vector.size(); ++k) {
    if (!std::isfinite(a.vector[k]) || !std::isfinite(b.vector[k])) {
      throw DomainError("non-finite speaker embedding entry");
    }
    dot += a.vector[k] * b.vector[k];
    na += a.vector[k] * a.vector[k];
    nb += b.vector[k] * b.vector[k];
  }
  if (na == 0.0 || nb == 0.0) throw DomainError("zero-norm speaker embedding");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string normalize_transcript(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80 && std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (u < 0x80 && std::ispunct(u)) continue;
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
  }
  return out;
}

std::vector<std::string> tokenize(std::string_view text, ErrorUnit unit) {
  const auto norm = normalize_transcript(text);
  std::vector<std::string> tokens;
  if (unit == ErrorUnit::word) {
    std::size_t start = 0;
    while (start < norm.size()) {
      auto end = norm.find(' ', start);
      if (end == std::string::npos) end = norm.size();
      tokens.emplace_back(norm.substr(start, end - start));
      start = end + 1;
    }
    return tokens;
  }
  for (std::size_t i = 0; i < norm.size();) {
    const auto lead = static_cast<unsigned char>(norm[i]);
    std::size_t n = 1;
    if (lead >= 0xF0) n = 4;
    else if (lead >= 0xE0) n = 3;
    else if (lead >= 0xC0) n = 2;
    n = std::min(n, norm.size() - i);
    tokens.emplace_back(norm.substr(i, n));
    i += n;
  }
  return tokens;
}

EditCounts edit_counts(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // cost[i][j]: edits turning ref[0..i) into hyp[0..j).
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i][j - 1] + 1, cost[i - 1][j] + 1});
    }
  }

  EditCounts counts;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        counts.substitutions += same ? 0 : 1;
        --i;
        --j;
        continue;
      }
    }
    if (j > 0 && cost[i][j] == cost[i][j - 1] + 1) {
      ++counts.insertions;
      --j;
      continue;
    }
    ++counts.deletions;
    --i;
  }
  return counts;
}

ErrorRateReport error_rate(std::string_view ref, std::string_view hyp, ErrorUnit unit) {
  const auto r = tokenize(ref, unit);
  const auto h = tokenize(hyp, unit);
  if (r.empty()) throw DomainError("reference transcript is empty after normalization");
  const auto c = edit_counts(r, h);
  ErrorRateReport report;
  report.substitutions = c.substitutions;
  report.insertions = c.insertions;
  report.deletions = c.deletions;
  report.ref_len = r.size();
  report.rate = static_cast<double>(report.edits()) / static_cast<double>(report.ref_len);
  return report;
}

}  // namespace svtk
