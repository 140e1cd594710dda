// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "svtk/error.hpp"

namespace svtk::testkit {

namespace {

using Path = std::vector<std::pair<std::size_t, std::size_t>>;

// Plain re-derivation of the frame distances; kept separate from align so the
// oracle does not share code with the implementation it checks.
double distance(std::span<const double> a, std::span<const double> b, DtwMetric metric) {
  if (metric == DtwMetric::euclidean) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) return (na == 0.0 && nb == 0.0) ? 0.0 : 1.0;
  return 1.0 - dot / (std::sqrt(na) * std::sqrt(nb));
}

// Step rank used by the dynamic-programming backtrace: diagonal, then (0,1),
// then (1,0).
int step_rank(const std::pair<std::size_t, std::size_t>& from,
              const std::pair<std::size_t, std::size_t>& to) {
  if (to.first != from.first && to.second != from.second) return 0;
  return to.second != from.second ? 1 : 2;
}

// Equal-cost paths are ordered by their steps read from the end.
bool prefer(const Path& a, const Path& b) {
  std::size_t ia = a.size() - 1, ib = b.size() - 1;
  while (ia > 0 && ib > 0) {
    const int ra = step_rank(a[ia - 1], a[ia]);
    const int rb = step_rank(b[ib - 1], b[ib]);
    if (ra != rb) return ra < rb;
    --ia;
    --ib;
  }
  return ia < ib;
}

struct DtwSearch {
  const FeatureSequence& ref;
  const FeatureSequence& src;
  DtwMetric metric;
  Path current;
  Path best_path;
  double best = std::numeric_limits<double>::infinity();

  void walk(std::size_t i, std::size_t j, double cost) {
    current.emplace_back(i, j);
    cost += distance(ref.frame(i), src.frame(j), metric);
    if (i + 1 == ref.frames() && j + 1 == src.frames()) {
      if (cost < best || (cost == best && prefer(current, best_path))) {
        best = cost;
        best_path = current;
      }
    } else {
      if (i + 1 < ref.frames() && j + 1 < src.frames()) walk(i + 1, j + 1, cost);
      if (j + 1 < src.frames()) walk(i, j + 1, cost);
      if (i + 1 < ref.frames()) walk(i + 1, j, cost);
    }
    current.pop_back();
  }
};


struct EditSearch {
  std::span<const std::string> ref;
  std::span<const std::string> hyp;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  EditCounts best_counts;

  // Explores alignments from the end backwards, diagonal first, so the first
  // optimum found is the lexicographically smallest reversed op sequence.
  void walk(std::size_t i, std::size_t j, std::size_t cost, EditCounts counts) {
    if (cost > best) return;
    if (i == 0 && j == 0) {
      if (cost < best) {
        best = cost;
        best_counts = counts;
      }
      return;
    }
    if (i > 0 && j > 0) {
      auto c = counts;
      const bool same = ref[i - 1] == hyp[j - 1];
      c.substitutions += same ? 0 : 1;
      walk(i - 1, j - 1, cost + (same ? 0 : 1), c);
    }
    if (j > 0) {
      auto c = counts;
      ++c.insertions;
      walk(i, j - 1, cost + 1, c);
    }
    if (i > 0) {
      auto c = counts;
      ++c.deletions;
      walk(i - 1, j, cost + 1, c);
    }
  }
};

}  // namespace

DtwResult brute_force_dtw(const FeatureSequence& ref, const FeatureSequence& src, DtwMetric metric) {
  if (ref.frames() == 0 || src.frames() == 0) throw DomainError("brute-force dtw on empty input");
  if (ref.dims() != src.dims()) throw DomainError("brute-force dtw dimension mismatch");
  if (ref.frames() > kBruteForceDtwMaxLen || src.frames() > kBruteForceDtwMaxLen) {
    throw DomainError("brute-force dtw is limited to " + std::to_string(kBruteForceDtwMaxLen) +
                      " frames per sequence");
  }
  DtwSearch search{ref, src, metric, {}, {}};
  search.walk(0, 0, 0.0);
  DtwResult result;
  result.path = std::move(search.best_path);
  result.cost = search.best;
  result.normalized_cost = result.cost / static_cast<double>(result.path.size());
  return result;
}

EditCounts brute_force_edit(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.size() > kBruteForceEditMaxLen || hyp.size() > kBruteForceEditMaxLen) {
    throw DomainError("brute-force edit search is limited to " +
                      std::to_string(kBruteForceEditMaxLen) + " tokens per sequence");
  }
  // Any alignment costs at most |ref| + |hyp|; start the bound just above it.
  EditSearch search{ref, hyp, ref.size() + hyp.size() + 1, {}};
  search.walk(ref.size(), hyp.size(), 0, {});
  return search.best_counts;
}

PerturbResult perturb_contour(const F0Contour& contour, double global_shift_hz,
                              double local_noise_hz, std::uint64_t seed) {
  if (local_noise_hz < 0.0) throw DomainError("noise level must be non-negative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, local_noise_hz > 0.0 ? local_noise_hz : 1.0);
  PerturbResult out;
  std::vector<F0Frame> frames(contour.frames().begin(), contour.frames().end());
  for (auto& f : frames) {
    if (!f.voiced) continue;
    double v = f.f0_hz + global_shift_hz;
    if (local_noise_hz > 0.0) v += noise(rng);
    if (v < 1.0 || v > 1000.0) {
      v = std::clamp(v, 1.0, 1000.0);
      ++out.clamped;
    }
    f.f0_hz = v;
  }
  out.contour = contour.with_frames(std::move(frames));
  return out;
}

}  // namespace svtk::testkit
