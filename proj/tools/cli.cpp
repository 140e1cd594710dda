// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "svtk/align.hpp"
#include "svtk/config.hpp"
#include "svtk/emg.hpp"
#include "svtk/error.hpp"
#include "svtk/io.hpp"
#include "svtk/metrics.hpp"
#include "svtk/pitch.hpp"
#include "svtk/psola.hpp"
#include "svtk/signal.hpp"

namespace svtk::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out;
  unsigned jobs = 1;
};

// ---------------------------------------------------------------------------
// helpers

// `.lst` files are manifests: one path per line, relative to the manifest's
// directory; blank lines and `#` comments are skipped.
std::vector<fs::path> expand_inputs(const std::vector<std::string>& args) {
  std::vector<fs::path> out;
  for (const auto& a : args) {
    const fs::path p(a);
    if (p.extension() != ".lst") {
      out.push_back(p);
      continue;
    }
    std::istringstream in(io::read_text(p));
    std::string line;
    while (std::getline(in, line)) {
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      const auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos) continue;
      const auto e = line.find_last_not_of(" \t\r");
      const fs::path item(line.substr(b, e - b + 1));
      out.push_back(item.is_absolute() ? item : p.parent_path() / item);
    }
  }
  if (out.empty()) throw UsageError("no input items");
  return out;
}

std::vector<std::pair<fs::path, fs::path>> expand_pairs(const std::vector<std::string>& a,
                                                        const std::vector<std::string>& b,
                                                        const char* a_name, const char* b_name) {
  const auto xs = expand_inputs(a);
  const auto ys = expand_inputs(b);
  if (xs.size() != ys.size()) {
    throw UsageError(std::string("--") + a_name + " lists " + std::to_string(xs.size()) +
                     " items but --" + b_name + " lists " + std::to_string(ys.size()));
  }
  std::vector<std::pair<fs::path, fs::path>> out;
  for (std::size_t i = 0; i < xs.size(); ++i) out.emplace_back(xs[i], ys[i]);
  return out;
}

json path_list(const std::vector<fs::path>& paths) {
  json j = json::array();
  for (const auto& p : paths) j.push_back(p.generic_string());
  return j;
}

fs::path output_for(const fs::path& input, const std::string& suffix, const std::string& output,
                    const std::string& output_dir, std::size_t n_items) {
  if (n_items == 1 && !output.empty()) return output;
  if (!output_dir.empty()) {
    fs::create_directories(output_dir);
    std::string stem = input.stem().string();
    return fs::path(output_dir) / (stem + suffix);
  }
  if (n_items > 1 && !output.empty()) {
    throw UsageError("--output names a single file; use --output-dir for several inputs");
  }
  throw UsageError("an --output (or --output-dir) is required");
}

// Two inputs with the same stem would silently overwrite each other's output.
void check_distinct(const std::vector<fs::path>& outputs) {
  std::set<fs::path> seen;
  for (const auto& p : outputs) {
    if (!seen.insert(p.lexically_normal()).second) {
      throw UsageError("two inputs map to the same output " + p.generic_string());
    }
  }
}

// Items are computed on a small pool but stored by input index, so report
// order never depends on scheduling.
std::vector<json> parallel_map(std::size_t n, unsigned jobs,
                               const std::function<json(std::size_t)>& fn) {
  std::vector<json> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    const auto threads = std::min<std::size_t>(std::max(1u, jobs), std::max<std::size_t>(1, n));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json aggregate(const std::vector<json>& items, const std::string& key) {
  std::vector<double> v;
  for (const auto& it : items) {
    if (it.contains(key) && it[key].is_number()) v.push_back(it[key].get<double>());
  }
  json a;
  a["metric"] = key;
  a["count"] = v.size();
  if (v.empty()) {
    a["mean"] = nullptr;
    a["std"] = nullptr;
    return a;
  }
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  a["mean"] = mean;
  a["std"] = std::sqrt(var / static_cast<double>(v.size()));
  return a;
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Report {
  explicit Report(std::string cmd) : command(std::move(cmd)) {}
  std::string command;
  json inputs = json::object();
  json options = json::object();
  std::vector<json> items;
  std::string metric;
  json result = json::object();
};

json render(const Report& r, const ToolkitConfig& cfg) {
  json j;
  j["tool"] = "svtk";
  j["version"] = kVersion;
  j["command"] = r.command;
  j["inputs"] = r.inputs;
  json config = json::object();
  for (const auto& [k, v] : cfg.snapshot()) config[k] = v;
  j["config"] = config;
  j["options"] = r.options;
  j["items"] = r.items;
  j["aggregate"] = aggregate(r.items, r.metric);
  if (!r.result.empty()) j["result"] = r.result;
  j["timestamp"] = utc_timestamp();
  return j;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.empty()) return std::nan("");
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

F0Contour contour_from(const fs::path& p, const PitchConfig& pitch, std::optional<int> channel) {
  if (p.extension() == ".wav") return track_pitch(io::read_wav(p, channel), pitch);
  return io::read_contour(p);
}

// ---------------------------------------------------------------------------
// commands

struct Args {
  std::vector<std::string> input, pred, gt, ref, src, hyp;
  std::string output, output_dir, format = "auto", speaker, mode, unit = "word", metric = "euclidean",
                                  domain = "joint", path_out, encoding = "float32", contour_out,
                                  kind = "sine";
  std::optional<int> channel;
  std::optional<double> target_hz, lead_ms, band;
  bool per_file = false;
  double f0 = 220.0, depth = 20.0, rate = 5.0, start_hz = 100.0, end_hz = 200.0, duration = 1.0,
         amplitude = 0.5, noise_std = 0.0;
  int sample_rate = 16000;
  std::uint64_t seed = 0;
};

Report cmd_pitch_track(const Args& a, const ToolkitConfig& cfg, unsigned jobs) {
  const auto inputs = expand_inputs(a.input);
  Report r("pitch track");
  r.inputs["input"] = path_list(inputs);
  r.options["format"] = a.format;
  std::vector<fs::path> outputs;
  for (const auto& in : inputs) {
    const std::string suffix = a.format == "json" ? ".f0.json" : ".f0.csv";
    outputs.push_back(output_for(in, suffix, a.output, a.output_dir, inputs.size()));
  }
  check_distinct(outputs);
  r.items = parallel_map(inputs.size(), jobs, [&](std::size_t i) {
    const auto contour = track_pitch(io::read_wav(inputs[i], a.channel), cfg.pitch);
    if (a.format == "json") {
      io::write_contour_json(outputs[i], contour);
    } else if (a.format == "csv") {
      io::write_contour_csv(outputs[i], contour);
    } else {
      io::write_contour(outputs[i], contour);
    }
    json item;
    item["input"] = inputs[i].generic_string();
    item["output"] = outputs[i].generic_string();
    item["frames"] = contour.size();
    item["voiced_frames"] = contour.voiced_count();
    item["mean_f0_hz"] = number_or_null(mean_of(contour.voiced_f0()));
    return item;
  });
  r.metric = "mean_f0_hz";
  return r;
}

Report cmd_pitch_global(const Args& a, const ToolkitConfig& cfg, unsigned jobs) {
  const auto inputs = expand_inputs(a.input);
  Report r("pitch global");
  r.inputs["input"] = path_list(inputs);
  r.options["speaker"] = a.speaker;
  std::vector<F0Contour> contours(inputs.size());
  r.items = parallel_map(inputs.size(), jobs, [&](std::size_t i) {
    contours[i] = contour_from(inputs[i], cfg.pitch, a.channel);
    json item;
    item["input"] = inputs[i].generic_string();
    item["frames"] = contours[i].size();
    item["voiced_frames"] = contours[i].voiced_count();
    item["mean_f0_hz"] = number_or_null(mean_of(contours[i].voiced_f0()));
    return item;
  });
  const auto gp = global_pitch(contours, a.speaker);
  r.result["speaker_id"] = gp.speaker_id;
  r.result["global_pitch_hz"] = gp.value_hz;
  r.result["n_voiced_frames"] = gp.n_voiced_frames;
  r.metric = "mean_f0_hz";
  return r;
}

Report cmd_flatten(const Args& a, ToolkitConfig cfg, unsigned jobs) {
  const auto inputs = expand_inputs(a.input);
  if (!a.mode.empty()) cfg.flatten.mode = parse_flatten_mode(a.mode);
  if (a.target_hz) cfg.flatten = FlattenTarget::fixed(*a.target_hz);
  cfg.flatten.validate();

  Report r("flatten");
  r.inputs["input"] = path_list(inputs);
  r.options["per_file"] = a.per_file;
  r.options["encoding"] = a.encoding;
  std::vector<fs::path> outputs;
  for (const auto& in : inputs) {
    outputs.push_back(output_for(in, ".flat.wav", a.output, a.output_dir, inputs.size()));
  }
  check_distinct(outputs);
  const auto encoding = a.encoding == "pcm16" ? io::WavEncoding::pcm16 : io::WavEncoding::float32;

  std::vector<AudioBuffer> audio(inputs.size());
  std::vector<F0Contour> contours(inputs.size());
  parallel_map(inputs.size(), jobs, [&](std::size_t i) {
    audio[i] = io::read_wav(inputs[i], a.channel);
    contours[i] = track_pitch(audio[i], cfg.pitch);
    return json();
  });
  // One speaker per run: the target pools every input unless --per-file.
  std::optional<double> pooled;
  if (!a.per_file) pooled = resolve_target_hz(cfg.flatten, contours);
  const auto marks = MarkConfig::from(cfg.pitch);

  r.items = parallel_map(inputs.size(), jobs, [&](std::size_t i) {
    const double target =
        pooled ? *pooled
               : resolve_target_hz(cfg.flatten, std::span<const F0Contour>(&contours[i], 1));
    const auto flat = flatten_pitch_to(audio[i], contours[i], target, marks);
    io::write_wav(outputs[i], flat, encoding);
    const auto check = track_pitch(flat, cfg.pitch).voiced_f0();
    json item;
    item["input"] = inputs[i].generic_string();
    item["output"] = outputs[i].generic_string();
    item["target_hz"] = target;
    item["input_voiced_frames"] = contours[i].voiced_count();
    item["input_f0_std_hz"] = number_or_null(std_of(contours[i].voiced_f0()));
    item["output_f0_mean_hz"] = number_or_null(mean_of(check));
    item["output_f0_std_hz"] = number_or_null(std_of(check));
    item["clipped_samples"] = flat.clipped();
    return item;
  });
  if (pooled) r.result["target_hz"] = *pooled;
  r.metric = "output_f0_std_hz";
  return r;
}

DtwMetric parse_metric(const std::string& m) {
  if (m == "euclidean") return DtwMetric::euclidean;
  if (m == "cosine" || m == "cosine_distance") return DtwMetric::cosine_distance;
  throw UsageError("unknown metric " + m);
}

Report cmd_align_dtw(const Args& a, const ToolkitConfig&, unsigned jobs) {
  const auto pairs = expand_pairs(a.ref, a.src, "ref", "src");
  Report r("align dtw");
  std::vector<fs::path> refs, srcs;
  for (const auto& [x, y] : pairs) {
    refs.push_back(x);
    srcs.push_back(y);
  }
  r.inputs["ref"] = path_list(refs);
  r.inputs["src"] = path_list(srcs);
  r.options["metric"] = a.metric;
  if (a.band) r.options["band"] = *a.band;
  if (!a.path_out.empty() && pairs.size() != 1) throw UsageError("--path-out needs a single pair");
  DtwOptions opts{parse_metric(a.metric), std::nullopt};
  if (a.band) opts.band = static_cast<std::size_t>(*a.band);

  r.items = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    const FeatureSequence ref(io::read_features(pairs[i].first));
    const FeatureSequence src(io::read_features(pairs[i].second));
    const auto res = dtw(ref, src, opts);
    if (!a.path_out.empty()) {
      std::ofstream out(a.path_out);
      if (!out) throw FormatError("cannot write " + a.path_out);
      out << "ref,src\n";
      for (const auto& [p, q] : res.path) out << p << ',' << q << '\n';
    }
    json item;
    item["ref"] = pairs[i].first.generic_string();
    item["src"] = pairs[i].second.generic_string();
    item["ref_frames"] = ref.frames();
    item["src_frames"] = src.frames();
    item["cost"] = res.cost;
    item["normalized_cost"] = res.normalized_cost;
    item["path_length"] = res.path.size();
    return item;
  });
  r.metric = "normalized_cost";
  return r;
}

Report cmd_align_loss(const Args& a, const ToolkitConfig&, unsigned jobs) {
  const auto pairs = expand_pairs(a.ref, a.src, "ref", "src");
  Report r("align loss");
  std::vector<fs::path> refs, srcs;
  for (const auto& [x, y] : pairs) {
    refs.push_back(x);
    srcs.push_back(y);
  }
  r.inputs["ref"] = path_list(refs);
  r.inputs["src"] = path_list(srcs);
  r.items = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    const FeatureSequence c(io::read_features(pairs[i].first));
    const FeatureSequence c_emg(io::read_features(pairs[i].second));
    json item;
    item["ref"] = pairs[i].first.generic_string();
    item["src"] = pairs[i].second.generic_string();
    item["content_loss"] = content_loss(c, c_emg);
    return item;
  });
  r.metric = "content_loss";
  return r;
}

void record_pairs(Report& r, const std::vector<std::pair<fs::path, fs::path>>& pairs,
                  const char* a_name, const char* b_name) {
  std::vector<fs::path> xs, ys;
  for (const auto& [x, y] : pairs) {
    xs.push_back(x);
    ys.push_back(y);
  }
  r.inputs[a_name] = path_list(xs);
  r.inputs[b_name] = path_list(ys);
}

Report cmd_eval_f0_local(const Args& a, const ToolkitConfig& cfg, unsigned jobs) {
  const auto pairs = expand_pairs(a.pred, a.gt, "pred", "gt");
  Report r("eval f0-local");
  record_pairs(r, pairs, "pred", "gt");
  DeviationDomain domain = DeviationDomain::jointly_voiced;
  if (a.domain == "all") {
    domain = DeviationDomain::all_frames;
  } else if (a.domain != "joint") {
    throw UsageError("--domain must be joint or all");
  }
  r.options["domain"] = a.domain;
  r.items = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    const auto pred = contour_from(pairs[i].first, cfg.pitch, a.channel);
    const auto gt = contour_from(pairs[i].second, cfg.pitch, a.channel);
    const auto rep = local_f0_deviation(pred, gt, domain);
    json item;
    item["pred"] = pairs[i].first.generic_string();
    item["gt"] = pairs[i].second.generic_string();
    item["local_dev_hz"] = rep.local_dev_hz;
    item["n_eval_frames"] = rep.n_eval_frames;
    item["pred_mean_hz"] = rep.pred_mean_hz;
    item["gt_mean_hz"] = rep.gt_mean_hz;
    return item;
  });
  r.metric = "local_dev_hz";
  return r;
}

Report cmd_eval_f0_global(const Args& a, const ToolkitConfig& cfg, unsigned jobs) {
  const auto pairs = expand_pairs(a.pred, a.gt, "pred", "gt");
  Report r("eval f0-global");
  record_pairs(r, pairs, "pred", "gt");
  r.items = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    const auto pred = contour_from(pairs[i].first, cfg.pitch, a.channel);
    const auto gt = contour_from(pairs[i].second, cfg.pitch, a.channel);
    const auto gp = global_pitch(std::span<const F0Contour>(&pred, 1), "pred");
    const auto gg = global_pitch(std::span<const F0Contour>(&gt, 1), "gt");
    json item;
    item["pred"] = pairs[i].first.generic_string();
    item["gt"] = pairs[i].second.generic_string();
    item["pred_global_hz"] = gp.value_hz;
    item["gt_global_hz"] = gg.value_hz;
    item["error_hz"] = global_f0_error(gp, gg);
    return item;
  });
  std::vector<double> errs;
  for (const auto& it : r.items) errs.push_back(it["error_hz"].get<double>());
  double sq = 0.0;
  for (double e : errs) sq += e * e;
  r.result["mae_hz"] = mean_of(errs);
  r.result["rms_hz"] = std::sqrt(sq / static_cast<double>(errs.size()));
  r.metric = "error_hz";
  return r;
}

Report cmd_eval_consistency(const Args& a, const ToolkitConfig&, unsigned jobs) {
  const auto pairs = expand_pairs(a.pred, a.gt, "pred", "gt");
  Report r("eval consistency");
  record_pairs(r, pairs, "pred", "gt");
  r.items = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    const auto x = io::read_embedding(pairs[i].first);
    const auto y = io::read_embedding(pairs[i].second);
    json item;
    item["pred"] = pairs[i].first.generic_string();
    item["gt"] = pairs[i].second.generic_string();
    item["cosine_similarity"] = speaker_consistency(x, y);
    return item;
  });
  r.metric = "cosine_similarity";
  return r;
}

Report cmd_eval_asr(const Args& a, const ToolkitConfig&, unsigned jobs) {
  const auto pairs = expand_pairs(a.ref, a.hyp, "ref", "hyp");
  Report r("eval asr");
  record_pairs(r, pairs, "ref", "hyp");
  ErrorUnit unit = ErrorUnit::word;
  if (a.unit == "char") {
    unit = ErrorUnit::character;
  } else if (a.unit != "word") {
    throw UsageError("--unit must be word or char");
  }
  r.options["unit"] = a.unit;
  r.items = parallel_map(pairs.size(), jobs, [&](std::size_t i) {
    const auto rep = error_rate(io::read_text(pairs[i].first), io::read_text(pairs[i].second), unit);
    json item;
    item["ref"] = pairs[i].first.generic_string();
    item["hyp"] = pairs[i].second.generic_string();
    item["rate"] = rep.rate;
    item["substitutions"] = rep.substitutions;
    item["insertions"] = rep.insertions;
    item["deletions"] = rep.deletions;
    item["ref_len"] = rep.ref_len;
    return item;
  });
  std::size_t edits = 0, ref_len = 0;
  for (const auto& it : r.items) {
    edits += it["substitutions"].get<std::size_t>() + it["insertions"].get<std::size_t>() +
             it["deletions"].get<std::size_t>();
    ref_len += it["ref_len"].get<std::size_t>();
  }
  r.result["corpus_rate"] = static_cast<double>(edits) / static_cast<double>(ref_len);
  r.metric = "rate";
  return r;
}

Report cmd_emg_preprocess(const Args& a, const ToolkitConfig& cfg, unsigned jobs) {
  const auto inputs = expand_inputs(a.input);
  Report r("emg preprocess");
  r.inputs["input"] = path_list(inputs);
  std::vector<fs::path> outputs;
  for (const auto& in : inputs) {
    outputs.push_back(output_for(in, ".ftrx", a.output, a.output_dir, inputs.size()));
  }
  check_distinct(outputs);
  r.items = parallel_map(inputs.size(), jobs, [&](std::size_t i) {
    const auto rec = io::load_session(inputs[i]);
    const auto feats = preprocess(rec, cfg.emg);
    io::write_features(outputs[i], feats.frames);
    json item;
    item["input"] = inputs[i].generic_string();
    item["output"] = outputs[i].generic_string();
    item["session_id"] = rec.session_id;
    item["mode"] = to_string(rec.mode);
    item["channels"] = rec.n_channels();
    item["frames"] = feats.frames.rows();
    item["dims"] = feats.frames.cols();
    item["frame_rate"] = feats.frame_rate;
    return item;
  });
  r.metric = "frames";
  return r;
}

Report cmd_emg_shift(const Args& a, const ToolkitConfig& cfg, unsigned jobs) {
  const auto inputs = expand_inputs(a.input);
  const double lead = a.lead_ms.value_or(cfg.emg.lead_shift_ms);
  Report r("emg shift");
  r.inputs["input"] = path_list(inputs);
  r.options["lead_ms"] = lead;
  std::vector<fs::path> outputs;
  for (const auto& in : inputs) {
    outputs.push_back(output_for(in, ".shifted.json", a.output, a.output_dir, inputs.size()));
  }
  check_distinct(outputs);
  r.items = parallel_map(inputs.size(), jobs, [&](std::size_t i) {
    const auto rec = io::load_session(inputs[i]);
    const auto shifted = apply_lead_shift(rec, lead);
    io::save_session(outputs[i], shifted);
    json item;
    item["input"] = inputs[i].generic_string();
    item["output"] = outputs[i].generic_string();
    item["shift_samples"] = std::llround(lead * rec.sample_rate / 1000.0);
    return item;
  });
  r.metric = "shift_samples";
  return r;
}

Report cmd_testkit_synth(const Args& a, const ToolkitConfig&, unsigned) {
  SynthSpec spec;
  if (a.kind == "sine") {
    spec = SynthSpec::sine(a.f0, a.duration, a.amplitude);
  } else if (a.kind == "pulse" || a.kind == "pulse_train") {
    spec = SynthSpec::pulse_train(a.f0, a.duration, a.amplitude);
  } else if (a.kind == "vibrato") {
    spec = SynthSpec::vibrato(a.f0, a.depth, a.rate, a.duration, a.amplitude);
  } else if (a.kind == "glide") {
    spec = SynthSpec::glide(a.start_hz, a.end_hz, a.duration, a.amplitude);
  } else {
    throw UsageError("unknown --kind " + a.kind);
  }
  if (a.output.empty()) throw UsageError("testkit synth needs --output");
  auto syn = synthesize(spec, a.sample_rate);
  AudioBuffer audio = syn.audio;
  if (a.noise_std > 0.0) {
    std::mt19937_64 rng(a.seed);
    std::normal_distribution<double> noise(0.0, a.noise_std);
    std::vector<double> x(audio.samples().begin(), audio.samples().end());
    for (auto& v : x) v += noise(rng);
    audio = AudioBuffer::clipped_from(std::move(x), audio.sample_rate());
  }
  io::write_wav(a.output, audio, a.encoding == "pcm16" ? io::WavEncoding::pcm16 : io::WavEncoding::float32);
  if (!a.contour_out.empty()) io::write_contour(a.contour_out, syn.contour);

  Report r("testkit synth");
  r.options["kind"] = a.kind;
  r.options["sample_rate"] = a.sample_rate;
  r.options["seed"] = a.seed;
  r.options["noise_std"] = a.noise_std;
  json item;
  item["output"] = a.output;
  if (!a.contour_out.empty()) item["contour"] = a.contour_out;
  item["samples"] = audio.size();
  item["frames"] = syn.contour.size();
  item["mean_f0_hz"] = number_or_null(mean_of(syn.contour.voiced_f0()));
  item["clipped_samples"] = audio.clipped();
  r.items.push_back(item);
  r.metric = "mean_f0_hz";
  return r;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "key = value configuration file");
  sub->add_option("--out", c.out, "write the JSON report here instead of stdout");
  sub->add_option("--jobs", c.jobs, "worker threads")->check(CLI::Range(1u, 256u));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"svtk: pitch, PSOLA, alignment, EMG and evaluation toolkit", "svtk"};
  app.require_subcommand(1);
  Common common;
  Args a;
  std::function<Report(const ToolkitConfig&, unsigned)> command;

  const auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help,
                        auto fn) {
    auto* sub = parent->add_subcommand(name, help);
    add_common(sub, common);
    sub->callback([&command, fn, &a] {
      command = [fn, &a](const ToolkitConfig& cfg, unsigned jobs) { return fn(a, cfg, jobs); };
    });
    return sub;
  };

  auto* pitch = app.add_subcommand("pitch", "pitch tracking");
  pitch->require_subcommand(1);
  auto* track = leaf(pitch, "track", "track f0 of WAV files", cmd_pitch_track);
  track->add_option("--input", a.input, "WAV file(s) or .lst manifest")->required();
  track->add_option("--output", a.output, "contour file (.csv or .json)");
  track->add_option("--output-dir", a.output_dir, "directory for per-item contours");
  track->add_option("--format", a.format)->check(CLI::IsMember({"auto", "csv", "json"}));
  track->add_option("--channel", a.channel, "channel of a multi-channel WAV");
  auto* global = leaf(pitch, "global", "speaker global pitch", cmd_pitch_global);
  global->add_option("--input", a.input, "contour or WAV file(s)")->required();
  global->add_option("--speaker", a.speaker, "speaker label");
  global->add_option("--channel", a.channel);

  auto* flatten = leaf(&app, "flatten", "PSOLA pitch flattening", cmd_flatten);
  flatten->add_option("--input", a.input)->required();
  flatten->add_option("--output", a.output);
  flatten->add_option("--output-dir", a.output_dir);
  flatten->add_option("--mode", a.mode)->check(
      CLI::IsMember({"mean", "median", "fixed", "speaker_mean", "speaker_median", "fixed_hz"}));
  flatten->add_option("--target-hz", a.target_hz, "constant target (implies fixed mode)");
  flatten->add_flag("--per-file", a.per_file, "resolve mean/median targets per file");
  flatten->add_option("--encoding", a.encoding)->check(CLI::IsMember({"float32", "pcm16"}));
  flatten->add_option("--channel", a.channel);

  auto* align = app.add_subcommand("align", "sequence alignment");
  align->require_subcommand(1);
  auto* adtw = leaf(align, "dtw", "DTW between FTRX feature files", cmd_align_dtw);
  adtw->add_option("--ref", a.ref)->required();
  adtw->add_option("--src", a.src)->required();
  adtw->add_option("--metric", a.metric)->check(CLI::IsMember({"euclidean", "cosine"}));
  adtw->add_option("--band", a.band, "Sakoe-Chiba radius in frames");
  adtw->add_option("--path-out", a.path_out, "CSV of the warp path");
  auto* aloss = leaf(align, "loss", "DTW content loss", cmd_align_loss);
  aloss->add_option("--ref", a.ref, "reference features c")->required();
  aloss->add_option("--src", a.src, "features to warp onto the reference")->required();

  auto* eval = app.add_subcommand("eval", "evaluation metrics");
  eval->require_subcommand(1);
  auto* local = leaf(eval, "f0-local", "local F0 deviation", cmd_eval_f0_local);
  local->add_option("--pred", a.pred)->required();
  local->add_option("--gt", a.gt)->required();
  local->add_option("--domain", a.domain)->check(CLI::IsMember({"joint", "all"}));
  local->add_option("--channel", a.channel);
  auto* gf0 = leaf(eval, "f0-global", "global F0 error", cmd_eval_f0_global);
  gf0->add_option("--pred", a.pred)->required();
  gf0->add_option("--gt", a.gt)->required();
  gf0->add_option("--channel", a.channel);
  auto* cons = leaf(eval, "consistency", "speaker embedding cosine similarity", cmd_eval_consistency);
  cons->add_option("--pred", a.pred)->required();
  cons->add_option("--gt", a.gt)->required();
  auto* asr = leaf(eval, "asr", "word/character error rate", cmd_eval_asr);
  asr->add_option("--ref", a.ref)->required();
  asr->add_option("--hyp", a.hyp)->required();
  asr->add_option("--unit", a.unit)->check(CLI::IsMember({"word", "char"}));

  auto* emg = app.add_subcommand("emg", "EMG sessions");
  emg->require_subcommand(1);
  auto* pre = leaf(emg, "preprocess", "filter, normalize and frame EMG", cmd_emg_preprocess);
  pre->add_option("--input", a.input, "session manifest(s)")->required();
  pre->add_option("--output", a.output, "FTRX feature file");
  pre->add_option("--output-dir", a.output_dir);
  auto* shift = leaf(emg, "shift", "apply the EMG lead-time shift", cmd_emg_shift);
  shift->add_option("--input", a.input)->required();
  shift->add_option("--output", a.output, "output session manifest");
  shift->add_option("--output-dir", a.output_dir);
  shift->add_option("--lead-ms", a.lead_ms);

  auto* testkit = app.add_subcommand("testkit", "oracle signal generation");
  testkit->require_subcommand(1);
  auto* synth = leaf(testkit, "synth", "synthesize a test signal", cmd_testkit_synth);
  synth->add_option("--kind", a.kind)->check(
      CLI::IsMember({"sine", "pulse", "pulse_train", "vibrato", "glide"}));
  synth->add_option("--f0", a.f0, "base frequency (sine, pulse, vibrato)");
  synth->add_option("--depth", a.depth, "vibrato depth in Hz");
  synth->add_option("--rate", a.rate, "vibrato rate in Hz");
  synth->add_option("--start-hz", a.start_hz);
  synth->add_option("--end-hz", a.end_hz);
  synth->add_option("--duration", a.duration, "seconds");
  synth->add_option("--amplitude", a.amplitude);
  synth->add_option("--sample-rate", a.sample_rate);
  synth->add_option("--output", a.output)->required();
  synth->add_option("--contour-out", a.contour_out, "exact generation contour");
  synth->add_option("--encoding", a.encoding)->check(CLI::IsMember({"float32", "pcm16"}));
  synth->add_option("--noise-std", a.noise_std, "additive Gaussian noise");
  synth->add_option("--seed", a.seed, "noise seed");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const ToolkitConfig cfg = common.config.empty() ? ToolkitConfig{} : ToolkitConfig::load(common.config);
    cfg.pitch.validate();
    const Report report = command(cfg, common.jobs);
    const auto text = render(report, cfg).dump(2) + "\n";
    if (common.out.empty()) {
      out << text;
    } else {
      std::ofstream f(common.out);
      if (!f) throw FormatError("cannot write " + common.out);
      f << text;
    }
    return kOk;
  } catch (const UsageError& e) {
    err << "svtk: usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const FormatError& e) {
    err << "svtk: format error: " << e.what() << '\n';
    return kFormat;
  } catch (const fs::filesystem_error& e) {
    err << "svtk: file error: " << e.what() << '\n';
    return kFormat;
  } catch (const DomainError& e) {
    err << "svtk: domain error: " << e.what() << '\n';
    return kDomain;
  } catch (const std::exception& e) {
    err << "svtk: internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace svtk::cli
