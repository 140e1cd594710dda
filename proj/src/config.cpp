// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include "svtk/config.hpp"

#include <charconv>
#include <functional>
#include <sstream>

#include "svtk/error.hpp"
#include "svtk/io.hpp"

namespace svtk {

std::string to_string(FlattenMode mode) {
  switch (mode) {
    case FlattenMode::speaker_mean: return "speaker_mean";
    case FlattenMode::speaker_median: return "speaker_median";
    case FlattenMode::fixed_hz: return "fixed_hz";
  }
  return "speaker_mean";
}

FlattenMode parse_flatten_mode(std::string_view text) {
  if (text == "speaker_mean" || text == "mean") return FlattenMode::speaker_mean;
  if (text == "speaker_median" || text == "median") return FlattenMode::speaker_median;
  if (text == "fixed_hz" || text == "fixed") return FlattenMode::fixed_hz;
  throw FormatError("unknown flatten mode \"" + std::string(text) + "\"");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view v, const std::string& key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw FormatError("config key " + key + ": \"" + std::string(v) + "\" is not a number");
  }
  return out;
}

long long to_int(std::string_view v, const std::string& key) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw FormatError("config key " + key + ": \"" + std::string(v) + "\" is not an integer");
  }
  return out;
}

using Setter = std::function<void(ToolkitConfig&, std::string_view, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    const auto real = [&t](const std::string& key, auto member) {
      t[key] = [member](ToolkitConfig& c, std::string_view v, const std::string& k) {
        std::invoke(member, c) = to_double(v, k);
      };
    };
    real("pitch.floor_hz", [](ToolkitConfig& c) -> double& { return c.pitch.floor_hz; });
    real("pitch.ceiling_hz", [](ToolkitConfig& c) -> double& { return c.pitch.ceiling_hz; });
    real("pitch.hop_ms", [](ToolkitConfig& c) -> double& { return c.pitch.hop_ms; });
    real("pitch.silence_threshold", [](ToolkitConfig& c) -> double& { return c.pitch.silence_threshold; });
    real("pitch.voicing_threshold", [](ToolkitConfig& c) -> double& { return c.pitch.voicing_threshold; });
    real("pitch.octave_cost", [](ToolkitConfig& c) -> double& { return c.pitch.octave_cost; });
    real("pitch.octave_jump_cost", [](ToolkitConfig& c) -> double& { return c.pitch.octave_jump_cost; });
    real("pitch.voiced_unvoiced_cost",
         [](ToolkitConfig& c) -> double& { return c.pitch.voiced_unvoiced_cost; });
    real("pitch.periods_per_window",
         [](ToolkitConfig& c) -> double& { return c.pitch.periods_per_window; });
    real("emg.notch_q", [](ToolkitConfig& c) -> double& { return c.emg.notch_q; });
    real("emg.highpass_hz", [](ToolkitConfig& c) -> double& { return c.emg.highpass_hz; });
    real("emg.target_frame_rate", [](ToolkitConfig& c) -> double& { return c.emg.target_frame_rate; });
    real("emg.despike_threshold", [](ToolkitConfig& c) -> double& { return c.emg.despike_threshold; });
    real("emg.lead_shift_ms", [](ToolkitConfig& c) -> double& { return c.emg.lead_shift_ms; });
    real("flatten.value_hz", [](ToolkitConfig& c) -> double& { return c.flatten.value_hz; });
    t["pitch.max_candidates"] = [](ToolkitConfig& c, std::string_view v, const std::string& k) {
      const auto n = to_int(v, k);
      if (n < 0) throw FormatError("config key " + k + " must be non-negative");
      c.pitch.max_candidates = static_cast<std::size_t>(n);
    };
    t["emg.mains_hz"] = [](ToolkitConfig& c, std::string_view v, const std::string& k) {
      c.emg.mains_hz = static_cast<int>(to_int(v, k));
    };
    t["emg.notch_harmonics"] = [](ToolkitConfig& c, std::string_view v, const std::string& k) {
      c.emg.notch_harmonics = static_cast<int>(to_int(v, k));
    };
    t["flatten.mode"] = [](ToolkitConfig& c, std::string_view v, const std::string&) {
      c.flatten.mode = parse_flatten_mode(v);
    };
    return t;
  }();
  return table;
}

}  // namespace

ToolkitConfig ToolkitConfig::parse(std::string_view text) {
  ToolkitConfig cfg;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw FormatError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(s.substr(0, eq)));
    const auto value = trim(s.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw FormatError("config line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
    }
    it->second(cfg, value, key);
  }
  return cfg;
}

ToolkitConfig ToolkitConfig::load(const std::filesystem::path& path) {
  return parse(io::read_text(path));
}

std::map<std::string, std::string> ToolkitConfig::snapshot() const {
  using io::format_double;
  return {
      {"pitch.floor_hz", format_double(pitch.floor_hz)},
      {"pitch.ceiling_hz", format_double(pitch.ceiling_hz)},
      {"pitch.hop_ms", format_double(pitch.hop_ms)},
      {"pitch.silence_threshold", format_double(pitch.silence_threshold)},
      {"pitch.voicing_threshold", format_double(pitch.voicing_threshold)},
      {"pitch.octave_cost", format_double(pitch.octave_cost)},
      {"pitch.octave_jump_cost", format_double(pitch.octave_jump_cost)},
      {"pitch.voiced_unvoiced_cost", format_double(pitch.voiced_unvoiced_cost)},
      {"pitch.max_candidates", std::to_string(pitch.max_candidates)},
      {"pitch.periods_per_window", format_double(pitch.periods_per_window)},
      {"emg.highpass_hz", format_double(emg.highpass_hz)},
      {"emg.mains_hz", std::to_string(emg.mains_hz)},
      {"emg.notch_harmonics", std::to_string(emg.notch_harmonics)},
      {"emg.notch_q", format_double(emg.notch_q)},
      {"emg.target_frame_rate", format_double(emg.target_frame_rate)},
      {"emg.despike_threshold", format_double(emg.despike_threshold)},
      {"emg.lead_shift_ms", format_double(emg.lead_shift_ms)},
      {"flatten.mode", to_string(flatten.mode)},
      {"flatten.value_hz", format_double(flatten.value_hz)},
  };
}

}  // namespace svtk
