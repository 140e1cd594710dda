// Copyright svtk contributors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "support.hpp"
#include "svtk/error.hpp"
#include "svtk/io.hpp"
#include "svtk/signal.hpp"

using namespace svtk;
namespace fs = std::filesystem;

namespace {

void put16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

void put32(std::string& b, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) b.push_back(static_cast<char>((v >> (8 * k)) & 0xff));
}

// Minimal PCM16 WAV, interleaved samples.
std::string pcm16_wav(const std::vector<std::int16_t>& s, std::uint16_t channels, std::uint32_t fs,
                      std::uint16_t format = 1) {
  std::string b = "RIFF";
  put32(b, 36 + 2 * static_cast<std::uint32_t>(s.size()));
  b += "WAVEfmt ";
  put32(b, 16);
  put16(b, format);
  put16(b, channels);
  put32(b, fs);
  put32(b, fs * channels * 2);
  put16(b, static_cast<std::uint16_t>(channels * 2));
  put16(b, 16);
  b += "data";
  put32(b, 2 * static_cast<std::uint32_t>(s.size()));
  for (auto v : s) put16(b, static_cast<std::uint16_t>(v));
  return b;
}

void write_file(const fs::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

AudioBuffer noise(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  x[0] = 1.0;
  x[1] = -1.0;
  return AudioBuffer(std::move(x), 16000);
}

}  // namespace

TEST(Wav, Float32RoundTripIsBitExact) {
  test::TempDir dir;
  const auto a = noise(5000, 1);
  io::write_wav(dir / "a.wav", a, io::WavEncoding::float32);
  const auto b = io::read_wav(dir / "a.wav");
  ASSERT_EQ(b.size(), a.size());
  EXPECT_EQ(b.sample_rate(), 16000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(b[i], static_cast<double>(static_cast<float>(a[i])));
  }
  // a second pass through the file is exact in every bit
  io::write_wav(dir / "b.wav", b, io::WavEncoding::float32);
  const auto c = io::read_wav(dir / "b.wav");
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(std::memcmp(&b.samples()[i], &c.samples()[i], 8), 0);
}

TEST(Wav, Pcm16WithinOneLsb) {
  test::TempDir dir;
  const auto a = noise(5000, 2);
  io::write_wav(dir / "a.wav", a, io::WavEncoding::pcm16);
  const auto b = io::read_wav(dir / "a.wav");
  ASSERT_EQ(b.size(), a.size());
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_LE(std::abs(b[i] - a[i]), 1.0 / 32768.0);
}

TEST(Wav, Pcm16Scaling) {
  test::TempDir dir;
  write_file(dir / "s.wav", pcm16_wav({-32768, 0, 16384, 32767}, 1, 8000));
  const auto a = io::read_wav(dir / "s.wav");
  EXPECT_EQ(a[0], -1.0);
  EXPECT_EQ(a[1], 0.0);
  EXPECT_EQ(a[2], 0.5);
  EXPECT_EQ(a[3], 32767.0 / 32768.0);
  EXPECT_EQ(a.sample_rate(), 8000);
}

TEST(Wav, StereoNeedsChannelSelect) {
  test::TempDir dir;
  write_file(dir / "st.wav", pcm16_wav({100, -100, 200, -200}, 2, 16000));
  EXPECT_THROW(io::read_wav(dir / "st.wav"), FormatError);
  const auto right = io::read_wav(dir / "st.wav", 1);
  ASSERT_EQ(right.size(), 2u);
  EXPECT_EQ(right[1], -200.0 / 32768.0);
  EXPECT_THROW(io::read_wav(dir / "st.wav", 2), FormatError);
}

TEST(Wav, BadFiles) {
  test::TempDir dir;
  write_file(dir / "codec.wav", pcm16_wav({1, 2}, 1, 16000, 2));
  EXPECT_THROW(io::read_wav(dir / "codec.wav"), FormatError);
  write_file(dir / "junk.wav", "RIFX0000WAVE");
  EXPECT_THROW(io::read_wav(dir / "junk.wav"), FormatError);
  auto truncated = pcm16_wav({1, 2, 3, 4}, 1, 16000);
  truncated.resize(truncated.size() - 3);
  write_file(dir / "trunc.wav", truncated);
  EXPECT_THROW(io::read_wav(dir / "trunc.wav"), FormatError);
  EXPECT_THROW(io::read_wav(dir / "missing.wav"), FormatError);
}

TEST(Contour, CsvRoundTrip) {
  test::TempDir dir;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> hz(50.0, 900.0);
  std::vector<F0Frame> fr(200);
  for (std::size_t i = 0; i < fr.size(); ++i) {
    if (i % 7 != 3) fr[i] = {hz(rng), true};
  }
  const F0Contour c(fr, 0.01, 16000, 0.25);
  io::write_contour_csv(dir / "c.csv", c);
  const auto r = io::read_contour_csv(dir / "c.csv");
  ASSERT_EQ(r.size(), c.size());
  EXPECT_NEAR(r.hop_s(), 0.01, 1e-8);
  EXPECT_NEAR(r.start_s(), 0.25, 1e-12);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(r[i].voiced, c[i].voiced);
    EXPECT_NEAR(r[i].f0_hz, c[i].f0_hz, 1e-6 * c[i].f0_hz);
  }
}

TEST(Contour, CsvErrors) {
  test::TempDir dir;
  write_file(dir / "uv.csv", "time_s,f0_hz,voiced\n0,0,0\n0.01,120,0\n");
  EXPECT_THROW(io::read_contour_csv(dir / "uv.csv"), FormatError);
  write_file(dir / "gap.csv", "time_s,f0_hz,voiced\n0,100,1\n0.01,100,1\n0.03,100,1\n");
  EXPECT_THROW(io::read_contour_csv(dir / "gap.csv"), FormatError);
  write_file(dir / "hdr.csv", "t,f,v\n0,100,1\n");
  EXPECT_THROW(io::read_contour_csv(dir / "hdr.csv"), FormatError);
  write_file(dir / "cols.csv", "time_s,f0_hz,voiced\n0,100\n");
  EXPECT_THROW(io::read_contour_csv(dir / "cols.csv"), FormatError);
}

TEST(Contour, CsvToleratesSmallJitter) {
  test::TempDir dir;
  write_file(dir / "j.csv", "time_s,f0_hz,voiced\n0,100,1\n0.01001,110,1\n0.02,0,0\n");
  const auto c = io::read_contour_csv(dir / "j.csv");
  EXPECT_EQ(c.size(), 3u);
  EXPECT_NEAR(c.hop_s(), 0.01, 1e-12);
}

TEST(Contour, JsonGrid) {
  test::TempDir dir;
  write_file(dir / "c.json",
             R"({"hop_s": 0.010, "sample_rate_hz": 16000, "f0_hz": [100, 0, 120], "voiced": [1, 0, 1]})");
  const auto c = io::read_contour(dir / "c.json");
  ASSERT_EQ(c.size(), 3u);
  EXPECT_DOUBLE_EQ(c.time_s(0), 0.0);
  EXPECT_DOUBLE_EQ(c.time_s(1), 0.01);
  EXPECT_DOUBLE_EQ(c.time_s(2), 0.02);
  EXPECT_EQ(c.sample_rate(), 16000);

  io::write_contour(dir / "d.json", c);
  EXPECT_EQ(io::read_contour(dir / "d.json"), c);

  write_file(dir / "bad.json", R"({"hop_s": 0.01, "f0_hz": [100], "voiced": [0]})");
  EXPECT_THROW(io::read_contour(dir / "bad.json"), FormatError);
  write_file(dir / "neg.json", R"({"hop_s": 0, "f0_hz": [100], "voiced": [1]})");
  EXPECT_THROW(io::read_contour(dir / "neg.json"), FormatError);
}

TEST(Features, RoundTripIsBitExact) {
  test::TempDir dir;
  const Matrix m(2, 3, {1.5, -2.25, static_cast<float>(3.0e-7), 4.0, 0.1f, -0.0});
  io::write_features(dir / "m.ftrx", m);
  EXPECT_EQ(fs::file_size(dir / "m.ftrx"), 16u + 24u);
  EXPECT_EQ(io::read_features(dir / "m.ftrx"), m);
}

TEST(Features, HeaderChecks) {
  test::TempDir dir;
  std::string b = "FTRX";
  put32(b, 1);
  put32(b, 4);
  put32(b, 4);
  b += std::string(60, '\0');
  write_file(dir / "short.ftrx", b);
  EXPECT_THROW(io::read_features(dir / "short.ftrx"), FormatError);

  std::string v2 = "FTRX";
  put32(v2, 2);
  put32(v2, 0);
  put32(v2, 1);
  write_file(dir / "v2.ftrx", v2);
  EXPECT_THROW(io::read_features(dir / "v2.ftrx"), FormatError);

  write_file(dir / "magic.ftrx", std::string("XTRF") + std::string(12, '\0'));
  EXPECT_THROW(io::read_features(dir / "magic.ftrx"), FormatError);
}

TEST(Embedding, CsvAndFtrx) {
  test::TempDir dir;
  write_file(dir / "e.csv", "1.0,0.0\n");
  const auto e = io::read_embedding(dir / "e.csv");
  EXPECT_EQ(e.vector, (std::vector<double>{1.0, 0.0}));

  io::write_features(dir / "e.ftrx", Matrix(1, 3, {0.5, 0.25, -1.0}));
  EXPECT_EQ(io::read_embedding(dir / "e.ftrx").vector, (std::vector<double>{0.5, 0.25, -1.0}));

  io::write_features(dir / "two.ftrx", Matrix(2, 3));
  EXPECT_THROW(io::read_embedding(dir / "two.ftrx"), FormatError);
  write_file(dir / "rows.csv", "1,2\n3,4\n");
  EXPECT_THROW(io::read_embedding(dir / "rows.csv"), FormatError);
}

TEST(Session, RoundTripIsBitExact) {
  test::TempDir dir;
  EmgRecording rec;
  rec.channels = Matrix(3, 50);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (auto& v : rec.channels.data()) v = static_cast<float>(g(rng));
  rec.sample_rate = 1000;
  rec.session_id = "sess-1";
  rec.speaker_id = "spk-9";
  rec.mode = EmgMode::silent;
  io::save_session(dir / "s.json", rec);
  EXPECT_TRUE(fs::exists(dir / "s.f32"));
  EXPECT_EQ(fs::file_size(dir / "s.f32"), 3u * 50u * 4u);
  const auto back = io::load_session(dir / "s.json");
  EXPECT_EQ(back.channels, rec.channels);
  EXPECT_EQ(back.session_id, "sess-1");
  EXPECT_EQ(back.speaker_id, "spk-9");
  EXPECT_EQ(back.mode, EmgMode::silent);
  EXPECT_EQ(back.sample_rate, 1000);
}

TEST(Session, Errors) {
  test::TempDir dir;
  EmgRecording rec;
  rec.channels = Matrix(8, 100, 0.5);
  io::save_session(dir / "s.json", rec);
  EXPECT_EQ(io::load_session(dir / "s.json").n_channels(), 8u);

  fs::resize_file(dir / "s.f32", 8 * 100 * 4 - 4);
  try {
    io::load_session(dir / "s.json");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("3200"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("3196"), std::string::npos);
  }

  write_file(dir / "nomode.json",
             R"({"session_id": "a", "speaker_id": "b", "sample_rate_hz": 1000, "channels": 1, "samples": 1, "payload": "x.f32"})");
  EXPECT_THROW(io::load_session(dir / "nomode.json"), FormatError);

  std::string nan_bytes;
  const float nan = std::nanf("");
  nan_bytes.append(reinterpret_cast<const char*>(&nan), 4);
  write_file(dir / "n.f32", nan_bytes);
  write_file(dir / "n.json",
             R"({"session_id": "a", "speaker_id": "b", "mode": "voiced", "sample_rate_hz": 1000, "channels": 1, "samples": 1, "payload": "n.f32"})");
  EXPECT_THROW(io::load_session(dir / "n.json"), DataError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(io::format_double(0.01), "0.01");
  EXPECT_EQ(io::format_double(220.0), "220");
  for (double v : {1.0 / 3.0, 123.456789012345, 1e-9}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}
