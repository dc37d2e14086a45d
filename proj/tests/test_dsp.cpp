// Copyright 2026 Voxpatch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "testutil.hpp"
#include "voxpatch/dsp/audio.hpp"
#include "voxpatch/dsp/fft.hpp"
#include "voxpatch/dsp/griffin_lim.hpp"
#include "voxpatch/dsp/mel.hpp"
#include "voxpatch/dsp/stft.hpp"
#include "voxpatch/errors.hpp"

namespace dsp = voxpatch::dsp;

namespace {

// Quadratic-time DFT, the independent oracle for the FFT.
std::vector<dsp::cplx> dft_naive(const std::vector<dsp::cplx>& x,
                                 bool inverse) {
  const std::size_t n = x.size();
  std::vector<dsp::cplx> out(n);
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    dsp::cplx acc(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = sign * 2.0 * std::numbers::pi *
                         static_cast<double>(k) * static_cast<double>(j) /
                         static_cast<double>(n);
      acc += x[j] * dsp::cplx(std::cos(ang), std::sin(ang));
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  return out;
}

std::vector<float> tone(double hz, double seconds, double amp = 0.5,
                        int sr = 24000) {
  std::vector<float> x(static_cast<std::size_t>(seconds * sr));
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = static_cast<float>(
        amp * std::sin(2.0 * std::numbers::pi * hz * i / sr));
  }
  return x;
}

}  // namespace

TEST_CASE("fft matches the naive DFT") {
  voxpatch::Rng rng(31);
  for (std::size_t n : {2u, 8u, 64u, 256u}) {
    std::vector<dsp::cplx> x(n);
    for (auto& v : x) v = dsp::cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    auto want = dft_naive(x, false);
    auto got = x;
    dsp::fft_inplace(got, false);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - want[k]) < 1e-9 * static_cast<double>(n));
    }

    // inverse undoes forward
    dsp::fft_inplace(got, true);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(got[k] - x[k]) < 1e-12 * static_cast<double>(n));
    }
  }
  std::vector<dsp::cplx> bad(3);
  CHECK_THROWS_AS(dsp::fft_inplace(bad, false), voxpatch::ValueError);
}

TEST_CASE("rfft and irfft round-trip real signals") {
  voxpatch::Rng rng(32);
  std::vector<double> x(512);
  for (auto& v : x) v = rng.uniform(-1, 1);
  auto spec = dsp::rfft(x);
  CHECK(spec.size() == 257);
  auto back = dsp::irfft(spec, 512);
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(std::abs(back[i] - x[i]) < 1e-12);
  }
}

TEST_CASE("stft frame-count law") {
  dsp::StftConfig cfg;
  CHECK(dsp::stft_frames(24000, cfg) == 81);  // 1 s clip

  voxpatch::Rng rng(33);
  for (int i = 0; i < 100; ++i) {
    const auto len = 1 + rng.below(48000);
    const auto frames = dsp::stft_frames(len, cfg);
    CHECK(frames == len / 300 + 1);
    // spot-check against an actual transform occasionally (it is costly)
    if (i % 25 == 0) {
      std::vector<float> x(len, 0.1f);
      auto spec = dsp::stft(x, cfg);
      CHECK(spec.size() == frames * cfg.bins());
    }
  }
  CHECK_THROWS_AS(dsp::stft({}, cfg), voxpatch::ValueError);
}

TEST_CASE("stft of silence is zero and of a tone peaks at the right bin") {
  dsp::StftConfig cfg;
  std::vector<float> silence(9000, 0.0f);
  auto mag0 = dsp::stft_magnitude(silence, cfg);
  for (double v : mag0) CHECK(v == 0.0);

  const double hz = 440.0;
  auto x = tone(hz, 0.5);
  auto mag = dsp::stft_magnitude(x, cfg);
  const auto frames = dsp::stft_frames(x.size(), cfg);
  const auto expected_bin = static_cast<std::size_t>(
      std::lround(hz * cfg.n_fft / cfg.sample_rate));
  // The first and last two frames see mostly reflection padding, which
  // detunes them; interior frames must all peak at the tone's bin.
  REQUIRE(frames > 4);
  for (std::size_t t = 2; t + 2 < frames; ++t) {
    std::size_t argmax = 0;
    for (std::size_t k = 1; k < cfg.bins(); ++k) {
      if (mag[t * cfg.bins() + k] > mag[t * cfg.bins() + argmax]) argmax = k;
    }
    CHECK(argmax == expected_bin);
  }
}

TEST_CASE("istft reconstructs the analyzed signal") {
  dsp::StftConfig cfg;
  voxpatch::Rng rng(34);
  std::vector<float> x(7500);
  for (auto& v : x) v = static_cast<float>(rng.uniform(-0.8, 0.8));
  auto spec = dsp::stft(x, cfg);
  const auto frames = dsp::stft_frames(x.size(), cfg);
  auto back = dsp::istft(spec, frames, cfg);
  CHECK(back.size() == (frames - 1) * static_cast<std::size_t>(cfg.hop));
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(std::abs(back[i] - x[i]) < 1e-5);
  }
}

TEST_CASE("mel filterbank structure") {
  dsp::StftConfig cfg;
  auto fb = dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  CHECK(fb.n_mels == 80);
  CHECK(fb.n_bins == 1025);

  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    double row_sum = 0.0;
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      CHECK(fb.at(m, k) >= 0.0);
      row_sum += fb.at(m, k);
    }
    CHECK(row_sum > 0.0);
  }
  for (std::size_t m = 1; m < fb.n_mels; ++m) {
    CHECK(fb.centers_hz[m] > fb.centers_hz[m - 1]);
  }

  // flat magnitude spectrum lights every band
  std::vector<double> flat(fb.n_bins, 1.0);
  for (std::size_t m = 0; m < fb.n_mels; ++m) {
    double e = 0.0;
    for (std::size_t k = 0; k < fb.n_bins; ++k) e += fb.at(m, k) * flat[k];
    CHECK(e > 0.0);
  }

  CHECK_THROWS_AS(dsp::build_mel_filterbank(2048, 24000, 80, 8000.0, 4000.0),
                  voxpatch::ValueError);
  CHECK_THROWS_AS(dsp::build_mel_filterbank(2048, 24000, 80, 0.0, 13000.0),
                  voxpatch::ValueError);
}

TEST_CASE("wav_to_mel silence, shape, and log-linearity") {
  dsp::StftConfig cfg;
  auto fb = dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);

  std::vector<float> silence(24000, 0.0f);
  auto mel0 = dsp::wav_to_mel(silence, fb, cfg);
  CHECK(mel0.frames == 81);
  CHECK(mel0.bins == 80);
  const float floor_log = std::log(1e-5f);
  for (float v : mel0.data) CHECK(v == doctest::Approx(floor_log));

  auto quiet = tone(440.0, 0.4, 0.25);
  auto loud = tone(440.0, 0.4, 0.50);
  auto mq = dsp::wav_to_mel(quiet, fb, cfg);
  auto ml = dsp::wav_to_mel(loud, fb, cfg);
  std::size_t compared = 0;
  for (std::size_t i = 0; i < mq.data.size(); ++i) {
    if (mq.data[i] > floor_log + 1.0f && ml.data[i] > floor_log + 1.0f) {
      CHECK(ml.data[i] - mq.data[i] == doctest::Approx(std::log(2.0)).epsilon(0.02));
      ++compared;
    }
  }
  CHECK(compared > 50);

  // purity: identical input gives bit-identical output
  auto again = dsp::wav_to_mel(loud, fb, cfg);
  CHECK(again.data == ml.data);
}

TEST_CASE("mel_to_linear is an exact projection on smooth positive spectra") {
  // fb * pinv(fb) is the identity (fb has full row rank), so whenever the
  // least-squares spectrum stays nonnegative the nonnegativity clamp is a
  // no-op and projecting the recovered spectrum back through fb reproduces
  // the mel energies exactly. Smooth strictly-positive spectra keep the
  // least-squares solution positive even with deep wobble.
  dsp::StftConfig cfg;
  auto fb = dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  const std::size_t frames = 6;

  dsp::Mel mel;
  mel.frames = frames;
  mel.bins = fb.n_mels;
  mel.data.resize(frames * fb.n_mels);
  std::vector<double> spec_row(fb.n_bins);
  for (std::size_t t = 0; t < frames; ++t) {
    const double wob = 0.1 + 0.7 * static_cast<double>(t) / (frames - 1);
    for (std::size_t k = 0; k < fb.n_bins; ++k) {
      spec_row[k] =
          1.0 + wob * std::sin(0.01 * static_cast<double>(k) +
                               static_cast<double>(t));
    }
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < fb.n_bins; ++k) {
        e += fb.at(m, k) * spec_row[k];
      }
      mel.data[t * fb.n_mels + m] = static_cast<float>(std::log(e));
    }
  }

  auto linear = dsp::mel_to_linear(mel, fb);
  for (double v : linear) CHECK(v >= 0.0);

  double worst = 0.0;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t m = 0; m < fb.n_mels; ++m) {
      const double want = std::exp(static_cast<double>(mel.at(t, m)));
      double got = 0.0;
      for (std::size_t k = 0; k < fb.n_bins; ++k) {
        got += fb.at(m, k) * linear[t * fb.n_bins + k];
      }
      worst = std::max(worst, std::abs(got - want) / want);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("mel_to_linear recovers tone energy within 10 percent") {
  // A pure tone concentrates energy in a couple of mel bands; the
  // least-squares inversion has small negative sidelobes next to them that
  // the clamp removes, so only the bands actually carrying energy can be
  // held to a tight bound. Check the peak band of every frame plus all
  // bands above 20 percent of the frame's peak energy.
  dsp::StftConfig cfg;
  auto fb = dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  for (double hz : {523.25, 3000.0}) {
    auto x = tone(hz, 0.3, 0.5);
    auto mel = dsp::wav_to_mel(x, fb, cfg);
    auto linear = dsp::mel_to_linear(mel, fb);
    for (double v : linear) CHECK(v >= 0.0);

    std::size_t checked = 0;
    for (std::size_t t = 0; t < mel.frames; ++t) {
      double peak = 0.0;
      for (std::size_t m = 0; m < mel.bins; ++m) {
        peak = std::max(peak, std::exp(static_cast<double>(mel.at(t, m))));
      }
      for (std::size_t m = 0; m < mel.bins; ++m) {
        const double want = std::exp(static_cast<double>(mel.at(t, m)));
        if (want < 0.2 * peak) continue;
        double got = 0.0;
        for (std::size_t k = 0; k < fb.n_bins; ++k) {
          got += fb.at(m, k) * linear[t * fb.n_bins + k];
        }
        CHECK(std::abs(got - want) / want < 0.10);
        ++checked;
      }
    }
    CHECK(checked >= mel.frames);
  }
}

TEST_CASE("mel_to_linear of silence is near zero") {
  dsp::StftConfig cfg;
  auto fb = dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  std::vector<float> silence(12000, 0.0f);
  auto mel = dsp::wav_to_mel(silence, fb, cfg);
  auto linear = dsp::mel_to_linear(mel, fb);
  for (double v : linear) {
    CHECK(v >= 0.0);
    CHECK(v < 1e-3);
  }
}

TEST_CASE("griffin_lim zero magnitude and input validation") {
  dsp::StftConfig cfg;
  std::vector<double> zeros(5 * cfg.bins(), 0.0);
  auto wav = dsp::griffin_lim(zeros, 5, cfg, 60, 7);
  CHECK(wav.size() == 4 * static_cast<std::size_t>(cfg.hop));
  for (float v : wav) CHECK(v == 0.0f);

  std::vector<double> neg(2 * cfg.bins(), 0.0);
  neg[3] = -1.0;
  CHECK_THROWS_AS(dsp::griffin_lim(neg, 2, cfg, 60, 7), voxpatch::ValueError);
}

TEST_CASE("griffin_lim converges on a tone and is monotone") {
  dsp::StftConfig cfg;
  auto x = tone(440.0, 0.4, 0.5);
  auto mag = dsp::stft_magnitude(x, cfg);
  const auto frames = dsp::stft_frames(x.size(), cfg);

  std::vector<double> conv;
  auto wav = dsp::griffin_lim(mag, frames, cfg, 60, 1234, &conv);
  CHECK(wav.size() == (frames - 1) * static_cast<std::size_t>(cfg.hop));
  REQUIRE(conv.size() == 60);
  CHECK(conv.back() < 0.1);
  for (std::size_t i = 1; i < conv.size(); ++i) {
    CHECK(conv[i] <= conv[i - 1] + 1e-6);
  }

  // determinism: same seed, same bits
  auto wav2 = dsp::griffin_lim(mag, frames, cfg, 60, 1234);
  CHECK(wav == wav2);
}

TEST_CASE("griffin_lim is monotone on random magnitudes") {
  dsp::StftConfig cfg;
  voxpatch::Rng rng(35);
  std::vector<double> mag(6 * cfg.bins());
  for (auto& v : mag) v = rng.uniform(0.0, 2.0);
  std::vector<double> conv;
  dsp::griffin_lim(mag, 6, cfg, 30, 99, &conv);
  for (std::size_t i = 1; i < conv.size(); ++i) {
    CHECK(conv[i] <= conv[i - 1] + 1e-6);
  }
}

TEST_CASE("wav io round trip") {
  testutil::TempDir dir("wav");
  dsp::AudioClip clip;
  clip.sample_rate = 24000;
  voxpatch::Rng rng(36);
  clip.samples.resize(4321);
  for (auto& v : clip.samples) v = static_cast<float>(rng.uniform(-0.9, 0.9));

  const auto path = dir.path() / "x.wav";
  dsp::save_wav(path, clip);
  auto back = dsp::load_wav(path);
  CHECK(back.sample_rate == 24000);
  REQUIRE(back.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(std::abs(back.samples[i] - clip.samples[i]) < 1.0f / 32000.0f);
  }

  CHECK_THROWS_AS(dsp::load_wav(dir.path() / "missing.wav"),
                  voxpatch::IoError);
  std::ofstream(dir.path() / "junk.wav") << "this is not audio at all";
  CHECK_THROWS_AS(dsp::load_wav(dir.path() / "junk.wav"),
                  voxpatch::ParseError);
}

TEST_CASE("wav loader rejects stereo") {
  testutil::TempDir dir("stereo");
  // Minimal hand-built stereo header with an empty data chunk.
  std::string bytes;
  bytes += "RIFF";
  const auto u32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes.push_back(char((v >> (8 * i)) & 0xff));
  };
  const auto u16 = [&](std::uint16_t v) {
    bytes.push_back(char(v & 0xff));
    bytes.push_back(char((v >> 8) & 0xff));
  };
  u32(36);
  bytes += "WAVEfmt ";
  u32(16);
  u16(1);
  u16(2);  // stereo
  u32(24000);
  u32(24000 * 4);
  u16(4);
  u16(16);
  bytes += "data";
  u32(0);
  std::ofstream(dir.path() / "st.wav", std::ios::binary) << bytes;
  CHECK_THROWS_AS(dsp::load_wav(dir.path() / "st.wav"), voxpatch::ParseError);
}

TEST_CASE("linear resampler") {
  dsp::AudioClip clip;
  clip.sample_rate = 48000;
  clip.samples.assign(4800, 0.25f);
  auto out = dsp::resample_linear(clip, 24000);
  CHECK(out.sample_rate == 24000);
  CHECK(out.samples.size() == 2400);
  for (float v : out.samples) CHECK(v == doctest::Approx(0.25f));

  auto same = dsp::resample_linear(out, 24000);
  CHECK(same.samples == out.samples);
}
