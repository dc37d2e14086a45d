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

// Release gate: nine numbered checks covering gradients, the alignment
// law, DSP, the loss contract, overfit capacity, duration recovery,
// identity editing, determinism, and checkpoint round-trips. Each check
// prints one PASS or FAIL line with its measured numbers; the process
// exits nonzero if any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "synth_corpus.hpp"
#include "testutil.hpp"
#include "voxpatch/checkpoint.hpp"
#include "voxpatch/corpus/dataset.hpp"
#include "voxpatch/corpus/example.hpp"
#include "voxpatch/dsp/audio.hpp"
#include "voxpatch/dsp/griffin_lim.hpp"
#include "voxpatch/dsp/mel.hpp"
#include "voxpatch/dsp/stft.hpp"
#include "voxpatch/model/network.hpp"
#include "voxpatch/rng.hpp"
#include "voxpatch/tensor/ops.hpp"
#include "voxpatch/train/loss.hpp"
#include "voxpatch/train/mel_stats.hpp"
#include "voxpatch/train/pipeline.hpp"
#include "voxpatch/train/trainer.hpp"

namespace {

namespace fs = std::filesystem;
using voxpatch::NoGradGuard;
using voxpatch::Rng;
using voxpatch::Tensor;
using DT = Tensor<double>;

struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), pattern, v);
  return buf;
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(in.good(), "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ----- gradient checking -------------------------------------------------

DT random_dt(Rng& rng, std::vector<std::size_t> shape, double lo = -1.0,
             double hi = 1.0, bool grad = true) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  auto t = DT::from_data(std::move(shape), std::move(v));
  t.set_requires_grad(grad);
  return t;
}

// Values bounded away from zero so finite differences never straddle the
// relu/abs kink.
DT random_signed_dt(Rng& rng, std::vector<std::size_t> shape,
                    double min_mag = 0.1) {
  auto t = random_dt(rng, std::move(shape), min_mag, 1.0);
  auto& v = t.mutable_value();
  for (auto& x : v) {
    if (rng.bernoulli(0.5)) x = -x;
  }
  return t;
}

double scalar_of(const DT& t) {
  require(t.numel() == 1, "loss is not scalar");
  return t.value()[0];
}

// Central finite differences for every element of every leaf against the
// recorded gradient. make_loss rebuilds the graph from the live leaf
// values on each call.
double fd_max_rel_err(std::vector<DT> leaves,
                      const std::function<DT()>& make_loss) {
  auto loss = make_loss();
  voxpatch::backward(loss);
  std::vector<std::vector<double>> grads;
  grads.reserve(leaves.size());
  for (auto& l : leaves) {
    require(l.has_grad(), "leaf missing gradient");
    grads.push_back(l.grad());
  }

  NoGradGuard guard;
  double worst = 0.0;
  for (std::size_t li = 0; li < leaves.size(); ++li) {
    auto& vals = leaves[li].mutable_value();
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double orig = vals[i];
      const double h = 1e-6 * std::max(1.0, std::abs(orig));
      vals[i] = orig + h;
      const double fp = scalar_of(make_loss());
      vals[i] = orig - h;
      const double fm = scalar_of(make_loss());
      vals[i] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double ad = grads[li][i];
      const double rel =
          std::abs(ad - fd) / std::max({std::abs(ad), std::abs(fd), 1e-8});
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

// Weighted sum turns any op output into a scalar with per-element
// sensitivity, so a wrong gradient anywhere shows up.
DT weighted_sum(const DT& x, const DT& weights) {
  return voxpatch::sum_all(voxpatch::mul(x, weights));
}

voxpatch::model::ModelConfig tiny_config(int hidden, int ffn, int n_mels) {
  voxpatch::model::ModelConfig c;
  c.phoneme_embed_dim = 32;
  c.hidden_dim = hidden;
  c.heads = 2;
  c.text_encoder_layers = 1;
  c.spec_encoder_layers = 1;
  c.decoder_layers = 1;
  c.cnn_layers = 1;
  c.cnn_kernel = 3;
  c.dropout = 0.0;
  c.ffn_inner_dim = ffn;
  c.n_mels = n_mels;
  return c;
}

// A masked-word training example over a random synthetic utterance,
// regenerated until one qualifies.
voxpatch::corpus::TrainingExample synth_example(
    Rng& rng, voxpatch::corpus::FramedPhones* framed_out = nullptr) {
  voxpatch::testing::SynthSpec spec;
  for (;;) {
    auto utt = voxpatch::testing::make_synth_utterance(rng, spec);
    auto framed = voxpatch::corpus::seconds_to_frames(utt.rec);
    auto ex = voxpatch::corpus::make_training_example(utt.rec, framed, rng);
    if (!ex) continue;
    if (framed_out) *framed_out = framed;
    return *ex;
  }
}

// ----- criteria ----------------------------------------------------------

bool crit_gradients(std::string& detail) {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(41);
  double worst_op = 0.0;
  auto track = [&](const char* name, double err) {
    worst_op = std::max(worst_op, err);
    require(err < 1e-4, std::string(name) + " rel err " + fmt("%.2e", err));
  };

  using namespace voxpatch;
  {
    auto x = random_dt(rng, {3, 4});
    auto y = random_dt(rng, {3, 4});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("add", fd_max_rel_err({x, y}, [&] {
      return weighted_sum(add(x, y), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    auto b = random_dt(rng, {4});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("add.row", fd_max_rel_err({x, b}, [&] {
      return weighted_sum(add(x, b), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    auto s = random_dt(rng, {1});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("add.scalar", fd_max_rel_err({x, s}, [&] {
      return weighted_sum(add(x, s), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    auto y = random_dt(rng, {3, 4});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("sub", fd_max_rel_err({x, y}, [&] {
      return weighted_sum(sub(x, y), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    auto y = random_dt(rng, {3, 4});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("mul", fd_max_rel_err({x, y}, [&] {
      return weighted_sum(mul(x, y), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    auto b = random_dt(rng, {4});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("mul.row", fd_max_rel_err({x, b}, [&] {
      return weighted_sum(mul(x, b), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    auto s = random_dt(rng, {1});
    auto c = random_dt(rng, {3, 4}, -1, 1, false);
    track("mul.scalar", fd_max_rel_err({x, s}, [&] {
      return weighted_sum(mul(x, s), c);
    }));
  }
  {
    auto a = random_dt(rng, {3, 4});
    auto b = random_dt(rng, {4, 5});
    auto c = random_dt(rng, {3, 5}, -1, 1, false);
    track("matmul", fd_max_rel_err({a, b}, [&] {
      return weighted_sum(matmul(a, b), c);
    }));
  }
  {
    auto a = random_dt(rng, {3, 4});
    auto b = random_dt(rng, {5, 4});
    auto c = random_dt(rng, {3, 5}, -1, 1, false);
    track("matmul_nt", fd_max_rel_err({a, b}, [&] {
      return weighted_sum(matmul_nt(a, b), c);
    }));
  }
  {
    auto x = random_signed_dt(rng, {4, 5});
    auto c = random_dt(rng, {4, 5}, -1, 1, false);
    track("relu", fd_max_rel_err({x}, [&] {
      return weighted_sum(relu(x), c);
    }));
  }
  {
    auto x = random_signed_dt(rng, {4, 5});
    auto c = random_dt(rng, {4, 5}, -1, 1, false);
    track("abs", fd_max_rel_err({x}, [&] {
      return weighted_sum(abs(x), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 5});
    auto c = random_dt(rng, {3, 5}, -1, 1, false);
    track("softmax", fd_max_rel_err({x}, [&] {
      return weighted_sum(softmax(x), c);
    }));
  }
  {
    auto x = random_dt(rng, {4, 6});
    auto g = random_dt(rng, {6}, 0.5, 1.5);
    auto b = random_dt(rng, {6});
    auto c = random_dt(rng, {4, 6}, -1, 1, false);
    track("layer_norm", fd_max_rel_err({x, g, b}, [&] {
      return weighted_sum(layer_norm(x, g, b), c);
    }));
  }
  {
    auto x = random_dt(rng, {6, 4});
    auto g = random_dt(rng, {4}, 0.5, 1.5);
    auto b = random_dt(rng, {4});
    auto c = random_dt(rng, {6, 4}, -1, 1, false);
    track("time_norm", fd_max_rel_err({x, g, b}, [&] {
      return weighted_sum(time_norm(x, g, b), c);
    }));
  }
  {
    auto x = random_dt(rng, {7, 3});
    auto w = random_dt(rng, {3, 3, 4});
    auto b = random_dt(rng, {4});
    auto c = random_dt(rng, {7, 4}, -1, 1, false);
    track("conv1d_same", fd_max_rel_err({x, w, b}, [&] {
      return weighted_sum(conv1d_same(x, w, b), c);
    }));
  }
  {
    auto x = random_dt(rng, {5, 4});
    auto c = random_dt(rng, {5, 4}, -1, 1, false);
    track("dropout", fd_max_rel_err({x}, [&] {
      Rng drop_rng(99);  // same mask on every evaluation
      return weighted_sum(dropout(x, 0.4, true, drop_rng), c);
    }));
  }
  {
    auto table = random_dt(rng, {6, 4});
    const std::vector<int> ids{1, 3, 0, 3, 5};
    auto c = random_dt(rng, {5, 4}, -1, 1, false);
    track("embedding", fd_max_rel_err({table}, [&] {
      return weighted_sum(embedding(ids, table), c);
    }));
  }
  {
    auto a = random_dt(rng, {3, 2});
    auto b = random_dt(rng, {3, 3});
    auto d = random_dt(rng, {3, 1});
    auto c = random_dt(rng, {3, 6}, -1, 1, false);
    track("concat_cols", fd_max_rel_err({a, b, d}, [&] {
      return weighted_sum(concat_cols<double>({a, b, d}), c);
    }));
  }
  {
    auto x = random_dt(rng, {4, 3});
    const std::vector<int> counts{2, 0, 1, 3};
    auto c = random_dt(rng, {6, 3}, -1, 1, false);
    track("repeat_rows", fd_max_rel_err({x}, [&] {
      return weighted_sum(repeat_rows(x, counts), c);
    }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    track("sum_all", fd_max_rel_err({x}, [&] { return sum_all(x); }));
  }
  {
    auto x = random_dt(rng, {3, 4});
    track("mean_all", fd_max_rel_err({x}, [&] { return mean_all(x); }));
  }

  // Full model end to end in 64-bit: the training loss against every
  // parameter, finite differences on sampled entries of each tensor.
  Rng data_rng(7);
  voxpatch::corpus::FramedPhones framed;
  auto ex = synth_example(data_rng, &framed);
  const auto cfg = tiny_config(32, 48, 8);
  voxpatch::model::Network<double> net(cfg, 11);

  const int total_frames = framed.durations.total();
  auto mel_in = random_dt(data_rng,
                          {static_cast<std::size_t>(total_frames),
                           static_cast<std::size_t>(cfg.n_mels)},
                          -1, 1, false);
  auto mel_target = random_dt(data_rng,
                              {static_cast<std::size_t>(total_frames),
                               static_cast<std::size_t>(cfg.n_mels)},
                              -1, 1, false);
  auto dur_target =
      voxpatch::train::log_duration_targets<double>(ex.reference);

  Rng unused(0);
  auto forward_loss = [&] {
    auto h = net.encode_text(ex.seq, false, unused);
    auto logits = net.duration_logits(h, ex.masked, ex.seq.inserted);
    auto h_ext = net.length_regulate(h, ex.reference);
    auto pred = net.fuse_and_decode(h_ext, net.encode_spec(mel_in));
    return voxpatch::train::mel_duration_loss(pred, mel_target, logits,
                                              dur_target)
        .total;
  };

  auto loss = forward_loss();
  voxpatch::backward(loss);

  Rng pick(17);
  double worst_e2e = 0.0;
  NoGradGuard guard;
  for (const auto& [name, t] : net.params().items()) {
    require(t.has_grad(), name + " missing gradient");
    const auto grad = t.grad();
    auto handle = t;
    auto& vals = handle.mutable_value();
    const std::size_t n = vals.size();
    const std::size_t samples = n <= 3 ? n : 3;
    for (std::size_t s = 0; s < samples; ++s) {
      const std::size_t i =
          n <= 3 ? s : static_cast<std::size_t>(pick.below(n));
      const double orig = vals[i];
      const double ad = grad[i];
      // The denominator floor sits above the finite-difference noise,
      // eps * |loss| / h ~ 1e-10, and far below any material gradient.
      // Some parameters have exactly zero gradient (a dead relu
      // channel's bias; an attention key bias, which softmax shift
      // invariance cancels), and their differences are pure roundoff.
      auto rel_at = [&](double h) {
        vals[i] = orig + h;
        const double fp = scalar_of(forward_loss());
        vals[i] = orig - h;
        const double fm = scalar_of(forward_loss());
        vals[i] = orig;
        const double fd = (fp - fm) / (2.0 * h);
        return std::abs(ad - fd) /
               std::max({std::abs(ad), std::abs(fd), 1e-6});
      };
      // A relu kink inside [x-h, x+h] corrupts the central difference
      // without implicating the gradient, and walking h down exits its
      // window; a genuinely wrong gradient stays wrong at every h.
      const double scale = std::max(1.0, std::abs(orig));
      double rel = rel_at(1e-6 * scale);
      if (rel >= 1e-3) rel = std::min(rel, rel_at(1e-5 * scale));
      if (rel >= 1e-3) rel = std::min(rel, rel_at(1e-7 * scale));
      worst_e2e = std::max(worst_e2e, rel);
      require(rel < 1e-3, name + "[" + std::to_string(i) + "] rel err " +
                              fmt("%.2e", rel));
    }
  }

  const double secs = elapsed_s(t0);
  require(secs < 120.0, "took " + fmt("%.1f", secs) + " s");
  detail = "op max rel err " + fmt("%.2e", worst_op) + ", end-to-end max " +
           fmt("%.2e", worst_e2e) + ", " + fmt("%.1f", secs) + " s";
  return true;
}

bool crit_alignment_law(std::string& detail) {
  Rng rng(2026);
  const auto cfg = tiny_config(16, 24, 8);
  voxpatch::model::Network<float> net(cfg, 3);
  voxpatch::testing::SynthSpec spec;
  NoGradGuard guard;
  Rng unused(0);

  for (int trial = 0; trial < 200; ++trial) {
    auto utt = voxpatch::testing::make_synth_utterance(rng, spec);
    auto framed = voxpatch::corpus::seconds_to_frames(utt.rec);

    // Alternate masked-word examples with fresh insertions.
    voxpatch::corpus::TrainingExample ex;
    if (trial % 2 == 0) {
      auto maybe =
          voxpatch::corpus::make_training_example(utt.rec, framed, rng);
      if (!maybe) {
        --trial;
        continue;
      }
      ex = *maybe;
    } else {
      const int n_words = static_cast<int>(utt.rec.words.size());
      const int after = -1 + static_cast<int>(rng.below(
                                 static_cast<std::uint64_t>(n_words + 1)));
      std::vector<std::string> phones;
      const int k = 1 + static_cast<int>(rng.below(3));
      for (int i = 0; i < k; ++i) {
        const int id =
            voxpatch::corpus::kUnkId + 1 +
            static_cast<int>(rng.below(
                static_cast<std::uint64_t>(
                    voxpatch::corpus::inventory_size()) -
                static_cast<std::uint64_t>(voxpatch::corpus::kUnkId) - 1));
        phones.push_back(voxpatch::corpus::id_to_phoneme(id));
      }
      ex = voxpatch::corpus::build_insertion(utt.rec, framed, after, phones);
    }

    // Simulated duration predictions for the edited span.
    std::vector<double> d_hat(ex.seq.size());
    for (auto& d : d_hat) d = rng.uniform(0.6, 4.4);
    auto fin = voxpatch::model::finalize_durations(d_hat, ex.masked,
                                                   ex.seq.inserted);
    int total = 0;
    for (int f : fin.frames) total += f;

    auto h = net.encode_text(ex.seq, false, unused);
    auto h_reg = net.length_regulate(h, fin);
    require(h_reg.dim(0) == static_cast<std::size_t>(total),
            "regulated rows != duration sum");

    // Original-timeline mel, extended to the new length.
    voxpatch::dsp::Mel mel;
    mel.frames = static_cast<std::size_t>(framed.durations.total());
    mel.bins = static_cast<std::size_t>(cfg.n_mels);
    mel.data.resize(mel.frames * mel.bins);
    for (auto& v : mel.data) v = static_cast<float>(rng.uniform(-1, 1));

    int span = 0;
    for (std::size_t i = ex.script.span_start; i < ex.script.span_end; ++i) {
      span += fin.frames[i];
    }
    auto ext = voxpatch::model::extend_mel(mel, ex.script, span);
    require(ext.frames == static_cast<std::size_t>(total),
            "extended mel frames != duration sum");

    auto pred = net.fuse_and_decode(
        h_reg, net.encode_spec(voxpatch::model::mel_to_tensor<float>(ext)));
    require(pred.dim(0) == static_cast<std::size_t>(total),
            "decoder frames != duration sum");
    require(pred.dim(1) == static_cast<std::size_t>(cfg.n_mels),
            "decoder bins wrong");

    // Regulator properties: block structure and concatenation.
    const std::size_t rows = ex.seq.size();
    if (rows >= 2) {
      const std::size_t split = 1 + rng.below(rows - 1);
      auto slice_rows = [&](const Tensor<float>& m, std::size_t r0,
                            std::size_t r1) {
        const std::size_t c = m.dim(1);
        std::vector<float> v(
            m.value().begin() + static_cast<std::ptrdiff_t>(r0 * c),
            m.value().begin() + static_cast<std::ptrdiff_t>(r1 * c));
        return Tensor<float>::from_data({r1 - r0, c}, std::move(v));
      };
      voxpatch::corpus::DurationTrack head, tail;
      head.frames.assign(
          fin.frames.begin(),
          fin.frames.begin() + static_cast<std::ptrdiff_t>(split));
      tail.frames.assign(
          fin.frames.begin() + static_cast<std::ptrdiff_t>(split),
          fin.frames.end());
      auto reg_head = net.length_regulate(slice_rows(h, 0, split), head);
      auto reg_tail = net.length_regulate(slice_rows(h, split, rows), tail);
      require(reg_head.dim(0) + reg_tail.dim(0) == h_reg.dim(0),
              "concatenation property: row counts");
      std::vector<float> joined(reg_head.value());
      joined.insert(joined.end(), reg_tail.value().begin(),
                    reg_tail.value().end());
      require(joined == h_reg.value(), "concatenation property: values");
    }

    // Every output row is a copy of its source phoneme's row.
    std::size_t row = 0;
    for (std::size_t p = 0; p < rows; ++p) {
      for (int r = 0; r < fin.frames[p]; ++r, ++row) {
        for (std::size_t cix = 0; cix < h.dim(1); ++cix) {
          require(h_reg.value()[row * h.dim(1) + cix] ==
                      h.value()[p * h.dim(1) + cix],
                  "regulated row is not a copy");
        }
      }
    }
    require(row == h_reg.dim(0), "row walk mismatch");
  }
  detail = "200 randomized examples, text/mel/decoder lengths all equal";
  return true;
}

bool crit_dsp(std::string& detail) {
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  Rng rng(5);

  // Frame-count law on random clip lengths.
  for (int i = 0; i < 100; ++i) {
    const std::size_t len =
        static_cast<std::size_t>(cfg.hop) + rng.below(120000);
    std::vector<float> x(len);
    for (auto& v : x) v = static_cast<float>(rng.uniform(-0.3, 0.3));
    auto mel = voxpatch::dsp::wav_to_mel(x, fb, cfg);
    require(mel.frames == len / static_cast<std::size_t>(cfg.hop) + 1,
            "frame law violated at length " + std::to_string(len));
  }

  // Griffin-Lim on a pure tone: convergent and monotone.
  std::vector<float> tone(9600);
  for (std::size_t i = 0; i < tone.size(); ++i) {
    tone[i] = static_cast<float>(
        0.5 * std::sin(2.0 * std::numbers::pi * 440.0 *
                       static_cast<double>(i) / cfg.sample_rate));
  }
  auto mag = voxpatch::dsp::stft_magnitude(tone, cfg);
  const std::size_t frames =
      tone.size() / static_cast<std::size_t>(cfg.hop) + 1;
  std::vector<double> conv;
  voxpatch::dsp::griffin_lim(mag, frames, cfg, 60, 1234, &conv);
  require(conv.size() == 60, "convergence trace length");
  require(conv.back() < 0.1,
          "tone convergence " + fmt("%.3f", conv.back()) + " >= 0.1");
  for (std::size_t i = 1; i < conv.size(); ++i) {
    require(conv[i] <= conv[i - 1] + 1e-6, "convergence not monotone");
  }

  // Silence round-trips to silence. Zero magnitudes reconstruct exact
  // zeros; the full mel round trip carries the 1e-5 log floor, so its
  // waveform is bounded instead (well under one 16-bit quantization step).
  std::vector<double> zero_mag(8 * cfg.bins(), 0.0);
  auto zout = voxpatch::dsp::griffin_lim(zero_mag, 8, cfg, 30, 0);
  for (float v : zout) require(v == 0.0f, "zero magnitudes made samples");

  std::vector<float> silence(12000, 0.0f);
  auto smel = voxpatch::dsp::wav_to_mel(silence, fb, cfg);
  auto smag = voxpatch::dsp::mel_to_linear(smel, fb);
  auto sout = voxpatch::dsp::griffin_lim(smag, smel.frames, cfg, 30, 0);
  double peak = 0.0;
  for (float v : sout) {
    peak = std::max(peak, std::abs(static_cast<double>(v)));
  }
  require(peak < 1e-3, "silence peak " + fmt("%.2e", peak));

  detail = "frame law x100, tone convergence " + fmt("%.3f", conv.back()) +
           " @60 iters (monotone), silence round-trip peak " +
           fmt("%.1e", peak);
  return true;
}

bool crit_loss_contract(std::string& detail) {
  Rng rng(9);
  // Weighted-sum identity on random tensors, in double.
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    auto pm = random_dt(rng, {6, 8}, -2, 2, false);
    auto tm = random_dt(rng, {6, 8}, -2, 2, false);
    auto pd = random_dt(rng, {7, 1}, 0, 3, false);
    auto td = random_dt(rng, {7, 1}, 0, 3, false);
    auto terms = voxpatch::train::mel_duration_loss(pm, tm, pd, td);
    const double total = scalar_of(terms.total);
    const double l2 = scalar_of(terms.l2_mel);
    const double l1 = scalar_of(terms.l1_duration);
    const double rel = std::abs(total - (l2 + 0.01 * l1)) /
                       std::max(std::abs(total), 1e-12);
    worst = std::max(worst, rel);
    require(rel < 1e-12, "total != l2 + 0.01*l1, rel " + fmt("%.2e", rel));

    // The components themselves are the advertised means.
    double l2_hand = 0.0;
    for (std::size_t k = 0; k < pm.numel(); ++k) {
      const double d = pm.value()[k] - tm.value()[k];
      l2_hand += d * d;
    }
    l2_hand /= static_cast<double>(pm.numel());
    double l1_hand = 0.0;
    for (std::size_t k = 0; k < pd.numel(); ++k) {
      l1_hand += std::abs(pd.value()[k] - td.value()[k]);
    }
    l1_hand /= static_cast<double>(pd.numel());
    require(std::abs(l2 - l2_hand) < 1e-12 * std::max(1.0, l2_hand),
            "l2 is not the mel MSE");
    require(std::abs(l1 - l1_hand) < 1e-12 * std::max(1.0, l1_hand),
            "l1 is not the duration MAE");
  }

  // Whole-sentence coverage: a target perturbation outside the edited
  // region must change the loss.
  Rng drng(21);
  voxpatch::corpus::FramedPhones framed;
  auto ex = synth_example(drng, &framed);
  const auto cfg = tiny_config(16, 24, 8);
  voxpatch::model::Network<float> net(cfg, 2);
  NoGradGuard guard;
  Rng unused(0);

  const auto frames = static_cast<std::size_t>(framed.durations.total());
  voxpatch::dsp::Mel mel;
  mel.frames = frames;
  mel.bins = static_cast<std::size_t>(cfg.n_mels);
  mel.data.resize(frames * mel.bins);
  for (auto& v : mel.data) v = static_cast<float>(drng.uniform(-1, 1));

  auto fwd = voxpatch::train::forward_example(net, mel, ex, false, unused);
  auto target = voxpatch::model::mel_to_tensor<float>(mel);
  auto dur_t = voxpatch::train::log_duration_targets<float>(ex.reference);
  const auto base = voxpatch::train::compute_loss(fwd.pred_mel, target,
                                                  fwd.dur_logits, dur_t);

  // A frame strictly outside [frame_offset, frame_offset+original_frames).
  std::size_t outside = 0;
  if (ex.script.frame_offset == 0) {
    outside = ex.script.frame_offset + ex.script.original_frames;
    require(outside < frames, "no frame outside the edit region");
  }
  auto perturbed = mel;
  perturbed.data[outside * perturbed.bins] += 0.5f;
  const auto moved = voxpatch::train::compute_loss(
      fwd.pred_mel, voxpatch::model::mel_to_tensor<float>(perturbed),
      fwd.dur_logits, dur_t);
  require(std::abs(moved.total - base.total) > 1e-9,
          "outside-region perturbation did not change the loss");

  detail = "total == l2 + 0.01*l1 (worst rel " + fmt("%.1e", worst) +
           "), outside-edit-region target moves the loss";
  return true;
}

bool crit_tiny_overfit(std::string& detail, const fs::path& scratch) {
  const auto t0 = std::chrono::steady_clock::now();
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);

  voxpatch::testing::SynthSpec spec;
  spec.seed = 1;
  spec.n_utterances = 8;
  auto manifest =
      voxpatch::testing::write_synth_corpus(scratch / "overfit_corpus", spec);
  auto data = voxpatch::corpus::load_dataset(manifest, fb, cfg);

  voxpatch::train::TrainOptions opt;
  opt.model = tiny_config(32, 48, 80);
  opt.epochs = 1 << 20;
  opt.max_steps = 2000;
  opt.batch_size = 4;
  opt.lr = 1e-3;
  opt.seed = 5;
  opt.out_dir = scratch / "overfit_run";
  auto res = voxpatch::train::train(data, opt, nullptr);

  require(res.steps == 2000, "expected 2000 steps");
  const double step10 = res.curve[9].total;
  const double final_total = res.curve.back().total;
  const double ratio = final_total / step10;
  const double secs = elapsed_s(t0);
  require(ratio < 0.1, "ratio " + fmt("%.3f", ratio) + " >= 0.1");
  require(secs < 900.0, "took " + fmt("%.0f", secs) + " s");
  detail = "step-10 total " + fmt("%.3f", step10) + ", final " +
           fmt("%.4f", final_total) + " (ratio " + fmt("%.3f", ratio) +
           "), " + fmt("%.1f", secs) + " s";
  return true;
}

bool crit_duration_oracle(std::string& detail, const fs::path& scratch) {
  const auto t0 = std::chrono::steady_clock::now();
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);

  // Training corpus: duration = table(phoneme id), one frame of jitter on
  // a quarter of the phones. Held-out corpus: clean table durations from
  // a different seed, so only the id -> duration rule transfers.
  voxpatch::testing::SynthSpec tr;
  tr.seed = 1;
  tr.n_utterances = 256;
  tr.duration_jitter = 0.25;
  auto data = voxpatch::corpus::load_dataset(
      voxpatch::testing::write_synth_corpus(scratch / "dur_train", tr), fb,
      cfg);

  voxpatch::testing::SynthSpec held;
  held.seed = 2;
  held.n_utterances = 8;
  held.duration_jitter = 0.0;
  auto held_data = voxpatch::corpus::load_dataset(
      voxpatch::testing::write_synth_corpus(scratch / "dur_held", held), fb,
      cfg);

  voxpatch::train::TrainOptions opt;
  opt.model = tiny_config(32, 64, 80);
  opt.epochs = 1 << 20;
  opt.max_steps = 12000;
  opt.batch_size = 4;
  opt.lr = 1e-3;
  opt.seed = 5;
  opt.out_dir = scratch / "dur_run";
  auto res = voxpatch::train::train(data, opt, nullptr);

  auto net = voxpatch::model::Network<float>::load(res.last_dir);
  auto report = voxpatch::train::eval_duration(net, held_data, 3);
  const double secs = elapsed_s(t0);
  require(report.n_words > 0, "no held-out words evaluated");
  require(report.phoneme_level_error < 0.5,
          "held-out phoneme MAE " + fmt("%.3f", report.phoneme_level_error));
  detail = "held-out phoneme MAE " +
           fmt("%.3f", report.phoneme_level_error) + " frames (< 0.5), " +
           "word MAE " + fmt("%.3f", report.word_level_error) + ", " +
           std::to_string(report.n_words) + " words, " + fmt("%.0f", secs) +
           " s";
  return true;
}

bool crit_identity_edit(std::string& detail, const fs::path& scratch) {
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  voxpatch::testing::SynthSpec spec;
  spec.seed = 12;
  spec.n_utterances = 2;
  auto data = voxpatch::corpus::load_dataset(
      voxpatch::testing::write_synth_corpus(scratch / "ident_corpus", spec),
      fb, cfg);

  std::vector<const voxpatch::dsp::Mel*> mels{&data[0].mel, &data[1].mel};
  auto stats = voxpatch::train::compute_mel_stats(mels);
  voxpatch::model::Network<float> net(tiny_config(16, 24, 80), 4);

  for (const auto& utt : data) {
    auto res =
        voxpatch::train::infer_edit(net, stats, utt, 0, {}, fb, cfg, 8, 77);
    require(res.audio.samples == utt.audio.samples,
            "identity edit changed the samples");
    require(res.audio.sample_rate == utt.audio.sample_rate,
            "identity edit changed the sample rate");
    require(res.script.empty(), "identity edit produced a nonempty script");
  }
  detail = "empty insertion returns bit-identical audio on 2 utterances";
  return true;
}

bool crit_determinism(std::string& detail, const fs::path& scratch) {
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  voxpatch::testing::SynthSpec spec;
  spec.seed = 3;
  spec.n_utterances = 6;
  auto data = voxpatch::corpus::load_dataset(
      voxpatch::testing::write_synth_corpus(scratch / "det_corpus", spec),
      fb, cfg);

  voxpatch::train::TrainOptions opt;
  opt.model = tiny_config(16, 24, 80);
  opt.epochs = 3;
  opt.batch_size = 2;
  opt.lr = 1e-3;
  opt.seed = 99;
  opt.out_dir = scratch / "det_a";
  auto a = voxpatch::train::train(data, opt, nullptr);
  opt.out_dir = scratch / "det_b";
  auto b = voxpatch::train::train(data, opt, nullptr);

  require(a.curve.size() == b.curve.size(), "curve lengths differ");
  for (std::size_t i = 0; i < a.curve.size(); ++i) {
    require(a.curve[i].l2_mel == b.curve[i].l2_mel &&
                a.curve[i].l1_duration == b.curve[i].l1_duration &&
                a.curve[i].total == b.curve[i].total,
            "curves differ at step " + std::to_string(i + 1));
  }
  require(slurp(a.curve_csv) == slurp(b.curve_csv), "loss.csv bytes differ");
  require(slurp(a.last_dir / "params.bin") ==
              slurp(b.last_dir / "params.bin"),
          "trained parameters differ");

  // Inference repeats exactly, within a run and across reloaded copies.
  nlohmann::json meta;
  auto net_a = voxpatch::model::Network<float>::load(a.last_dir, &meta);
  auto net_b = voxpatch::model::Network<float>::load(b.last_dir);
  auto stats = voxpatch::train::MelStats::from_json(meta.at("mel_stats"));
  const std::vector<std::string> phones{"HH", "AH0"};
  auto e1 = voxpatch::train::infer_edit(net_a, stats, data[0], 0, phones, fb,
                                        cfg, 8, 55);
  auto e2 = voxpatch::train::infer_edit(net_a, stats, data[0], 0, phones, fb,
                                        cfg, 8, 55);
  auto e3 = voxpatch::train::infer_edit(net_b, stats, data[0], 0, phones, fb,
                                        cfg, 8, 55);
  require(e1.audio.samples == e2.audio.samples, "repeat inference differs");
  require(e1.audio.samples == e3.audio.samples,
          "inference differs across identically trained runs");
  require(e1.mel.data == e2.mel.data, "repeat mel differs");
  detail = std::to_string(a.steps) +
           " training steps bit-identical across runs; edits repeat exactly";
  return true;
}

bool crit_checkpoint_roundtrip(std::string& detail, const fs::path& scratch) {
  // Uses the deterministic run's artifacts when present, else trains one.
  auto src = scratch / "det_a" / "last";
  if (!fs::exists(src / "params.bin")) {
    voxpatch::dsp::StftConfig cfg;
    auto fb =
        voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
    voxpatch::testing::SynthSpec spec;
    spec.seed = 3;
    spec.n_utterances = 4;
    auto data = voxpatch::corpus::load_dataset(
        voxpatch::testing::write_synth_corpus(scratch / "rt_corpus", spec),
        fb, cfg);
    voxpatch::train::TrainOptions opt;
    opt.model = tiny_config(16, 24, 80);
    opt.epochs = 1;
    opt.batch_size = 2;
    opt.seed = 99;
    opt.out_dir = scratch / "rt_run";
    src = voxpatch::train::train(data, opt, nullptr).last_dir;
  }

  nlohmann::json meta1;
  auto net1 = voxpatch::model::Network<float>::load(src, &meta1);
  const auto rt1 = scratch / "rt1";
  net1.save(rt1, meta1);
  nlohmann::json meta2;
  auto net2 = voxpatch::model::Network<float>::load(rt1, &meta2);
  const auto rt2 = scratch / "rt2";
  net2.save(rt2, meta2);

  require(slurp(rt1 / "params.bin") == slurp(rt2 / "params.bin"),
          "params.bin changed across save/load/save");
  require(slurp(rt1 / "manifest.json") == slurp(rt2 / "manifest.json"),
          "manifest.json changed across save/load/save");
  require(slurp(src / "params.bin") == slurp(rt1 / "params.bin"),
          "resaved params differ from the original checkpoint");

  // Inference through the reloaded model matches the original exactly.
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  voxpatch::testing::SynthSpec spec;
  spec.seed = 8;
  spec.n_utterances = 1;
  auto data = voxpatch::corpus::load_dataset(
      voxpatch::testing::write_synth_corpus(scratch / "rt_eval", spec), fb,
      cfg);
  auto stats = voxpatch::train::MelStats::from_json(meta1.at("mel_stats"));
  const std::vector<std::string> phones{"IY1"};
  auto out1 = voxpatch::train::infer_edit(net1, stats, data[0], 0, phones,
                                          fb, cfg, 8, 9);
  auto out2 = voxpatch::train::infer_edit(net2, stats, data[0], 0, phones,
                                          fb, cfg, 8, 9);
  require(out1.audio.samples == out2.audio.samples,
          "inference differs after reload");
  require(out1.mel.data == out2.mel.data, "mel differs after reload");
  require(out1.durations.frames == out2.durations.frames,
          "durations differ after reload");

  detail =
      "save/load/save byte-identical; reloaded inference matches exactly";
  return true;
}

}  // namespace

int main() {
  testutil::TempDir scratch("voxpatch-acceptance");
  struct Criterion {
    const char* name;
    std::function<bool(std::string&)> fn;
  };
  const std::vector<Criterion> criteria{
      {"gradient suite (per-op < 1e-4, end-to-end < 1e-3, 64-bit)",
       [&](std::string& d) { return crit_gradients(d); }},
      {"alignment law (text/mel/decoder lengths equal on 200 examples)",
       [&](std::string& d) { return crit_alignment_law(d); }},
      {"dsp suite (frame law, Griffin-Lim tone < 0.1 monotone, silence)",
       [&](std::string& d) { return crit_dsp(d); }},
      {"loss contract (total == l2 + 0.01*l1, whole-sentence coverage)",
       [&](std::string& d) { return crit_loss_contract(d); }},
      {"tiny overfit (8 utterances, 2000 steps, final < 10% of step 10)",
       [&](std::string& d) { return crit_tiny_overfit(d, scratch.path()); }},
      {"duration oracle (held-out masked-word MAE < 0.5 frames)",
       [&](std::string& d) {
         return crit_duration_oracle(d, scratch.path());
       }},
      {"identity edit (empty insertion returns the input bit-identically)",
       [&](std::string& d) { return crit_identity_edit(d, scratch.path()); }},
      {"determinism (fixed seed: curves and inference repeat exactly)",
       [&](std::string& d) { return crit_determinism(d, scratch.path()); }},
      {"checkpoint round-trip (byte-identical resave, exact inference)",
       [&](std::string& d) {
         return crit_checkpoint_roundtrip(d, scratch.path());
       }},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool ok = false;
    try {
      ok = criteria[i].fn(detail);
    } catch (const Failure& f) {
      detail = f.what;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %zu. %s%s%s\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].name, detail.empty() ? "" : " -- ",
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  if (failures > 0) {
    std::printf("%d of %zu acceptance criteria failed\n", failures,
                criteria.size());
    return 1;
  }
  std::printf("all %zu acceptance criteria passed\n", criteria.size());
  return 0;
}
