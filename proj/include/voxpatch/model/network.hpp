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

#ifndef VOXPATCH_MODEL_NETWORK_HPP_
#define VOXPATCH_MODEL_NETWORK_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "voxpatch/checkpoint.hpp"
#include "voxpatch/corpus/example.hpp"
#include "voxpatch/corpus/inventory.hpp"
#include "voxpatch/dsp/mel.hpp"
#include "voxpatch/errors.hpp"
#include "voxpatch/model/config.hpp"
#include "voxpatch/model/layers.hpp"

// The insertion network. Two streams meet by position-wise addition: the
// text stream embeds and encodes the phoneme sequence, stretches it to
// frame rate with per-phoneme durations; the spectrogram stream embeds
// the original mel with zeros punched into the edited region. A decoder
// turns the fused sequence into the full-sentence mel, so every frame is
// predicted with the whole recording as context.

namespace voxpatch::model {

// Non-inserted positions keep the reference verbatim; inserted positions
// round the prediction half-up with a floor of one frame.
inline corpus::DurationTrack finalize_durations(
    const std::vector<double>& d_hat, const corpus::DurationTrack& ref,
    const std::vector<std::uint8_t>& inserted) {
  if (d_hat.size() != ref.frames.size() ||
      inserted.size() != ref.frames.size()) {
    throw ContractError("finalize_durations: track sizes disagree");
  }
  corpus::DurationTrack out;
  out.kind = corpus::DurationTrack::Kind::kPredicted;
  out.frames.reserve(ref.frames.size());
  for (std::size_t i = 0; i < ref.frames.size(); ++i) {
    if (inserted[i]) {
      const auto rounded = static_cast<int>(std::floor(d_hat[i] + 0.5));
      out.frames.push_back(rounded < 1 ? 1 : rounded);
    } else {
      out.frames.push_back(ref.frames[i]);
    }
  }
  return out;
}

// Rows [0, frame_offset) kept, script.original_frames rows dropped,
// insert_frames zero rows in their place, remainder kept. At training the
// dropped and inserted counts match, so the length is conserved.
inline dsp::Mel extend_mel(const dsp::Mel& mel,
                           const corpus::EditScript& script,
                           int insert_frames) {
  if (insert_frames < 1) {
    throw ContractError("extend_mel: must insert at least one frame");
  }
  const std::size_t offset = script.frame_offset;
  const std::size_t removed = script.original_frames;
  if (offset + removed > mel.frames) {
    throw ContractError("extend_mel: edited region outside the mel");
  }
  dsp::Mel out;
  out.bins = mel.bins;
  out.frames = mel.frames - removed + static_cast<std::size_t>(insert_frames);
  out.data.assign(out.frames * out.bins, 0.0f);
  std::copy(mel.data.begin(),
            mel.data.begin() + static_cast<std::ptrdiff_t>(offset * mel.bins),
            out.data.begin());
  std::copy(mel.data.begin() +
                static_cast<std::ptrdiff_t>((offset + removed) * mel.bins),
            mel.data.end(),
            out.data.begin() +
                static_cast<std::ptrdiff_t>(
                    (offset + static_cast<std::size_t>(insert_frames)) *
                    out.bins));
  return out;
}

template <typename Real>
Tensor<Real> mel_to_tensor(const dsp::Mel& mel) {
  std::vector<Real> data(mel.data.begin(), mel.data.end());
  return Tensor<Real>::from_data({mel.frames, mel.bins}, std::move(data));
}

// d_hat = exp(out) - 1 clamped to >= 0; the predictor regresses log(1+d).
template <typename Real>
std::vector<double> predicted_durations(const Tensor<Real>& logits) {
  std::vector<double> out;
  out.reserve(logits.numel());
  for (const auto v : logits.value()) {
    const double d = std::exp(static_cast<double>(v)) - 1.0;
    out.push_back(d < 0.0 ? 0.0 : d);
  }
  return out;
}

template <typename Real>
class Network {
 public:
  Network(const ModelConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        inventory_(static_cast<int>(corpus::inventory_size())) {
    cfg_.validate();
    Rng rng(seed);

    embed_ = reg_.add(
        "text.embed",
        init::normal<Real>(rng, {static_cast<std::size_t>(inventory_),
                                 static_cast<std::size_t>(
                                     cfg_.phoneme_embed_dim)}));
    for (int i = 0; i < cfg_.cnn_layers; ++i) {
      cnn_.emplace_back(reg_, "text.cnn." + std::to_string(i), cfg_.cnn_kernel,
                        cfg_.phoneme_embed_dim, cfg_.phoneme_embed_dim,
                        cfg_.dropout, rng);
    }
    text_proj_ = Linear<Real>(reg_, "text.proj", cfg_.phoneme_embed_dim,
                              cfg_.hidden_dim, rng);
    text_pe_ = ScaledPositionalEncoding<Real>(reg_, "text.pe");
    text_enc_ = EncoderStack<Real>(reg_, "text.enc", cfg_.text_encoder_layers,
                                   cfg_.hidden_dim, cfg_.heads,
                                   cfg_.ffn_inner_dim, rng);

    dur_in_ = Linear<Real>(reg_, "dur.in", cfg_.hidden_dim + 2,
                           cfg_.hidden_dim, rng);
    dur_enc_ = EncoderLayer<Real>(reg_, "dur.enc", cfg_.hidden_dim, cfg_.heads,
                                  cfg_.ffn_inner_dim, rng);
    dur_fc1_ = Linear<Real>(reg_, "dur.fc1", cfg_.hidden_dim, cfg_.hidden_dim,
                            rng);
    dur_fc2_ = Linear<Real>(reg_, "dur.fc2", cfg_.hidden_dim, 1, rng);

    spec_fc1_ = Linear<Real>(reg_, "spec.fc1", cfg_.n_mels, cfg_.hidden_dim,
                             rng);
    spec_fc2_ = Linear<Real>(reg_, "spec.fc2", cfg_.hidden_dim,
                             cfg_.hidden_dim, rng);
    spec_pe_ = ScaledPositionalEncoding<Real>(reg_, "spec.pe");
    spec_enc_ = EncoderStack<Real>(reg_, "spec.enc", cfg_.spec_encoder_layers,
                                   cfg_.hidden_dim, cfg_.heads,
                                   cfg_.ffn_inner_dim, rng);

    dec_ = EncoderStack<Real>(reg_, "dec", cfg_.decoder_layers,
                              cfg_.hidden_dim, cfg_.heads, cfg_.ffn_inner_dim,
                              rng);
    dec_out_ = Linear<Real>(reg_, "dec.out", cfg_.hidden_dim, cfg_.n_mels,
                            rng);
  }

  const ModelConfig& config() const { return cfg_; }
  ParamRegistry<Real>& params() { return reg_; }
  const ParamRegistry<Real>& params() const { return reg_; }

  // embedding (512) -> CNN blocks -> linear to hidden -> scaled PE ->
  // text encoder. Length is preserved throughout.
  Tensor<Real> encode_text(const corpus::PhonemeSequence& seq, bool train,
                           Rng& dropout_rng) const {
    if (seq.ids.empty()) throw ValueError("encode_text: empty sequence");
    auto h = embedding(seq.ids, embed_);
    for (const auto& block : cnn_) h = block(h, train, dropout_rng);
    h = text_pe_(text_proj_(h));
    return text_enc_(h);
  }

  // concat(h, log(1+ref), inserted) -> linear -> one encoder layer ->
  // FC+ReLU -> FC to a single log(1+d) logit per position.
  Tensor<Real> duration_logits(const Tensor<Real>& h_text,
                               const corpus::DurationTrack& ref,
                               const std::vector<std::uint8_t>& inserted)
      const {
    const std::size_t n = h_text.dim(0);
    if (ref.frames.size() != n || inserted.size() != n) {
      throw ContractError("duration_logits: track sizes disagree");
    }
    std::vector<Real> logd(n), flag(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (ref.frames[i] < 0 || (ref.frames[i] == 0) != (inserted[i] != 0)) {
        throw ContractError(
            "duration_logits: reference zeros must match inserted flags");
      }
      logd[i] = static_cast<Real>(std::log1p(
          static_cast<double>(ref.frames[i])));
      flag[i] = static_cast<Real>(inserted[i] ? 1 : 0);
    }
    auto logd_t = Tensor<Real>::from_data({n, 1}, std::move(logd));
    auto flag_t = Tensor<Real>::from_data({n, 1}, std::move(flag));
    auto x = dur_in_(concat_cols<Real>({h_text, logd_t, flag_t}));
    x = dur_enc_(x);
    return dur_fc2_(relu(dur_fc1_(x)));
  }

  // Stretches each position to its duration; order preserved, T = sum(d).
  Tensor<Real> length_regulate(const Tensor<Real>& h_text,
                               const corpus::DurationTrack& d) const {
    return repeat_rows(h_text, d.frames);
  }

  // FC+ReLU, FC+ReLU, scaled PE, then the spectrogram encoder.
  Tensor<Real> encode_spec(const Tensor<Real>& ext_mel) const {
    if (ext_mel.ndim() != 2 ||
        ext_mel.dim(1) != static_cast<std::size_t>(cfg_.n_mels)) {
      throw ShapeError("encode_spec: expected [T x n_mels] input");
    }
    auto h = relu(spec_fc2_(relu(spec_fc1_(ext_mel))));
    return spec_enc_(spec_pe_(h));
  }

  // Position-wise addition, decoder stack, linear to mel bins. The equal
  // length requirement is the non-autoregressive contract.
  Tensor<Real> fuse_and_decode(const Tensor<Real>& h_text_ext,
                               const Tensor<Real>& h_mel_ext) const {
    if (h_text_ext.dim(0) != h_mel_ext.dim(0)) {
      throw ContractError(
          "fuse_and_decode: text stream has " +
          std::to_string(h_text_ext.dim(0)) + " frames, mel stream " +
          std::to_string(h_mel_ext.dim(0)));
    }
    return dec_out_(dec_(add(h_text_ext, h_mel_ext)));
  }

  // Convenience composition used by training and inference. `d` supplies
  // the length regulation (ground truth at training, finalized
  // predictions at inference); ext_mel must already hold the zero-padded
  // region of matching length.
  Tensor<Real> decode_mel(const corpus::PhonemeSequence& seq,
                          const corpus::DurationTrack& d,
                          const Tensor<Real>& ext_mel, bool train,
                          Rng& dropout_rng) const {
    auto h_text = encode_text(seq, train, dropout_rng);
    auto h_text_ext = length_regulate(h_text, d);
    auto h_mel_ext = encode_spec(ext_mel);
    return fuse_and_decode(h_text_ext, h_mel_ext);
  }

  // Serialization: every parameter as an f32 array plus config and
  // inventory in the metadata.
  Archive to_archive(const nlohmann::json& extra_meta =
                         nlohmann::json::object()) const {
    Archive ar;
    ar.meta = extra_meta;
    ar.meta["kind"] = "voxpatch-model";
    ar.meta["config"] = cfg_.to_json();
    ar.meta["inventory"] = corpus::phoneme_inventory();
    for (const auto& [name, t] : reg_.items()) {
      ArrayRecord rec;
      rec.name = name;
      rec.shape = t.shape();
      rec.data.assign(t.value().begin(), t.value().end());
      ar.arrays.push_back(std::move(rec));
    }
    return ar;
  }

  void save(const std::filesystem::path& dir,
            const nlohmann::json& extra_meta =
                nlohmann::json::object()) const {
    save_archive(dir, to_archive(extra_meta));
  }

  static Network load(const std::filesystem::path& dir,
                      nlohmann::json* meta_out = nullptr) {
    return from_archive(load_archive(dir), meta_out);
  }

  static Network from_archive(const Archive& ar,
                              nlohmann::json* meta_out = nullptr) {
    if (!ar.meta.contains("config") || ar.meta.value("kind", "") !=
                                           "voxpatch-model") {
      throw ParseError("archive is not a model checkpoint");
    }
    if (ar.meta.contains("inventory") &&
        ar.meta["inventory"] !=
            nlohmann::json(corpus::phoneme_inventory())) {
      throw ParseError(
          "checkpoint phoneme inventory does not match this build");
    }
    Network net(ModelConfig::from_json(ar.meta["config"]), 0);
    if (ar.arrays.size() != net.reg_.items().size()) {
      throw ParseError("checkpoint holds " +
                       std::to_string(ar.arrays.size()) + " arrays, model " +
                       std::to_string(net.reg_.items().size()));
    }
    for (const auto& [name, t] : net.reg_.items()) {
      const auto& rec = ar.get(name);
      if (rec.shape != t.shape()) {
        throw ParseError("checkpoint array " + name + " has shape " +
                         shape_str(rec.shape) + ", model expects " +
                         shape_str(t.shape()));
      }
      auto handle = t;
      auto& v = handle.mutable_value();
      for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = static_cast<Real>(rec.data[i]);
      }
    }
    if (meta_out) *meta_out = ar.meta;
    return net;
  }

 private:
  ModelConfig cfg_;
  int inventory_;
  ParamRegistry<Real> reg_;

  Tensor<Real> embed_;
  std::vector<ConvBlock<Real>> cnn_;
  Linear<Real> text_proj_;
  ScaledPositionalEncoding<Real> text_pe_;
  EncoderStack<Real> text_enc_;

  Linear<Real> dur_in_;
  EncoderLayer<Real> dur_enc_;
  Linear<Real> dur_fc1_;
  Linear<Real> dur_fc2_;

  Linear<Real> spec_fc1_;
  Linear<Real> spec_fc2_;
  ScaledPositionalEncoding<Real> spec_pe_;
  EncoderStack<Real> spec_enc_;

  EncoderStack<Real> dec_;
  Linear<Real> dec_out_;
};

}  // namespace voxpatch::model

#endif  // VOXPATCH_MODEL_NETWORK_HPP_
