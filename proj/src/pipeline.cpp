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

#include "voxpatch/train/pipeline.hpp"

#include <cmath>
#include <cstdint>

#include "voxpatch/corpus/splice.hpp"
#include "voxpatch/dsp/griffin_lim.hpp"
#include "voxpatch/errors.hpp"

namespace voxpatch::train {

namespace {

dsp::Mel tensor_to_mel(const Tensor<float>& t) {
  dsp::Mel mel;
  mel.frames = t.dim(0);
  mel.bins = t.dim(1);
  mel.data.assign(t.value().begin(), t.value().end());
  return mel;
}

int span_frames(const corpus::DurationTrack& d,
                const corpus::EditScript& script) {
  int n = 0;
  for (std::size_t i = script.span_start; i < script.span_end; ++i) {
    n += d.frames[i];
  }
  return n;
}

// Shared inference core: predict the masked span's durations, decode the
// full sentence, and report where the span landed in the output.
struct SpanDecode {
  corpus::DurationTrack durations;
  dsp::Mel mel;  // normalized domain
  int span = 0;
};

SpanDecode decode_span(const model::Network<float>& net,
                       const dsp::Mel& norm_mel,
                       const corpus::TrainingExample& ex) {
  NoGradGuard ng;
  Rng unused(0);
  auto h = net.encode_text(ex.seq, false, unused);
  auto logits = net.duration_logits(h, ex.masked, ex.seq.inserted);
  auto fin = model::finalize_durations(model::predicted_durations(logits),
                                       ex.masked, ex.seq.inserted);
  SpanDecode out;
  out.span = span_frames(fin, ex.script);
  auto h_ext = net.length_regulate(h, fin);
  auto ext = model::extend_mel(norm_mel, ex.script, out.span);
  auto pred = net.fuse_and_decode(h_ext,
                                  net.encode_spec(
                                      model::mel_to_tensor<float>(ext)));
  out.mel = tensor_to_mel(pred);
  out.durations = std::move(fin);
  return out;
}

}  // namespace

dsp::AudioClip vocode_mel(const dsp::Mel& mel, const dsp::MelFilterbank& fb,
                          const dsp::StftConfig& cfg, int gl_iterations,
                          std::uint64_t seed) {
  auto mag = dsp::mel_to_linear(mel, fb);
  dsp::AudioClip clip;
  clip.sample_rate = cfg.sample_rate;
  clip.samples = dsp::griffin_lim(mag, mel.frames, cfg, gl_iterations, seed);
  return clip;
}

ForwardOutput forward_example(const model::Network<float>& net,
                              const dsp::Mel& norm_mel,
                              const corpus::TrainingExample& ex, bool train,
                              Rng& dropout_rng) {
  auto h = net.encode_text(ex.seq, train, dropout_rng);
  auto logits = net.duration_logits(h, ex.masked, ex.seq.inserted);
  auto h_ext = net.length_regulate(h, ex.reference);
  auto ext = model::extend_mel(norm_mel, ex.script,
                               static_cast<int>(ex.script.original_frames));
  auto pred = net.fuse_and_decode(h_ext,
                                  net.encode_spec(
                                      model::mel_to_tensor<float>(ext)));
  return {pred, logits};
}

nlohmann::json DurationErrorReport::to_json() const {
  return nlohmann::json{{"phoneme_level_error", phoneme_level_error},
                        {"word_level_error", word_level_error},
                        {"n_words", n_words}};
}

DurationErrorReport duration_errors(
    const std::vector<MaskedWordDurations>& words) {
  DurationErrorReport rep;
  double phone_abs = 0.0, word_abs = 0.0;
  std::size_t n_phones = 0;
  for (const auto& w : words) {
    if (w.predicted.size() != w.truth.size()) {
      throw ContractError("duration_errors: prediction/truth size mismatch");
    }
    double pred_sum = 0.0, truth_sum = 0.0;
    for (std::size_t i = 0; i < w.predicted.size(); ++i) {
      phone_abs += std::abs(w.predicted[i] -
                            static_cast<double>(w.truth[i]));
      pred_sum += w.predicted[i];
      truth_sum += static_cast<double>(w.truth[i]);
    }
    word_abs += std::abs(pred_sum - truth_sum);
    n_phones += w.predicted.size();
  }
  rep.n_words = static_cast<int>(words.size());
  if (n_phones > 0) {
    rep.phoneme_level_error = phone_abs / static_cast<double>(n_phones);
  }
  if (!words.empty()) {
    rep.word_level_error = word_abs / static_cast<double>(words.size());
  }
  return rep;
}

DurationErrorReport eval_duration(const model::Network<float>& net,
                                  const std::vector<corpus::Utterance>& utts,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<MaskedWordDurations> words;
  NoGradGuard ng;
  for (const auto& utt : utts) {
    auto ex = corpus::make_training_example(utt.rec, utt.framed, rng);
    if (!ex) continue;
    auto h = net.encode_text(ex->seq, false, rng);
    auto logits = net.duration_logits(h, ex->masked, ex->seq.inserted);
    auto d_hat = model::predicted_durations(logits);
    MaskedWordDurations w;
    for (std::size_t i = ex->script.span_start; i < ex->script.span_end;
         ++i) {
      w.predicted.push_back(d_hat[i]);
      w.truth.push_back(ex->reference.frames[i]);
    }
    words.push_back(std::move(w));
  }
  return duration_errors(words);
}

EditResult infer_edit(const model::Network<float>& net, const MelStats& stats,
                      const corpus::Utterance& utt, int insert_after_word,
                      const std::vector<std::string>& phonemes,
                      const dsp::MelFilterbank& fb, const dsp::StftConfig& cfg,
                      int gl_iterations, std::uint64_t seed) {
  EditResult res;
  if (phonemes.empty()) {
    // Identity edit: nothing to synthesize, the splice short-circuits.
    res.script = corpus::EditScript{};
    res.audio = corpus::splice_output(utt.audio, utt.audio, res.script,
                                      cfg.hop);
    res.mel = utt.mel;
    res.durations = utt.framed.durations;
    return res;
  }

  auto ex = corpus::build_insertion(utt.rec, utt.framed, insert_after_word,
                                    phonemes);
  const auto norm = normalize_mel(utt.mel, stats);
  auto dec = decode_span(net, norm, ex);

  res.mel = denormalize_mel(dec.mel, stats);
  res.durations = std::move(dec.durations);
  res.script = ex.script;
  res.script.new_frames = static_cast<std::size_t>(dec.span);

  auto patched = vocode_mel(res.mel, fb, cfg, gl_iterations, seed);
  // The vocoder covers (frames-1)*hop samples; an insertion at the very
  // end of the recording may need the final frame's tail too.
  const std::size_t needed =
      (res.script.frame_offset + res.script.new_frames) *
      static_cast<std::size_t>(cfg.hop);
  if (patched.samples.size() < needed) patched.samples.resize(needed, 0.0f);
  res.audio = corpus::splice_output(utt.audio, patched, res.script, cfg.hop);
  return res;
}

ResynthResult resynth_all(const model::Network<float>& net,
                          const MelStats& stats, const corpus::Utterance& utt,
                          const dsp::MelFilterbank& fb,
                          const dsp::StftConfig& cfg, int gl_iterations,
                          std::uint64_t seed) {
  const auto runs = corpus::word_runs(utt.framed);
  if (runs.empty()) {
    throw ValueError("resynth_all: utterance has no word phones");
  }
  const auto norm = normalize_mel(utt.mel, stats);

  ResynthResult res;
  res.mel.bins = utt.mel.bins;
  for (const auto& run : runs) {
    auto ex = corpus::mask_word_span(
        utt.framed, run.begin, run.end,
        utt.rec.words[static_cast<std::size_t>(run.word)].word);
    auto dec = decode_span(net, norm, ex);

    WordProvenance prov;
    prov.word = run.word;
    prov.text = ex.script.word_text;
    prov.start_frame = res.mel.frames;
    prov.frames = dec.span;
    res.words.push_back(std::move(prov));

    // The span sits at its original offset: durations outside the mask
    // are the reference ones, so the preceding frames sum unchanged.
    const auto begin = dec.mel.data.begin() +
                       static_cast<std::ptrdiff_t>(ex.script.frame_offset *
                                                   dec.mel.bins);
    res.mel.data.insert(res.mel.data.end(), begin,
                        begin + static_cast<std::ptrdiff_t>(
                                    static_cast<std::size_t>(dec.span) *
                                    dec.mel.bins));
    res.mel.frames += static_cast<std::size_t>(dec.span);
  }

  res.mel = denormalize_mel(res.mel, stats);
  res.audio = vocode_mel(res.mel, fb, cfg, gl_iterations, seed);
  return res;
}

}  // namespace voxpatch::train
