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

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "voxpatch/checkpoint.hpp"
#include "voxpatch/corpus/dataset.hpp"
#include "voxpatch/dsp/audio.hpp"
#include "voxpatch/dsp/mel.hpp"
#include "voxpatch/dsp/stft.hpp"
#include "voxpatch/errors.hpp"
#include "voxpatch/model/config.hpp"
#include "voxpatch/model/network.hpp"
#include "voxpatch/train/mel_stats.hpp"
#include "voxpatch/train/pipeline.hpp"
#include "voxpatch/train/trainer.hpp"

// Speech-insertion CLI. Every command writes exactly one JSON document to
// stdout; progress lines and warnings go to stderr. Exit codes are a
// stable contract: 0 success, 1 usage, 2 input I/O, 3 runtime failure.

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using voxpatch::IoError;
using voxpatch::ParseError;
using voxpatch::ValueError;

// Environment fallback for --checkpoint.
constexpr const char* kCheckpointEnv = "VOXPATCH_CHECKPOINT_DIR";

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

void emit(json doc, const Stopwatch& sw) {
  doc["seconds"] = sw.seconds();
  std::cout << doc.dump(2) << "\n";
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

std::vector<std::string> split_whitespace(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string tok; in >> tok;) out.push_back(std::move(tok));
  return out;
}

fs::path default_checkpoint(const fs::path& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv(kCheckpointEnv); env && *env) {
    return fs::path(env);
  }
  throw ValueError(std::string("no checkpoint: pass --checkpoint or set ") +
                   kCheckpointEnv);
}

struct LoadedModel {
  voxpatch::model::Network<float> net;
  voxpatch::train::MelStats stats;
  json meta;
};

// `need_stats` demands the normalization stats a trained checkpoint
// carries; a raw initialized model cannot drive audio synthesis.
LoadedModel load_model(const fs::path& dir, bool need_stats) {
  json meta;
  auto net = voxpatch::model::Network<float>::load(dir, &meta);
  voxpatch::train::MelStats stats;
  if (need_stats) {
    if (!meta.contains("mel_stats")) {
      throw ParseError(dir.string() +
                       ": checkpoint has no mel_stats; synthesis needs a "
                       "trained checkpoint");
    }
    stats = voxpatch::train::MelStats::from_json(meta["mel_stats"]);
  }
  return {std::move(net), std::move(stats), std::move(meta)};
}

// Loads one utterance for editing commands, preferring an explicit
// --audio path over the one named inside the alignment file.
voxpatch::corpus::Utterance load_one(const fs::path& alignment,
                                     const fs::path& audio_override,
                                     const voxpatch::dsp::MelFilterbank& fb,
                                     const voxpatch::dsp::StftConfig& cfg) {
  std::vector<std::string> warnings;
  auto utt =
      voxpatch::corpus::load_utterance(alignment, fb, cfg, &warnings,
                                       audio_override);
  print_warnings(warnings);
  utt.id = alignment.stem().string();
  return utt;
}

json provenance_json(const voxpatch::train::WordProvenance& w) {
  return json{{"word", w.word},
              {"text", w.text},
              {"start_frame", w.start_frame},
              {"frames", w.frames}};
}

int cmd_mel(const fs::path& in, const fs::path& out) {
  Stopwatch sw;
  voxpatch::dsp::StftConfig cfg;
  auto clip = voxpatch::dsp::load_wav(in);
  if (clip.sample_rate != cfg.sample_rate) {
    std::cerr << "warning: " << in.string() << ": resampled from "
              << clip.sample_rate << " Hz to " << cfg.sample_rate << " Hz\n";
    clip = voxpatch::dsp::resample_linear(clip, cfg.sample_rate);
  }
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  auto mel = voxpatch::dsp::wav_to_mel(clip.samples, fb, cfg);
  voxpatch::save_mel(out, mel.data, mel.frames, mel.bins,
                     json{{"source", in.string()},
                          {"sample_rate", cfg.sample_rate},
                          {"hop", cfg.hop}});
  emit(json{{"command", "mel"},
            {"out", out.string()},
            {"frames", mel.frames},
            {"bins", mel.bins},
            {"samples", clip.samples.size()}},
       sw);
  return 0;
}

int cmd_train(const fs::path& manifest,
              const voxpatch::train::TrainOptions& opt) {
  Stopwatch sw;
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  std::vector<std::string> warnings;
  auto data = voxpatch::corpus::load_dataset(manifest, fb, cfg, &warnings);
  print_warnings(warnings);

  auto res = voxpatch::train::train(data, opt, &std::cerr);

  json epochs = json::array();
  for (const auto& e : res.epochs) {
    epochs.push_back(json{{"epoch", e.epoch},
                          {"train_loss", e.train_loss},
                          {"val_loss", e.val_loss}});
  }
  json doc{{"command", "train"},
           {"utterances", data.size()},
           {"steps", res.steps},
           {"epochs_run", res.epochs_run},
           {"best_epoch", res.best_epoch},
           {"best_val", res.best_val},
           {"best", res.best_dir.string()},
           {"last", res.last_dir.string()},
           {"curve", res.curve_csv.string()},
           {"epochs", std::move(epochs)}};
  if (!res.curve.empty()) doc["final_total"] = res.curve.back().total;
  emit(std::move(doc), sw);
  return 0;
}

int cmd_edit(const fs::path& alignment, const fs::path& audio,
             const fs::path& checkpoint, const fs::path& out,
             int insert_after_word, const std::string& phoneme_arg,
             int gl_iterations, std::uint64_t seed) {
  Stopwatch sw;
  const auto phonemes = split_whitespace(phoneme_arg);
  if (phonemes.empty()) {
    throw ValueError("--phonemes must name at least one phoneme");
  }
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  auto model = load_model(default_checkpoint(checkpoint), true);
  auto utt = load_one(alignment, audio, fb, cfg);

  auto res = voxpatch::train::infer_edit(model.net, model.stats, utt,
                                         insert_after_word, phonemes, fb, cfg,
                                         gl_iterations, seed);

  fs::create_directories(out);
  const auto wav_path = out / "edited.wav";
  voxpatch::dsp::save_wav(wav_path, res.audio);
  const auto mel_dir = out / "mel";
  voxpatch::save_mel(mel_dir, res.mel.data, res.mel.frames, res.mel.bins,
                     json{{"source", alignment.string()},
                          {"frame_offset", res.script.frame_offset},
                          {"new_frames", res.script.new_frames},
                          {"durations", res.durations.frames}});
  emit(json{{"command", "edit"},
            {"audio", wav_path.string()},
            {"mel", mel_dir.string()},
            {"insert_after_word", insert_after_word},
            {"phonemes", phonemes},
            {"frame_offset", res.script.frame_offset},
            {"frames_inserted", res.script.new_frames},
            {"durations", res.durations.frames},
            {"samples", res.audio.samples.size()}},
       sw);
  return 0;
}

int cmd_resynth(const fs::path& alignment, const fs::path& audio,
                const fs::path& checkpoint, const fs::path& out,
                int gl_iterations, std::uint64_t seed) {
  Stopwatch sw;
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  auto model = load_model(default_checkpoint(checkpoint), true);
  auto utt = load_one(alignment, audio, fb, cfg);

  auto res = voxpatch::train::resynth_all(model.net, model.stats, utt, fb,
                                          cfg, gl_iterations, seed);

  fs::create_directories(out);
  const auto wav_path = out / "resynth.wav";
  voxpatch::dsp::save_wav(wav_path, res.audio);
  json words = json::array();
  for (const auto& w : res.words) words.push_back(provenance_json(w));
  const auto mel_dir = out / "mel";
  voxpatch::save_mel(mel_dir, res.mel.data, res.mel.frames, res.mel.bins,
                     json{{"source", alignment.string()}, {"words", words}});
  emit(json{{"command", "resynth"},
            {"audio", wav_path.string()},
            {"mel", mel_dir.string()},
            {"frames", res.mel.frames},
            {"samples", res.audio.samples.size()},
            {"words", std::move(words)}},
       sw);
  return 0;
}

int cmd_eval_dur(const fs::path& manifest, const fs::path& checkpoint,
                 std::uint64_t seed) {
  Stopwatch sw;
  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate);
  auto model = load_model(default_checkpoint(checkpoint), false);
  std::vector<std::string> warnings;
  auto data = voxpatch::corpus::load_dataset(manifest, fb, cfg, &warnings);
  print_warnings(warnings);
  if (data.empty()) throw ValueError("manifest lists no utterances");

  auto report = voxpatch::train::eval_duration(model.net, data, seed);
  json doc = report.to_json();
  doc["command"] = "eval-dur";
  doc["utterances"] = data.size();
  emit(std::move(doc), sw);
  return 0;
}

int cmd_vocode(const fs::path& in, const fs::path& out, int gl_iterations,
               std::uint64_t seed) {
  Stopwatch sw;
  auto archive = voxpatch::load_mel(in);
  voxpatch::dsp::Mel mel;
  mel.frames = archive.frames;
  mel.bins = archive.bins;
  mel.data = std::move(archive.data);

  voxpatch::dsp::StftConfig cfg;
  auto fb = voxpatch::dsp::build_mel_filterbank(cfg.n_fft, cfg.sample_rate,
                                                mel.bins);
  auto clip = voxpatch::train::vocode_mel(mel, fb, cfg, gl_iterations, seed);
  voxpatch::dsp::save_wav(out, clip);
  emit(json{{"command", "vocode"},
            {"out", out.string()},
            {"frames", mel.frames},
            {"samples", clip.samples.size()},
            {"audio_seconds", clip.duration_seconds()}},
       sw);
  return 0;
}

int run_guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ValueError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "voxpatch: insert words into a recording by predicting their "
      "durations and spectrogram from the surrounding sentence"};
  app.require_subcommand(1);

  // mel -------------------------------------------------------------
  fs::path mel_in, mel_out;
  auto* mel = app.add_subcommand(
      "mel", "Compute a log-mel spectrogram archive from a WAV file");
  mel->add_option("--in", mel_in, "input WAV file")->required();
  mel->add_option("--out", mel_out, "output mel archive directory")
      ->required();

  // train -----------------------------------------------------------
  fs::path train_manifest, train_config;
  voxpatch::train::TrainOptions opt;
  auto* train = app.add_subcommand(
      "train", "Train the insertion model on an utterance manifest");
  train->add_option("--manifest", train_manifest,
                    "newline-delimited JSON manifest of alignments")
      ->required();
  train->add_option("--out", opt.out_dir, "checkpoint output directory")
      ->required();
  train->add_option("--seed", opt.seed, "random seed")->required();
  train->add_option("--epochs", opt.epochs, "training epochs");
  train->add_option("--max-steps", opt.max_steps,
                    "stop after this many optimizer steps (0: no cap)");
  train->add_option("--batch-size", opt.batch_size,
                    "examples per optimizer step");
  train->add_option("--lr", opt.lr, "Adam learning rate");
  train->add_option("--val-fraction", opt.val_fraction,
                    "fraction of utterances held out for best-checkpoint "
                    "selection");
  train->add_option("--init-from", opt.init_from,
                    "checkpoint directory to continue training from");
  train->add_option("--config", train_config,
                    "model config JSON (explicit flags below override it)");
  int ov_embed = 0, ov_hidden = 0, ov_heads = 0, ov_text_layers = 0,
      ov_spec_layers = 0, ov_dec_layers = 0, ov_cnn_layers = 0,
      ov_cnn_kernel = 0, ov_ffn = 0;
  double ov_dropout = 0.0;
  train->add_option("--embed-dim", ov_embed, "phoneme embedding width");
  train->add_option("--hidden-dim", ov_hidden, "transformer width");
  train->add_option("--heads", ov_heads, "attention heads");
  train->add_option("--text-layers", ov_text_layers, "text encoder layers");
  train->add_option("--spec-layers", ov_spec_layers,
                    "spectrogram encoder layers");
  train->add_option("--decoder-layers", ov_dec_layers, "decoder layers");
  train->add_option("--cnn-layers", ov_cnn_layers, "text CNN layers");
  train->add_option("--cnn-kernel", ov_cnn_kernel, "text CNN kernel width");
  train->add_option("--ffn-dim", ov_ffn, "feed-forward inner width");
  train->add_option("--dropout", ov_dropout, "CNN dropout rate");

  // edit ------------------------------------------------------------
  fs::path edit_alignment, edit_audio, edit_checkpoint, edit_out;
  int edit_after = 0;
  std::string edit_phonemes;
  int edit_gl = 60;
  std::uint64_t edit_seed = 0;
  auto* edit = app.add_subcommand(
      "edit", "Insert phonemes after a word and splice the synthesized "
              "audio into the recording");
  edit->add_option("--alignment", edit_alignment, "alignment JSON file")
      ->required();
  edit->add_option("--audio", edit_audio,
                   "WAV file (default: the path named in the alignment)");
  edit->add_option("--checkpoint", edit_checkpoint,
                   std::string("trained checkpoint directory (default: $") +
                       kCheckpointEnv + ")");
  edit->add_option("--out", edit_out, "output directory")->required();
  edit->add_option("--insert-after-word", edit_after,
                   "word index the insertion follows (-1: before the first "
                   "word)")
      ->required();
  edit->add_option("--phonemes", edit_phonemes,
                   "space-separated ARPAbet labels to insert")
      ->required();
  edit->add_option("--gl-iterations", edit_gl, "Griffin-Lim iterations")
      ->check(CLI::Range(1, 100000));
  edit->add_option("--seed", edit_seed, "random seed")->required();

  // resynth ---------------------------------------------------------
  fs::path rs_alignment, rs_audio, rs_checkpoint, rs_out;
  int rs_gl = 60;
  std::uint64_t rs_seed = 0;
  auto* resynth = app.add_subcommand(
      "resynth", "Resynthesize every word from sentence context");
  resynth->add_option("--alignment", rs_alignment, "alignment JSON file")
      ->required();
  resynth->add_option("--audio", rs_audio,
                      "WAV file (default: the path named in the alignment)");
  resynth->add_option("--checkpoint", rs_checkpoint,
                      std::string("trained checkpoint directory (default: "
                                  "$") +
                          kCheckpointEnv + ")");
  resynth->add_option("--out", rs_out, "output directory")->required();
  resynth->add_option("--gl-iterations", rs_gl, "Griffin-Lim iterations")
      ->check(CLI::Range(1, 100000));
  resynth->add_option("--seed", rs_seed, "random seed")->required();

  // eval-dur --------------------------------------------------------
  fs::path ev_manifest, ev_checkpoint;
  std::uint64_t ev_seed = 0;
  auto* eval_dur = app.add_subcommand(
      "eval-dur", "Score predicted durations of masked words against the "
                  "alignment");
  eval_dur->add_option("--manifest", ev_manifest, "utterance manifest")
      ->required();
  eval_dur->add_option("--checkpoint", ev_checkpoint,
                       std::string("checkpoint directory (default: $") +
                           kCheckpointEnv + ")");
  eval_dur->add_option("--seed", ev_seed, "random seed")->required();

  // vocode ----------------------------------------------------------
  fs::path vc_in, vc_out;
  int vc_gl = 60;
  std::uint64_t vc_seed = 0;
  auto* vocode = app.add_subcommand(
      "vocode", "Reconstruct a waveform from a mel archive");
  vocode->add_option("--in", vc_in, "mel archive directory")->required();
  vocode->add_option("--out", vc_out, "output WAV file")->required();
  vocode->add_option("--gl-iterations", vc_gl, "Griffin-Lim iterations")
      ->check(CLI::Range(1, 100000));
  vocode->add_option("--seed", vc_seed, "random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // help to stdout, errors to stderr
    return code == 0 ? 0 : 1;
  }

  if (mel->parsed()) {
    return run_guarded([&] { return cmd_mel(mel_in, mel_out); });
  }
  if (train->parsed()) {
    return run_guarded([&] {
      if (!train_config.empty()) {
        opt.model = voxpatch::model::ModelConfig::load_file(train_config);
      }
      if (train->count("--embed-dim")) opt.model.phoneme_embed_dim = ov_embed;
      if (train->count("--hidden-dim")) opt.model.hidden_dim = ov_hidden;
      if (train->count("--heads")) opt.model.heads = ov_heads;
      if (train->count("--text-layers")) {
        opt.model.text_encoder_layers = ov_text_layers;
      }
      if (train->count("--spec-layers")) {
        opt.model.spec_encoder_layers = ov_spec_layers;
      }
      if (train->count("--decoder-layers")) {
        opt.model.decoder_layers = ov_dec_layers;
      }
      if (train->count("--cnn-layers")) opt.model.cnn_layers = ov_cnn_layers;
      if (train->count("--cnn-kernel")) opt.model.cnn_kernel = ov_cnn_kernel;
      if (train->count("--ffn-dim")) opt.model.ffn_inner_dim = ov_ffn;
      if (train->count("--dropout")) opt.model.dropout = ov_dropout;
      return cmd_train(train_manifest, opt);
    });
  }
  if (edit->parsed()) {
    return run_guarded([&] {
      return cmd_edit(edit_alignment, edit_audio, edit_checkpoint, edit_out,
                      edit_after, edit_phonemes, edit_gl, edit_seed);
    });
  }
  if (resynth->parsed()) {
    return run_guarded([&] {
      return cmd_resynth(rs_alignment, rs_audio, rs_checkpoint, rs_out,
                         rs_gl, rs_seed);
    });
  }
  if (eval_dur->parsed()) {
    return run_guarded(
        [&] { return cmd_eval_dur(ev_manifest, ev_checkpoint, ev_seed); });
  }
  if (vocode->parsed()) {
    return run_guarded(
        [&] { return cmd_vocode(vc_in, vc_out, vc_gl, vc_seed); });
  }
  std::cerr << "error: no command selected\n";
  return 1;
}
