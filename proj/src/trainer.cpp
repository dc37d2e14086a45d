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

#include "voxpatch/train/trainer.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>

#include "voxpatch/errors.hpp"
#include "voxpatch/model/network.hpp"
#include "voxpatch/tensor/adam.hpp"
#include "voxpatch/train/mel_stats.hpp"
#include "voxpatch/train/pipeline.hpp"

namespace voxpatch::train {

namespace {

// Mirrors the qualification rule of make_training_example: at least one
// word with more than one phoneme in a single contiguous run.
bool has_qualifying_word(const corpus::Utterance& utt) {
  std::vector<int> run_count(utt.rec.words.size(), 0);
  const auto runs = corpus::word_runs(utt.framed);
  for (const auto& r : runs) run_count[static_cast<std::size_t>(r.word)] += 1;
  for (const auto& r : runs) {
    if (r.end - r.begin > 1 &&
        run_count[static_cast<std::size_t>(r.word)] == 1) {
      return true;
    }
  }
  return false;
}

std::string csv_row(const LossReport& r) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d,%.10e,%.10e,%.10e\n", r.step, r.l2_mel,
                r.l1_duration, r.total);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path,
                       const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp + " for writing");
    out << text;
    if (!out) throw IoError("short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    throw IoError("rename " + tmp + " -> " + path.string() + ": " +
                  ec.message());
  }
}

}  // namespace

TrainResult train(const std::vector<corpus::Utterance>& data,
                  const TrainOptions& opt, std::ostream* log) {
  if (data.empty()) throw ValueError("train: empty dataset");
  if (opt.batch_size < 1) throw ValueError("train: batch size must be >= 1");
  if (opt.epochs < 1) throw ValueError("train: epochs must be >= 1");
  if (opt.max_steps < 0) throw ValueError("train: max_steps must be >= 0");
  if (opt.lr < 0.0) throw ValueError("train: learning rate must be >= 0");
  if (opt.val_fraction < 0.0 || opt.val_fraction >= 1.0) {
    throw ValueError("train: val_fraction must be in [0, 1)");
  }
  if (opt.out_dir.empty()) {
    throw ValueError("train: output directory required");
  }
  opt.model.validate();
  std::filesystem::create_directories(opt.out_dir);

  Rng rng(opt.seed);
  const std::uint64_t net_seed = rng.next_u64();

  // Held-out slice for best-checkpoint selection.
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto n_val = static_cast<std::size_t>(
      opt.val_fraction * static_cast<double>(data.size()));
  if (n_val > 0) rng.shuffle(order);
  std::vector<std::size_t> train_idx(order.begin(),
                                     order.end() -
                                         static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> val_idx(order.end() -
                                       static_cast<std::ptrdiff_t>(n_val),
                                   order.end());

  // Only utterances with a maskable word can form examples.
  auto filter_qualifying = [&](std::vector<std::size_t>& idx) {
    std::size_t kept = 0;
    for (std::size_t i : idx) {
      if (has_qualifying_word(data[i])) idx[kept++] = i;
    }
    const std::size_t dropped = idx.size() - kept;
    idx.resize(kept);
    return dropped;
  };
  const auto dropped_train = filter_qualifying(train_idx);
  const auto dropped_val = filter_qualifying(val_idx);
  if (train_idx.empty()) {
    throw ValueError(
        "train: no utterance has a word with more than one phoneme");
  }
  if (log && (dropped_train || dropped_val)) {
    *log << "skipping " << (dropped_train + dropped_val)
         << " utterance(s) without a maskable word\n";
  }

  MelStats stats;
  {
    std::vector<const dsp::Mel*> mels;
    mels.reserve(train_idx.size());
    for (std::size_t i : train_idx) mels.push_back(&data[i].mel);
    stats = compute_mel_stats(mels);
  }
  std::vector<dsp::Mel> norm(data.size());
  for (std::size_t i : train_idx) norm[i] = normalize_mel(data[i].mel, stats);
  for (std::size_t i : val_idx) norm[i] = normalize_mel(data[i].mel, stats);

  std::optional<model::Network<float>> net;
  if (!opt.init_from.empty()) {
    net.emplace(model::Network<float>::load(opt.init_from));
    if (log) *log << "initialized from " << opt.init_from.string() << "\n";
  } else {
    net.emplace(opt.model, net_seed);
  }

  Adam<float> adam(net->params().tensors(), opt.lr);

  TrainResult res;
  res.best_dir = opt.out_dir / "best";
  res.last_dir = opt.out_dir / "last";
  res.curve_csv = opt.out_dir / "loss.csv";
  res.best_val = std::numeric_limits<double>::infinity();

  std::string csv = "step,l2_mel,l1_duration,total\n";
  int step = 0;
  bool stop = false;

  auto example_terms = [&](std::size_t i, bool training,
                           Rng& r) -> std::optional<LossTerms<float>> {
    auto ex = corpus::make_training_example(data[i].rec, data[i].framed, r);
    if (!ex) return std::nullopt;  // filtered up front; defensive
    auto fo = forward_example(*net, norm[i], *ex, training, r);
    auto terms = mel_duration_loss(fo.pred_mel,
                                   model::mel_to_tensor<float>(norm[i]),
                                   fo.dur_logits,
                                   log_duration_targets<float>(ex->reference));
    return terms;
  };

  for (int epoch = 0; epoch < opt.epochs && !stop; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_total = 0.0;
    std::size_t epoch_examples = 0;

    for (std::size_t at = 0; at < train_idx.size() && !stop;
         at += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t take =
          std::min(train_idx.size() - at,
                   static_cast<std::size_t>(opt.batch_size));
      LossReport rep;
      std::size_t used = 0;
      const auto inv = Tensor<float>::scalar(
          static_cast<float>(1.0 / static_cast<double>(take)));
      for (std::size_t k = 0; k < take; ++k) {
        auto terms = example_terms(train_idx[at + k], true, rng);
        if (!terms) continue;
        backward(mul(terms->total, inv));
        rep.l2_mel += terms->l2_mel.value()[0];
        rep.l1_duration += terms->l1_duration.value()[0];
        rep.total += terms->total.value()[0];
        ++used;
      }
      if (used == 0) continue;
      adam.step();
      ++step;
      rep.l2_mel /= static_cast<double>(used);
      rep.l1_duration /= static_cast<double>(used);
      rep.total /= static_cast<double>(used);
      rep.step = step;
      epoch_total += rep.total * static_cast<double>(used);
      epoch_examples += used;
      csv += csv_row(rep);
      res.curve.push_back(rep);
      if (opt.max_steps > 0 && step >= opt.max_steps) stop = true;
    }

    EpochSummary summary;
    summary.epoch = epoch;
    summary.train_loss =
        epoch_examples > 0
            ? epoch_total / static_cast<double>(epoch_examples)
            : std::numeric_limits<double>::quiet_NaN();

    if (!val_idx.empty()) {
      NoGradGuard ng;
      double total = 0.0;
      std::size_t n = 0;
      for (std::size_t i : val_idx) {
        auto terms = example_terms(i, false, rng);
        if (!terms) continue;
        total += terms->total.value()[0];
        ++n;
      }
      summary.val_loss = n > 0 ? total / static_cast<double>(n)
                               : summary.train_loss;
    } else {
      summary.val_loss = summary.train_loss;
    }
    res.epochs.push_back(summary);
    res.epochs_run = epoch + 1;

    nlohmann::json meta;
    meta["mel_stats"] = stats.to_json();
    meta["train"] = {{"epoch", epoch},
                     {"step", step},
                     {"val_loss", summary.val_loss},
                     {"seed", opt.seed}};
    net->save(res.last_dir, meta);
    if (summary.val_loss < res.best_val) {
      res.best_val = summary.val_loss;
      res.best_epoch = epoch;
      net->save(res.best_dir, meta);
    }
    write_text_atomic(res.curve_csv, csv);

    if (log) {
      char line[160];
      std::snprintf(line, sizeof(line),
                    "epoch %d step %d train %.6f val %.6f\n", epoch, step,
                    summary.train_loss, summary.val_loss);
      *log << line << std::flush;
    }
  }

  res.steps = step;
  return res;
}

}  // namespace voxpatch::train
