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

#ifndef VOXPATCH_TRAIN_TRAINER_HPP_
#define VOXPATCH_TRAIN_TRAINER_HPP_

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "voxpatch/corpus/dataset.hpp"
#include "voxpatch/model/config.hpp"
#include "voxpatch/train/loss.hpp"

namespace voxpatch::train {

struct TrainOptions {
  model::ModelConfig model;
  int epochs = 1;
  int max_steps = 0;  // 0: bounded by epochs only
  int batch_size = 4;
  double lr = 1e-3;
  std::uint64_t seed = 1;
  // Fraction of utterances held out for best-checkpoint selection; zero
  // keeps everything in training and tracks best by the train loss.
  double val_fraction = 0.0;
  std::filesystem::path out_dir;
  // When set, parameters start from this checkpoint (its stored config
  // wins over `model`) instead of fresh initialization.
  std::filesystem::path init_from;
};

struct EpochSummary {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct TrainResult {
  std::vector<LossReport> curve;  // one row per optimizer step, batch means
  std::vector<EpochSummary> epochs;
  std::filesystem::path best_dir;
  std::filesystem::path last_dir;
  std::filesystem::path curve_csv;
  int steps = 0;
  int epochs_run = 0;
  double best_val = 0.0;
  int best_epoch = -1;
};

// One training thread; per-epoch shuffling and masked-word resampling;
// batches accumulate per-example gradients so the update equals the mean
// of the examples' gradients. Each epoch rewrites loss.csv and the
// last/best checkpoint directories atomically. Progress lines go to `log`
// when given. Throws ValueError on an empty dataset or bad options.
TrainResult train(const std::vector<corpus::Utterance>& data,
                  const TrainOptions& opt, std::ostream* log = nullptr);

}  // namespace voxpatch::train

#endif  // VOXPATCH_TRAIN_TRAINER_HPP_
