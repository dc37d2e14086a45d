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

#ifndef VOXPATCH_MODEL_CONFIG_HPP_
#define VOXPATCH_MODEL_CONFIG_HPP_

#include <filesystem>
#include <string>

#include "json.hpp"

namespace voxpatch::model {

// Network dimensions. The defaults are the full-size configuration; tests
// shrink them to keep runtimes at desk scale.
struct ModelConfig {
  int phoneme_embed_dim = 512;
  int hidden_dim = 256;
  int heads = 4;
  int text_encoder_layers = 2;
  int spec_encoder_layers = 2;
  int decoder_layers = 5;
  int cnn_layers = 3;
  int cnn_kernel = 5;
  double dropout = 0.2;
  int ffn_inner_dim = 1024;
  int n_mels = 80;

  int head_dim() const { return hidden_dim / heads; }
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  static ModelConfig load_file(const std::filesystem::path& path);
};

bool operator==(const ModelConfig& a, const ModelConfig& b);

}  // namespace voxpatch::model

#endif  // VOXPATCH_MODEL_CONFIG_HPP_
