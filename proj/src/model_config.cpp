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

#include "voxpatch/model/config.hpp"

#include <fstream>
#include <sstream>

#include "voxpatch/errors.hpp"

namespace voxpatch::model {

void ModelConfig::validate() const {
  if (hidden_dim <= 0 || heads <= 0 || hidden_dim % heads != 0) {
    throw ValueError("model config: hidden_dim must be divisible by heads");
  }
  if (cnn_kernel <= 0 || cnn_kernel % 2 == 0) {
    throw ValueError("model config: cnn_kernel must be odd");
  }
  if (phoneme_embed_dim <= 0 || text_encoder_layers < 0 ||
      spec_encoder_layers < 0 || decoder_layers <= 0 || cnn_layers < 0 ||
      ffn_inner_dim <= 0 || n_mels <= 0) {
    throw ValueError("model config: dimensions must be positive");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw ValueError("model config: dropout must be in [0, 1)");
  }
}

nlohmann::json ModelConfig::to_json() const {
  return nlohmann::json{{"phoneme_embed_dim", phoneme_embed_dim},
                        {"hidden_dim", hidden_dim},
                        {"heads", heads},
                        {"text_encoder_layers", text_encoder_layers},
                        {"spec_encoder_layers", spec_encoder_layers},
                        {"decoder_layers", decoder_layers},
                        {"cnn_layers", cnn_layers},
                        {"cnn_kernel", cnn_kernel},
                        {"dropout", dropout},
                        {"ffn_inner_dim", ffn_inner_dim},
                        {"n_mels", n_mels}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  ModelConfig cfg;
  if (!j.is_object()) throw ParseError("model config: expected an object");
  auto read_int = [&j](const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) {
      throw ParseError(std::string("model config: \"") + key +
                       "\" must be an integer");
    }
    return j[key].get<int>();
  };
  cfg.phoneme_embed_dim = read_int("phoneme_embed_dim", cfg.phoneme_embed_dim);
  cfg.hidden_dim = read_int("hidden_dim", cfg.hidden_dim);
  cfg.heads = read_int("heads", cfg.heads);
  cfg.text_encoder_layers =
      read_int("text_encoder_layers", cfg.text_encoder_layers);
  cfg.spec_encoder_layers =
      read_int("spec_encoder_layers", cfg.spec_encoder_layers);
  cfg.decoder_layers = read_int("decoder_layers", cfg.decoder_layers);
  cfg.cnn_layers = read_int("cnn_layers", cfg.cnn_layers);
  cfg.cnn_kernel = read_int("cnn_kernel", cfg.cnn_kernel);
  cfg.ffn_inner_dim = read_int("ffn_inner_dim", cfg.ffn_inner_dim);
  cfg.n_mels = read_int("n_mels", cfg.n_mels);
  if (j.contains("dropout")) {
    if (!j["dropout"].is_number()) {
      throw ParseError("model config: \"dropout\" must be a number");
    }
    cfg.dropout = j["dropout"].get<double>();
  }
  cfg.validate();
  return cfg;
}

ModelConfig ModelConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read model config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return from_json(j);
}

bool operator==(const ModelConfig& a, const ModelConfig& b) {
  return a.to_json() == b.to_json();
}

}  // namespace voxpatch::model
