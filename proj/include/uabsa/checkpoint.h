// Copyright 2026 The uabsa Authors.
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

#ifndef UABSA_CHECKPOINT_H_
#define UABSA_CHECKPOINT_H_

// Checkpoint layout (all integers and floats little-endian):
//
//   char[8]  magic "UABSALCF"
//   u32      format version (1)
//   u32 x 8  vocab_size, d_model, n_heads, n_layers, ffn_dim, max_len,
//            srd_threshold, lcf_mode
//   f32      dropout
//   u64      seed
//   u32      tensor count
//   per tensor, in Parameters::visit order: u32 rows, u32 cols, f32[rows*cols]
//
// A JSON manifest "<path>.json" records config and vocabulary alongside the
// tensor names; "<path>.vocab" holds the vocabulary one token per line.

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "uabsa/error.h"
#include "uabsa/io.h"
#include "uabsa/model.h"

namespace uabsa {

inline constexpr char kCheckpointMagic[8] = {'U', 'A', 'B', 'S', 'A', 'L', 'C', 'F'};
inline constexpr uint32_t kCheckpointVersion = 1;

namespace internal {

inline void put_u32(std::string &out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string &out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_f32(std::string &out, float f) { put_u32(out, std::bit_cast<uint32_t>(f)); }

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(byte(pos_ + i)) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string_view take(size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  uint8_t byte(size_t i) const { return static_cast<uint8_t>(bytes_[i]); }
  void need(size_t n) const {
    if (pos_ + n > bytes_.size()) throw ParseError("checkpoint truncated");
  }
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace internal

template <typename T>
std::string encode_checkpoint(const LcfModel<T> &model) {
  const ModelConfig &c = model.config();
  std::string out(kCheckpointMagic, sizeof(kCheckpointMagic));
  internal::put_u32(out, kCheckpointVersion);
  internal::put_u32(out, static_cast<uint32_t>(c.vocab_size));
  internal::put_u32(out, static_cast<uint32_t>(c.d_model));
  internal::put_u32(out, static_cast<uint32_t>(c.n_heads));
  internal::put_u32(out, static_cast<uint32_t>(c.n_layers));
  internal::put_u32(out, static_cast<uint32_t>(c.ffn()));
  internal::put_u32(out, static_cast<uint32_t>(c.max_len));
  internal::put_u32(out, static_cast<uint32_t>(c.srd_threshold));
  internal::put_u32(out, static_cast<uint32_t>(c.lcf_mode));
  internal::put_f32(out, static_cast<float>(c.dropout));
  internal::put_u64(out, c.seed);
  const auto tensors = model.params().tensors();
  internal::put_u32(out, static_cast<uint32_t>(tensors.size()));
  for (const Matrix<T> *m : tensors) {
    internal::put_u32(out, static_cast<uint32_t>(m->rows()));
    internal::put_u32(out, static_cast<uint32_t>(m->cols()));
    for (T v : m->values()) internal::put_f32(out, static_cast<float>(v));
  }
  return out;
}

inline nlohmann::ordered_json config_to_json(const ModelConfig &c) {
  nlohmann::ordered_json j;
  j["vocab_size"] = c.vocab_size;
  j["d_model"] = c.d_model;
  j["n_heads"] = c.n_heads;
  j["n_layers"] = c.n_layers;
  j["ffn_dim"] = c.ffn();
  j["max_len"] = c.max_len;
  j["srd_threshold"] = alpha_to_string(c.srd_threshold);
  j["lcf_mode"] = std::string(to_string(c.lcf_mode));
  j["dropout"] = c.dropout;
  j["seed"] = c.seed;
  return j;
}

template <typename T>
std::string manifest_json(const LcfModel<T> &model) {
  nlohmann::ordered_json j;
  j["format"] = "uabsa-lcf-checkpoint";
  j["version"] = kCheckpointVersion;
  j["config"] = config_to_json(model.config());
  j["vocab"] = model.vocab().tokens();
  nlohmann::ordered_json tensors = nlohmann::ordered_json::array();
  const auto names = model.params().names();
  const auto mats = model.params().tensors();
  for (size_t i = 0; i < names.size(); ++i) {
    tensors.push_back({{"name", names[i]}, {"shape", {mats[i]->rows(), mats[i]->cols()}}});
  }
  j["tensors"] = std::move(tensors);
  return j.dump(2) + "\n";
}

template <typename T>
void save_checkpoint(const LcfModel<T> &model, const std::filesystem::path &path) {
  internal::write_file(path, encode_checkpoint(model));
  internal::write_file(path.string() + ".json", manifest_json(model));
  internal::write_file(path.string() + ".vocab", model.vocab().to_text());
}

inline LcfModel<float> decode_checkpoint(std::string_view bytes, Vocabulary vocab) {
  internal::ByteReader r(bytes);
  if (r.take(8) != std::string_view(kCheckpointMagic, 8)) {
    throw ParseError("not a uabsa checkpoint (bad magic)");
  }
  if (uint32_t v = r.u32(); v != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(v));
  }
  ModelConfig c;
  c.vocab_size = static_cast<int>(r.u32());
  c.d_model = static_cast<int>(r.u32());
  c.n_heads = static_cast<int>(r.u32());
  c.n_layers = static_cast<int>(r.u32());
  c.ffn_dim = static_cast<int>(r.u32());
  c.max_len = static_cast<int>(r.u32());
  c.srd_threshold = static_cast<int>(r.u32());
  uint32_t mode = r.u32();
  if (mode > 2) throw ParseError("bad LCF mode in checkpoint");
  c.lcf_mode = static_cast<LcfMode>(mode);
  c.dropout = r.f32();
  c.seed = r.u64();
  c.validate();

  Parameters<float> params = Parameters<float>::shaped(c);
  auto tensors = params.tensors();
  if (r.u32() != tensors.size()) throw ParseError("checkpoint tensor count mismatch");
  for (Matrix<float> *m : tensors) {
    const int rows = static_cast<int>(r.u32());
    const int cols = static_cast<int>(r.u32());
    if (rows != m->rows() || cols != m->cols()) {
      throw ParseError("checkpoint tensor shape mismatch");
    }
    for (float &v : m->values()) v = r.f32();
  }
  if (!r.done()) throw ParseError("trailing bytes after checkpoint tensors");
  return LcfModel<float>(c, std::move(vocab), std::move(params));
}

inline LcfModel<float> load_checkpoint(const std::filesystem::path &path) {
  if (!std::filesystem::exists(path)) {
    throw NotFoundError("checkpoint not found: " + path.string());
  }
  const std::string bytes = internal::read_file(path);
  const std::string manifest = internal::read_file(path.string() + ".json");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(manifest);
  } catch (const nlohmann::json::exception &e) {
    throw ParseError(std::string("checkpoint manifest: ") + e.what());
  }
  if (!j.contains("vocab") || !j["vocab"].is_array()) {
    throw ParseError("checkpoint manifest lacks a vocab array");
  }
  return decode_checkpoint(bytes,
                           Vocabulary::from_tokens(j["vocab"].get<std::vector<std::string>>()));
}

}  // namespace uabsa

#endif  // UABSA_CHECKPOINT_H_
