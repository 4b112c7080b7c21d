// Copyright 2026 The Morphtag Authors
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

#include "morphtag/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace morphtag {

namespace {

constexpr char kMagic[4] = {'M', 'T', 'C', 'P'};
constexpr std::uint32_t kFormatVersion = 1;
constexpr std::uint8_t kDtypeF64 = 0;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const auto* p = take(2);
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
  }
  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  std::uint64_t u64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str(std::size_t n) {
    const auto* p = take(n);
    return std::string(reinterpret_cast<const char*>(p), n);
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) {
      throw IoError(source_ + ": truncated checkpoint");
    }
    const auto* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }
  const std::vector<std::uint8_t>& bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

nlohmann::json model_meta(const TaggerModel& model) {
  return nlohmann::json{
      {"format", "morphtag-checkpoint"},
      {"model",
       {{"kind", to_string(model.kind)},
        {"context", to_string(model.context)},
        {"feature_level", to_string(model.features.level)},
        {"lowercase", model.features.lowercase},
        {"embedding_dim", model.features.embedding_dim},
        {"hidden_size", model.hidden_size},
        {"dropout", model.dropout_p},
        {"segmentation", to_string(model.segmentation)},
        {"language", model.language_id}}},
      {"vocabulary", model.vocab.to_text()},
  };
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const TaggerModel& model) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kFormatVersion);

  const std::string meta = model_meta(model).dump();
  put_u64(out, meta.size());
  out.insert(out.end(), meta.begin(), meta.end());

  const auto params = model.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    put_u16(out, static_cast<std::uint16_t>(p->name.size()));
    out.insert(out.end(), p->name.begin(), p->name.end());
    out.push_back(kDtypeF64);
    put_u32(out, 2);
    put_u32(out, static_cast<std::uint32_t>(p->rows()));
    put_u32(out, static_cast<std::uint32_t>(p->cols()));
    for (double v : *p->value) put_f64(out, v);
  }
  return out;
}

void save_model(const TaggerModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open file for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write error: " + path);
}

TaggerModel deserialize_model(const std::vector<std::uint8_t>& bytes,
                              const std::string& source_name) {
  Reader in(bytes, source_name);
  if (in.str(4) != std::string(kMagic, 4)) {
    throw IoError(source_name + ": not a morphtag checkpoint");
  }
  if (in.u32() != kFormatVersion) {
    throw IoError(source_name + ": unsupported checkpoint version");
  }
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(in.str(in.u64()));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source_name + ": bad checkpoint metadata: " + e.what());
  }
  TaggerModel model;
  try {
    const auto& m = meta.at("model");
    Vocabulary vocab = Vocabulary::from_text(
        meta.at("vocabulary").get<std::string>(), source_name);
    FeatureConfig features;
    features.level = feature_level_from_string(m.at("feature_level"));
    features.lowercase = m.at("lowercase").get<bool>();
    features.embedding_dim = m.at("embedding_dim").get<int>();
    model = init_model(std::move(vocab), features,
                       model_kind_from_string(m.at("kind")),
                       context_mode_from_string(m.at("context")),
                       m.at("hidden_size").get<int>(),
                       m.at("dropout").get<double>(), /*seed=*/0,
                       segmentation_kind_from_string(m.at("segmentation")),
                       m.at("language").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(source_name + ": bad checkpoint metadata: " + e.what());
  }

  const auto params = model.parameters();
  const std::uint32_t n_entries = in.u32();
  if (n_entries != params.size()) {
    throw IoError(source_name + ": checkpoint has " +
                  std::to_string(n_entries) + " entries, expected " +
                  std::to_string(params.size()));
  }
  for (Parameter* p : params) {
    const std::string name = in.str(in.u16());
    if (name != p->name) {
      throw IoError(source_name + ": unexpected entry '" + name +
                    "', expected '" + p->name + "'");
    }
    if (in.u8() != kDtypeF64) {
      throw IoError(source_name + ": unsupported dtype for " + name);
    }
    if (in.u32() != 2) {
      throw IoError(source_name + ": expected 2-d entry for " + name);
    }
    const auto rows = static_cast<int>(in.u32());
    const auto cols = static_cast<int>(in.u32());
    if (rows != p->rows() || cols != p->cols()) {
      throw IoError(source_name + ": shape mismatch for " + name);
    }
    for (double& v : *p->value) v = in.f64();
  }
  if (!in.done()) {
    throw IoError(source_name + ": trailing bytes after last entry");
  }
  return model;
}

TaggerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read error: " + path);
  return deserialize_model(bytes, path);
}

}  // namespace morphtag
