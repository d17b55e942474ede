//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <bit>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "chemlm/checkpoint.h"

namespace chemlm {
namespace {

using Json = nlohmann::ordered_json;

void put_u64(std::string &out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i)
    out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char *p) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i)
    x |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return x;
}

void put_f32(std::string &out, double value) {
  const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(value));
  for (int i = 0; i < 4; ++i)
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

float get_f32(const unsigned char *p) {
  std::uint32_t bits = 0;
  for (int i = 0; i < 4; ++i)
    bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return std::bit_cast<float>(bits);
}

Json config_json(const ModelConfig &c) {
  return { { "n_layers", c.n_layers }, { "n_heads", c.n_heads }, { "n_ctx", c.n_ctx },
           { "d_model", c.d_model }, { "d_ff", c.d_ff }, { "vocab_size", c.vocab_size },
           { "rope_base", c.rope_base }, { "norm_eps", c.norm_eps } };
}

ModelConfig config_from(const Json &j) {
  ModelConfig c;
  c.n_layers = j.at("n_layers").get<int>();
  c.n_heads = j.at("n_heads").get<int>();
  c.n_ctx = j.at("n_ctx").get<int>();
  c.d_model = j.at("d_model").get<int>();
  c.d_ff = j.at("d_ff").get<int>();
  c.vocab_size = j.at("vocab_size").get<int>();
  c.rope_base = j.at("rope_base").get<double>();
  c.norm_eps = j.at("norm_eps").get<double>();
  c.validate();
  return c;
}

void write_container(const std::filesystem::path &path, const ModelParams &p,
                     const Vocabulary &v, std::string_view extra_json, bool adapter_only,
                     std::string_view base_digest) {
  Json meta;
  meta["format"] = 1;
  meta["adapter_only"] = adapter_only;
  if (adapter_only)
    meta["base_digest"] = std::string(base_digest);
  meta["config"] = config_json(p.config);
  meta["vocabulary"] = Json::parse(v.to_json());
  meta["vocabulary_hash"] = hex64(v.hash());
  Json stats = Json::object();
  for (const auto &[name, ms]: p.cond_stats.mean_std)
    stats[name] = { ms.first, ms.second };
  meta["condition_stats"] = stats;
  meta["lora"] = p.lora ? Json{ { "rank", p.lora->rank }, { "alpha", p.lora->alpha },
                                { "dropout", p.lora->dropout } }
                        : Json(nullptr);
  meta["start_distribution"] = p.start_distribution;
  try {
    meta["extra"] = Json::parse(extra_json.empty() ? std::string_view("{}") : extra_json);
  } catch (const Json::exception &e) {
    throw CheckpointError(std::string("extra metadata is not JSON: ") + e.what());
  }

  std::string payload;
  Json manifest = Json::array();
  for (const TensorView &t: tensor_views(p)) {
    if (adapter_only && !t.trainable)
      continue;
    manifest.push_back({ { "name", t.name }, { "shape", { t.rows, t.cols } },
                         { "offset", payload.size() } });
    for (Eigen::Index i = 0; i < t.size(); ++i)
      put_f32(payload, t.data[i]);
  }
  meta["tensors"] = manifest;

  const std::string header = meta.dump();
  std::string bytes(kCheckpointMagic);
  put_u64(bytes, header.size());
  bytes += header;
  bytes += payload;

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw CheckpointError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
      throw CheckpointError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw CheckpointError("cannot move checkpoint into place: " + ec.message());
}

struct Container {
  Json meta;
  std::string payload;
};

Container read_container(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t magic = kCheckpointMagic.size();
  if (bytes.size() < magic + 8 || std::string_view(bytes).substr(0, magic) != kCheckpointMagic)
    throw CheckpointError(path.string() + " is not a checkpoint");
  const std::uint64_t len = get_u64(reinterpret_cast<const unsigned char *>(bytes.data() + magic));
  if (len > bytes.size() - magic - 8)
    throw CheckpointError("truncated checkpoint metadata");
  Container c;
  try {
    c.meta = Json::parse(bytes.substr(magic + 8, len));
  } catch (const Json::exception &e) {
    throw CheckpointError(std::string("corrupt checkpoint metadata: ") + e.what());
  }
  c.payload = bytes.substr(magic + 8 + len);
  return c;
}

Vocabulary read_vocabulary(const Json &meta) {
  Vocabulary v;
  try {
    v = Vocabulary::from_json(meta.at("vocabulary").dump());
  } catch (const std::exception &e) {
    throw CheckpointError(std::string("bad vocabulary: ") + e.what());
  }
  if (hex64(v.hash()) != meta.at("vocabulary_hash").get<std::string>())
    throw CheckpointError("vocabulary hash mismatch");
  return v;
}

void read_common(const Json &meta, ModelParams &p) {
  p.cond_stats = {};
  for (const auto &[name, ms]: meta.at("condition_stats").items())
    p.cond_stats.mean_std[name] = { ms.at(0).get<double>(), ms.at(1).get<double>() };
  p.start_distribution = meta.at("start_distribution").get<std::vector<double>>();
}

// Creates the optional tensors named in the manifest, then copies the data.
// Every tensor for which `required` holds must be present.
template <typename Required>
void fill_tensors(ModelParams &p, const Container &c, Required required) {
  for (const Json &entry: c.meta.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    const auto rows = entry.at("shape").at(0).get<Eigen::Index>();
    const auto cols = entry.at("shape").at(1).get<Eigen::Index>();
    if (name == "head") {
      p.head = Matrix(rows, cols);
    } else if (name == "value.weight") {
      p.value_weight = Vector(rows);
    } else if (name == "value.bias") {
      p.value_bias = Vector(rows);
    } else if (name.rfind("lora.", 0) == 0) {
      int layer = 0;
      char target[16] = {};
      char which = 0;
      if (std::sscanf(name.c_str(), "lora.%d.%15[a-z].%c", &layer, target, &which) != 3
          || layer < 0 || layer >= p.config.n_layers)
        throw CheckpointError("bad adapter tensor name " + name);
      int t = 0;
      while (t < kNumLoraTargets && std::string_view(lora_target_name(t)) != target)
        ++t;
      if (t == kNumLoraTargets)
        throw CheckpointError("bad adapter tensor name " + name);
      LoraAdapter &ad = p.layers[layer].lora[t];
      (which == 'a' ? ad.a : ad.b).resize(rows, cols);
    }
  }

  std::map<std::string, TensorView> views;
  for (const TensorView &t: tensor_views(p))
    views.emplace(t.name, t);
  std::set<std::string> seen;
  for (const Json &entry: c.meta.at("tensors")) {
    const std::string name = entry.at("name").get<std::string>();
    auto it = views.find(name);
    if (it == views.end())
      throw CheckpointError("unexpected tensor " + name);
    const TensorView &t = it->second;
    if (entry.at("shape").at(0).get<Eigen::Index>() != t.rows
        || entry.at("shape").at(1).get<Eigen::Index>() != t.cols)
      throw CheckpointError("shape mismatch for " + name);
    const auto offset = entry.at("offset").get<std::size_t>();
    if (offset + 4 * static_cast<std::size_t>(t.size()) > c.payload.size())
      throw CheckpointError("truncated tensor data for " + name);
    const auto *src = reinterpret_cast<const unsigned char *>(c.payload.data() + offset);
    for (Eigen::Index i = 0; i < t.size(); ++i)
      t.data[i] = get_f32(src + 4 * i);
    seen.insert(name);
  }
  for (const auto &[name, t]: views) {
    if (required(t) && !seen.count(name))
      throw CheckpointError("missing tensor " + name);
  }
}

std::optional<LoraConfig> lora_from(const Json &j) {
  if (j.is_null())
    return std::nullopt;
  LoraConfig cfg;
  cfg.rank = j.at("rank").get<int>();
  cfg.alpha = j.at("alpha").get<double>();
  cfg.dropout = j.at("dropout").get<double>();
  return cfg;
}

}  // namespace

std::string hex64(std::uint64_t x) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(x));
  return buf;
}

void save_checkpoint(const std::filesystem::path &path, const ModelParams &p,
                     const Vocabulary &v, std::string_view extra_json) {
  if (v.size() != p.config.vocab_size)
    throw CheckpointError("vocabulary size differs from the model");
  write_container(path, p, v, extra_json, false, {});
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path &path) {
  const Container c = read_container(path);
  try {
    if (c.meta.at("adapter_only").get<bool>())
      throw CheckpointError(path.string() + " holds adapters only");
    LoadedCheckpoint out;
    out.vocab = read_vocabulary(c.meta);
    ModelParams &p = out.params;
    p.config = config_from(c.meta.at("config"));
    if (out.vocab.size() != p.config.vocab_size)
      throw CheckpointError("vocabulary size differs from the model");
    p = init_model(p.config, 0);
    p.lora = lora_from(c.meta.at("lora"));
    read_common(c.meta, p);
    fill_tensors(p, c, [](const TensorView &) { return true; });
    out.extra_json = c.meta.at("extra").dump();
    return out;
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("malformed checkpoint metadata: ") + e.what());
  }
}

void save_adapter_checkpoint(const std::filesystem::path &path, const ModelParams &p,
                             const Vocabulary &v, std::string_view base_digest,
                             std::string_view extra_json) {
  if (!p.lora)
    throw CheckpointError("model has no adapters");
  write_container(path, p, v, extra_json, true, base_digest);
}

LoadedCheckpoint load_adapter_checkpoint(const std::filesystem::path &path,
                                         const ModelParams &base,
                                         std::string_view expected_base_digest) {
  const Container c = read_container(path);
  try {
    if (!c.meta.at("adapter_only").get<bool>())
      throw CheckpointError(path.string() + " is not an adapter checkpoint");
    if (base.lora)
      throw CheckpointError("base model already has adapters");
    const auto recorded = c.meta.at("base_digest").get<std::string>();
    if (!expected_base_digest.empty() && recorded != expected_base_digest)
      throw CheckpointError("adapter was trained on base " + recorded + ", not "
                            + std::string(expected_base_digest));
    const ModelConfig config = config_from(c.meta.at("config"));
    if (!(config == base.config))
      throw CheckpointError("adapter config differs from the base model");
    LoadedCheckpoint out;
    out.vocab = read_vocabulary(c.meta);
    out.params = base;
    ModelParams &p = out.params;
    p.lora = lora_from(c.meta.at("lora"));
    if (!p.lora)
      throw CheckpointError("adapter checkpoint without adapter config");
    read_common(c.meta, p);
    fill_tensors(p, c, [](const TensorView &t) { return t.trainable; });
    out.extra_json = c.meta.at("extra").dump();
    return out;
  } catch (const nlohmann::json::exception &e) {
    throw CheckpointError(std::string("malformed checkpoint metadata: ") + e.what());
  }
}

std::string file_digest(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw CheckpointError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  return hex64(h);
}

void round_to_float(ModelParams &p) {
  for (TensorView &t: tensor_views(p)) {
    for (Eigen::Index i = 0; i < t.size(); ++i)
      t.data[i] = static_cast<float>(t.data[i]);
  }
}

}  // namespace chemlm
