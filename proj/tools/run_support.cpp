//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include "run_support.h"

#include <charconv>
#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include "chemlm/checkpoint.h"
#include "chemlm/parallel.h"

namespace chemlm::cli {
namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_commas(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ','))
    out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',')
    out.emplace_back();
  return out;
}

double parse_real(const std::string &text, const std::string &what) {
  double x = 0.0;
  const char *end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, x);
  if (ec != std::errc() || ptr != end)
    throw DataError(what + ": '" + text + "' is not a number");
  return x;
}

}  // namespace

RunManifest::RunManifest(std::string command) : command_(std::move(command)) {}

void RunManifest::set_config(const std::optional<fs::path> &path) {
  if (path)
    config_ = path->string();
}

void RunManifest::add_seed(const std::string &name, std::uint64_t seed) { seeds_[name] = seed; }
void RunManifest::add_input(const fs::path &path) { inputs_.push_back(path.string()); }
void RunManifest::add_output(const fs::path &path) { outputs_.push_back(path.string()); }
void RunManifest::set_vocabulary(std::uint64_t hash) { vocab_hash_ = hex64(hash); }

void RunManifest::add_checkpoint(const fs::path &path) {
  checkpoints_[path.string()] = file_digest(path);
}

fs::path RunManifest::write(const fs::path &primary) const {
  Json j;
  j["command"] = command_;
  j["config"] = config_ ? Json(*config_) : Json(nullptr);
  j["seeds"] = seeds_;
  j["inputs"] = inputs_;
  j["outputs"] = outputs_;
  j["vocabulary_hash"] = vocab_hash_ ? Json(*vocab_hash_) : Json(nullptr);
  j["checkpoints"] = checkpoints_;
  j["threads"] = thread_count();
  j["timestamp"] = utc_timestamp();
  if (!extra_.empty())
    j["details"] = extra_;
  const fs::path out = manifest_path(primary);
  write_text(out, j.dump(2) + "\n");
  return out;
}

fs::path manifest_path(const fs::path &primary) { return sibling(primary, ".manifest.json"); }

fs::path sibling(const fs::path &primary, const std::string &suffix) {
  fs::path p = primary;
  p += suffix;
  return p;
}

std::vector<std::string> read_lines(const fs::path &path) {
  std::ifstream in(path);
  if (!in)
    throw DataError("cannot read " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

void write_text(const fs::path &path, const std::string &text) {
  if (path.has_parent_path())
    fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
    throw DataError("cannot write " + path.string());
}

CsvTable read_csv(const fs::path &path) {
  const std::vector<std::string> lines = read_lines(path);
  CsvTable t;
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty())
    ++i;
  if (i == lines.size())
    throw DataError(path.string() + " has no header row");
  t.header = split_commas(lines[i]);
  for (++i; i < lines.size(); ++i) {
    if (trim(lines[i]).empty())
      continue;
    std::vector<std::string> row = split_commas(lines[i]);
    if (row.size() != t.header.size())
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected "
                      + std::to_string(t.header.size()) + " columns, found "
                      + std::to_string(row.size()));
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(static_cast<int>(i + 1));
  }
  return t;
}

ConditionSpec parse_conditions(const std::vector<std::string> &header,
                               const std::vector<std::string> &row, std::size_t first_column) {
  ConditionSpec spec;
  for (std::size_t c = first_column; c < header.size(); ++c) {
    const std::string &name = header[c];
    const std::string &cell = row[c];
    if (cell.empty())
      continue;
    if (name == kScaffoldName) {
      spec.push_back({ name, ScaffoldValue{ cell } });
    } else if (name.size() > 6 && name.ends_with(":class")) {
      const double x = parse_real(cell, name);
      if (x < 0 || x != static_cast<int>(x))
        throw DataError(name + ": class '" + cell + "' is not a non-negative integer");
      spec.push_back({ name.substr(0, name.size() - 6), ClassValue{ static_cast<int>(x) } });
    } else {
      spec.push_back({ name, parse_real(cell, name) });
    }
  }
  return spec;
}

RunConfig load_config(const std::optional<fs::path> &path) {
  RunConfig rc;
  if (!path)
    return rc;
  std::ifstream in(*path);
  if (!in)
    throw DataError("cannot read config " + path->string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::exception &e) {
    throw UsageError("config " + path->string() + " is not JSON: " + e.what());
  }
  if (!j.is_object())
    throw UsageError("config must be a JSON object");
  for (const auto &[key, value]: j.items()) {
    if (key != "model" && key != "train")
      throw UsageError("unknown config section '" + key + "'");
  }
  if (j.contains("model")) {
    const Json &m = j["model"];
    try {
      for (const auto &[key, value]: m.items()) {
        if (key == "n_layers") rc.model.n_layers = value.get<int>();
        else if (key == "n_heads") rc.model.n_heads = value.get<int>();
        else if (key == "n_ctx") rc.model.n_ctx = value.get<int>();
        else if (key == "d_model") rc.model.d_model = value.get<int>();
        else if (key == "d_ff") rc.model.d_ff = value.get<int>();
        else if (key == "rope_base") rc.model.rope_base = value.get<double>();
        else if (key == "norm_eps") rc.model.norm_eps = value.get<double>();
        else throw UsageError("unknown model key '" + key + "'");
      }
    } catch (const Json::exception &e) {
      throw UsageError(std::string("bad model section: ") + e.what());
    }
  }
  if (j.contains("train")) {
    try {
      rc.train = TrainConfig::from_json(j["train"].dump());
    } catch (const std::invalid_argument &e) {
      throw UsageError(std::string("bad train section: ") + e.what());
    }
  }
  return rc;
}

LoraConfig parse_lora(const std::string &spec) {
  std::vector<std::string> parts = split_commas(spec);
  if (parts.size() != 3)
    throw UsageError("--lora expects rank,alpha,dropout");
  LoraConfig cfg;
  try {
    cfg.rank = std::stoi(parts[0]);
    cfg.alpha = std::stod(parts[1]);
    cfg.dropout = std::stod(parts[2]);
  } catch (const std::exception &) {
    throw UsageError("--lora expects rank,alpha,dropout");
  }
  if (cfg.rank < 1 || cfg.alpha <= 0.0 || cfg.dropout < 0.0 || cfg.dropout >= 1.0)
    throw UsageError("--lora needs rank >= 1, alpha > 0 and dropout in [0, 1)");
  return cfg;
}

std::string fmt_double(double x) {
  std::ostringstream s;
  s.precision(17);
  s << x;
  return s.str();
}

}  // namespace chemlm::cli
