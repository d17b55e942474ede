//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_TOOLS_RUN_SUPPORT_H_
#define CHEMLM_TOOLS_RUN_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chemlm/augment.h"
#include "chemlm/model.h"
#include "chemlm/trainer.h"

namespace chemlm::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kDiverged = 3 };

class UsageError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DataError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// One per run, written next to the primary output as <output>.manifest.json.
class RunManifest {
public:
  explicit RunManifest(std::string command);

  void set_config(const std::optional<fs::path> &path);
  void add_seed(const std::string &name, std::uint64_t seed);
  void add_input(const fs::path &path);
  void add_output(const fs::path &path);
  void set_vocabulary(std::uint64_t hash);
  // Records the digest of a checkpoint read or written by the run.
  void add_checkpoint(const fs::path &path);
  Json &extra() { return extra_; }

  // Writes beside `primary` and returns the manifest path.
  fs::path write(const fs::path &primary) const;

private:
  std::string command_;
  std::optional<std::string> config_;
  Json seeds_ = Json::object();
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
  std::optional<std::string> vocab_hash_;
  Json checkpoints_ = Json::object();
  Json extra_ = Json::object();
};

fs::path manifest_path(const fs::path &primary);
fs::path sibling(const fs::path &primary, const std::string &suffix);

std::vector<std::string> read_lines(const fs::path &path);
void write_text(const fs::path &path, const std::string &text);

// Comma-separated table with a header row. No quoting: SMILES and numbers
// never contain commas.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;
};
CsvTable read_csv(const fs::path &path);

// Header conventions shared by the conditional commands: "scaffold" holds a
// scaffold SMILES, "<name>:class" an integer class, anything else a real.
ConditionSpec parse_conditions(const std::vector<std::string> &header,
                               const std::vector<std::string> &row, std::size_t first_column);

// --config file: {"model": {...}, "train": {...}}; both sections optional.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};
RunConfig load_config(const std::optional<fs::path> &path);

LoraConfig parse_lora(const std::string &spec);

std::string fmt_double(double x);

}  // namespace chemlm::cli

#endif  // CHEMLM_TOOLS_RUN_SUPPORT_H_
