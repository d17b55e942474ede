//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>

#include "chemlm/augment.h"
#include "chemlm/checkpoint.h"
#include "chemlm/datasets.h"
#include "chemlm/lora.h"
#include "chemlm/random.h"
#include "chemlm/smiles.h"
#include "commands.h"
#include "run_support.h"

namespace chemlm::cli {
namespace {

// Sub-seeds derived from the single --seed.
enum SeedStream : std::uint64_t { kInitSeed = 1, kHeadSeed = 2, kAdapterSeed = 3, kDataSeed = 4 };

struct CommonTrainOptions {
  fs::path in;
  fs::path out;
  std::optional<fs::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<int> epochs;
  std::optional<double> lr;
};

void add_common(CLI::App *cmd, CommonTrainOptions &o) {
  cmd->add_option("--in", o.in, "training data")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "checkpoint to write")->required();
  cmd->add_option("--config", o.config, "JSON with model/train sections")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "overrides train.seed");
  cmd->add_option("--epochs", o.epochs)->check(CLI::PositiveNumber);
  cmd->add_option("--lr", o.lr)->check(CLI::NonNegativeNumber);
}

TrainConfig resolve(const CommonTrainOptions &o, TrainConfig cfg) {
  if (o.seed)
    cfg.seed = *o.seed;
  if (o.epochs)
    cfg.epochs = *o.epochs;
  if (o.lr)
    cfg.learning_rate = *o.lr;
  try {
    cfg.validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  return cfg;
}

TrainResult run_training(ModelParams &p, const EpochBuilder &data, const TrainConfig &cfg) {
  TrainCallbacks cb;
  cb.on_epoch_end = [&cfg](int epoch, const ModelParams &) {
    std::cerr << "epoch " << epoch + 1 << "/" << cfg.epochs << "\n";
  };
  return train(p, data, cfg, cb);
}

void write_trace(const fs::path &out, const TrainResult &r, RunManifest &m) {
  const fs::path trace = sibling(out, ".trace.csv");
  std::ofstream f(trace);
  write_trace_csv(f, r.trace);
  if (!f)
    throw DataError("cannot write " + trace.string());
  m.add_output(trace);
  m.extra()["steps"] = r.steps;
  m.extra()["dropped_overlong"] = r.dropped_overlong;
  if (!r.trace.empty())
    m.extra()["final_loss"] = r.trace.back().loss;
}

std::optional<double> parse_target(const std::string &cell, const std::string &column) {
  if (cell.empty())
    return std::nullopt;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (ec != std::errc() || ptr != cell.data() + cell.size())
    throw DataError(column + ": '" + cell + "' is not a number");
  return x;
}

void report(const fs::path &where, int line, const std::exception &e) {
  std::cerr << where.string() << ":" << line << ": " << e.what() << "\n";
}

// ---- pretrain ----------------------------------------------------------

struct PretrainOptions {
  CommonTrainOptions common;
  int enumerate = 1;
};

void pretrain(const PretrainOptions &o) {
  const RunConfig rc = load_config(o.common.config);
  TrainConfig cfg = resolve(o.common, rc.train);
  cfg.task = TaskMode::kPretrain;

  const Vocabulary v = build_base_vocab();
  ModelConfig mc = rc.model;
  mc.vocab_size = v.size();
  try {
    mc.validate();
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }

  std::vector<Example> examples;
  int rejected = 0;
  const std::vector<std::string> lines = read_lines(o.common.in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto start = lines[i].find_first_not_of(" \t");
    if (start == std::string::npos)
      continue;
    const std::string smiles = lines[i].substr(start, lines[i].find_first_of(" \t", start) - start);
    try {
      if (o.enumerate > 1) {
        for (const std::string &s:
             enumerate_smiles(smiles, o.enumerate, derive_seed(derive_seed(cfg.seed, kDataSeed), i)))
          examples.push_back(language_example(s, v));
      } else {
        parse_smiles(smiles);
        examples.push_back(language_example(smiles, v));
      }
    } catch (const std::exception &e) {
      ++rejected;
      report(o.common.in, static_cast<int>(i + 1), e);
    }
  }
  if (examples.empty())
    throw DataError("no usable molecules in " + o.common.in.string());

  ModelParams p = init_model(mc, derive_seed(cfg.seed, kInitSeed));
  p.start_distribution = start_distribution(examples, v.size());
  const std::size_t n_examples = examples.size();
  const TrainResult r = run_training(p, fixed_builder(std::move(examples)), cfg);

  Json extra;
  extra["task"] = "pretrain";
  extra["train"] = Json::parse(cfg.to_json());
  save_checkpoint(o.common.out, p, v, extra.dump());

  RunManifest m("pretrain");
  m.set_config(o.common.config);
  m.add_seed("seed", cfg.seed);
  m.add_input(o.common.in);
  m.add_output(o.common.out);
  m.set_vocabulary(v.hash());
  m.add_checkpoint(o.common.out);
  m.extra()["examples"] = n_examples;
  m.extra()["rejected_lines"] = rejected;
  m.extra()["enumerate"] = o.enumerate;
  write_trace(o.common.out, r, m);
  m.write(o.common.out);
  std::cout << "pretrain: " << n_examples << " examples, " << r.steps << " steps, final loss "
            << (r.trace.empty() ? 0.0 : r.trace.back().loss) << "\n";
}

// ---- finetune ----------------------------------------------------------

struct FinetuneOptions {
  CommonTrainOptions common;
  fs::path base;
  std::string task;
  std::optional<std::string> lora;
  bool classification = false;
  bool no_enumerate = false;
  int folds = 5;
  std::string direction = "retro";
};

// Adds the task tokens that `v` does not have yet.
Vocabulary with_tokens(const Vocabulary &v, const std::set<std::string> &wanted) {
  std::vector<std::string> missing;
  for (const std::string &t: wanted) {
    if (!v.find(t))
      missing.push_back(t);
  }
  return missing.empty() ? v : extend_with_task_tokens(v, missing);
}

struct TaskData {
  EpochBuilder builder;
  std::size_t records = 0;
  int rejected = 0;
  Json meta = Json::object();
};

TaskData property_data(const FinetuneOptions &o, ModelParams &p, const Vocabulary &v,
                       std::uint64_t seed) {
  const CsvTable t = read_csv(o.common.in);
  if (t.header.size() < 2 || t.header[0] != "smiles")
    throw DataError("property data needs a header 'smiles,<target>,...'");
  TaskData d;
  std::vector<PropertyRecord> records;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    try {
      PropertyRecord rec;
      rec.smiles = t.rows[r][0];
      parse_smiles(rec.smiles);
      for (std::size_t c = 1; c < t.header.size(); ++c)
        rec.targets.push_back(parse_target(t.rows[r][c], t.header[c]));
      records.push_back(std::move(rec));
    } catch (const std::exception &e) {
      ++d.rejected;
      report(o.common.in, t.line_numbers[r], e);
    }
  }
  const int outputs = static_cast<int>(t.header.size()) - 1;
  if (p.head && p.head->rows() != outputs)
    throw DataError("checkpoint head has a different number of outputs");
  if (!p.head)
    attach_head(p, outputs, derive_seed(seed, kHeadSeed));
  d.records = records.size();
  d.meta["targets"] = std::vector<std::string>(t.header.begin() + 1, t.header.end());
  d.meta["classification"] = o.classification;
  d.builder = property_builder(std::move(records), v, derive_seed(seed, kDataSeed), !o.no_enumerate);
  return d;
}

TaskData conditional_data(const FinetuneOptions &o, ModelParams &p, Vocabulary &v,
                          std::uint64_t seed) {
  const CsvTable t = read_csv(o.common.in);
  if (t.header.size() < 2 || t.header[0] != "smiles")
    throw DataError("conditional data needs a header 'smiles,<condition>,...'");
  TaskData d;
  std::vector<ConditionalRecord> records;
  std::map<std::string, std::vector<double>> values;
  std::set<std::string> tokens{ std::string(kSepToken), std::string(kValueToken) };
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    try {
      ConditionalRecord rec;
      rec.smiles = t.rows[r][0];
      parse_smiles(rec.smiles);
      rec.conditions = parse_conditions(t.header, t.rows[r], 1);
      for (const Condition &c: rec.conditions) {
        tokens.insert(property_token(c.name));
        if (const double *x = std::get_if<double>(&c.value))
          values[c.name].push_back(*x);
        else if (const auto *cls = std::get_if<ClassValue>(&c.value))
          tokens.insert(class_token(cls->index));
        else
          parse_smiles(std::get<ScaffoldValue>(c.value).smiles);
      }
      records.push_back(std::move(rec));
    } catch (const std::exception &e) {
      ++d.rejected;
      report(o.common.in, t.line_numbers[r], e);
    }
  }
  v = with_tokens(v, tokens);
  if (v.size() > p.config.vocab_size)
    grow_vocabulary(p, v.size(), derive_seed(seed, kInitSeed));
  if (!p.value_weight)
    attach_value_projection(p, derive_seed(seed, kHeadSeed));
  if (p.cond_stats.mean_std.empty())
    p.cond_stats = ConditionStats::fit(values);
  d.records = records.size();
  d.builder = conditional_builder(std::move(records), v, p.cond_stats,
                                  derive_seed(seed, kDataSeed), !o.no_enumerate);
  return d;
}

TaskData reaction_data(const FinetuneOptions &o, ModelParams &p, Vocabulary &v,
                       std::uint64_t seed) {
  const ReactionDirection dir = o.direction == "forward" ? ReactionDirection::kForward
                                                          : ReactionDirection::kRetro;
  TaskData d;
  std::vector<ReactionRecord> dataset;
  const std::vector<std::string> lines = read_lines(o.common.in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos)
      continue;
    try {
      ReactionRecord r = parse_reaction(lines[i], dir);
      if (mapped_product_atoms(r).empty())
        throw UnmappedRootError("reaction has no mapped product atom");
      dataset.push_back(std::move(r));
    } catch (const std::exception &e) {
      ++d.rejected;
      report(o.common.in, static_cast<int>(i + 1), e);
    }
  }
  if (dataset.empty())
    throw DataError("no usable reactions in " + o.common.in.string());
  v = with_tokens(v, { std::string(kSepToken) });
  if (v.size() > p.config.vocab_size)
    grow_vocabulary(p, v.size(), derive_seed(seed, kInitSeed));

  std::vector<Example> examples;
  for (const AlignedPair &pair: augment_reactions(dataset, o.folds, derive_seed(seed, kDataSeed)))
    examples.push_back(reaction_example(pair.input, pair.output, v));
  d.records = dataset.size();
  d.meta["direction"] = o.direction;
  d.meta["folds"] = o.folds;
  d.builder = fixed_builder(std::move(examples));
  return d;
}

void finetune(const FinetuneOptions &o) {
  const RunConfig rc = load_config(o.common.config);
  TrainConfig cfg = resolve(o.common, rc.train);
  cfg.task = parse_task_mode(o.task);
  cfg.classification = o.classification;
  if (o.classification && cfg.task != TaskMode::kProperty)
    throw UsageError("--classification applies to --task property only");

  LoadedCheckpoint base = load_checkpoint(o.base);
  ModelParams &p = base.params;
  Vocabulary v = base.vocab;
  if (p.lora)
    throw DataError("base checkpoint already carries adapters");

  TaskData d;
  switch (cfg.task) {
  case TaskMode::kProperty:
    d = property_data(o, p, v, cfg.seed);
    break;
  case TaskMode::kConditional:
    d = conditional_data(o, p, v, cfg.seed);
    break;
  case TaskMode::kReaction:
    d = reaction_data(o, p, v, cfg.seed);
    break;
  case TaskMode::kPretrain:
    throw UsageError("use the pretrain command for language-model training");
  }
  if (d.records == 0)
    throw DataError("no usable records in " + o.common.in.string());

  if (o.lora)
    attach_lora(p, parse_lora(*o.lora), derive_seed(cfg.seed, kAdapterSeed));
  const TrainResult r = run_training(p, d.builder, cfg);

  Json extra = d.meta;
  extra["task"] = task_mode_name(cfg.task);
  extra["train"] = Json::parse(cfg.to_json());
  extra["base"] = file_digest(o.base);
  save_checkpoint(o.common.out, p, v, extra.dump());

  RunManifest m("finetune");
  m.set_config(o.common.config);
  m.add_seed("seed", cfg.seed);
  m.add_input(o.common.in);
  m.add_input(o.base);
  m.add_output(o.common.out);
  m.set_vocabulary(v.hash());
  m.add_checkpoint(o.base);
  m.add_checkpoint(o.common.out);
  m.extra()["task"] = o.task;
  m.extra()["records"] = d.records;
  m.extra()["rejected_records"] = d.rejected;
  if (o.lora) {
    m.extra()["lora"] = *o.lora;
    m.extra()["trainable_parameters"] = trainable_parameter_count(p);
  }
  write_trace(o.common.out, r, m);
  m.write(o.common.out);
  std::cout << "finetune (" << o.task << "): " << d.records << " records, " << r.steps
            << " steps, final loss " << (r.trace.empty() ? 0.0 : r.trace.back().loss) << "\n";
}

}  // namespace

void add_training_commands(CLI::App &app) {
  auto pre = std::make_shared<PretrainOptions>();
  CLI::App *cmd = app.add_subcommand("pretrain", "train a language model from a .smi file");
  add_common(cmd, pre->common);
  cmd->add_option("--enumerate", pre->enumerate, "random spellings per molecule (1 = as written)")
      ->check(CLI::PositiveNumber);
  cmd->callback([pre] { pretrain(*pre); });

  auto ft = std::make_shared<FinetuneOptions>();
  cmd = app.add_subcommand("finetune", "adapt a pretrained checkpoint to a task");
  add_common(cmd, ft->common);
  cmd->add_option("--base", ft->base, "pretrained checkpoint")->required()->check(CLI::ExistingFile);
  cmd->add_option("--task", ft->task)
      ->required()
      ->check(CLI::IsMember({ "property", "conditional", "reaction" }));
  cmd->add_option("--lora", ft->lora, "rank,alpha,dropout");
  cmd->add_flag("--classification", ft->classification, "binary targets (property task)");
  cmd->add_flag("--no-enumerate", ft->no_enumerate, "train on SMILES as written");
  cmd->add_option("--folds", ft->folds, "root-aligned augmentations (reaction task)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--direction", ft->direction)->check(CLI::IsMember({ "retro", "forward" }));
  cmd->callback([ft] { finetune(*ft); });
}

}  // namespace chemlm::cli
