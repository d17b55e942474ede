//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <charconv>
#include <cmath>
#include <iostream>
#include <memory>
#include <sstream>

#include "chemlm/augment.h"
#include "chemlm/canonical.h"
#include "chemlm/checkpoint.h"
#include "chemlm/chemistry.h"
#include "chemlm/datasets.h"
#include "chemlm/decoding.h"
#include "chemlm/descriptors.h"
#include "chemlm/eval_stats.h"
#include "chemlm/generation_metrics.h"
#include "chemlm/random.h"
#include "chemlm/scaffold.h"
#include "chemlm/smiles.h"
#include "commands.h"
#include "run_support.h"

namespace chemlm::cli {
namespace {

std::vector<std::string> read_smiles_column(const fs::path &path) {
  std::vector<std::string> out;
  for (const std::string &line: read_lines(path)) {
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos)
      continue;
    out.push_back(line.substr(start, line.find_first_of(" \t", start) - start));
  }
  return out;
}

Json report_json(const GenerationReport &r) { return Json::parse(r.to_json()); }

Json load_extra(const LoadedCheckpoint &c) {
  try {
    return Json::parse(c.extra_json);
  } catch (const Json::exception &) {
    return Json::object();
  }
}

// ---- generate ----------------------------------------------------------

struct GenerateOptions {
  fs::path model;
  fs::path out;
  std::optional<fs::path> conditions;
  std::optional<fs::path> reference;
  int n = 100;
  double temperature = 1.0;
  int max_len = 0;
  std::uint64_t seed = 0;
};

// Descriptor MAD and scaffold matches for one conditioned batch.
void condition_metrics(const ConditionSpec &spec, std::span<const std::string> samples,
                       GenerationReport &report) {
  std::vector<MolGraph> valid;
  for (const std::string &s: samples) {
    if (check_smiles(s).valid)
      valid.push_back(parse_smiles(s));
  }
  for (const Condition &c: spec) {
    if (const double *x = std::get_if<double>(&c.value)) {
      const std::optional<int> idx = find_descriptor(c.name);
      if (!idx || valid.empty())
        continue;
      std::vector<double> computed;
      for (const MolGraph &g: valid)
        computed.push_back(descriptor_value(descriptors(g), *idx));
      const std::vector<double> conditioned(computed.size(), *x);
      report.mad[c.name] = mad(conditioned, computed);
    } else if (const auto *sc = std::get_if<ScaffoldValue>(&c.value)) {
      const MolGraph target = parse_smiles(sc->smiles);
      const std::string target_canonical = canonicalize(murcko_scaffold(target));
      int matches = 0, exact = 0;
      for (const MolGraph &g: valid) {
        matches += scaffold_valid(g, target);
        exact += canonicalize(murcko_scaffold(g)) == target_canonical;
      }
      report.scaffold_matches = matches;
      report.scaffold_exact_matches = exact;
    }
  }
}

void generate_cmd(const GenerateOptions &o) {
  const LoadedCheckpoint c = load_checkpoint(o.model);
  const ModelParams &p = c.params;
  const Vocabulary &v = c.vocab;
  SampleOptions so;
  so.temperature = o.temperature;
  so.max_len = o.max_len > 0 ? o.max_len : p.config.n_ctx - 1;
  so.seed = o.seed;

  ReferenceSet reference;
  if (o.reference)
    reference = ReferenceSet::from_smiles(read_smiles_column(*o.reference));

  std::ostringstream out;
  Json reports = Json::array();
  if (!o.conditions) {
    if (p.start_distribution.empty())
      throw DataError("checkpoint has no start-token distribution; it was not pretrained here");
    const std::vector<std::string> samples = generate(p, v, o.n, so);
    for (const std::string &s: samples)
      out << s << "\n";
    reports.push_back(report_json(generation_metrics(samples, reference)));
  } else {
    const CsvTable t = read_csv(*o.conditions);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const ConditionSpec spec = parse_conditions(t.header, t.rows[r], 0);
      SampleOptions row_opts = so;
      row_opts.seed = derive_seed(o.seed, r);
      Prompt prompt;
      try {
        prompt = build_prompt(spec, v, p.cond_stats);
      } catch (const std::invalid_argument &e) {
        throw DataError(o.conditions->string() + ":" + std::to_string(t.line_numbers[r]) + ": "
                        + e.what());
      }
      const std::vector<std::string> samples = generate_conditional(p, v, prompt, o.n, row_opts);
      for (const std::string &s: samples)
        out << s << "\t" << r << "\n";
      GenerationReport rep = generation_metrics(samples, reference);
      condition_metrics(spec, samples, rep);
      Json j = report_json(rep);
      j["condition_row"] = r;
      reports.push_back(std::move(j));
    }
  }
  write_text(o.out, out.str());
  const fs::path report_path = sibling(o.out, ".report.json");
  write_text(report_path, (o.conditions ? reports : reports[0]).dump(2) + "\n");

  RunManifest m("generate");
  m.add_seed("seed", o.seed);
  m.add_input(o.model);
  if (o.conditions)
    m.add_input(*o.conditions);
  if (o.reference)
    m.add_input(*o.reference);
  m.add_output(o.out);
  m.add_output(report_path);
  m.set_vocabulary(v.hash());
  m.add_checkpoint(o.model);
  m.extra()["n"] = o.n;
  m.extra()["temperature"] = o.temperature;
  m.extra()["max_len"] = so.max_len;
  m.write(o.out);
  const Json &first = reports[0];
  std::cout << "generate: " << first["n_generated"] << " molecules per batch, validity "
            << first["validity"] << "\n";
}

// ---- benchmark ---------------------------------------------------------

struct BenchmarkOptions {
  fs::path in;
  fs::path reference;
  fs::path out;
};

void benchmark_cmd(const BenchmarkOptions &o) {
  const std::vector<std::string> generated = read_smiles_column(o.in);
  if (generated.empty())
    throw DataError(o.in.string() + " holds no molecules");
  int skipped = 0;
  const ReferenceSet reference =
      ReferenceSet::from_smiles(read_smiles_column(o.reference), &skipped);
  const GenerationReport r = generation_metrics(generated, reference);
  Json j = report_json(r);
  j["reference_skipped"] = skipped;
  write_text(o.out, j.dump(2) + "\n");

  RunManifest m("benchmark");
  m.add_input(o.in);
  m.add_input(o.reference);
  m.add_output(o.out);
  m.write(o.out);
  std::cout << "benchmark: validity " << r.validity << ", uniqueness " << r.uniqueness
            << ", novelty " << r.novelty << ", KLSim " << r.klsim << "\n";
}

// ---- evaluate ----------------------------------------------------------

struct EvaluateOptions {
  fs::path model;
  fs::path in;
  fs::path out;
  std::optional<std::string> task;
  int augmentations = 5;
  int beam = 10;
  std::vector<int> ks{ 1, 3, 5, 10 };
  int bootstrap = 100;
  std::string direction = "retro";
  std::uint64_t seed = 0;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Json interval_json(const ConfidenceInterval &ci) {
  return { { "point", ci.point }, { "lo", ci.lo }, { "hi", ci.hi } };
}

Json evaluate_property(const EvaluateOptions &o, const LoadedCheckpoint &c, const Json &meta) {
  const ModelParams &p = c.params;
  if (!p.head)
    throw DataError("checkpoint has no property head");
  const bool classification = meta.value("classification", false);
  const CsvTable t = read_csv(o.in);
  const int outputs = static_cast<int>(p.head->rows());
  if (t.header.empty() || t.header[0] != "smiles"
      || static_cast<int>(t.header.size()) != outputs + 1)
    throw DataError("evaluation data needs 'smiles' plus one column per head output");

  std::vector<std::vector<double>> truth(outputs), pred(outputs);
  int rejected = 0;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    Vector y;
    try {
      const Example ex = property_example(canonicalize(t.rows[r][0]), {}, c.vocab);
      y = predict_properties(p, ex.ids);
    } catch (const std::exception &e) {
      ++rejected;
      std::cerr << o.in.string() << ":" << t.line_numbers[r] << ": " << e.what() << "\n";
      continue;
    }
    for (int k = 0; k < outputs; ++k) {
      const std::string &cell = t.rows[r][k + 1];
      if (cell.empty())
        continue;
      double x = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
      if (ec != std::errc() || ptr != cell.data() + cell.size())
        throw DataError(o.in.string() + ":" + std::to_string(t.line_numbers[r]) + ": '" + cell
                        + "' is not a number");
      truth[k].push_back(x);
      pred[k].push_back(classification ? sigmoid(y(k)) : y(k));
    }
  }

  Json j;
  j["task"] = "property";
  j["classification"] = classification;
  j["rejected_rows"] = rejected;
  Json targets = Json::object();
  for (int k = 0; k < outputs; ++k) {
    const std::string &name = t.header[k + 1];
    Json tj;
    tj["n"] = truth[k].size();
    if (truth[k].empty()) {
      targets[name] = tj;
      continue;
    }
    if (classification) {
      std::vector<int> labels;
      int correct = 0;
      for (std::size_t i = 0; i < truth[k].size(); ++i) {
        labels.push_back(truth[k][i] >= 0.5 ? 1 : 0);
        correct += (pred[k][i] >= 0.5) == (labels.back() == 1);
      }
      tj["accuracy"] = static_cast<double>(correct) / labels.size();
      try {
        tj["roc_auc"] = roc_auc(labels, pred[k]);
        tj["prc_auc"] = prc_auc(labels, pred[k]);
        if (o.bootstrap > 0) {
          const MetricFn prc = [](std::span<const int> l, std::span<const double> s) {
            return prc_auc(l, s);
          };
          tj["prc_auc_ci95"] =
              interval_json(bootstrap_ci(prc, labels, pred[k], o.bootstrap, 0.95, o.seed));
        }
      } catch (const std::invalid_argument &e) {
        tj["note"] = e.what();
      }
    } else {
      tj["rmse"] = rmse(truth[k], pred[k]);
      tj["mae"] = mae(truth[k], pred[k]);
      if (truth[k].size() >= 2)
        tj["spearman"] = spearman(truth[k], pred[k]);
    }
    targets[name] = tj;
  }
  j["targets"] = targets;
  return j;
}

Json evaluate_reaction(const EvaluateOptions &o, const LoadedCheckpoint &c, const Json &meta) {
  const Vocabulary &v = c.vocab;
  const ModelParams &p = c.params;
  const std::string direction = meta.value("direction", o.direction);
  const ReactionDirection dir = direction == "forward" ? ReactionDirection::kForward
                                                        : ReactionDirection::kRetro;
  const Decoder decoder(p);
  const int max_k = *std::max_element(o.ks.begin(), o.ks.end());

  Json reactions = Json::array();
  std::vector<int> hits(o.ks.size(), 0);
  int evaluated = 0, rejected = 0;
  const std::vector<std::string> lines = read_lines(o.in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos)
      continue;
    std::vector<AlignedPair> pairs;
    try {
      const ReactionRecord r = parse_reaction(lines[i], dir);
      if (mapped_product_atoms(r).empty())
        throw UnmappedRootError("reaction has no mapped product atom");
      pairs = augment_reactions({ r }, o.augmentations, derive_seed(o.seed, i));
    } catch (const std::exception &e) {
      ++rejected;
      std::cerr << o.in.string() << ":" << i + 1 << ": " << e.what() << "\n";
      continue;
    }
    const std::string truth = canonicalize(pairs.front().output);
    std::vector<std::vector<BeamCandidate>> beams;
    for (const AlignedPair &pair: pairs) {
      const std::vector<int> prompt = reaction_prompt(pair.input, v);
      const int room = p.config.n_ctx - static_cast<int>(prompt.size());
      std::vector<BeamCandidate> found;
      if (room > 0) {
        for (const Hypothesis &h: beam_search(decoder, prompt, o.beam, o.beam, room, v.eos_id())) {
          std::string text = detokenize(h.ids, v);
          if (check_smiles(text).valid)
            text = canonicalize(text);
          found.push_back({ text, h.logprob });
        }
      }
      beams.push_back(std::move(found));
    }
    const std::vector<ScoredPrediction> ranked = aggregate_topk(beams, max_k);
    const std::vector<bool> hit = topk_accuracy(ranked, truth, o.ks);
    Json rj;
    rj["line"] = i + 1;
    rj["truth"] = truth;
    Json top = Json::array();
    for (const ScoredPrediction &s: ranked)
      top.push_back({ { "candidate", s.candidate }, { "votes", s.votes },
                      { "total_logprob", s.total_logprob } });
    rj["top"] = top;
    Json hj = Json::object();
    for (std::size_t k = 0; k < o.ks.size(); ++k) {
      hj[std::to_string(o.ks[k])] = static_cast<bool>(hit[k]);
      hits[k] += hit[k];
    }
    rj["hits"] = hj;
    reactions.push_back(std::move(rj));
    ++evaluated;
  }
  if (evaluated == 0)
    throw DataError("no usable reactions in " + o.in.string());

  Json j;
  j["task"] = "reaction";
  j["direction"] = direction;
  j["n_augmentations"] = o.augmentations;
  j["m_beams"] = o.beam;
  j["predictions_per_reaction"] = o.augmentations * o.beam;
  j["reactions_evaluated"] = evaluated;
  j["rejected_lines"] = rejected;
  Json acc = Json::object();
  for (std::size_t k = 0; k < o.ks.size(); ++k)
    acc[std::to_string(o.ks[k])] = static_cast<double>(hits[k]) / evaluated;
  j["topk_accuracy"] = acc;
  j["reactions"] = reactions;
  return j;
}

void evaluate_cmd(const EvaluateOptions &o) {
  const LoadedCheckpoint c = load_checkpoint(o.model);
  const Json meta = load_extra(c);
  const std::string task = o.task ? *o.task : meta.value("task", std::string());
  Json result;
  if (task == "property")
    result = evaluate_property(o, c, meta);
  else if (task == "reaction")
    result = evaluate_reaction(o, c, meta);
  else
    throw UsageError("cannot evaluate task '" + task + "'; pass --task property|reaction");
  write_text(o.out, result.dump(2) + "\n");

  RunManifest m("evaluate");
  m.add_seed("seed", o.seed);
  m.add_input(o.model);
  m.add_input(o.in);
  m.add_output(o.out);
  m.set_vocabulary(c.vocab.hash());
  m.add_checkpoint(o.model);
  m.extra()["task"] = task;
  m.write(o.out);
  std::cout << "evaluate (" << task << "): wrote " << o.out.string() << "\n";
}

}  // namespace

void add_evaluation_commands(CLI::App &app) {
  auto g = std::make_shared<GenerateOptions>();
  CLI::App *cmd = app.add_subcommand("generate", "sample molecules from a checkpoint");
  cmd->add_option("--model", g->model)->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", g->out, "generated .smi file")->required();
  cmd->add_option("--n", g->n, "molecules (per condition row)")->check(CLI::PositiveNumber);
  cmd->add_option("--temperature", g->temperature)->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-len", g->max_len, "token limit (default: context size)");
  cmd->add_option("--conditions", g->conditions, "CSV of condition rows")
      ->check(CLI::ExistingFile);
  cmd->add_option("--reference", g->reference, "reference .smi for novelty and KLSim")
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", g->seed);
  cmd->callback([g] { generate_cmd(*g); });

  auto b = std::make_shared<BenchmarkOptions>();
  cmd = app.add_subcommand("benchmark", "distribution metrics of generated molecules");
  cmd->add_option("--in", b->in, "generated .smi")->required()->check(CLI::ExistingFile);
  cmd->add_option("--reference", b->reference, "reference .smi")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", b->out, "report JSON")->required();
  cmd->callback([b] { benchmark_cmd(*b); });

  auto e = std::make_shared<EvaluateOptions>();
  cmd = app.add_subcommand("evaluate", "score a fine-tuned checkpoint");
  cmd->add_option("--model", e->model)->required()->check(CLI::ExistingFile);
  cmd->add_option("--in", e->in, "property CSV or mapped reactions")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", e->out, "result JSON")->required();
  cmd->add_option("--task", e->task, "defaults to the checkpoint's task")
      ->check(CLI::IsMember({ "property", "reaction" }));
  cmd->add_option("--augmentations", e->augmentations, "n root-aligned inputs per reaction")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--beam", e->beam, "beam size m")->check(CLI::PositiveNumber);
  cmd->add_option("--k", e->ks, "top-k cut-offs")->check(CLI::PositiveNumber);
  cmd->add_option("--bootstrap", e->bootstrap, "resamples for the PRC-AUC interval");
  cmd->add_option("--direction", e->direction)->check(CLI::IsMember({ "retro", "forward" }));
  cmd->add_option("--seed", e->seed);
  cmd->callback([e] { evaluate_cmd(*e); });
}

}  // namespace chemlm::cli
