//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include "chemlm/augment.h"
#include "chemlm/canonical.h"
#include "chemlm/chemistry.h"
#include "chemlm/random.h"
#include "chemlm/smiles.h"
#include "chemlm/tokenizer.h"
#include "commands.h"
#include "run_support.h"

namespace chemlm::cli {
namespace {

struct LineOptions {
  fs::path in;
  fs::path out;
  bool strict = false;
};

// A line holds a SMILES, optionally followed by whitespace and an id.
struct Entry {
  std::string smiles;
  std::string id;
};

Entry split_entry(const std::string &line) {
  const auto start = line.find_first_not_of(" \t");
  if (start == std::string::npos)
    return {};
  const auto end = line.find_first_of(" \t", start);
  Entry e;
  e.smiles = line.substr(start, end == std::string::npos ? std::string::npos : end - start);
  if (end != std::string::npos) {
    const auto id = line.find_first_not_of(" \t", end);
    if (id != std::string::npos)
      e.id = line.substr(id);
  }
  return e;
}

std::string with_id(const std::string &text, const Entry &e) {
  return e.id.empty() ? text : text + "\t" + e.id;
}

// Runs `fn` on every non-blank line and writes one output line per input
// line. `fn` returns the output text or throws to reject the line.
struct LineStats {
  int lines = 0;
  int rejected = 0;
};

LineStats map_lines(const LineOptions &o, const std::function<std::string(const Entry &)> &fn) {
  const std::vector<std::string> lines = read_lines(o.in);
  std::ostringstream out;
  LineStats stats;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Entry e = split_entry(lines[i]);
    if (!e.smiles.empty()) {
      ++stats.lines;
      try {
        out << fn(e);
      } catch (const std::exception &ex) {
        ++stats.rejected;
        std::cerr << o.in.string() << ":" << i + 1 << ": " << ex.what() << "\n";
      }
    }
    out << "\n";
  }
  write_text(o.out, out.str());
  return stats;
}

void finish(const char *command, const LineOptions &o, const LineStats &s,
            const std::function<void(RunManifest &)> &extra = {}) {
  RunManifest m(command);
  m.add_input(o.in);
  m.add_output(o.out);
  m.extra()["lines"] = s.lines;
  m.extra()["rejected"] = s.rejected;
  if (extra)
    extra(m);
  m.write(o.out);
  std::cout << command << ": " << s.lines << " lines, " << s.rejected << " rejected\n";
  if (o.strict && s.rejected > 0)
    throw DataError(std::to_string(s.rejected) + " line(s) rejected under --strict");
}

void add_line_options(CLI::App *cmd, LineOptions &o) {
  cmd->add_option("--in", o.in, "input .smi file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output file")->required();
  cmd->add_flag("--strict", o.strict, "fail if any line is rejected");
}

void add_tokenize(CLI::App &app) {
  auto o = std::make_shared<LineOptions>();
  CLI::App *cmd = app.add_subcommand("tokenize", "split SMILES into vocabulary tokens");
  add_line_options(cmd, *o);
  cmd->callback([o] {
    const Vocabulary v = build_base_vocab();
    const LineStats s = map_lines(*o, [&v](const Entry &e) {
      std::string joined;
      for (const std::string &t: split_tokens(e.smiles, v))
        joined += (joined.empty() ? "" : " ") + t;
      return with_id(joined, e);
    });
    finish("tokenize", *o, s, [&v](RunManifest &m) { m.set_vocabulary(v.hash()); });
  });
}

void add_canonicalize(CLI::App &app) {
  auto o = std::make_shared<LineOptions>();
  CLI::App *cmd = app.add_subcommand("canonicalize", "rewrite SMILES in canonical form");
  add_line_options(cmd, *o);
  cmd->callback([o] {
    const LineStats s = map_lines(*o, [](const Entry &e) {
      return with_id(canonicalize(e.smiles), e);
    });
    finish("canonicalize", *o, s);
  });
}

void add_validate(CLI::App &app) {
  auto o = std::make_shared<LineOptions>();
  CLI::App *cmd = app.add_subcommand("validate", "check parsing, kekulization and valences");
  add_line_options(cmd, *o);
  cmd->callback([o] {
    int invalid = 0;
    LineStats s = map_lines(*o, [&invalid](const Entry &e) {
      const ValidityVerdict v = check_smiles(e.smiles);
      if (!v.valid) {
        ++invalid;
        return e.smiles + "\tinvalid\t" + v.reason;
      }
      return e.smiles + "\tvalid";
    });
    s.rejected += invalid;
    finish("validate", *o, s);
  });
}

struct AugmentOptions {
  LineOptions io;
  std::string mode = "enumerate";
  std::string direction = "retro";
  int folds = 10;
  std::uint64_t seed = 0;
};

void augment_enumerate(const AugmentOptions &o, LineStats &s, std::ostringstream &out) {
  const std::vector<std::string> lines = read_lines(o.io.in);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Entry e = split_entry(lines[i]);
    if (e.smiles.empty())
      continue;
    ++s.lines;
    try {
      for (const std::string &x: enumerate_smiles(e.smiles, o.folds, derive_seed(o.seed, i)))
        out << with_id(x, e) << "\n";
    } catch (const std::exception &ex) {
      ++s.rejected;
      std::cerr << o.io.in.string() << ":" << i + 1 << ": " << ex.what() << "\n";
    }
  }
}

void augment_rsmiles(const AugmentOptions &o, LineStats &s, std::ostringstream &out) {
  const ReactionDirection dir = o.direction == "forward" ? ReactionDirection::kForward
                                                          : ReactionDirection::kRetro;
  const std::vector<std::string> lines = read_lines(o.io.in);
  std::vector<ReactionRecord> dataset;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos)
      continue;
    ++s.lines;
    try {
      ReactionRecord r = parse_reaction(lines[i], dir);
      if (mapped_product_atoms(r).empty())
        throw UnmappedRootError("reaction has no mapped product atom");
      dataset.push_back(std::move(r));
    } catch (const std::exception &ex) {
      ++s.rejected;
      std::cerr << o.io.in.string() << ":" << i + 1 << ": " << ex.what() << "\n";
    }
  }
  if (dataset.empty())
    return;
  for (const AlignedPair &p: augment_reactions(dataset, o.folds, o.seed))
    out << p.input << "\t" << p.output << "\n";
}

void add_augment(CLI::App &app) {
  auto o = std::make_shared<AugmentOptions>();
  CLI::App *cmd = app.add_subcommand("augment", "SMILES enumeration or root-aligned reactions");
  add_line_options(cmd, o->io);
  cmd->add_option("--mode", o->mode)->check(CLI::IsMember({ "enumerate", "rsmiles" }));
  cmd->add_option("--direction", o->direction, "rsmiles only")
      ->check(CLI::IsMember({ "retro", "forward" }));
  cmd->add_option("--folds", o->folds)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o->seed);
  cmd->callback([o] {
    LineStats s;
    std::ostringstream out;
    if (o->mode == "enumerate")
      augment_enumerate(*o, s, out);
    else
      augment_rsmiles(*o, s, out);
    write_text(o->io.out, out.str());
    finish("augment", o->io, s, [&o](RunManifest &m) {
      m.add_seed("seed", o->seed);
      m.extra()["mode"] = o->mode;
      m.extra()["folds"] = o->folds;
      if (o->mode == "rsmiles")
        m.extra()["direction"] = o->direction;
    });
  });
}

}  // namespace

void add_data_commands(CLI::App &app) {
  add_tokenize(app);
  add_canonicalize(app);
  add_validate(app);
  add_augment(app);
}

}  // namespace chemlm::cli
