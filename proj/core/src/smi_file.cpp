//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "chemlm/smi_file.h"

namespace chemlm {

std::vector<SmiRecord> read_smi(std::istream &in) {
  std::vector<SmiRecord> records;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty() || line.front() == '#')
      continue;
    SmiRecord rec;
    rec.line = number;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      rec.smiles = line;
    } else {
      rec.smiles = line.substr(0, tab);
      rec.id = line.substr(tab + 1);
    }
    if (rec.smiles.empty())
      continue;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<SmiRecord> read_smi_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path.string());
  return read_smi(in);
}

void write_smi(std::ostream &out, const std::vector<SmiRecord> &records) {
  for (const SmiRecord &rec: records) {
    out << rec.smiles;
    if (!rec.id.empty())
      out << '\t' << rec.id;
    out << '\n';
  }
}

}  // namespace chemlm
