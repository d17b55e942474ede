//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_SMI_FILE_H_
#define CHEMLM_SMI_FILE_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace chemlm {

struct SmiRecord {
  std::string smiles;
  std::string id;  // empty when the line has no TAB field
  int line = 0;    // 1-based source line
};

// One SMILES per line, optional TAB + identifier. Blank lines and lines
// starting with '#' are skipped; CR line endings are tolerated.
std::vector<SmiRecord> read_smi(std::istream &in);
// Throws std::runtime_error if the file cannot be opened.
std::vector<SmiRecord> read_smi_file(const std::filesystem::path &path);

void write_smi(std::ostream &out, const std::vector<SmiRecord> &records);

}  // namespace chemlm

#endif  // CHEMLM_SMI_FILE_H_
