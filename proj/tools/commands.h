//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_TOOLS_COMMANDS_H_
#define CHEMLM_TOOLS_COMMANDS_H_

#include <CLI11.hpp>

namespace chemlm::cli {

// tokenize, canonicalize, validate, augment
void add_data_commands(CLI::App &app);
// pretrain, finetune
void add_training_commands(CLI::App &app);
// generate, benchmark, evaluate
void add_evaluation_commands(CLI::App &app);

}  // namespace chemlm::cli

#endif  // CHEMLM_TOOLS_COMMANDS_H_
