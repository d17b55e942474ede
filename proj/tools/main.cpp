//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#include <iostream>

#include "chemlm/trainer.h"
#include "commands.h"
#include "run_support.h"

int main(int argc, char **argv) {
  using namespace chemlm::cli;

  CLI::App app{ "chemlm: chemical language model toolkit" };
  app.require_subcommand(1);
  add_data_commands(app);
  add_training_commands(app);
  add_evaluation_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kUsage;
  } catch (const UsageError &e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const chemlm::DivergenceError &e) {
    std::cerr << "diverged at step " << e.step() << ": " << e.what() << "\n";
    return kDiverged;
  } catch (const std::exception &e) {
    // Malformed inputs, unreadable files, checkpoint and vocabulary mismatches.
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kOk;
}
