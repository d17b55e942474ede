//
// Project chemlm
// SPDX-License-Identifier: Apache-2.0
//

#ifndef CHEMLM_CHECKPOINT_H_
#define CHEMLM_CHECKPOINT_H_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "chemlm/model.h"
#include "chemlm/tokenizer.h"

namespace chemlm {

inline constexpr std::string_view kCheckpointMagic = "CHEMFM01";

class CheckpointError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Layout: magic, u64 little-endian metadata length, metadata JSON (config,
// vocabulary and its hash, condition statistics, adapter config, start
// distribution, tensor manifest of name/shape/byte offset, caller extras),
// then every tensor as little-endian float32 in column-major order.
void save_checkpoint(const std::filesystem::path &path, const ModelParams &p,
                     const Vocabulary &v, std::string_view extra_json = "{}");

struct LoadedCheckpoint {
  ModelParams params;
  Vocabulary vocab;
  std::string extra_json;
};

// Throws CheckpointError on I/O failure, a bad magic, a truncated payload,
// inconsistent shapes or a vocabulary whose hash differs from the stored one.
LoadedCheckpoint load_checkpoint(const std::filesystem::path &path);

// Same container holding only the trainable tensors of an adapted model
// (adapters, head, value projection) plus the digest of its base checkpoint.
void save_adapter_checkpoint(const std::filesystem::path &path, const ModelParams &p,
                             const Vocabulary &v, std::string_view base_digest,
                             std::string_view extra_json = "{}");

// Attaches the stored adapters to `base` (which must have none). Throws
// CheckpointError when `expected_base_digest` is non-empty and differs from
// the recorded one, or when shapes disagree.
LoadedCheckpoint load_adapter_checkpoint(const std::filesystem::path &path,
                                         const ModelParams &base,
                                         std::string_view expected_base_digest = {});

// 16 hex digits of FNV-1a over the file bytes.
std::string file_digest(const std::filesystem::path &path);

std::string hex64(std::uint64_t x);

// Parameters rounded to float32, as they come back from a checkpoint.
void round_to_float(ModelParams &p);

}  // namespace chemlm

#endif  // CHEMLM_CHECKPOINT_H_
