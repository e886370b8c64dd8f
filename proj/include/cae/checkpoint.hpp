#pragma once

// Binary model checkpoint: magic "CAEM", u32 version, u64 step, length-prefixed config JSON,
// vocabulary, then named tensors (u32 name length, name, u32 rows, u32 cols, f32 LE values).
// A JSON sidecar echoes the config next to the checkpoint file.

#include <string>
#include <string_view>

#include "cae/encoder.hpp"

namespace cae::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const ModelState& state);
/// Throws std::runtime_error on a malformed file or a tensor whose name or shape does not
/// match the recorded config.
ModelState deserialize_checkpoint(std::string_view bytes);

/// Writes `path` and `path + ".json"`.
void save_checkpoint(const ModelState& state, const std::string& path);
ModelState load_checkpoint(const std::string& path);

}  // namespace cae::model
