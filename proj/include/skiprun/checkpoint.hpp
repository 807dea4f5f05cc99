#pragma once

#include <filesystem>
#include <iosfwd>

#include "skiprun/weights.hpp"

namespace skiprun {

// Binary checkpoint, little-endian:
//   "SKPT" | u32 version=1 | u32 len + JSON config |
//   u32 count | per tensor: u32 name len, name, u32 ndims, u64 dims[], u8 dtype(0=f32), f32 payload
inline constexpr char kCheckpointMagic[4] = {'S', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelWeights& weights, std::ostream& out);
void save_checkpoint(const ModelWeights& weights, const std::filesystem::path& path);

// Throws CheckpointError (BadMagic, VersionMismatch, Truncated, Structure) or
// IoError when the file cannot be opened.
ModelWeights load_checkpoint(std::istream& in);
ModelWeights load_checkpoint(const std::filesystem::path& path);

}  // namespace skiprun
