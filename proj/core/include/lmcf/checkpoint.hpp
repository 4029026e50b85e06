#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lmcf/flow.hpp"

namespace lmcf {

// Binary restart file, all fields little-endian:
//   "LMCF" | u32 version = 1 | u32 n | u32 N_a x n | f64 P_a x n | f64 t |
//   f64 kappa | f64 u values (N_1 * ... * N_n, row-major, axis 0 slowest)
// Jets are not stored; they are recomputed on load.

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedCheckpoint {
  FlowState state;
  /// Grid and kappa come from the file; every other field keeps its default.
  FlowConfig config;
};

std::vector<std::uint8_t> encode_checkpoint(const FlowState& state, const FlowConfig& cfg);
/// Throws CheckpointError on bad magic, version, dimension or length.
LoadedCheckpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes,
                                   Scheme scheme = Scheme::spectral);

void checkpoint_save(const FlowState& state, const FlowConfig& cfg,
                     const std::filesystem::path& path);
/// Jets of the returned state are computed with `scheme`.
LoadedCheckpoint checkpoint_load(const std::filesystem::path& path,
                                 Scheme scheme = Scheme::spectral);

}  // namespace lmcf
