#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "art/config.hpp"
#include "art/parameters.hpp"

// Binary checkpoint: "ARTC", u32 version, u32 manifest length, manifest
// text, then every parameter as little-endian f64 in manifest order.
//
// Manifest text is the run config echo, a `---` separator line, then one
// `name dims offset` line per parameter (dims as `a x b`, offset in bytes
// from the payload start).

namespace art::harness {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ManifestEntry {
    std::string name;
    Shape shape;
    std::uint64_t offset = 0;
};

struct Checkpoint {
    std::uint32_t version = kCheckpointVersion;
    RunConfig config;
    std::vector<ManifestEntry> manifest;
    std::vector<std::vector<double>> buffers;  // aligned with manifest
};

void save_checkpoint(const std::filesystem::path& path, const RunConfig& config, const ParameterSet& params);

/// Throws DataError for an unreadable or malformed file.
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Structural fields (d, heads, layers, K, T_h, T_f, pooling) where the two
/// configs differ, as `field (checkpoint X, config Y)` strings.
std::vector<std::string> structural_mismatches(const ModelConfig& checkpoint, const ModelConfig& config);

/// Copies checkpoint buffers into `params` by name. Throws
/// IncompatibilityError when names or shapes disagree.
void load_parameters(const Checkpoint& checkpoint, ParameterSet& params);

}  // namespace art::harness
