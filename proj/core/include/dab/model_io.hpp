#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dab/model.hpp"

namespace dab {

// Versioned little-endian binary model artifact: config, normalization
// stats, every graph parameter by name, then the codebook. save -> load ->
// save reproduces the file byte for byte. A JSON description of the config
// is written next to the binary (path + ".json") for human inspection.
//
// Loading rejects bad magic, unknown versions, truncated or oversized
// input, parameter sets that do not match the config's architecture, and
// codebook state that violates its invariants or disagrees with the graph.

inline constexpr char kModelMagic[4] = {'D', 'A', 'B', 'K'};
inline constexpr std::uint32_t kModelVersion = 1;

std::vector<std::uint8_t> serialize_model(const DabModel& model);
DabModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const DabModel& model, const std::string& path);
DabModel load_model(const std::string& path);

// The sidecar body, exposed for tests.
std::string model_config_json(const DabModel& model);

}  // namespace dab
