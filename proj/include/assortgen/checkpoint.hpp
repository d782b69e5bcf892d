#pragma once

#include <string>

#include <json.hpp>

#include "assortgen/network.hpp"

namespace assortgen {

inline constexpr int kCheckpointFormatVersion = 1;

struct Checkpoint {
  PolicyParams params;
  nlohmann::json train_config = nlohmann::json::object();
  Seed seed{};
};

/// Writes <dir>/manifest.json and <dir>/params.bin (little-endian float64
/// arrays at the offsets listed in the manifest). Creates dir if needed.
void save_checkpoint(const std::string& dir, const Checkpoint& ckpt);

/// Throws MissingCheckpoint, UnsupportedVersion, ShapeMismatch or NonFinite.
Checkpoint load_checkpoint(const std::string& dir);

nlohmann::json architecture_to_json(const Architecture& arch);
Architecture architecture_from_json(const nlohmann::json& j);

}  // namespace assortgen
