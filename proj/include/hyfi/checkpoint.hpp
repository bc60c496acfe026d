#pragma once

#include <filesystem>

#include "hyfi/encoder.hpp"

namespace hyfi {

// Single-file tensor container: a JSON manifest line (format tag, activation,
// tensor names and shapes) followed by raw little-endian doubles in manifest
// order. Round-trips bit-exactly.
void save_checkpoint(const ModelParameters& params, const std::filesystem::path& file);
ModelParameters load_checkpoint(const std::filesystem::path& file);

}  // namespace hyfi
