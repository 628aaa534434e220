#pragma once

#include <string>

#include "wuglab/model.hpp"

namespace wuglab {

// Binary container: magic, version, ModelConfig as JSON, then every named
// tensor as shape + raw 64-bit floats (little-endian). Round-trips
// bit-exactly. Load throws CorruptFileError on truncation or bad magic and
// VersionMismatchError on a foreign version tag.
void save_checkpoint(const Parameters& params, const std::string& path);
Parameters load_checkpoint(const std::string& path);

}  // namespace wuglab
