#pragma once

#include <string>

#include "modno/don.hpp"

namespace modno {

// Binary model snapshot. Layout: magic bytes "MODNOCKPT", a u32 format
// version, a u32 network count, then each network as u32 layer count,
// u32 layer sizes, u32 activation id, and raw little-endian f64 weight and
// bias payloads in layer order. Networks are stored branch first, then the
// trunks in operator order, so shape metadata (N_s, K, d_i) is recovered
// from the networks themselves.
void save_checkpoint(const std::string& path, const ModnoModel& model);

// Reads a file written by save_checkpoint. Throws IoError on a missing file,
// bad magic, unsupported version, or truncated payload.
ModnoModel load_checkpoint(const std::string& path);

}  // namespace modno
