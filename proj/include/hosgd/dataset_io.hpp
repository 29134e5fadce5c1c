#pragma once

#include <string>

#include "hosgd/objectives.hpp"

namespace hosgd {

/// Binary dataset container, so synthetic runs reproduce across machines.
///
/// Layout (little-endian):
///   bytes 0..3   magic "HOSG"
///   u32          format version (currently 1)
///   u64          K (rows)
///   u64          d (columns)
///   f64 * K*d    features, row-major
///   f64 * K      targets
void save_dataset(const std::string& path, const Dataset& data);

/// Throws std::runtime_error on missing file, bad magic, unsupported
/// version, or truncation.
Dataset load_dataset(const std::string& path);

}  // namespace hosgd
