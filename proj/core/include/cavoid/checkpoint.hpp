#pragma once

// Binary parameter checkpoints.
//
//   bytes 0..7   magic "CAVQNET" + NUL
//   u32          format version (1)
//   u32 x 3      obs_dim, hidden_size, n_actions
//   u32          tensor count
//   per tensor:  u32 name length, name bytes, u32 rows, u32 cols,
//                rows*cols IEEE-754 doubles, row-major
//
// All integers and doubles are little-endian. A load of a save is bit-exact.

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cavoid/neural.hpp"

namespace cavoid {

std::string serialize_params(const QNetworkParams& params);
/// Throws ParseError with the byte offset of the first problem.
QNetworkParams deserialize_params(const std::string& bytes, const std::string& source = "<checkpoint>");

void save_checkpoint(const QNetworkParams& params, const std::filesystem::path& path);
QNetworkParams load_checkpoint(const std::filesystem::path& path);

}  // namespace cavoid
