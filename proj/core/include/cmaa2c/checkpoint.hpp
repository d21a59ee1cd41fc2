#pragma once

#include <filesystem>
#include <iosfwd>

#include "cmaa2c/mlp.hpp"

namespace cmaa2c::nn {

/// Text checkpoint, format documented in docs/checkpoint_format.md:
///
///   cmaa2c-mlp 1
///   layers <L>
///   <in> <out> <relu|linear>      (L lines)
///   then per layer: <out> lines of <in> weights, one line of <out> biases
///
/// Values are written with 17 significant digits, so save/load is exact.
void save_mlp(std::ostream& out, const Mlp& net);
Mlp load_mlp(std::istream& in);

void save_mlp(const std::filesystem::path& path, const Mlp& net);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace cmaa2c::nn
