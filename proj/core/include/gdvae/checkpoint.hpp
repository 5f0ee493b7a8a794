#pragma once

#include "gdvae/tensor.hpp"

#include <string>

namespace gdvae {

// Binary checkpoint of parameter values (not optimizer state).
// Layout: magic "GDVAE1", then per tensor
//   [u32 name_len][name][u32 rank=2][u64 rows][u64 cols][f64 data...]
// little-endian throughout, terminated by u32 0, then a footer
//   [u32 len][config digest]
// used to reject loads against a mismatched configuration.
void save_checkpoint(const std::string& path, const ParameterStore& params,
                     const std::string& config_digest);

// Loads into an existing store; every stored tensor must match a parameter
// of the same name and shape, and every parameter must be present.
void load_checkpoint(const std::string& path, ParameterStore& params,
                     const std::string& expected_config_digest);

// Reads just the footer digest (for manifest checks).
std::string checkpoint_digest(const std::string& path);

}  // namespace gdvae
