// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "megtext/nn/graph.hpp"

namespace megtext::nn {

using TensorMap = std::map<std::string, Mat>;

/// Little-endian binary archive of named float matrices.
void save_tensors(const std::filesystem::path& path, const std::vector<ParamPtr>& params);
void save_tensors(const std::filesystem::path& path, const TensorMap& tensors);
TensorMap load_tensors(const std::filesystem::path& path);

/// Copies archived values into matching parameters. With `require_all`, every
/// parameter must be present; shapes must always agree. Returns the number assigned.
std::size_t assign_tensors(const TensorMap& tensors, const std::vector<ParamPtr>& params, bool require_all);

}  // namespace megtext::nn
