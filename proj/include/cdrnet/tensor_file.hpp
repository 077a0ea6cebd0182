/* Copyright 2026 The cdrnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cdrnet/featurize.hpp"

namespace cdrnet {

inline constexpr std::string_view kTensorMagic = "CDRTENSOR/1";

/// Contents of a featurized dataset file: raw (unnormalized) user-week
/// tensors plus an optional NormStats record fitted over all of them.
struct TensorDataset {
    std::vector<UserWeek> weeks;
    std::optional<NormStats> norm;
};

// Layout (little-endian):
//   "CDRTENSOR/1" | u32 channels | u32 hours | u32 days | u64 count
//   count x { str user_id | i64 week start (days since 1970-01-01) | f64[1344] }
//   u8 has_norm | [f64 mean[8] | f64 std[8]] | u64 fnv1a64 of all prior bytes
std::vector<std::uint8_t> encode_tensor_dataset(const TensorDataset& data);
TensorDataset decode_tensor_dataset(const std::vector<std::uint8_t>& bytes,
                                    const std::string& source = "tensor file");

void write_tensor_file(const std::string& path, const TensorDataset& data);
TensorDataset read_tensor_file(const std::string& path);

} // namespace cdrnet
