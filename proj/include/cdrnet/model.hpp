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
#include "cdrnet/svm.hpp"
#include "cdrnet/tensornet.hpp"

namespace cdrnet {

enum class Attribute { gender, age };

std::string_view attribute_name(Attribute a);
Attribute parse_attribute(std::string_view name);

/// Everything needed to score raw week tensors: the network and its weights,
/// the input normalization, the target encoding, and optionally an SVM head.
struct Model {
    NetworkConfig config;
    NetworkParams params;
    NormStats norm;
    Attribute attribute = Attribute::gender;
    std::vector<int> age_edges;            // meaningful for Attribute::age
    std::vector<std::string> class_labels; // size == config.classes
    std::optional<SvmModel> svm;

    bool operator==(const Model&) const = default;
};

inline constexpr std::string_view kModelMagic = "CDRNET/1";

// Layout (little-endian, IEEE-754 doubles):
//   "CDRNET/1" | str attribute | u32 n + i32 age edges | u32 n + str class labels
//   config: u32 in_c, in_h, in_w | 6 x (u32 filters, kh, kw) | u32 dense7, dense8, classes | f64 alpha
//   norm: f64 mean[8] | f64 std[8]
//   manifest: u32 n | n x { str name | u32 rank | u32 dims... | f64 values }
//   u8 has_svm | [str layer | f64 lambda | u32 classes | u32 dim | u32 n + str labels |
//                 f64 mean[dim] | f64 std[dim] | f64 w[classes][dim] | f64 b[classes]]
//   u64 fnv1a64 of all prior bytes
std::vector<std::uint8_t> encode_model(const Model& model);
Model decode_model(const std::vector<std::uint8_t>& bytes, const std::string& source = "model file");

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

} // namespace cdrnet
