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

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cdrnet {

/// Dense C x H x W block, row-major.
struct Tensor3 {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int c, int h, int w, double fill = 0.0)
        : channels(c), height(h), width(w), data(static_cast<std::size_t>(c) * h * w, fill) {}

    std::size_t size() const { return data.size(); }
    double& at(int c, int y, int x) { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
    double at(int c, int y, int x) const { return data[(static_cast<std::size_t>(c) * height + y) * width + x]; }
};

// ---------------------------------------------------------------------------
// Layer kernels
// ---------------------------------------------------------------------------

/// Valid (unpadded) stride-1 cross-correlation. weights are laid out
/// C_out x C_in x kernel_h x kernel_w; C_out is bias.size().
///   out[o][y][x] = bias[o] + sum_{c,i,j} input[c][y+i][x+j] * weights[o][c][i][j]
Tensor3 conv2d_valid(const Tensor3& input, std::span<const double> weights, std::span<const double> bias,
                     int kernel_h, int kernel_w);

/// Accumulates dL/dweights and dL/dbias into d_weights/d_bias. When d_input
/// is non-null it is overwritten with dL/dinput.
void conv2d_valid_backward(const Tensor3& input, std::span<const double> weights, const Tensor3& d_output,
                           int kernel_h, int kernel_w, std::span<double> d_weights, std::span<double> d_bias,
                           Tensor3* d_input);

std::vector<double> leaky_relu(std::span<const double> x, double alpha);

/// dL/dx given the pre-activation x and dL/dy.
std::vector<double> leaky_relu_backward(std::span<const double> x, std::span<const double> d_y, double alpha);

/// W x + b with W stored row-major, rows = b.size().
std::vector<double> dense_affine(std::span<const double> x, std::span<const double> weights,
                                 std::span<const double> bias);

/// Accumulates dL/dW and dL/db; returns dL/dx.
std::vector<double> dense_affine_backward(std::span<const double> x, std::span<const double> weights,
                                          std::span<const double> d_y, std::span<double> d_weights,
                                          std::span<double> d_bias);

std::vector<double> softmax(std::span<const double> logits);

/// dL/dlogits from dL/dprobs through the softmax Jacobian.
std::vector<double> softmax_backward(std::span<const double> probs, std::span<const double> d_probs);

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

struct ConvSpec {
    int filters = 0;
    int kernel_h = 1; // along hours
    int kernel_w = 1; // along days

    bool operator==(const ConvSpec&) const = default;
};

inline constexpr int kConvLayers = 6;
inline constexpr int kLayers = kConvLayers + 3; // + dense7, dense8, class map

struct Shape3 {
    int channels, height, width;
    bool operator==(const Shape3&) const = default;
};

/// Six valid convolutions, two hidden dense layers and an affine class map.
/// Every layer except the class map is followed by a leaky ReLU.
struct NetworkConfig {
    int in_channels = 8;
    int in_height = 24; // hours
    int in_width = 7;   // days
    std::array<ConvSpec, kConvLayers> conv{{{16, 4, 1}, {16, 4, 1}, {16, 4, 1}, {16, 4, 1}, {32, 12, 1}, {64, 1, 7}}};
    int dense7 = 128;
    int dense8 = 64;
    int classes = 2;
    double alpha = 0.01;

    bool operator==(const NetworkConfig&) const = default;

    /// Throws a usage error unless every size is positive, alpha is in
    /// [0, 1), classes >= 2 and the convolution stack ends at 1 x 1.
    void validate() const;

    /// Input shape followed by the output shape of each conv layer.
    std::vector<Shape3> shape_chain() const;

    /// Tiny variant used for finite-difference checks: input 2 x 10 x 7,
    /// conv kernels 2x1 (x4), 6x1, 1x7, two filters per layer.
    static NetworkConfig downsized(int classes = 3);
};

/// Builds and validates the default stack for the given class count.
NetworkConfig make_network_config(int classes);

struct ParamTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<double> values;

    bool operator==(const ParamTensor&) const = default;
};

/// Weights and biases of every layer, ordered
/// conv1.w, conv1.b, ..., conv6.b, dense7.w, dense7.b, dense8.w, dense8.b,
/// classmap.w, classmap.b.
struct NetworkParams {
    std::vector<ParamTensor> tensors;

    ParamTensor& weights(int layer) { return tensors[2 * layer]; }
    ParamTensor& bias(int layer) { return tensors[2 * layer + 1]; }
    const ParamTensor& weights(int layer) const { return tensors[2 * layer]; }
    const ParamTensor& bias(int layer) const { return tensors[2 * layer + 1]; }

    std::size_t parameter_count() const;
    bool operator==(const NetworkParams&) const = default;
};

/// All-zero tensors shaped for config.
NetworkParams zero_params(const NetworkConfig& config);

/// Throws a data error if any tensor's name or shape disagrees with config
/// or if any value is non-finite.
void check_params(const NetworkConfig& config, const NetworkParams& params);

/// Zero-mean normal weights with variance 2 / ((1 + alpha^2) fan_in), zero
/// biases. Deterministic in seed.
NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed);

/// Cached activations of one forward pass.
struct ForwardTrace {
    NetworkConfig config;
    Tensor3 input;
    std::vector<Tensor3> conv_pre;  // per conv layer
    std::vector<Tensor3> conv_post; // per conv layer
    std::vector<double> dense7_pre, dense7_post;
    std::vector<double> dense8_pre, dense8_post;
    std::vector<double> logits;
};

struct ForwardResult {
    std::vector<double> probs;
    std::vector<double> features; // dense8 post-activation
    ForwardTrace trace;
};

/// x is C x H x W matching the config's input shape.
ForwardResult forward(const NetworkConfig& config, const NetworkParams& params, std::span<const double> x);

/// Reverse-mode pass from dL/dlogits. Gradients are added into grads, which
/// must be shaped like params.
void backward(const NetworkConfig& config, const NetworkParams& params, const ForwardTrace& trace,
              std::span<const double> d_logits, NetworkParams& grads);

NetworkParams backward(const NetworkConfig& config, const NetworkParams& params, const ForwardTrace& trace,
                       std::span<const double> d_logits);

} // namespace cdrnet
