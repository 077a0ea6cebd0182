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
#include <cmath>
#include <string>

#include "cdrnet/error.hpp"
#include "cdrnet/rng.hpp"
#include "cdrnet/tensornet.hpp"

namespace cdrnet {
namespace {

std::string layer_name(int layer) {
    if (layer < kConvLayers) return "conv" + std::to_string(layer + 1);
    if (layer == kConvLayers) return "dense7";
    if (layer == kConvLayers + 1) return "dense8";
    return "classmap";
}

// Weight shape of each layer; bias length is shape[0].
std::vector<std::vector<int>> weight_shapes(const NetworkConfig& cfg) {
    std::vector<std::vector<int>> shapes;
    int c_in = cfg.in_channels;
    for (const auto& spec : cfg.conv) {
        shapes.push_back({spec.filters, c_in, spec.kernel_h, spec.kernel_w});
        c_in = spec.filters;
    }
    shapes.push_back({cfg.dense7, cfg.conv.back().filters});
    shapes.push_back({cfg.dense8, cfg.dense7});
    shapes.push_back({cfg.classes, cfg.dense8});
    return shapes;
}

std::size_t product(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

Tensor3 activate(const Tensor3& pre, double alpha) {
    Tensor3 post = pre;
    for (double& v : post.data)
        if (v < 0.0) v *= alpha;
    return post;
}

} // namespace

void NetworkConfig::validate() const {
    if (in_channels < 1 || in_height < 1 || in_width < 1) throw usage_error("input shape must be positive");
    for (const auto& spec : conv)
        if (spec.filters < 1 || spec.kernel_h < 1 || spec.kernel_w < 1)
            throw usage_error("conv filter counts and kernel sizes must be positive");
    if (dense7 < 1 || dense8 < 1) throw usage_error("dense widths must be positive");
    if (classes < 2) throw usage_error("at least two output classes are required");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw usage_error("leaky ReLU slope must lie in [0, 1)");

    int h = in_height, w = in_width;
    for (int l = 0; l < kConvLayers; ++l) {
        h -= conv[l].kernel_h - 1;
        w -= conv[l].kernel_w - 1;
        if (h < 1 || w < 1)
            throw usage_error(layer_name(l) + " kernel does not fit its " + std::to_string(h + conv[l].kernel_h - 1) +
                              "x" + std::to_string(w + conv[l].kernel_w - 1) + " input");
    }
    if (h != 1 || w != 1)
        throw usage_error("conv stack must end at 1x1, ends at " + std::to_string(h) + "x" + std::to_string(w));
}

std::vector<Shape3> NetworkConfig::shape_chain() const {
    validate();
    std::vector<Shape3> chain{{in_channels, in_height, in_width}};
    for (const auto& spec : conv) {
        const auto& prev = chain.back();
        chain.push_back({spec.filters, prev.height - spec.kernel_h + 1, prev.width - spec.kernel_w + 1});
    }
    return chain;
}

NetworkConfig NetworkConfig::downsized(int classes) {
    NetworkConfig cfg;
    cfg.in_channels = 2;
    cfg.in_height = 10;
    cfg.in_width = 7;
    cfg.conv = {{{2, 2, 1}, {2, 2, 1}, {2, 2, 1}, {2, 2, 1}, {2, 6, 1}, {2, 1, 7}}};
    cfg.dense7 = 5;
    cfg.dense8 = 4;
    cfg.classes = classes;
    cfg.validate();
    return cfg;
}

NetworkConfig make_network_config(int classes) {
    NetworkConfig cfg;
    cfg.classes = classes;
    cfg.validate();
    return cfg;
}

std::size_t NetworkParams::parameter_count() const {
    std::size_t n = 0;
    for (const auto& t : tensors) n += t.values.size();
    return n;
}

NetworkParams zero_params(const NetworkConfig& config) {
    config.validate();
    NetworkParams p;
    const auto shapes = weight_shapes(config);
    for (int l = 0; l < kLayers; ++l) {
        const auto& ws = shapes[l];
        p.tensors.push_back({layer_name(l) + ".weight", ws, std::vector<double>(product(ws), 0.0)});
        p.tensors.push_back({layer_name(l) + ".bias", {ws[0]}, std::vector<double>(ws[0], 0.0)});
    }
    return p;
}

void check_params(const NetworkConfig& config, const NetworkParams& params) {
    const auto expected = zero_params(config);
    if (params.tensors.size() != expected.tensors.size())
        throw data_error("parameter manifest has " + std::to_string(params.tensors.size()) + " tensors, expected " +
                         std::to_string(expected.tensors.size()));
    for (std::size_t k = 0; k < expected.tensors.size(); ++k) {
        const auto& e = expected.tensors[k];
        const auto& t = params.tensors[k];
        if (t.name != e.name || t.shape != e.shape || t.values.size() != e.values.size())
            throw data_error("parameter tensor '" + t.name + "' does not match expected '" + e.name + "'");
        for (double v : t.values)
            if (!std::isfinite(v)) throw data_error("parameter tensor '" + t.name + "' holds a non-finite value");
    }
}

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed) {
    auto p = zero_params(config);
    Rng rng(seed);
    for (int l = 0; l < kLayers; ++l) {
        auto& w = p.weights(l);
        const auto fan_in = product(w.shape) / static_cast<std::size_t>(w.shape[0]);
        const double sd = std::sqrt(2.0 / ((1.0 + config.alpha * config.alpha) * static_cast<double>(fan_in)));
        for (double& v : w.values) v = sd * rng.normal();
    }
    return p;
}

ForwardResult forward(const NetworkConfig& config, const NetworkParams& params, std::span<const double> x) {
    const std::size_t in_size = static_cast<std::size_t>(config.in_channels) * config.in_height * config.in_width;
    if (x.size() != in_size)
        throw usage_error("input has " + std::to_string(x.size()) + " values, network expects " +
                          std::to_string(in_size));
    if (params.tensors.size() != 2 * kLayers) throw usage_error("parameter set does not match network layout");

    ForwardResult r;
    auto& t = r.trace;
    t.config = config;
    t.input = Tensor3(config.in_channels, config.in_height, config.in_width);
    std::copy(x.begin(), x.end(), t.input.data.begin());

    const Tensor3* cur = &t.input;
    t.conv_pre.reserve(kConvLayers);
    t.conv_post.reserve(kConvLayers);
    for (int l = 0; l < kConvLayers; ++l) {
        t.conv_pre.push_back(conv2d_valid(*cur, params.weights(l).values, params.bias(l).values,
                                          config.conv[l].kernel_h, config.conv[l].kernel_w));
        t.conv_post.push_back(activate(t.conv_pre.back(), config.alpha));
        cur = &t.conv_post.back();
    }

    t.dense7_pre = dense_affine(cur->data, params.weights(6).values, params.bias(6).values);
    t.dense7_post = leaky_relu(t.dense7_pre, config.alpha);
    t.dense8_pre = dense_affine(t.dense7_post, params.weights(7).values, params.bias(7).values);
    t.dense8_post = leaky_relu(t.dense8_pre, config.alpha);
    t.logits = dense_affine(t.dense8_post, params.weights(8).values, params.bias(8).values);

    r.probs = softmax(t.logits);
    r.features = t.dense8_post;
    return r;
}

void backward(const NetworkConfig& config, const NetworkParams& params, const ForwardTrace& trace,
              std::span<const double> d_logits, NetworkParams& grads) {
    if (!(trace.config == config) || trace.conv_pre.size() != kConvLayers ||
        trace.logits.size() != static_cast<std::size_t>(config.classes))
        throw usage_error("forward trace does not belong to this network");
    if (d_logits.size() != trace.logits.size()) throw usage_error("upstream gradient has wrong length");
    if (grads.tensors.size() != params.tensors.size()) throw usage_error("gradient buffer does not match params");

    auto d = dense_affine_backward(trace.dense8_post, params.weights(8).values, d_logits, grads.weights(8).values,
                                   grads.bias(8).values);
    d = leaky_relu_backward(trace.dense8_pre, d, config.alpha);
    d = dense_affine_backward(trace.dense7_post, params.weights(7).values, d, grads.weights(7).values,
                              grads.bias(7).values);
    d = leaky_relu_backward(trace.dense7_pre, d, config.alpha);
    d = dense_affine_backward(trace.conv_post.back().data, params.weights(6).values, d, grads.weights(6).values,
                              grads.bias(6).values);

    Tensor3 d_out = trace.conv_post.back();
    d_out.data = std::move(d);
    for (int l = kConvLayers - 1; l >= 0; --l) {
        const auto& pre = trace.conv_pre[l];
        for (std::size_t k = 0; k < d_out.data.size(); ++k)
            if (pre.data[k] < 0.0) d_out.data[k] *= config.alpha;
        const Tensor3& input = l == 0 ? trace.input : trace.conv_post[l - 1];
        Tensor3 d_in;
        conv2d_valid_backward(input, params.weights(l).values, d_out, config.conv[l].kernel_h,
                              config.conv[l].kernel_w, grads.weights(l).values, grads.bias(l).values,
                              l == 0 ? nullptr : &d_in);
        d_out = std::move(d_in);
    }
}

NetworkParams backward(const NetworkConfig& config, const NetworkParams& params, const ForwardTrace& trace,
                       std::span<const double> d_logits) {
    auto grads = zero_params(config);
    backward(config, params, trace, d_logits, grads);
    return grads;
}

} // namespace cdrnet
