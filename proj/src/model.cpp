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
#include "cdrnet/model.hpp"

#include <cmath>

#include "binary_io.hpp"

namespace cdrnet {

std::string_view attribute_name(Attribute a) { return a == Attribute::gender ? "gender" : "age"; }

Attribute parse_attribute(std::string_view name) {
    if (name == "gender") return Attribute::gender;
    if (name == "age") return Attribute::age;
    throw usage_error("unknown attribute '" + std::string(name) + "' (expected gender or age)");
}

std::vector<std::uint8_t> encode_model(const Model& m) {
    m.config.validate();
    check_params(m.config, m.params);
    if (m.class_labels.size() != static_cast<std::size_t>(m.config.classes))
        throw usage_error("class label vocabulary does not match the class count");

    detail::ByteWriter w;
    w.raw(kModelMagic);
    w.str(attribute_name(m.attribute));
    w.u32(static_cast<std::uint32_t>(m.age_edges.size()));
    for (int e : m.age_edges) w.i32(e);
    w.u32(static_cast<std::uint32_t>(m.class_labels.size()));
    for (const auto& s : m.class_labels) w.str(s);

    const auto& c = m.config;
    w.u32(c.in_channels);
    w.u32(c.in_height);
    w.u32(c.in_width);
    for (const auto& spec : c.conv) {
        w.u32(spec.filters);
        w.u32(spec.kernel_h);
        w.u32(spec.kernel_w);
    }
    w.u32(c.dense7);
    w.u32(c.dense8);
    w.u32(c.classes);
    w.f64(c.alpha);

    w.f64s(m.norm.mean);
    w.f64s(m.norm.std);

    w.u32(static_cast<std::uint32_t>(m.params.tensors.size()));
    for (const auto& t : m.params.tensors) {
        w.str(t.name);
        w.u32(static_cast<std::uint32_t>(t.shape.size()));
        for (int d : t.shape) w.u32(d);
        w.f64s(t.values);
    }

    w.u8(m.svm ? 1 : 0);
    if (m.svm) {
        const auto& s = *m.svm;
        w.str(s.feature_layer);
        w.f64(s.lambda);
        w.u32(s.classes());
        w.u32(s.feature_dim());
        w.u32(static_cast<std::uint32_t>(s.class_labels.size()));
        for (const auto& l : s.class_labels) w.str(l);
        w.f64s(s.feature_mean);
        w.f64s(s.feature_std);
        for (const auto& row : s.weights) w.f64s(row);
        w.f64s(s.bias);
    }
    w.seal();
    return w.take();
}

Model decode_model(const std::vector<std::uint8_t>& bytes, const std::string& source) {
    detail::ByteReader r(bytes, source);
    if (bytes.size() < kModelMagic.size() ||
        std::string_view(reinterpret_cast<const char*>(bytes.data()), kModelMagic.size()) != kModelMagic)
        r.fail("not a CDRNET/1 model (bad magic or unsupported version)");
    r.verify_checksum();
    r.raw(kModelMagic.size());

    Model m;
    try {
        m.attribute = parse_attribute(r.str());
    } catch (const Error& e) {
        r.fail(e.what());
    }
    m.age_edges.resize(r.u32());
    for (int& e : m.age_edges) e = r.i32();
    m.class_labels.resize(r.u32());
    for (auto& s : m.class_labels) s = r.str();

    auto& c = m.config;
    c.in_channels = static_cast<int>(r.u32());
    c.in_height = static_cast<int>(r.u32());
    c.in_width = static_cast<int>(r.u32());
    for (auto& spec : c.conv) {
        spec.filters = static_cast<int>(r.u32());
        spec.kernel_h = static_cast<int>(r.u32());
        spec.kernel_w = static_cast<int>(r.u32());
    }
    c.dense7 = static_cast<int>(r.u32());
    c.dense8 = static_cast<int>(r.u32());
    c.classes = static_cast<int>(r.u32());
    c.alpha = r.f64();
    try {
        c.validate();
    } catch (const Error& e) {
        r.fail(std::string("invalid network config: ") + e.what());
    }
    if (m.class_labels.size() != static_cast<std::size_t>(c.classes)) r.fail("class vocabulary size mismatch");

    r.f64s(m.norm.mean);
    r.f64s(m.norm.std);

    const auto expected = zero_params(c);
    const auto n = r.u32();
    if (n != expected.tensors.size()) r.fail("layer manifest does not match config");
    for (std::uint32_t k = 0; k < n; ++k) {
        ParamTensor t;
        t.name = r.str();
        t.shape.resize(r.u32());
        for (int& d : t.shape) d = static_cast<int>(r.u32());
        const auto& e = expected.tensors[k];
        if (t.name != e.name || t.shape != e.shape) r.fail("layer manifest entry '" + t.name + "' does not match config");
        t.values.resize(e.values.size());
        r.f64s(t.values);
        m.params.tensors.push_back(std::move(t));
    }

    if (r.u8()) {
        SvmModel s;
        s.feature_layer = r.str();
        s.lambda = r.f64();
        const auto classes = r.u32();
        const auto dim = r.u32();
        if (classes != static_cast<std::uint32_t>(c.classes) || dim != static_cast<std::uint32_t>(c.dense8))
            r.fail("SVM head shape does not match network");
        s.class_labels.resize(r.u32());
        for (auto& l : s.class_labels) l = r.str();
        s.feature_mean.resize(dim);
        s.feature_std.resize(dim);
        r.f64s(s.feature_mean);
        r.f64s(s.feature_std);
        s.weights.assign(classes, std::vector<double>(dim));
        for (auto& row : s.weights) r.f64s(row);
        s.bias.resize(classes);
        r.f64s(s.bias);
        m.svm = std::move(s);
    }
    if (!r.at_end()) r.fail("trailing bytes");

    try {
        check_params(c, m.params);
    } catch (const Error& e) {
        r.fail(e.what());
    }
    return m;
}

void save_model(const Model& model, const std::string& path) {
    detail::write_file_bytes(path, encode_model(model));
}

Model load_model(const std::string& path) { return decode_model(detail::read_file_bytes(path), path); }

} // namespace cdrnet
