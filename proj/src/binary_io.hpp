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

// Little-endian binary encoding shared by the tensor and model container
// formats. Every value is written byte by byte so files are identical on any
// host.

#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cdrnet/error.hpp"

namespace cdrnet::detail {

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (auto b : bytes) {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

class ByteWriter {
public:
    void raw(std::string_view s) { buf_.insert(buf_.end(), s.begin(), s.end()); }

    void u8(std::uint8_t v) { buf_.push_back(v); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }

    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    void f64s(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }

    void str(std::string_view s) {
        u32(static_cast<std::uint32_t>(s.size()));
        raw(s);
    }

    /// Appends the checksum of everything written so far.
    void seal() { u64(fnv1a64(buf_)); }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string what)
        : bytes_(bytes), what_(std::move(what)) {}

    /// Verifies and strips the trailing checksum. Call before reading.
    void verify_checksum() {
        if (bytes_.size() < 8) fail("truncated file");
        auto body = bytes_.first(bytes_.size() - 8);
        ByteReader tail(bytes_.last(8), what_);
        if (tail.u64() != fnv1a64(body)) fail("checksum mismatch (corrupt or truncated file)");
        bytes_ = body;
    }

    std::string_view raw(std::size_t n) {
        need(n);
        std::string_view out(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return out;
    }

    std::uint8_t u8() {
        need(1);
        return bytes_[pos_++];
    }

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
        return v;
    }

    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
    double f64() { return std::bit_cast<double>(u64()); }

    void f64s(std::span<double> out) {
        need(out.size() * 8);
        for (double& v : out) v = f64();
    }

    std::string str() {
        auto n = u32();
        return std::string(raw(n));
    }

    bool at_end() const { return pos_ == bytes_.size(); }

    [[noreturn]] void fail(const std::string& why) const { throw data_error(what_ + ": " + why); }

private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) fail("truncated file");
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string what_;
};

std::vector<std::uint8_t> read_file_bytes(const std::string& path);
void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes);

} // namespace cdrnet::detail
