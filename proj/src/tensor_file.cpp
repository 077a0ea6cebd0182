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
#include "cdrnet/tensor_file.hpp"

#include <fstream>
#include <iterator>

#include "binary_io.hpp"

namespace cdrnet {

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open '" + path + "' for reading");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw data_error("read failure on '" + path + "'");
    return bytes;
}

void write_file_bytes(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw data_error("cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw data_error("write failure on '" + path + "'");
}

} // namespace detail

std::vector<std::uint8_t> encode_tensor_dataset(const TensorDataset& data) {
    detail::ByteWriter w;
    w.raw(kTensorMagic);
    w.u32(kChannels);
    w.u32(kHours);
    w.u32(kDays);
    w.u64(data.weeks.size());
    for (const auto& uw : data.weeks) {
        w.str(uw.user_id);
        w.i64(uw.week.start.time_since_epoch().count());
        w.f64s(uw.tensor.values);
    }
    w.u8(data.norm ? 1 : 0);
    if (data.norm) {
        w.f64s(data.norm->mean);
        w.f64s(data.norm->std);
    }
    w.seal();
    return w.take();
}

TensorDataset decode_tensor_dataset(const std::vector<std::uint8_t>& bytes, const std::string& source) {
    detail::ByteReader r(bytes, source);
    if (bytes.size() < kTensorMagic.size() ||
        std::string_view(reinterpret_cast<const char*>(bytes.data()), kTensorMagic.size()) != kTensorMagic)
        r.fail("not a CDRTENSOR/1 file (bad magic or unsupported version)");
    r.verify_checksum();
    r.raw(kTensorMagic.size());

    if (r.u32() != kChannels || r.u32() != kHours || r.u32() != kDays) r.fail("unexpected tensor shape");
    const auto count = r.u64();

    TensorDataset out;
    for (std::uint64_t i = 0; i < count; ++i) {
        UserWeek uw;
        uw.user_id = r.str();
        uw.week.start = std::chrono::sys_days{std::chrono::days{r.i64()}};
        if (week_of(uw.week.start) != uw.week) r.fail("week start is not a Monday");
        r.f64s(uw.tensor.values);
        out.weeks.push_back(std::move(uw));
    }
    if (r.u8()) {
        NormStats s;
        r.f64s(s.mean);
        r.f64s(s.std);
        out.norm = s;
    }
    if (!r.at_end()) r.fail("trailing bytes");
    return out;
}

void write_tensor_file(const std::string& path, const TensorDataset& data) {
    detail::write_file_bytes(path, encode_tensor_dataset(data));
}

TensorDataset read_tensor_file(const std::string& path) {
    return decode_tensor_dataset(detail::read_file_bytes(path), path);
}

} // namespace cdrnet
