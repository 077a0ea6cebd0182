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

#include <stdexcept>
#include <string>

namespace cdrnet {

/// Broad failure classes. They map one-to-one onto the CLI exit codes and the
/// C API status values.
enum class ErrorKind {
    usage = 1,   // bad arguments or configuration
    data = 2,    // unreadable, malformed or inconsistent input
    numeric = 3, // non-finite values, failed gradient check
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

inline Error usage_error(const std::string& what) { return {ErrorKind::usage, what}; }
inline Error data_error(const std::string& what) { return {ErrorKind::data, what}; }
inline Error numeric_error(const std::string& what) { return {ErrorKind::numeric, what}; }

} // namespace cdrnet
