// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace gesture {

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

/// Parses the whole of `text` as a double; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

}  // namespace gesture
