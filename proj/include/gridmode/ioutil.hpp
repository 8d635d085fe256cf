#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace gridmode {

/// Shortest decimal form that parses back to the identical double.
inline std::string format_roundtrip(double v)
{
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace gridmode
