#pragma once

#include <charconv>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace relext {

/// Shortest decimal text that parses back to exactly `v`.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view key, std::string_view text) {
    double v = 0.0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("'" + std::string(key) + "' expects a number, got '" + std::string(text) + "'");
    }
    return v;
}

inline long long parse_int(std::string_view key, std::string_view text) {
    long long v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("'" + std::string(key) + "' expects an integer, got '" + std::string(text) + "'");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view key, std::string_view text) {
    std::uint64_t v = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("'" + std::string(key) + "' expects a non-negative integer, got '" +
                                    std::string(text) + "'");
    }
    return v;
}

inline bool parse_bool(std::string_view key, std::string_view text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw std::invalid_argument("'" + std::string(key) + "' expects true/false, got '" + std::string(text) + "'");
}

}  // namespace relext
