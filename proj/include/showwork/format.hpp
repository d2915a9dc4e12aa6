#pragma once

// Locale-independent number formatting and parsing.

#include <array>
#include <charconv>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

namespace showwork {

/// Shortest decimal string that parses back to exactly `v`. Fixed notation
/// for decimal exponents in [-5, 17), scientific outside.
inline std::string format_shortest(double v) {
    std::array<char, 64> buf{};
    auto write = [&](auto... fmt) {
        auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, fmt...);
        return std::string(buf.data(), res.ptr);
    };
    const auto sci = write(std::chars_format::scientific);
    const int exponent = std::stoi(sci.substr(sci.find('e') + 1));
    return exponent < -5 || exponent >= 17 ? write() : write(std::chars_format::fixed);
}

/// `v` printed with 17 significant digits (%.17g style).
inline std::string format_g17(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), end);
}

/// Fixed-point with `digits` decimals; used for SVG pixel coordinates.
inline std::string format_fixed(double v, int digits) {
    std::array<char, 64> buf{};
    if (v == 0.0) v = 0.0;  // no "-0.00"
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed, digits);
    std::string s(buf.data(), end);
    if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
    return s;
}

/// Parses a finite real occupying the whole string.
inline std::optional<double> parse_real(std::string_view text) {
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double v = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace showwork
