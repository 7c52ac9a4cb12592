#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

namespace aau {

/// 17 significant digits: enough for an exact double round-trip through text.
inline std::string fmt_g17(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

/// Short form for labels (CI levels, axes) where round-trip is not needed.
inline std::string fmt_short(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", value);
    return buf;
}

/// Strict full-token double parse; returns false on trailing garbage.
inline bool parse_double(const std::string& token, double& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtod(token.c_str(), &end);
    return end == token.c_str() + token.size();
}

inline bool parse_long(const std::string& token, long& out) {
    if (token.empty()) return false;
    char* end = nullptr;
    out = std::strtol(token.c_str(), &end, 10);
    return end == token.c_str() + token.size();
}

} // namespace aau
