#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace tacnet {

/// Shortest stable decimal form used in CSV output ("%.9g"). Deterministic
/// for a given value, unlike locale-dependent stream insertion.
inline std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

inline std::string fmt_i64(int64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%lld", static_cast<long long>(v));
    return buf;
}

} // namespace tacnet
