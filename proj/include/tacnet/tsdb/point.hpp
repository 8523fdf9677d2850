#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tacnet::tsdb {

enum class Source : uint8_t { realtime = 0, backfill = 1 };

inline const char* to_string(Source s) { return s == Source::realtime ? "realtime" : "backfill"; }

inline Source source_from_string(std::string_view s) {
    if (s == "realtime") return Source::realtime;
    if (s == "backfill") return Source::backfill;
    throw std::invalid_argument("unknown source: " + std::string(s));
}

/// One timestamped measurement; (device_id, source, t_ns) is the unique key.
struct SeriesPoint {
    int64_t t_ns = 0;
    std::string device_id;
    double alcohol_raw = 0.0;
    double temp_c = 0.0;
    double rh_pct = 0.0;
    Source source = Source::realtime;
};

inline constexpr const char* kCsvHeader = "t_ns,device,alcohol_raw,temp_c,rh_pct,source";

} // namespace tacnet::tsdb
