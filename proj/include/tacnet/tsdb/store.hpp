#pragma once

/**
 * @file store.hpp
 * @brief Append-only per-device point store with durable logs.
 *
 * Each device gets one log file of length-prefixed JSON lines
 * ("<decimal byte count> <json>\n"). The in-memory index is a sorted map
 * keyed by (t_ns, source), which gives time-ordered queries and duplicate
 * detection in one place. Logs are replayed on construction.
 */

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <vector>

#include "tacnet/tsdb/point.hpp"

namespace tacnet::tsdb {

class SeriesStore {
public:
    explicit SeriesStore(std::filesystem::path data_dir);

    struct WriteResult {
        size_t accepted = 0;
        size_t duplicates = 0;
    };

    /// Appends a batch for one device; duplicates are counted and dropped.
    /// The batch is applied atomically with respect to readers.
    WriteResult write(const std::string& device, std::span<const SeriesPoint> points);

    /// Points with t_ns in [from_ns, to_ns), ascending. Throws on from > to.
    std::vector<SeriesPoint> query(const std::string& device, int64_t from_ns,
                                   int64_t to_ns) const;

    std::vector<std::string> devices() const;
    size_t total_points() const;

private:
    struct Values {
        double alcohol_raw, temp_c, rh_pct;
    };
    struct DeviceLog {
        std::map<std::pair<int64_t, uint8_t>, Values> points;
        std::unique_ptr<std::ofstream> log;
    };

    void replay(const std::filesystem::path& file, const std::string& device);
    DeviceLog& device_log(const std::string& device);

    std::filesystem::path dir_;
    mutable std::shared_mutex mu_;
    std::map<std::string, DeviceLog> devices_;
};

} // namespace tacnet::tsdb
