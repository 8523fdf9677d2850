#pragma once

/**
 * @file service.hpp
 * @brief HTTP front for the point store.
 *
 * POST /write          JSON batch -> {"accepted":n,"duplicates":m}
 * GET  /query          ?device&from_ns&to_ns[&fields] -> JSON series
 * GET  /export.csv     ?device&from_ns&to_ns -> CSV stream
 * GET  /healthz        liveness probe
 */

#include <memory>
#include <string>
#include <thread>

#include "tacnet/tsdb/store.hpp"

namespace httplib {
class Server;
}

namespace tacnet::tsdb {

class Service {
public:
    explicit Service(SeriesStore& store);
    ~Service();

    /// Binds 127.0.0.1 and serves on a background thread. port 0 picks an
    /// ephemeral port; the bound port is returned.
    int start(int port);
    void stop();
    int port() const { return port_; }

private:
    SeriesStore& store_;
    std::unique_ptr<httplib::Server> server_;
    std::thread thread_;
    int port_ = 0;
};

/// Parses one JSON batch (strict schema) into points; throws on any deviation.
std::vector<SeriesPoint> parse_write_batch(const std::string& body, std::string& device_out);

/// CSV serialization shared by the export endpoint and the gateway log.
std::string points_to_csv(const std::vector<SeriesPoint>& points, bool header = true);

} // namespace tacnet::tsdb
