#pragma once

/**
 * @file gateway.hpp
 * @brief Headless gateway: device discovery, realtime streaming, flash
 *        backfill with timestamp reconstruction, and store-and-forward
 *        upload to the time-series service.
 */

#include <deque>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "tacnet/transport/frame_link.hpp"
#include "tacnet/tsdb/point.hpp"
#include "tacnet/util/clock.hpp"

namespace tacnet::gateway {

struct DeviceDescriptor {
    std::string device_name;
    std::string transport_address;
    uint16_t latest_rec_id = 0;
    uint32_t record_count = 0;
};

/// Upload target; the HTTP client and test fault injectors implement this.
class WriteSink {
public:
    struct Result {
        bool ok = false;
        size_t accepted = 0;
        size_t duplicates = 0;
    };
    virtual ~WriteSink() = default;
    virtual Result write(const std::string& device, std::span<const tsdb::SeriesPoint> points) = 0;
};

/// POSTs JSON batches to the service's /write endpoint.
class HttpWriteSink : public WriteSink {
public:
    explicit HttpWriteSink(std::string base_url) : base_url_(std::move(base_url)) {}
    Result write(const std::string& device, std::span<const tsdb::SeriesPoint> points) override;

private:
    std::string base_url_;
};

/// Service write payload; field order is part of the wire contract.
/// Batches are single-source by construction.
nlohmann::ordered_json to_json_points(const std::string& device,
                                      std::span<const tsdb::SeriesPoint> points);

struct GatewayConfig {
    std::string filter_prefix = "TAC";
    std::filesystem::path spool_dir;
    std::filesystem::path csv_dir;
    size_t upload_batch = 60;
    int reply_timeout_ms = 2000;
    /// Retry a CRC-failed flash dump this many times before giving up.
    int integrity_retries = 1;
};

struct BackfillReport {
    size_t records_fetched = 0;
    size_t points_enqueued = 0; // new (not previously uploaded) records
    size_t gap_records = 0;     // reported by device but not addressable
    int retries_used = 0;
};

class Gateway {
public:
    Gateway(GatewayConfig config, transport::Transport& transport, WriteSink& sink, Clock& clock);

    /// Probes every transport endpoint; devices whose name starts with the
    /// filter prefix are returned. Unreachable endpoints are skipped with a
    /// warning, never an error.
    std::vector<DeviceDescriptor> scan();

    /// Opens the session link to one device. Replays any spooled points.
    bool connect(const DeviceDescriptor& device);
    void disconnect();
    bool connected() const;

    bool subscribe();
    bool unsubscribe();

    /**
     * Drains the link: measurement pushes become realtime points (stamped
     * with this gateway's clock), written to the local CSV and queued for
     * upload. Returns the number of new realtime points.
     */
    size_t poll();

    /// Downloads flash history and reconstructs timestamps:
    /// t(id) = now - 60 s * (latest - id), wrap-aware. Idempotent.
    BackfillReport backfill();

    /// Pushes pending uploads in order; stops at the first failure.
    bool flush();

    size_t pending_uploads() const { return pending_.size(); }
    uint64_t realtime_points() const { return realtime_points_; }
    bool saw_disconnect() const { return saw_disconnect_; }
    const std::string& device_name() const { return device_.device_name; }

private:
    std::optional<device::Frame> request(const device::Frame& req);
    void handle_push(const device::Frame& frame);
    void enqueue(const tsdb::SeriesPoint& p);
    void append_csv(const tsdb::SeriesPoint& p);
    void rewrite_spool();
    void load_spool();
    std::optional<DeviceDescriptor> probe(const std::string& address, transport::FrameLink& link);
    std::vector<device::FlashRecord> fetch_records(uint16_t from_id, uint16_t to_id);

    GatewayConfig cfg_;
    transport::Transport& transport_;
    WriteSink& sink_;
    Clock& clock_;

    DeviceDescriptor device_;
    std::unique_ptr<transport::FrameLink> link_;
    std::deque<tsdb::SeriesPoint> pending_;
    std::set<uint16_t> uploaded_backfill_ids_;
    std::unique_ptr<std::ofstream> csv_;
    uint64_t realtime_points_ = 0;
    bool saw_disconnect_ = false;
};

} // namespace tacnet::gateway
