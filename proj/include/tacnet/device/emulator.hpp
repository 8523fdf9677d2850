#pragma once

/**
 * @file emulator.hpp
 * @brief Firmware emulation on a virtual 1 Hz clock: auto-ranging
 *        acquisition, minute averaging into flash, and the frame protocol.
 */

#include <cstdint>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include "tacnet/device/analog_frontend.hpp"
#include "tacnet/device/flash_fifo.hpp"
#include "tacnet/device/frame.hpp"
#include "tacnet/device/gain_table.hpp"
#include "tacnet/util/rng.hpp"

namespace tacnet::device {

struct DeviceConfig {
    std::string name = "TAC-01";
    GainTable gains{};
    int ref_gain_index = 5; // 120 kOhm, the gain the calibration line refers to
    uint8_t fw_version = 1;
    uint64_t noise_seed = 1;
    // measurement noise expressed as counts at the reference gain
    double noise_sigma_counts_clean = 5.8;
    double noise_sigma_counts_onbody = 23.8;
};

/// Per-tick analog truth handed to the front end by the physio layer.
struct AnalogInputs {
    double current_na = 0.0;
    double temp_c = 25.0;
    double rh_pct = 40.0;
    bool on_body = false;
};

/// Minute average of gain-normalized samples, or a gap when no samples.
struct MinuteSummary {
    uint16_t rec_id = 0;
    bool gap = false;
    FlashRecord record{};
};

class DeviceEmulator {
public:
    DeviceEmulator(DeviceConfig config, const std::filesystem::path& flash_file);

    /// Advance the device by one virtual second.
    void tick(const AnalogInputs& in);

    /// Process one inbound frame; responses are returned in send order.
    std::vector<Frame> handle_frame(const Frame& request);

    /// Frames pushed by the device (measurement stream, flash dump chunks).
    std::vector<Frame> drain_outbound();

    /// Pausing acquisition creates explicit gaps (ids advance, records skipped).
    void set_acquiring(bool on) { acquiring_ = on; }

    const DeviceConfig& config() const { return cfg_; }
    const FlashFifo& fifo() const { return fifo_; }
    uint16_t latest_rec_id() const { return static_cast<uint16_t>(next_rec_id_ - 1); }
    uint64_t uptime_s() const { return uptime_s_; }
    bool subscribed() const { return subscribed_; }
    const SensorSample& last_sample() const { return last_sample_; }
    uint64_t push_count() const { return meas_pushed_; }

private:
    void close_minute();
    Frame make_nak(const Frame& req, NakReason reason, std::vector<uint8_t> detail = {}) const;

    DeviceConfig cfg_;
    FlashFifo fifo_;
    Rng noise_;

    uint64_t uptime_s_ = 0;
    uint8_t gain_index_;
    bool acquiring_ = true;
    bool subscribed_ = false;
    SensorSample last_sample_{};

    // minute accumulation of gain-normalized values
    double sum_norm_ = 0.0, sum_temp_ = 0.0, sum_rh_ = 0.0;
    uint32_t minute_count_ = 0;
    uint16_t next_rec_id_ = 1;

    uint8_t meas_seq_ = 0;
    uint64_t meas_pushed_ = 0;
    std::deque<Frame> outbound_;
};

/// Average a raw sample buffer into one record (exposed for direct testing).
FlashRecord minute_average(const std::vector<SensorSample>& buffer, uint16_t rec_id,
                           int ref_gain_index, const GainTable& table);

} // namespace tacnet::device
