#pragma once

/**
 * @file flash_fifo.hpp
 * @brief Non-volatile circular FIFO over a flat file, 16 bytes per slot.
 *
 * File layout: 8-byte header (head u32le, tail u32le) followed by the slot
 * array. head counts records ever appended, tail records ever evicted; both
 * are free-running, so count = head - tail and slot = index % capacity with
 * no empty/full ambiguity. 8 MiB holds 524,288 records (> 100 days of
 * minutes); the oldest record is overwritten once full.
 */

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tacnet/device/flash_record.hpp"

namespace tacnet::device {

/// Requested ids fall entirely outside the retained window.
class NotRetainedError : public std::runtime_error {
public:
    NotRetainedError(uint16_t avail_from, uint16_t avail_to)
        : std::runtime_error("flash: requested range not retained"),
          avail_from_id(avail_from),
          avail_to_id(avail_to) {}
    uint16_t avail_from_id;
    uint16_t avail_to_id;
};

class FlashFifo {
public:
    static constexpr uint64_t kDefaultCapacityBytes = 8ull * 1024 * 1024;

    /// Opens (or creates) the backing file; existing contents are reloaded.
    explicit FlashFifo(std::filesystem::path file,
                       uint64_t capacity_bytes = kDefaultCapacityBytes);
    ~FlashFifo();

    FlashFifo(const FlashFifo&) = delete;
    FlashFifo& operator=(const FlashFifo&) = delete;

    size_t capacity_records() const { return capacity_; }
    size_t size() const { return head_ - tail_; }
    bool empty() const { return head_ == tail_; }

    uint32_t head() const { return head_; }
    uint32_t tail() const { return tail_; }

    void append(const FlashRecord& record);

    /**
     * Records with ids in [from_id, to_id], both ends interpreted relative
     * to the newest id (wrap-aware), returned oldest first. Ids repeat every
     * 65,536 minutes, so only the most recent wrap is addressable. Partial
     * overlap returns the retained intersection; zero overlap throws
     * NotRetainedError carrying the available range.
     */
    std::vector<FlashRecord> read_range(uint16_t from_id, uint16_t to_id) const;

    std::optional<FlashRecord> newest() const;
    std::optional<FlashRecord> oldest_addressable() const;

    void flush();

private:
    const FlashRecord& slot(uint32_t index) const { return slots_[index % capacity_]; }
    void write_header();
    void write_slot(uint32_t index);

    std::filesystem::path path_;
    size_t capacity_;
    uint32_t head_ = 0;
    uint32_t tail_ = 0;
    std::vector<FlashRecord> slots_;
    mutable std::fstream file_;
};

} // namespace tacnet::device
