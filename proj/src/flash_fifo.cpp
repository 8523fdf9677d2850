#include "tacnet/device/flash_fifo.hpp"

#include <algorithm>
#include <array>

namespace tacnet::device {

namespace {

constexpr size_t kHeaderSize = 8;

void put_u32le(uint8_t* p, uint32_t v) {
    p[0] = static_cast<uint8_t>(v & 0xFF);
    p[1] = static_cast<uint8_t>((v >> 8) & 0xFF);
    p[2] = static_cast<uint8_t>((v >> 16) & 0xFF);
    p[3] = static_cast<uint8_t>((v >> 24) & 0xFF);
}

uint32_t get_u32le(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

/// Wrap-aware distance from `id` back to `newest` in id space.
uint16_t id_delta(uint16_t newest, uint16_t id) { return static_cast<uint16_t>(newest - id); }

} // namespace

FlashFifo::FlashFifo(std::filesystem::path file, uint64_t capacity_bytes)
    : path_(std::move(file)), capacity_(capacity_bytes / kFlashRecordSize) {
    if (capacity_ == 0) throw std::invalid_argument("FlashFifo: capacity under one record");
    slots_.resize(capacity_);

    const bool existed = std::filesystem::exists(path_) &&
                         std::filesystem::file_size(path_) >= kHeaderSize;
    file_.open(path_, std::ios::in | std::ios::out | std::ios::binary |
                          (existed ? std::ios::ate : std::ios::trunc));
    if (!file_) throw std::runtime_error("FlashFifo: cannot open " + path_.string());

    if (existed) {
        std::array<uint8_t, kHeaderSize> hdr{};
        file_.seekg(0);
        file_.read(reinterpret_cast<char*>(hdr.data()), kHeaderSize);
        head_ = get_u32le(hdr.data());
        tail_ = get_u32le(hdr.data() + 4);
        if (head_ - tail_ > capacity_)
            throw std::runtime_error("FlashFifo: corrupt header in " + path_.string());
        std::array<uint8_t, kFlashRecordSize> buf{};
        for (uint32_t i = tail_; i != head_; ++i) {
            file_.seekg(static_cast<std::streamoff>(kHeaderSize + (i % capacity_) * kFlashRecordSize));
            file_.read(reinterpret_cast<char*>(buf.data()), kFlashRecordSize);
            if (!file_) throw std::runtime_error("FlashFifo: truncated file " + path_.string());
            slots_[i % capacity_] = decode_record(buf);
        }
        file_.clear();
    } else {
        write_header();
    }
}

FlashFifo::~FlashFifo() {
    if (file_.is_open()) file_.flush();
}

void FlashFifo::append(const FlashRecord& record) {
    slots_[head_ % capacity_] = record;
    write_slot(head_);
    ++head_;
    if (head_ - tail_ > capacity_) ++tail_; // oldest slot overwritten
    write_header();
}

std::vector<FlashRecord> FlashFifo::read_range(uint16_t from_id, uint16_t to_id) const {
    if (empty()) throw NotRetainedError(0, 0);

    const uint16_t newest_id = slot(head_ - 1).rec_id;
    const uint16_t d_from = id_delta(newest_id, from_id);
    const uint16_t d_to = id_delta(newest_id, to_id);
    if (d_from < d_to) throw std::invalid_argument("read_range: from_id newer than to_id");

    std::vector<FlashRecord> hits;
    int prev_delta = -1;
    uint16_t oldest_seen = newest_id;
    for (uint32_t i = head_; i != tail_;) {
        --i;
        const FlashRecord& rec = slot(i);
        const int d = id_delta(newest_id, rec.rec_id);
        if (d < prev_delta) break; // id space wrapped; older records are unaddressable
        prev_delta = d;
        oldest_seen = rec.rec_id;
        if (d > d_from) break;
        if (d >= d_to) hits.push_back(rec);
    }
    if (hits.empty()) throw NotRetainedError(oldest_seen, newest_id);
    std::reverse(hits.begin(), hits.end());
    return hits;
}

std::optional<FlashRecord> FlashFifo::newest() const {
    if (empty()) return std::nullopt;
    return slot(head_ - 1);
}

std::optional<FlashRecord> FlashFifo::oldest_addressable() const {
    if (empty()) return std::nullopt;
    const uint16_t newest_id = slot(head_ - 1).rec_id;
    int prev_delta = -1;
    FlashRecord oldest = slot(head_ - 1);
    for (uint32_t i = head_; i != tail_;) {
        --i;
        const int d = id_delta(newest_id, slot(i).rec_id);
        if (d < prev_delta) break;
        prev_delta = d;
        oldest = slot(i);
    }
    return oldest;
}

void FlashFifo::flush() { file_.flush(); }

void FlashFifo::write_header() {
    std::array<uint8_t, kHeaderSize> hdr{};
    put_u32le(hdr.data(), head_);
    put_u32le(hdr.data() + 4, tail_);
    file_.seekp(0);
    file_.write(reinterpret_cast<const char*>(hdr.data()), kHeaderSize);
}

void FlashFifo::write_slot(uint32_t index) {
    const auto bytes = encode_record(slots_[index % capacity_]);
    file_.seekp(static_cast<std::streamoff>(kHeaderSize + (index % capacity_) * kFlashRecordSize));
    file_.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

} // namespace tacnet::device
