#pragma once

/**
 * @file flash_record.hpp
 * @brief The 16-byte persisted minute record and its little-endian codec.
 *
 * Layout (16 bytes): type u16le | id u16le | v1 f32le | v2 f32le | v3 f32le.
 * v1 is the gain-normalized alcohol signal, v2 temperature, v3 humidity.
 */

#include <array>
#include <bit>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace tacnet::device {

inline constexpr size_t kFlashRecordSize = 16;
inline constexpr uint16_t kRecTypeMinuteAvg = 1;

struct FlashRecord {
    uint16_t rec_type = kRecTypeMinuteAvg;
    uint16_t rec_id = 0;
    float v1 = 0.0f; // alcohol, normalized counts
    float v2 = 0.0f; // temperature, degC
    float v3 = 0.0f; // relative humidity, %
};

namespace detail {
inline void put_u16le(uint8_t* p, uint16_t v) {
    p[0] = static_cast<uint8_t>(v & 0xFF);
    p[1] = static_cast<uint8_t>(v >> 8);
}
inline uint16_t get_u16le(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (static_cast<uint16_t>(p[1]) << 8));
}
inline void put_f32le(uint8_t* p, float v) {
    const auto bits = std::bit_cast<uint32_t>(v);
    p[0] = static_cast<uint8_t>(bits & 0xFF);
    p[1] = static_cast<uint8_t>((bits >> 8) & 0xFF);
    p[2] = static_cast<uint8_t>((bits >> 16) & 0xFF);
    p[3] = static_cast<uint8_t>((bits >> 24) & 0xFF);
}
inline float get_f32le(const uint8_t* p) {
    const uint32_t bits = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
                          (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}
} // namespace detail

inline std::array<uint8_t, kFlashRecordSize> encode_record(const FlashRecord& r) {
    std::array<uint8_t, kFlashRecordSize> out{};
    detail::put_u16le(out.data(), r.rec_type);
    detail::put_u16le(out.data() + 2, r.rec_id);
    detail::put_f32le(out.data() + 4, r.v1);
    detail::put_f32le(out.data() + 8, r.v2);
    detail::put_f32le(out.data() + 12, r.v3);
    return out;
}

inline FlashRecord decode_record(std::span<const uint8_t> bytes) {
    if (bytes.size() != kFlashRecordSize)
        throw std::length_error("decode_record: expected exactly 16 bytes");
    FlashRecord r;
    r.rec_type = detail::get_u16le(bytes.data());
    r.rec_id = detail::get_u16le(bytes.data() + 2);
    r.v1 = detail::get_f32le(bytes.data() + 4);
    r.v2 = detail::get_f32le(bytes.data() + 8);
    r.v3 = detail::get_f32le(bytes.data() + 12);
    return r;
}

} // namespace tacnet::device
