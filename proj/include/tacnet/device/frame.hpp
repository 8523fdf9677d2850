#pragma once

/**
 * @file frame.hpp
 * @brief 20-byte application-layer frames carried over any ordered reliable
 *        byte stream. Wire layout and opcode set are documented in
 *        docs/protocol.md.
 *
 * Frame: opcode u8 | seq u8 | length u8 | payload[length], length <= 17,
 * so no frame ever exceeds the 20-byte characteristic MTU.
 */

#include <bit>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace tacnet::device {

inline constexpr size_t kFrameMtu = 20;
inline constexpr size_t kFrameHeader = 3;
inline constexpr size_t kMaxPayload = kFrameMtu - kFrameHeader; // 17

enum class Opcode : uint8_t {
    // requests
    GetInfo = 0x01,
    Subscribe = 0x02,
    Unsubscribe = 0x03,
    FlashRead = 0x04,
    SetTimeRef = 0x05,
    // responses
    Info = 0x81,
    Ack = 0x82,
    Nak = 0x83,
    // pushes
    Meas = 0xA0,
    FlashData = 0xA1,
    FlashEnd = 0xA2,
};

enum class NakReason : uint8_t {
    UnknownOpcode = 1,
    BadLength = 2,
    NotRetained = 3,
};

struct Frame {
    Opcode opcode = Opcode::GetInfo;
    uint8_t seq = 0;
    std::vector<uint8_t> payload;

    size_t wire_size() const { return kFrameHeader + payload.size(); }
};

inline std::vector<uint8_t> encode_frame(const Frame& f) {
    if (f.payload.size() > kMaxPayload)
        throw std::length_error("encode_frame: payload exceeds 17 bytes");
    std::vector<uint8_t> out;
    out.reserve(f.wire_size());
    out.push_back(static_cast<uint8_t>(f.opcode));
    out.push_back(f.seq);
    out.push_back(static_cast<uint8_t>(f.payload.size()));
    out.insert(out.end(), f.payload.begin(), f.payload.end());
    return out;
}

/**
 * Incremental decoder for a frame stream: feed bytes, poll frames.
 * Frames are self-delimiting via the length byte.
 */
class FrameDecoder {
public:
    void feed(std::span<const uint8_t> bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }

    std::optional<Frame> next() {
        if (buf_.size() < kFrameHeader) return std::nullopt;
        const uint8_t len = buf_[2];
        if (len > kMaxPayload) throw std::runtime_error("frame stream: length byte exceeds MTU");
        if (buf_.size() < kFrameHeader + len) return std::nullopt;
        Frame f;
        f.opcode = static_cast<Opcode>(buf_[0]);
        f.seq = buf_[1];
        f.payload.assign(buf_.begin() + kFrameHeader, buf_.begin() + kFrameHeader + len);
        buf_.erase(buf_.begin(), buf_.begin() + kFrameHeader + len);
        return f;
    }

private:
    std::vector<uint8_t> buf_;
};

// little-endian payload helpers
inline void append_u16le(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(static_cast<uint8_t>(x & 0xFF));
    v.push_back(static_cast<uint8_t>(x >> 8));
}
inline void append_u32le(std::vector<uint8_t>& v, uint32_t x) {
    for (int i = 0; i < 4; ++i) v.push_back(static_cast<uint8_t>((x >> (8 * i)) & 0xFF));
}
inline void append_f32le(std::vector<uint8_t>& v, float x) {
    append_u32le(v, std::bit_cast<uint32_t>(x));
}

inline uint16_t read_u16le(std::span<const uint8_t> p, size_t at) {
    return static_cast<uint16_t>(p[at] | (static_cast<uint16_t>(p[at + 1]) << 8));
}
inline uint32_t read_u32le(std::span<const uint8_t> p, size_t at) {
    uint32_t x = 0;
    for (int i = 3; i >= 0; --i) x = (x << 8) | p[at + static_cast<size_t>(i)];
    return x;
}
inline float read_f32le(std::span<const uint8_t> p, size_t at) {
    return std::bit_cast<float>(read_u32le(p, at));
}

} // namespace tacnet::device
