#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

namespace tacnet {

/// CRC-32 (IEEE 802.3, reflected, poly 0xEDB88320). crc32("123456789") == 0xCBF43926.
inline uint32_t crc32(std::span<const uint8_t> data, uint32_t seed = 0) {
    static const std::array<uint32_t, 256> table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k)
                c = (c & 1u) ? (0xEDB88320u ^ (c >> 1)) : (c >> 1);
            t[i] = c;
        }
        return t;
    }();
    uint32_t crc = ~seed;
    for (uint8_t b : data)
        crc = table[(crc ^ b) & 0xFFu] ^ (crc >> 8);
    return ~crc;
}

} // namespace tacnet
