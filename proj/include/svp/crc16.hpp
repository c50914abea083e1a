#ifndef SVP_CRC16_HPP
#define SVP_CRC16_HPP

#include <cstdint>
#include <span>

namespace svp {

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
/// check("123456789") == 0x29B1.
constexpr std::uint16_t crc16_ccitt_false(std::span<const std::uint8_t> data, std::uint16_t crc = 0xFFFF)
{
    for (std::uint8_t byte : data) {
        crc ^= static_cast<std::uint16_t>(byte << 8);
        for (int bit = 0; bit < 8; ++bit)
            crc = (crc & 0x8000) ? static_cast<std::uint16_t>((crc << 1) ^ 0x1021) : static_cast<std::uint16_t>(crc << 1);
    }
    return crc;
}

} // namespace svp

#endif // SVP_CRC16_HPP
