#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string_view>

namespace bridgewatch {

namespace detail {

inline constexpr std::array<std::uint64_t, 24> kKeccakRoundConstants = {
    0x0000000000000001ULL, 0x0000000000008082ULL, 0x800000000000808aULL, 0x8000000080008000ULL,
    0x000000000000808bULL, 0x0000000080000001ULL, 0x8000000080008081ULL, 0x8000000000008009ULL,
    0x000000000000008aULL, 0x0000000000000088ULL, 0x0000000080008009ULL, 0x000000008000000aULL,
    0x000000008000808bULL, 0x800000000000008bULL, 0x8000000000008089ULL, 0x8000000000008003ULL,
    0x8000000000008002ULL, 0x8000000000000080ULL, 0x000000000000800aULL, 0x800000008000000aULL,
    0x8000000080008081ULL, 0x8000000000008080ULL, 0x0000000080000001ULL, 0x8000000080008008ULL,
};

// rho offsets and pi lane order, walked as a single cycle starting at lane 1
inline constexpr std::array<int, 24> kRho = {1,  3,  6,  10, 15, 21, 28, 36, 45, 55, 2,  14,
                                             27, 41, 56, 8,  25, 43, 62, 18, 39, 61, 20, 44};
inline constexpr std::array<int, 24> kPi = {10, 7,  11, 17, 18, 3, 5,  16, 8,  21, 24, 4,
                                            15, 23, 19, 13, 12, 2, 20, 14, 22, 9,  6,  1};

constexpr std::uint64_t rotl(std::uint64_t x, int n) noexcept
{
    return (x << n) | (x >> (64 - n));
}

inline void keccak_f1600(std::array<std::uint64_t, 25>& s) noexcept
{
    for (auto rc : kKeccakRoundConstants) {
        std::uint64_t c[5];
        for (int x = 0; x < 5; ++x) c[x] = s[x] ^ s[x + 5] ^ s[x + 10] ^ s[x + 15] ^ s[x + 20];
        for (int x = 0; x < 5; ++x) {
            std::uint64_t d = c[(x + 4) % 5] ^ rotl(c[(x + 1) % 5], 1);
            for (int y = 0; y < 25; y += 5) s[y + x] ^= d;
        }
        std::uint64_t carry = s[1];
        for (int i = 0; i < 24; ++i) {
            int j = kPi[i];
            std::uint64_t tmp = s[j];
            s[j] = rotl(carry, kRho[i]);
            carry = tmp;
        }
        for (int y = 0; y < 25; y += 5) {
            std::uint64_t row[5];
            for (int x = 0; x < 5; ++x) row[x] = s[y + x];
            for (int x = 0; x < 5; ++x) s[y + x] = row[x] ^ (~row[(x + 1) % 5] & row[(x + 2) % 5]);
        }
        s[0] ^= rc;
    }
}

inline std::uint64_t load_le64(const std::uint8_t* p) noexcept
{
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace detail

/// Ethereum Keccak-256 (original Keccak padding 0x01, not FIPS-202 SHA3).
inline std::array<std::uint8_t, 32> keccak256(std::span<const std::uint8_t> input) noexcept
{
    constexpr std::size_t rate = 136;
    std::array<std::uint64_t, 25> state{};

    while (input.size() >= rate) {
        for (std::size_t i = 0; i < rate / 8; ++i) state[i] ^= detail::load_le64(input.data() + 8 * i);
        detail::keccak_f1600(state);
        input = input.subspan(rate);
    }

    std::array<std::uint8_t, rate> last{};
    std::memcpy(last.data(), input.data(), input.size());
    last[input.size()] ^= 0x01;
    last[rate - 1] ^= 0x80;
    for (std::size_t i = 0; i < rate / 8; ++i) state[i] ^= detail::load_le64(last.data() + 8 * i);
    detail::keccak_f1600(state);

    std::array<std::uint8_t, 32> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t b = 0; b < 8; ++b) out[8 * i + b] = static_cast<std::uint8_t>(state[i] >> (8 * b));
    }
    return out;
}

inline std::array<std::uint8_t, 32> keccak256(std::string_view text) noexcept
{
    return keccak256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace bridgewatch
