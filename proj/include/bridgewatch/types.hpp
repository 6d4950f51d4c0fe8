#pragma once

#include <bridgewatch/error.hpp>

#include <boost/multiprecision/cpp_int.hpp>

#include <array>
#include <charconv>
#include <compare>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <sstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bridgewatch {

namespace hex {

constexpr int digit_value(char c) noexcept
{
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline std::string_view strip_prefix(std::string_view s) noexcept
{
    if (s.size() >= 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        s.remove_prefix(2);
    }
    return s;
}

inline std::string encode(std::span<const std::uint8_t> bytes, bool prefix = true)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2 + 2);
    if (prefix) out += "0x";
    for (auto b : bytes) {
        out += kDigits[b >> 4];
        out += kDigits[b & 0x0f];
    }
    return out;
}

/// Decodes "0x"-prefixed (or bare) hex; odd length is rejected.
inline std::optional<std::vector<std::uint8_t>> decode(std::string_view s)
{
    s = strip_prefix(s);
    if (s.size() % 2 != 0) return std::nullopt;
    std::vector<std::uint8_t> out(s.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = digit_value(s[2 * i]);
        int lo = digit_value(s[2 * i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return out;
}

}  // namespace hex

/// Fixed-width byte identifier with a canonical lowercase 0x-hex text form.
template <std::size_t N, typename Tag>
struct FixedBytes {
    static constexpr std::size_t size = N;
    std::array<std::uint8_t, N> bytes{};

    static FixedBytes from_hex(std::string_view text, std::string_view field = Tag::name)
    {
        if (text.size() != 2 + 2 * N || text[0] != '0' || (text[1] != 'x' && text[1] != 'X')) {
            throw EncodingError(std::string(field),
                                "expected 0x followed by " + std::to_string(2 * N) +
                                    " hex digits, got '" + std::string(text) + "'");
        }
        FixedBytes out;
        for (std::size_t i = 0; i < N; ++i) {
            int hi = hex::digit_value(text[2 + 2 * i]);
            int lo = hex::digit_value(text[3 + 2 * i]);
            if (hi < 0 || lo < 0) {
                throw EncodingError(std::string(field),
                                    "non-hex digit in '" + std::string(text) + "'");
            }
            out.bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
        }
        return out;
    }

    static FixedBytes from_span(std::span<const std::uint8_t, N> src)
    {
        FixedBytes out;
        std::memcpy(out.bytes.data(), src.data(), N);
        return out;
    }

    std::string to_hex() const { return hex::encode(bytes); }

    bool is_zero() const noexcept
    {
        for (auto b : bytes) {
            if (b != 0) return false;
        }
        return true;
    }

    friend auto operator<=>(const FixedBytes&, const FixedBytes&) = default;
};

struct AddressTag {
    static constexpr std::string_view name = "address";
};
struct TxHashTag {
    static constexpr std::string_view name = "tx_hash";
};
struct Bytes32Tag {
    static constexpr std::string_view name = "bytes32";
};

using Address = FixedBytes<20, AddressTag>;
using TxHash = FixedBytes<32, TxHashTag>;
using Bytes32 = FixedBytes<32, Bytes32Tag>;

struct ChainId {
    std::uint64_t value = 0;

    friend auto operator<=>(const ChainId&, const ChainId&) = default;
};

struct Timestamp {
    std::uint64_t seconds = 0;

    friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

/// Unsigned 256-bit token quantity; text form is base-10 without leading zeros.
class Amount {
public:
    using value_type = boost::multiprecision::checked_uint256_t;

    Amount() = default;
    explicit Amount(value_type v) : value_(std::move(v)) {}
    explicit Amount(std::uint64_t v) : value_(v) {}

    static Amount from_decimal(std::string_view text, std::string_view field = "amount")
    {
        if (text.empty() || text.size() > 78) {
            throw EncodingError(std::string(field), "bad decimal length in '" + std::string(text) + "'");
        }
        value_type v = 0;
        try {
            for (char c : text) {
                if (c < '0' || c > '9') {
                    throw EncodingError(std::string(field),
                                        "non-decimal digit in '" + std::string(text) + "'");
                }
                v = v * 10 + static_cast<unsigned>(c - '0');
            }
        } catch (const std::overflow_error&) {
            throw EncodingError(std::string(field), "exceeds 256 bits: '" + std::string(text) + "'");
        }
        return Amount(std::move(v));
    }

    /// Big-endian hex quantity ("0x0" style, up to 64 digits).
    static Amount from_hex(std::string_view text, std::string_view field = "amount")
    {
        auto digits = hex::strip_prefix(text);
        if (digits.empty() || digits.size() > 64 || digits.size() == text.size()) {
            throw EncodingError(std::string(field), "bad hex quantity '" + std::string(text) + "'");
        }
        value_type v = 0;
        for (char c : digits) {
            int d = hex::digit_value(c);
            if (d < 0) {
                throw EncodingError(std::string(field), "non-hex digit in '" + std::string(text) + "'");
            }
            v = (v << 4) | static_cast<unsigned>(d);
        }
        return Amount(std::move(v));
    }

    static Amount from_word(std::span<const std::uint8_t, 32> word)
    {
        value_type v = 0;
        for (auto b : word) v = (v << 8) | b;
        return Amount(std::move(v));
    }

    std::array<std::uint8_t, 32> to_word() const
    {
        std::array<std::uint8_t, 32> out{};
        value_type v = value_;
        for (std::size_t i = 0; i < 32; ++i) {
            out[31 - i] = static_cast<std::uint8_t>(static_cast<unsigned>(v & 0xff));
            v >>= 8;
        }
        return out;
    }

    std::string to_string() const { return value_.str(); }
    std::string to_hex() const
    {
        if (value_.is_zero()) return "0x0";
        std::string s = "0x";
        std::ostringstream os;
        os << std::hex << value_;
        return s + os.str();
    }

    const value_type& value() const noexcept { return value_; }
    bool is_zero() const noexcept { return value_.is_zero(); }

    Amount& operator+=(const Amount& other)
    {
        value_ += other.value_;
        return *this;
    }
    friend Amount operator+(Amount a, const Amount& b) { return a += b; }

    friend bool operator==(const Amount& a, const Amount& b) { return a.value_ == b.value_; }
    friend std::strong_ordering operator<=>(const Amount& a, const Amount& b)
    {
        int c = a.value_.compare(b.value_);
        return c < 0 ? std::strong_ordering::less
                     : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
    }

private:
    value_type value_ = 0;
};

inline std::size_t hash_mix(std::size_t seed, std::size_t h) noexcept
{
    return seed ^ (h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

struct Hasher {
    template <std::size_t N, typename Tag>
    std::size_t operator()(const FixedBytes<N, Tag>& b) const noexcept
    {
        std::uint64_t head = 0;
        std::uint64_t tail = 0;
        std::memcpy(&head, b.bytes.data(), 8);
        std::memcpy(&tail, b.bytes.data() + N - 8, 8);
        return hash_mix(static_cast<std::size_t>(head), static_cast<std::size_t>(tail));
    }
    std::size_t operator()(const ChainId& c) const noexcept { return std::hash<std::uint64_t>{}(c.value); }
    std::size_t operator()(const Timestamp& t) const noexcept { return std::hash<std::uint64_t>{}(t.seconds); }
    std::size_t operator()(const Amount& a) const noexcept
    {
        return boost::multiprecision::hash_value(a.value());
    }
    std::size_t operator()(const std::string& s) const noexcept { return std::hash<std::string>{}(s); }
    template <typename T>
        requires std::is_integral_v<T>
    std::size_t operator()(T v) const noexcept
    {
        return std::hash<T>{}(v);
    }
    template <typename... Ts>
    std::size_t operator()(const std::tuple<Ts...>& t) const noexcept
    {
        return std::apply(
            [this](const auto&... xs) {
                std::size_t seed = 0;
                ((seed = hash_mix(seed, (*this)(xs))), ...);
                return seed;
            },
            t);
    }
};

}  // namespace bridgewatch
