#pragma once

// The thirteen fact relations. Each fact type exposes:
//   relation  - the relation (and .facts file) name
//   columns   - column names in persisted order
//   fields(f) - std::tie over the members in column order
// Everything generic (codec, store, persistence) is driven by these three.

#include <bridgewatch/error.hpp>
#include <bridgewatch/types.hpp>

#include <array>
#include <charconv>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace bridgewatch {

struct TransactionFact {
    Timestamp timestamp;
    ChainId chain_id;
    TxHash tx_hash;
    std::uint64_t block_number = 0;
    Address from;
    Address to;
    Amount value;
    std::uint32_t status = 0;
    std::uint64_t gas_used = 0;

    static constexpr std::string_view relation = "transaction";
    static constexpr std::array<std::string_view, 9> columns = {
        "timestamp", "chain_id", "tx_hash", "block_number", "from", "to", "value", "status", "gas_used"};
    static auto fields(auto& f)
    {
        return std::tie(f.timestamp, f.chain_id, f.tx_hash, f.block_number, f.from, f.to, f.value,
                        f.status, f.gas_used);
    }
    friend auto operator<=>(const TransactionFact&, const TransactionFact&) = default;
};

struct Erc20TransferFact {
    TxHash tx_hash;
    ChainId chain_id;
    std::uint64_t event_index = 0;
    Address token;
    Address from;
    Address to;
    Amount amount;

    static constexpr std::string_view relation = "erc20_transfer";
    static constexpr std::array<std::string_view, 7> columns = {
        "tx_hash", "chain_id", "event_index", "token", "from", "to", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.chain_id, f.event_index, f.token, f.from, f.to, f.amount);
    }
    friend auto operator<=>(const Erc20TransferFact&, const Erc20TransferFact&) = default;
};

/// Native value escrowed into a bridge on the source chain.
struct ScDepositFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    Address sender;
    Address bridge_addr;
    Amount amount;

    static constexpr std::string_view relation = "sc_deposit";
    static constexpr std::array<std::string_view, 5> columns = {
        "tx_hash", "event_index", "sender", "bridge_addr", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.sender, f.bridge_addr, f.amount);
    }
    friend auto operator<=>(const ScDepositFact&, const ScDepositFact&) = default;
};

struct ScTokenDepositedFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    std::string deposit_id;
    Address beneficiary;
    Address dst_token;
    Address orig_token;
    ChainId dst_chain_id;
    std::string standard;
    Amount amount;

    static constexpr std::string_view relation = "sc_token_deposited";
    static constexpr std::array<std::string_view, 9> columns = {
        "tx_hash",    "event_index",  "deposit_id", "beneficiary", "dst_token",
        "orig_token", "dst_chain_id", "standard",   "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.deposit_id, f.beneficiary, f.dst_token,
                        f.orig_token, f.dst_chain_id, f.standard, f.amount);
    }
    friend auto operator<=>(const ScTokenDepositedFact&, const ScTokenDepositedFact&) = default;
};

struct TcTokenDepositedFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    std::string deposit_id;
    Address beneficiary;
    Address dst_token;
    Amount amount;

    static constexpr std::string_view relation = "tc_token_deposited";
    static constexpr std::array<std::string_view, 6> columns = {
        "tx_hash", "event_index", "deposit_id", "beneficiary", "dst_token", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.deposit_id, f.beneficiary, f.dst_token, f.amount);
    }
    friend auto operator<=>(const TcTokenDepositedFact&, const TcTokenDepositedFact&) = default;
};

/// Native value escrowed into a bridge on the target chain.
struct TcWithdrawalFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    Address sender;
    Address bridge_addr;
    Amount amount;

    static constexpr std::string_view relation = "tc_withdrawal";
    static constexpr std::array<std::string_view, 5> columns = {
        "tx_hash", "event_index", "sender", "bridge_addr", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.sender, f.bridge_addr, f.amount);
    }
    friend auto operator<=>(const TcWithdrawalFact&, const TcWithdrawalFact&) = default;
};

struct TcTokenWithdrewFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    std::string withdrawal_id;
    Address beneficiary;
    Address orig_token;
    Address dst_token;
    ChainId dst_chain_id;
    std::string standard;
    Amount amount;

    static constexpr std::string_view relation = "tc_token_withdrew";
    static constexpr std::array<std::string_view, 9> columns = {
        "tx_hash",   "event_index",  "withdrawal_id", "beneficiary", "orig_token",
        "dst_token", "dst_chain_id", "standard",      "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.withdrawal_id, f.beneficiary, f.orig_token,
                        f.dst_token, f.dst_chain_id, f.standard, f.amount);
    }
    friend auto operator<=>(const TcTokenWithdrewFact&, const TcTokenWithdrewFact&) = default;
};

/// Native value released by a bridge on the source chain.
struct ScWithdrawalFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    Address bridge_addr;
    Address beneficiary;
    Amount amount;

    static constexpr std::string_view relation = "sc_withdrawal";
    static constexpr std::array<std::string_view, 5> columns = {
        "tx_hash", "event_index", "bridge_addr", "beneficiary", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.bridge_addr, f.beneficiary, f.amount);
    }
    friend auto operator<=>(const ScWithdrawalFact&, const ScWithdrawalFact&) = default;
};

struct ScTokenWithdrewFact {
    TxHash tx_hash;
    std::uint64_t event_index = 0;
    std::string withdrawal_id;
    Address beneficiary;
    Address dst_token;
    Amount amount;

    static constexpr std::string_view relation = "sc_token_withdrew";
    static constexpr std::array<std::string_view, 6> columns = {
        "tx_hash", "event_index", "withdrawal_id", "beneficiary", "dst_token", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.tx_hash, f.event_index, f.withdrawal_id, f.beneficiary, f.dst_token, f.amount);
    }
    friend auto operator<=>(const ScTokenWithdrewFact&, const ScTokenWithdrewFact&) = default;
};

struct BridgeControlledAddressFact {
    ChainId chain_id;
    Address address;

    static constexpr std::string_view relation = "bridge_controlled_address";
    static constexpr std::array<std::string_view, 2> columns = {"chain_id", "address"};
    static auto fields(auto& f) { return std::tie(f.chain_id, f.address); }
    friend auto operator<=>(const BridgeControlledAddressFact&, const BridgeControlledAddressFact&) = default;
};

struct TokenMappingFact {
    ChainId orig_chain_id;
    ChainId dst_chain_id;
    Address orig_token;
    Address dst_token;
    std::string standard;

    static constexpr std::string_view relation = "token_mapping";
    static constexpr std::array<std::string_view, 5> columns = {
        "orig_chain_id", "dst_chain_id", "orig_token", "dst_token", "standard"};
    static auto fields(auto& f)
    {
        return std::tie(f.orig_chain_id, f.dst_chain_id, f.orig_token, f.dst_token, f.standard);
    }
    friend auto operator<=>(const TokenMappingFact&, const TokenMappingFact&) = default;
};

struct WrappedNativeTokenFact {
    ChainId chain_id;
    Address token;

    static constexpr std::string_view relation = "wrapped_native_token";
    static constexpr std::array<std::string_view, 2> columns = {"chain_id", "token"};
    static auto fields(auto& f) { return std::tie(f.chain_id, f.token); }
    friend auto operator<=>(const WrappedNativeTokenFact&, const WrappedNativeTokenFact&) = default;
};

struct CctxFinalityFact {
    ChainId chain_id;
    std::uint64_t finality_seconds = 0;

    static constexpr std::string_view relation = "cctx_finality";
    static constexpr std::array<std::string_view, 2> columns = {"chain_id", "finality_seconds"};
    static auto fields(auto& f) { return std::tie(f.chain_id, f.finality_seconds); }
    friend auto operator<=>(const CctxFinalityFact&, const CctxFinalityFact&) = default;
};

template <typename... Fs>
struct FactList {};

using AllFacts =
    FactList<TransactionFact, Erc20TransferFact, ScDepositFact, ScTokenDepositedFact, TcTokenDepositedFact,
             TcWithdrawalFact, TcTokenWithdrewFact, ScWithdrawalFact, ScTokenWithdrewFact,
             BridgeControlledAddressFact, TokenMappingFact, WrappedNativeTokenFact, CctxFinalityFact>;

template <typename F>
concept Fact = requires(F f) {
    { F::relation } -> std::convertible_to<std::string_view>;
    F::columns;
    F::fields(f);
};

template <typename F>
concept EventFact = Fact<F> && requires(F f) {
    f.tx_hash;
    f.event_index;
};

// ---------------------------------------------------------------------------
// Column codec

namespace codec {

inline std::string to_text(const Timestamp& v) { return std::to_string(v.seconds); }
inline std::string to_text(const ChainId& v) { return std::to_string(v.value); }
inline std::string to_text(std::uint64_t v) { return std::to_string(v); }
inline std::string to_text(std::uint32_t v) { return std::to_string(v); }
inline std::string to_text(const Amount& v) { return v.to_string(); }
inline std::string to_text(const std::string& v) { return v; }
template <std::size_t N, typename Tag>
std::string to_text(const FixedBytes<N, Tag>& v)
{
    return v.to_hex();
}

template <typename T>
    requires std::is_unsigned_v<T>
T parse_unsigned(std::string_view text, std::string_view field)
{
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
        throw EncodingError(std::string(field), "expected unsigned integer, got '" + std::string(text) + "'");
    }
    return v;
}

inline void from_text(std::string_view text, std::string_view field, Timestamp& out)
{
    out.seconds = parse_unsigned<std::uint64_t>(text, field);
}
inline void from_text(std::string_view text, std::string_view field, ChainId& out)
{
    out.value = parse_unsigned<std::uint64_t>(text, field);
    if (out.value == 0) throw EncodingError(std::string(field), "chain id must be nonzero");
}
inline void from_text(std::string_view text, std::string_view field, std::uint64_t& out)
{
    out = parse_unsigned<std::uint64_t>(text, field);
}
inline void from_text(std::string_view text, std::string_view field, std::uint32_t& out)
{
    out = parse_unsigned<std::uint32_t>(text, field);
}
inline void from_text(std::string_view text, std::string_view field, Amount& out)
{
    out = Amount::from_decimal(text, field);
}
inline void from_text(std::string_view text, std::string_view, std::string& out) { out = std::string(text); }
template <std::size_t N, typename Tag>
void from_text(std::string_view text, std::string_view field, FixedBytes<N, Tag>& out)
{
    out = FixedBytes<N, Tag>::from_hex(text, field);
}

inline void check_text_field(const std::string& v, std::string_view field)
{
    if (v.find_first_of("\t\n\r") != std::string::npos) {
        throw EncodingError(std::string(field), "string fields may not contain tab or newline");
    }
}

}  // namespace codec

namespace detail {

template <typename V>
void validate_value(const V& v, std::string_view column)
{
    if constexpr (std::is_same_v<V, ChainId>) {
        if (v.value == 0) throw EncodingError(std::string(column), "chain id must be nonzero");
    } else if constexpr (std::is_same_v<V, std::string>) {
        codec::check_text_field(v, column);
    }
}

template <typename F, std::size_t... I>
void validate_columns(const F& fact, std::index_sequence<I...>)
{
    auto tied = F::fields(fact);
    (validate_value(std::get<I>(tied), F::columns[I]), ...);
}

template <typename F, std::size_t... I>
void parse_columns(std::span<const std::string_view> row, F& fact, std::index_sequence<I...>)
{
    auto tied = F::fields(fact);
    (codec::from_text(row[I], F::columns[I], std::get<I>(tied)), ...);
}

}  // namespace detail

/// Domain checks shared by every insertion path (typed or textual).
template <Fact F>
void validate(const F& fact)
{
    detail::validate_columns(fact, std::make_index_sequence<F::columns.size()>{});
    if constexpr (std::is_same_v<F, TransactionFact>) {
        if (fact.status > 1) throw EncodingError("status", "must be 0 or 1, got " + std::to_string(fact.status));
    }
    if constexpr (std::is_same_v<F, CctxFinalityFact>) {
        if (fact.finality_seconds == 0) throw EncodingError("finality_seconds", "must be positive");
    }
}

template <Fact F>
std::vector<std::string> to_row(const F& fact)
{
    std::vector<std::string> row;
    row.reserve(F::columns.size());
    std::apply([&](const auto&... v) { (row.push_back(codec::to_text(v)), ...); }, F::fields(fact));
    return row;
}

template <Fact F>
std::string to_line(const F& fact)
{
    std::string line;
    std::apply(
        [&](const auto&... v) {
            bool first = true;
            ((line += (first ? "" : "\t"), line += codec::to_text(v), first = false), ...);
        },
        F::fields(fact));
    return line;
}

/// Parses one tuple; throws EncodingError naming the offending column.
template <Fact F>
F from_row(std::span<const std::string_view> row)
{
    if (row.size() != F::columns.size()) {
        throw EncodingError(std::string(F::relation), "expected " + std::to_string(F::columns.size()) +
                                                          " columns, got " + std::to_string(row.size()));
    }
    F fact{};
    detail::parse_columns(row, fact, std::make_index_sequence<F::columns.size()>{});
    validate(fact);
    return fact;
}

template <Fact F>
F from_row(std::span<const std::string> row)
{
    std::vector<std::string_view> views(row.begin(), row.end());
    return from_row<F>(std::span<const std::string_view>(views));
}

inline std::vector<std::string_view> split_tabs(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find('\t', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

template <Fact F>
struct FactHasher {
    std::size_t operator()(const F& f) const noexcept
    {
        std::size_t seed = 0;
        std::apply([&](const auto&... v) { ((seed = hash_mix(seed, Hasher{}(v))), ...); }, F::fields(f));
        return seed;
    }
};

}  // namespace bridgewatch
