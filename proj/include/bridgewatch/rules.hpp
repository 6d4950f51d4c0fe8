#pragma once

// Cross-chain rules 1-8 evaluated as hand-written hash joins over a sealed
// FactStore. Each eval_ruleN returns the rule's tuple set as a sorted,
// duplicate-free vector, so outputs never depend on fact insertion order.

#include <bridgewatch/fact_store.hpp>

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace bridgewatch {

/// Rules 1 and 2: a deposit escrowed on the source chain.
struct ScValidDeposit {
    Timestamp timestamp;
    TxHash tx_hash;
    std::string deposit_id;
    Address sender;
    Address bridge_addr;
    Address beneficiary;
    Address dst_token;
    Address orig_token;
    ChainId orig_chain_id;
    ChainId dst_chain_id;
    std::string standard;
    Amount amount;

    static constexpr std::array<std::string_view, 12> columns = {
        "timestamp", "tx_hash",    "deposit_id",    "sender",       "bridge_addr", "benef",
        "dst_token", "orig_token", "orig_chain_id", "dst_chain_id", "std",         "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.timestamp, f.tx_hash, f.deposit_id, f.sender, f.bridge_addr, f.beneficiary,
                        f.dst_token, f.orig_token, f.orig_chain_id, f.dst_chain_id, f.standard, f.amount);
    }
    friend auto operator<=>(const ScValidDeposit&, const ScValidDeposit&) = default;
};

/// Rule 3: a deposit released on the target chain.
struct TcValidDeposit {
    Timestamp timestamp;
    TxHash tx_hash;
    std::string deposit_id;
    Address beneficiary;
    Address dst_token;
    ChainId chain_id;
    Amount amount;

    static constexpr std::array<std::string_view, 7> columns = {
        "timestamp", "tx_hash", "deposit_id", "benef", "dst_token", "chain_id", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.timestamp, f.tx_hash, f.deposit_id, f.beneficiary, f.dst_token, f.chain_id, f.amount);
    }
    friend auto operator<=>(const TcValidDeposit&, const TcValidDeposit&) = default;
};

/// Rules 5 and 6: a withdrawal escrowed on the target chain.
struct TcValidWithdrawal {
    Timestamp timestamp;
    TxHash tx_hash;
    std::string withdrawal_id;
    Address sender;
    Address bridge_addr;
    Address beneficiary;
    Address orig_token;
    Address dst_token;
    ChainId dst_chain_id;
    ChainId orig_chain_id;
    std::string standard;
    Amount amount;

    static constexpr std::array<std::string_view, 12> columns = {
        "timestamp",  "tx_hash",   "withdrawal_id", "sender",        "bridge_addr", "benef",
        "orig_token", "dst_token", "dst_chain_id",  "orig_chain_id", "std",         "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.timestamp, f.tx_hash, f.withdrawal_id, f.sender, f.bridge_addr, f.beneficiary,
                        f.orig_token, f.dst_token, f.dst_chain_id, f.orig_chain_id, f.standard, f.amount);
    }
    friend auto operator<=>(const TcValidWithdrawal&, const TcValidWithdrawal&) = default;
};

/// Rule 7: a withdrawal released on the source chain.
struct ScValidWithdrawal {
    Timestamp timestamp;
    TxHash tx_hash;
    std::string withdrawal_id;
    Address beneficiary;
    Address dst_token;
    ChainId chain_id;
    Amount amount;

    static constexpr std::array<std::string_view, 7> columns = {
        "timestamp", "tx_hash", "withdrawal_id", "benef", "dst_token", "chain_id", "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.timestamp, f.tx_hash, f.withdrawal_id, f.beneficiary, f.dst_token, f.chain_id, f.amount);
    }
    friend auto operator<=>(const ScValidWithdrawal&, const ScValidWithdrawal&) = default;
};

/// Rules 4 and 8: both legs of a cross-chain transaction. `id` is the
/// deposit id (rule 4) or withdrawal id (rule 8).
struct Cctx {
    ChainId orig_chain_id;
    Timestamp orig_timestamp;
    TxHash orig_tx_hash;
    ChainId dst_chain_id;
    Timestamp dst_timestamp;
    TxHash dst_tx_hash;
    std::string id;
    Address orig_token;
    Address dst_token;
    Address sender;
    Address beneficiary;
    Amount amount;

    static constexpr std::array<std::string_view, 12> columns = {
        "orig_chain_id", "orig_timestamp", "orig_tx_hash", "dst_chain_id", "dst_timestamp", "dst_tx_hash",
        "id",            "orig_token",     "dst_token",    "sender",       "benef",         "amount"};
    static auto fields(auto& f)
    {
        return std::tie(f.orig_chain_id, f.orig_timestamp, f.orig_tx_hash, f.dst_chain_id, f.dst_timestamp,
                        f.dst_tx_hash, f.id, f.orig_token, f.dst_token, f.sender, f.beneficiary, f.amount);
    }
    friend auto operator<=>(const Cctx&, const Cctx&) = default;

    std::uint64_t latency() const noexcept { return dst_timestamp.seconds - orig_timestamp.seconds; }
};

enum class RuleId : int {
    ScValidNativeTokenDeposit = 1,
    ScValidErc20TokenDeposit = 2,
    TcValidErc20TokenDeposit = 3,
    CctxValidDeposit = 4,
    TcValidNativeTokenWithdrawal = 5,
    TcValidErc20TokenWithdrawal = 6,
    ScValidErc20TokenWithdrawal = 7,
    CctxValidWithdrawal = 8,
};

inline constexpr std::array<RuleId, 8> kAllRules = {
    RuleId::ScValidNativeTokenDeposit,    RuleId::ScValidErc20TokenDeposit,    RuleId::TcValidErc20TokenDeposit,
    RuleId::CctxValidDeposit,             RuleId::TcValidNativeTokenWithdrawal, RuleId::TcValidErc20TokenWithdrawal,
    RuleId::ScValidErc20TokenWithdrawal, RuleId::CctxValidWithdrawal};

inline constexpr std::string_view rule_name(RuleId id) noexcept
{
    switch (id) {
    case RuleId::ScValidNativeTokenDeposit: return "SC_ValidNativeTokenDeposit";
    case RuleId::ScValidErc20TokenDeposit: return "SC_ValidERC20TokenDeposit";
    case RuleId::TcValidErc20TokenDeposit: return "TC_ValidERC20TokenDeposit";
    case RuleId::CctxValidDeposit: return "CCTX_ValidDeposit";
    case RuleId::TcValidNativeTokenWithdrawal: return "TC_ValidNativeTokenWithdrawal";
    case RuleId::TcValidErc20TokenWithdrawal: return "TC_ValidERC20TokenWithdrawal";
    case RuleId::ScValidErc20TokenWithdrawal: return "SC_ValidERC20TokenWithdrawal";
    case RuleId::CctxValidWithdrawal: return "CCTX_ValidWithdrawal";
    }
    return "?";
}

struct RuleOutputs {
    std::vector<ScValidDeposit> rule1;
    std::vector<ScValidDeposit> rule2;
    std::vector<TcValidDeposit> rule3;
    std::vector<Cctx> rule4;
    std::vector<TcValidWithdrawal> rule5;
    std::vector<TcValidWithdrawal> rule6;
    std::vector<ScValidWithdrawal> rule7;
    std::vector<Cctx> rule8;

    /// Calls fn(RuleId, const std::vector<T>&) for each rule in order.
    template <typename Fn>
    void visit(Fn&& fn) const
    {
        fn(RuleId::ScValidNativeTokenDeposit, rule1);
        fn(RuleId::ScValidErc20TokenDeposit, rule2);
        fn(RuleId::TcValidErc20TokenDeposit, rule3);
        fn(RuleId::CctxValidDeposit, rule4);
        fn(RuleId::TcValidNativeTokenWithdrawal, rule5);
        fn(RuleId::TcValidErc20TokenWithdrawal, rule6);
        fn(RuleId::ScValidErc20TokenWithdrawal, rule7);
        fn(RuleId::CctxValidWithdrawal, rule8);
    }

    std::size_t count(RuleId id) const
    {
        std::size_t n = 0;
        visit([&](RuleId r, const auto& rows) {
            if (r == id) n = rows.size();
        });
        return n;
    }

    friend bool operator==(const RuleOutputs&, const RuleOutputs&) = default;
};

template <typename T>
void normalize(std::vector<T>& rows)
{
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
}

/// orig + window < dst, with the addition checked for overflow.
inline bool finality_satisfied(Timestamp orig, std::uint64_t window, Timestamp dst)
{
    if (orig.seconds > std::numeric_limits<std::uint64_t>::max() - window) {
        throw Error("timestamp overflow: " + std::to_string(orig.seconds) + " + " + std::to_string(window));
    }
    return orig.seconds + window < dst.seconds;
}

namespace detail {

inline void require_sealed(const FactStore& store)
{
    if (!store.sealed()) throw std::logic_error("rule evaluation requires a sealed FactStore");
}

/// Visits the transaction facts of `tx` that are successful and carry `value`
/// (when given), passing each to fn.
template <typename Fn>
void for_each_successful_tx(const FactStore& store, const TxHash& tx, const Amount* value, Fn&& fn)
{
    auto txs = store.get<TransactionFact>();
    for (auto i : store.by_tx<TransactionFact>(tx)) {
        const auto& t = txs[i];
        if (t.status != 1) continue;
        if (value && t.value != *value) continue;
        fn(t);
    }
}

}  // namespace detail

// Rule 1 ---------------------------------------------------------------------

inline std::vector<ScValidDeposit> eval_rule1(const FactStore& store)
{
    detail::require_sealed(store);
    std::vector<ScValidDeposit> out;
    auto native = store.get<ScDepositFact>();
    for (const auto& ev : store.get<ScTokenDepositedFact>()) {
        for (auto ni : store.by_tx<ScDepositFact>(ev.tx_hash)) {
            const auto& escrow = native[ni];
            if (escrow.amount != ev.amount || !(ev.event_index > escrow.event_index)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &ev.amount, [&](const TransactionFact& tx) {
                if (tx.from != escrow.sender) return;
                if (!store.has_mapping(tx.chain_id, ev.dst_chain_id, ev.orig_token, ev.dst_token, ev.standard)) return;
                if (!store.is_wrapped_native(tx.chain_id, ev.orig_token)) return;
                if (!store.is_bridge_controlled(tx.chain_id, escrow.bridge_addr)) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.deposit_id, escrow.sender, escrow.bridge_addr,
                               ev.beneficiary, ev.dst_token, ev.orig_token, tx.chain_id, ev.dst_chain_id,
                               ev.standard, ev.amount});
            });
        }
    }
    normalize(out);
    return out;
}

// Rule 2 ---------------------------------------------------------------------

inline std::vector<ScValidDeposit> eval_rule2(const FactStore& store)
{
    detail::require_sealed(store);
    std::vector<ScValidDeposit> out;
    const Amount zero{};
    auto transfers = store.get<Erc20TransferFact>();
    for (const auto& ev : store.get<ScTokenDepositedFact>()) {
        for (auto ti : store.by_tx<Erc20TransferFact>(ev.tx_hash)) {
            const auto& tr = transfers[ti];
            if (tr.token != ev.orig_token || tr.amount != ev.amount) continue;
            if (!(ev.event_index > tr.event_index)) continue;
            if (!store.is_bridge_controlled(tr.chain_id, tr.to)) continue;
            if (!store.has_mapping(tr.chain_id, ev.dst_chain_id, ev.orig_token, ev.dst_token, ev.standard)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &zero, [&](const TransactionFact& tx) {
                if (tx.chain_id != tr.chain_id) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.deposit_id, tx.from, tr.to, ev.beneficiary,
                               ev.dst_token, ev.orig_token, tr.chain_id, ev.dst_chain_id, ev.standard,
                               ev.amount});
            });
        }
    }
    normalize(out);
    return out;
}

// Rule 3 ---------------------------------------------------------------------

inline std::vector<TcValidDeposit> eval_rule3(const FactStore& store)
{
    detail::require_sealed(store);
    std::vector<TcValidDeposit> out;
    const Amount zero{};
    auto transfers = store.get<Erc20TransferFact>();
    for (const auto& ev : store.get<TcTokenDepositedFact>()) {
        for (auto ti : store.by_tx<Erc20TransferFact>(ev.tx_hash)) {
            const auto& tr = transfers[ti];
            if (tr.token != ev.dst_token || tr.to != ev.beneficiary || tr.amount != ev.amount) continue;
            if (!(ev.event_index > tr.event_index)) continue;
            if (!store.is_bridge_controlled(tr.chain_id, tr.from)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &zero, [&](const TransactionFact& tx) {
                if (tx.chain_id != tr.chain_id) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.deposit_id, ev.beneficiary, ev.dst_token,
                               tr.chain_id, ev.amount});
            });
        }
    }
    normalize(out);
    return out;
}

// Rule 4 ---------------------------------------------------------------------

inline std::vector<Cctx> eval_rule4(const FactStore& store, const std::vector<ScValidDeposit>& native,
                                    const std::vector<ScValidDeposit>& erc20, const std::vector<TcValidDeposit>& released)
{
    GroupIndex<std::string> by_id;
    by_id.build(std::span<const TcValidDeposit>(released), [](const TcValidDeposit& t) { return t.deposit_id; });

    std::vector<Cctx> out;
    auto join = [&](const std::vector<ScValidDeposit>& escrows) {
        for (const auto& sc : escrows) {
            auto window = store.finality(sc.orig_chain_id);
            if (!window) continue;
            for (auto ri : by_id.find(sc.deposit_id)) {
                const auto& tc = released[ri];
                if (tc.beneficiary != sc.beneficiary || tc.dst_token != sc.dst_token ||
                    tc.chain_id != sc.dst_chain_id || tc.amount != sc.amount) {
                    continue;
                }
                if (!finality_satisfied(sc.timestamp, *window, tc.timestamp)) continue;
                out.push_back({sc.orig_chain_id, sc.timestamp, sc.tx_hash, tc.chain_id, tc.timestamp, tc.tx_hash,
                               sc.deposit_id, sc.orig_token, sc.dst_token, sc.sender, sc.beneficiary, sc.amount});
            }
        }
    };
    join(erc20);
    join(native);
    normalize(out);
    return out;
}

inline std::vector<Cctx> eval_rule4(const FactStore& store)
{
    return eval_rule4(store, eval_rule1(store), eval_rule2(store), eval_rule3(store));
}

// Rule 5 ---------------------------------------------------------------------

inline std::vector<TcValidWithdrawal> eval_rule5(const FactStore& store)
{
    detail::require_sealed(store);
    std::vector<TcValidWithdrawal> out;
    auto native = store.get<TcWithdrawalFact>();
    for (const auto& ev : store.get<TcTokenWithdrewFact>()) {
        for (auto ni : store.by_tx<TcWithdrawalFact>(ev.tx_hash)) {
            const auto& escrow = native[ni];
            if (escrow.amount != ev.amount || !(ev.event_index > escrow.event_index)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &ev.amount, [&](const TransactionFact& tx) {
                if (tx.from != escrow.sender) return;
                if (!store.has_mapping(ev.dst_chain_id, tx.chain_id, ev.dst_token, ev.orig_token, ev.standard)) return;
                if (!store.is_wrapped_native(tx.chain_id, ev.orig_token)) return;
                if (!store.is_bridge_controlled(tx.chain_id, escrow.bridge_addr)) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.withdrawal_id, escrow.sender, escrow.bridge_addr,
                               ev.beneficiary, ev.orig_token, ev.dst_token, ev.dst_chain_id, tx.chain_id,
                               ev.standard, ev.amount});
            });
        }
    }
    normalize(out);
    return out;
}

// Rule 6 ---------------------------------------------------------------------

inline std::vector<TcValidWithdrawal> eval_rule6(const FactStore& store)
{
    detail::require_sealed(store);
    std::vector<TcValidWithdrawal> out;
    const Amount zero{};
    auto transfers = store.get<Erc20TransferFact>();
    for (const auto& ev : store.get<TcTokenWithdrewFact>()) {
        for (auto ti : store.by_tx<Erc20TransferFact>(ev.tx_hash)) {
            const auto& tr = transfers[ti];
            if (tr.token != ev.orig_token || tr.amount != ev.amount) continue;
            if (!(ev.event_index > tr.event_index)) continue;
            if (!store.is_bridge_controlled(tr.chain_id, tr.to)) continue;
            if (!store.has_mapping(ev.dst_chain_id, tr.chain_id, ev.dst_token, ev.orig_token, ev.standard)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &zero, [&](const TransactionFact& tx) {
                if (tx.chain_id != tr.chain_id) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.withdrawal_id, tx.from, tr.to, ev.beneficiary,
                               ev.orig_token, ev.dst_token, ev.dst_chain_id, tr.chain_id, ev.standard, ev.amount});
            });
        }
    }
    normalize(out);
    return out;
}

// Rule 7 ---------------------------------------------------------------------
// No token_mapping conjunct here, unlike rules 5 and 6.

inline std::vector<ScValidWithdrawal> eval_rule7(const FactStore& store)
{
    detail::require_sealed(store);
    std::vector<ScValidWithdrawal> out;
    const Amount zero{};
    auto transfers = store.get<Erc20TransferFact>();
    auto native = store.get<ScWithdrawalFact>();
    for (const auto& ev : store.get<ScTokenWithdrewFact>()) {
        for (auto ti : store.by_tx<Erc20TransferFact>(ev.tx_hash)) {
            const auto& tr = transfers[ti];
            if (tr.token != ev.dst_token || tr.to != ev.beneficiary || tr.amount != ev.amount) continue;
            if (!(ev.event_index > tr.event_index)) continue;
            if (!store.is_bridge_controlled(tr.chain_id, tr.from)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &zero, [&](const TransactionFact& tx) {
                if (tx.chain_id != tr.chain_id) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.withdrawal_id, ev.beneficiary, ev.dst_token,
                               tr.chain_id, ev.amount});
            });
        }
        for (auto ni : store.by_tx<ScWithdrawalFact>(ev.tx_hash)) {
            const auto& release = native[ni];
            if (release.beneficiary != ev.beneficiary || release.amount != ev.amount) continue;
            if (!(ev.event_index > release.event_index)) continue;
            detail::for_each_successful_tx(store, ev.tx_hash, &zero, [&](const TransactionFact& tx) {
                if (!store.is_bridge_controlled(tx.chain_id, release.bridge_addr)) return;
                out.push_back({tx.timestamp, ev.tx_hash, ev.withdrawal_id, ev.beneficiary, ev.dst_token,
                               tx.chain_id, ev.amount});
            });
        }
    }
    normalize(out);
    return out;
}

// Rule 8 ---------------------------------------------------------------------

inline std::vector<Cctx> eval_rule8(const FactStore& store, const std::vector<TcValidWithdrawal>& native,
                                    const std::vector<TcValidWithdrawal>& erc20,
                                    const std::vector<ScValidWithdrawal>& released)
{
    GroupIndex<std::string> by_id;
    by_id.build(std::span<const ScValidWithdrawal>(released),
                [](const ScValidWithdrawal& t) { return t.withdrawal_id; });

    std::vector<Cctx> out;
    auto join = [&](const std::vector<TcValidWithdrawal>& escrows) {
        for (const auto& tc : escrows) {
            auto window = store.finality(tc.orig_chain_id);
            if (!window) continue;
            for (auto ri : by_id.find(tc.withdrawal_id)) {
                const auto& sc = released[ri];
                if (sc.beneficiary != tc.beneficiary || sc.dst_token != tc.dst_token ||
                    sc.chain_id != tc.dst_chain_id || sc.amount != tc.amount) {
                    continue;
                }
                if (!finality_satisfied(tc.timestamp, *window, sc.timestamp)) continue;
                out.push_back({tc.orig_chain_id, tc.timestamp, tc.tx_hash, sc.chain_id, sc.timestamp, sc.tx_hash,
                               tc.withdrawal_id, tc.orig_token, tc.dst_token, tc.sender, tc.beneficiary, tc.amount});
            }
        }
    };
    join(erc20);
    join(native);
    normalize(out);
    return out;
}

inline std::vector<Cctx> eval_rule8(const FactStore& store)
{
    return eval_rule8(store, eval_rule5(store), eval_rule6(store), eval_rule7(store));
}

// ---------------------------------------------------------------------------

/// Chain ids referenced by facts but lacking a cctx_finality entry.
inline std::vector<ChainId> chains_missing_finality(const FactStore& store)
{
    std::vector<ChainId> missing;
    for (auto id : store.referenced_chains()) {
        if (!store.finality(id)) missing.push_back(id);
    }
    return missing;
}

inline RuleOutputs eval_all(const FactStore& store)
{
    detail::require_sealed(store);
    if (auto missing = chains_missing_finality(store); !missing.empty()) {
        std::string ids;
        for (auto id : missing) ids += (ids.empty() ? "" : ", ") + std::to_string(id.value);
        throw ConfigError("missing cctx_finality for chain(s): " + ids);
    }
    RuleOutputs out;
    out.rule1 = eval_rule1(store);
    out.rule2 = eval_rule2(store);
    out.rule3 = eval_rule3(store);
    out.rule5 = eval_rule5(store);
    out.rule6 = eval_rule6(store);
    out.rule7 = eval_rule7(store);
    out.rule4 = eval_rule4(store, out.rule1, out.rule2, out.rule3);
    out.rule8 = eval_rule8(store, out.rule5, out.rule6, out.rule7);
    return out;
}

// CSV export ------------------------------------------------------------------

namespace detail {

inline std::string csv_escape(const std::string& v)
{
    if (v.find_first_of(",\"\n\r") == std::string::npos) return v;
    std::string out = "\"";
    for (char c : v) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace detail

template <typename Row>
std::string csv_row(const Row& row)
{
    std::string text;
    bool first = true;
    std::apply(
        [&](const auto&... v) {
            ((text += (first ? "" : ","), text += detail::csv_escape(codec::to_text(v)), first = false), ...);
        },
        Row::fields(row));
    return text;
}

template <typename Row>
std::string rule_csv(const std::vector<Row>& rows)
{
    std::string text;
    for (std::size_t i = 0; i < Row::columns.size(); ++i) {
        if (i) text += ',';
        text += Row::columns[i];
    }
    text += '\n';
    for (const auto& row : rows) text += csv_row(row) + '\n';
    return text;
}

/// Writes `<RuleName>.csv` for all eight rules.
inline void write_rule_csvs(const RuleOutputs& outputs, const std::filesystem::path& dir)
{
    std::filesystem::create_directories(dir);
    outputs.visit([&](RuleId id, const auto& rows) {
        std::ofstream out(dir / (std::string(rule_name(id)) + ".csv"), std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write rule csv in " + dir.string());
        out << rule_csv(rows);
    });
}

}  // namespace bridgewatch
