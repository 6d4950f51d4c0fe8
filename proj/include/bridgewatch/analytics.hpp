#pragma once

// Deviation taxonomy and statistics over a sealed store and its rule outputs:
// per-transaction token/bridge event mismatches, local tuples that never
// become part of a cross-chain transaction, finality violations, reused ids,
// and latency/value summaries per direction.

#include <bridgewatch/rules.hpp>

#include <boost/multiprecision/cpp_int.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

namespace bridgewatch {

using ordered_json = nlohmann::ordered_json;

enum class AnomalyKind {
    SingleTokenEvent,
    SingleBridgeEvent,
    UnmatchedLocalDeposit,
    UnmatchedLocalWithdrawal,
    FinalityViolation,
    DuplicateId,
    AmbiguousMatch,
};

inline constexpr std::array<AnomalyKind, 7> kAllAnomalyKinds = {
    AnomalyKind::SingleTokenEvent,      AnomalyKind::SingleBridgeEvent, AnomalyKind::UnmatchedLocalDeposit,
    AnomalyKind::UnmatchedLocalWithdrawal, AnomalyKind::FinalityViolation, AnomalyKind::DuplicateId,
    AnomalyKind::AmbiguousMatch};

inline constexpr std::string_view anomaly_kind_name(AnomalyKind k) noexcept
{
    switch (k) {
    case AnomalyKind::SingleTokenEvent: return "SingleTokenEvent";
    case AnomalyKind::SingleBridgeEvent: return "SingleBridgeEvent";
    case AnomalyKind::UnmatchedLocalDeposit: return "UnmatchedLocalDeposit";
    case AnomalyKind::UnmatchedLocalWithdrawal: return "UnmatchedLocalWithdrawal";
    case AnomalyKind::FinalityViolation: return "FinalityViolation";
    case AnomalyKind::DuplicateId: return "DuplicateId";
    case AnomalyKind::AmbiguousMatch: return "AmbiguousMatch";
    }
    return "?";
}

inline std::optional<AnomalyKind> anomaly_kind_from_name(std::string_view name)
{
    for (auto k : kAllAnomalyKinds) {
        if (anomaly_kind_name(k) == name) return k;
    }
    return std::nullopt;
}

enum class Severity { info, warning, critical };

inline constexpr std::string_view severity_name(Severity s) noexcept
{
    switch (s) {
    case Severity::info: return "info";
    case Severity::warning: return "warning";
    case Severity::critical: return "critical";
    }
    return "?";
}

struct Anomaly {
    AnomalyKind kind{};
    Severity severity = Severity::warning;
    std::vector<ChainId> chains;
    std::vector<TxHash> tx_hashes;
    Amount amount;
    ordered_json evidence = ordered_json::object();

    ordered_json to_json() const
    {
        ordered_json j;
        j["kind"] = anomaly_kind_name(kind);
        j["severity"] = severity_name(severity);
        auto chain_ids = ordered_json::array();
        for (auto c : chains) chain_ids.push_back(c.value);
        j["chains"] = std::move(chain_ids);
        auto txs = ordered_json::array();
        for (const auto& t : tx_hashes) txs.push_back(t.to_hex());
        j["tx_hashes"] = std::move(txs);
        j["amount"] = amount.to_string();
        j["evidence"] = evidence;
        return j;
    }
};

/// Canonical anomaly order: kind, then tx hashes, chains, evidence text.
inline bool anomaly_less(const Anomaly& a, const Anomaly& b)
{
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.tx_hashes != b.tx_hashes) return a.tx_hashes < b.tx_hashes;
    if (a.chains != b.chains) return a.chains < b.chains;
    return a.evidence.dump() < b.evidence.dump();
}

inline void sort_anomalies(std::vector<Anomaly>& anomalies)
{
    std::sort(anomalies.begin(), anomalies.end(), anomaly_less);
}

inline std::size_t count_kind(const std::vector<Anomaly>& anomalies, AnomalyKind kind)
{
    return static_cast<std::size_t>(
        std::count_if(anomalies.begin(), anomalies.end(), [&](const Anomaly& a) { return a.kind == kind; }));
}

namespace detail {

inline void add_chain(std::vector<ChainId>& chains, ChainId c)
{
    if (std::find(chains.begin(), chains.end(), c) == chains.end()) chains.push_back(c);
    std::sort(chains.begin(), chains.end());
}

template <typename Fact>
void collect_tx_hashes(const FactStore& store, std::vector<TxHash>& out)
{
    for (const auto& f : store.get<Fact>()) out.push_back(f.tx_hash);
}

}  // namespace detail

// Single token / single bridge events ----------------------------------------

/// Per transaction and side (escrow, release): token movement into/out of a
/// bridge with no bridge event, or a bridge event with no token movement.
inline std::vector<Anomaly> local_mismatches(const FactStore& store)
{
    std::vector<TxHash> txs;
    detail::collect_tx_hashes<Erc20TransferFact>(store, txs);
    detail::collect_tx_hashes<ScDepositFact>(store, txs);
    detail::collect_tx_hashes<ScTokenDepositedFact>(store, txs);
    detail::collect_tx_hashes<TcTokenDepositedFact>(store, txs);
    detail::collect_tx_hashes<TcWithdrawalFact>(store, txs);
    detail::collect_tx_hashes<TcTokenWithdrewFact>(store, txs);
    detail::collect_tx_hashes<ScWithdrawalFact>(store, txs);
    detail::collect_tx_hashes<ScTokenWithdrewFact>(store, txs);
    std::sort(txs.begin(), txs.end());
    txs.erase(std::unique(txs.begin(), txs.end()), txs.end());

    const auto transfers = store.get<Erc20TransferFact>();
    std::vector<Anomaly> out;

    struct Side {
        boost::multiprecision::cpp_int token_amount = 0;
        boost::multiprecision::cpp_int bridge_amount = 0;
        std::size_t token_events = 0;
        std::size_t bridge_events = 0;
        std::vector<ChainId> chains;
    };

    for (const auto& tx : txs) {
        Side escrow, release;
        auto tx_chains = store.chains_of(tx);
        auto with_tx_chains = [&](Side& s) {
            for (auto c : tx_chains) detail::add_chain(s.chains, c);
        };

        for (auto i : store.by_tx<Erc20TransferFact>(tx)) {
            const auto& tr = transfers[i];
            if (store.is_bridge_controlled(tr.chain_id, tr.to)) {
                ++escrow.token_events;
                escrow.token_amount += tr.amount.value();
                detail::add_chain(escrow.chains, tr.chain_id);
            }
            if (store.is_bridge_controlled(tr.chain_id, tr.from)) {
                ++release.token_events;
                release.token_amount += tr.amount.value();
                detail::add_chain(release.chains, tr.chain_id);
            }
        }
        auto count = [&]<typename F>(Side& side, bool token_side) {
            for (auto i : store.by_tx<F>(tx)) {
                const auto& f = store.get<F>()[i];
                if (token_side) {
                    ++side.token_events;
                    side.token_amount += f.amount.value();
                } else {
                    ++side.bridge_events;
                    side.bridge_amount += f.amount.value();
                }
                with_tx_chains(side);
            }
        };
        count.template operator()<ScDepositFact>(escrow, true);
        count.template operator()<TcWithdrawalFact>(escrow, true);
        count.template operator()<ScTokenDepositedFact>(escrow, false);
        count.template operator()<TcTokenWithdrewFact>(escrow, false);
        count.template operator()<ScWithdrawalFact>(release, true);
        count.template operator()<TcTokenDepositedFact>(release, false);
        count.template operator()<ScTokenWithdrewFact>(release, false);

        auto report = [&](const Side& s, std::string_view side_name) {
            if ((s.token_events == 0) == (s.bridge_events == 0)) return;
            Anomaly a;
            bool token_only = s.token_events > 0;
            a.kind = token_only ? AnomalyKind::SingleTokenEvent : AnomalyKind::SingleBridgeEvent;
            // Funds leaving a bridge unannounced, or a bridge announcing an
            // escrow that never happened, can drain the bridge.
            bool dangerous = (token_only && side_name == "release") || (!token_only && side_name == "escrow");
            a.severity = dangerous ? Severity::critical : Severity::warning;
            a.chains = s.chains;
            a.tx_hashes = {tx};
            a.amount = Amount(static_cast<Amount::value_type>(token_only ? s.token_amount : s.bridge_amount));
            a.evidence["side"] = side_name;
            a.evidence["events"] = token_only ? s.token_events : s.bridge_events;
            out.push_back(std::move(a));
        };
        report(escrow, "escrow");
        report(release, "release");
    }
    sort_anomalies(out);
    return out;
}

// Local tuples without a cross-chain counterpart ------------------------------

namespace detail {

// Projections of a rule-4/8 tuple onto its escrow and release legs.
using EscrowKey = std::tuple<ChainId, Timestamp, TxHash, std::string, Address, Address, Address, Address, Amount, ChainId>;
using ReleaseKey = std::tuple<ChainId, Timestamp, TxHash, std::string, Address, Address, Amount>;

inline EscrowKey escrow_key(const Cctx& c)
{
    return {c.orig_chain_id, c.orig_timestamp, c.orig_tx_hash, c.id, c.orig_token,
            c.dst_token,     c.sender,         c.beneficiary,  c.amount, c.dst_chain_id};
}
inline ReleaseKey release_key(const Cctx& c)
{
    return {c.dst_chain_id, c.dst_timestamp, c.dst_tx_hash, c.id, c.dst_token, c.beneficiary, c.amount};
}
inline EscrowKey escrow_key(const ScValidDeposit& d)
{
    return {d.orig_chain_id, d.timestamp, d.tx_hash, d.deposit_id, d.orig_token,
            d.dst_token,     d.sender,    d.beneficiary, d.amount, d.dst_chain_id};
}
inline EscrowKey escrow_key(const TcValidWithdrawal& w)
{
    return {w.orig_chain_id, w.timestamp, w.tx_hash, w.withdrawal_id, w.orig_token,
            w.dst_token,     w.sender,    w.beneficiary, w.amount, w.dst_chain_id};
}
inline ReleaseKey release_key(const TcValidDeposit& d)
{
    return {d.chain_id, d.timestamp, d.tx_hash, d.deposit_id, d.dst_token, d.beneficiary, d.amount};
}
inline ReleaseKey release_key(const ScValidWithdrawal& w)
{
    return {w.chain_id, w.timestamp, w.tx_hash, w.withdrawal_id, w.dst_token, w.beneficiary, w.amount};
}

struct MatchSets {
    std::unordered_set<EscrowKey, Hasher> deposit_escrow;
    std::unordered_set<ReleaseKey, Hasher> deposit_release;
    std::unordered_set<EscrowKey, Hasher> withdrawal_escrow;
    std::unordered_set<ReleaseKey, Hasher> withdrawal_release;

    explicit MatchSets(const RuleOutputs& o)
    {
        for (const auto& c : o.rule4) {
            deposit_escrow.insert(escrow_key(c));
            deposit_release.insert(release_key(c));
        }
        for (const auto& c : o.rule8) {
            withdrawal_escrow.insert(escrow_key(c));
            withdrawal_release.insert(release_key(c));
        }
    }
};

}  // namespace detail

/// Per local rule: how many tuples joined into at least one rule-4/8 tuple.
struct RuleAccounting {
    RuleId rule{};
    std::size_t total = 0;
    std::size_t matched = 0;
    std::size_t unmatched = 0;
};

namespace detail {

template <typename Row, typename KeyFn, typename Set, typename OnUnmatched>
RuleAccounting account(RuleId rule, const std::vector<Row>& rows, const Set& matched_keys, KeyFn key_of,
                       OnUnmatched on_unmatched)
{
    RuleAccounting acc{rule, rows.size(), 0, 0};
    for (const auto& r : rows) {
        if (matched_keys.contains(key_of(r))) {
            ++acc.matched;
        } else {
            ++acc.unmatched;
            on_unmatched(r);
        }
    }
    return acc;
}

template <typename Row>
Anomaly unmatched_anomaly(AnomalyKind kind, RuleId rule, std::string_view side, const Row& r, ChainId chain,
                          const std::string& id)
{
    Anomaly a;
    a.kind = kind;
    a.severity = side == "release" ? Severity::critical : Severity::warning;
    a.chains = {chain};
    a.tx_hashes = {r.tx_hash};
    a.amount = r.amount;
    a.evidence["rule"] = rule_name(rule);
    a.evidence["side"] = side;
    a.evidence["id"] = id;
    a.evidence["beneficiary"] = r.beneficiary.to_hex();
    a.evidence["dst_token"] = r.dst_token.to_hex();
    a.evidence["timestamp"] = r.timestamp.seconds;
    return a;
}

}  // namespace detail

struct UnmatchedResult {
    std::vector<Anomaly> anomalies;
    std::vector<RuleAccounting> accounting;  // rules 1, 2, 3, 5, 6, 7
};

inline UnmatchedResult unmatched_local(const RuleOutputs& o)
{
    detail::MatchSets m(o);
    UnmatchedResult res;
    auto escrow_dep = [&](RuleId rule) {
        return [&res, rule](const ScValidDeposit& r) {
            res.anomalies.push_back(detail::unmatched_anomaly(AnomalyKind::UnmatchedLocalDeposit, rule, "escrow", r,
                                                              r.orig_chain_id, r.deposit_id));
        };
    };
    auto escrow_wd = [&](RuleId rule) {
        return [&res, rule](const TcValidWithdrawal& r) {
            res.anomalies.push_back(detail::unmatched_anomaly(AnomalyKind::UnmatchedLocalWithdrawal, rule, "escrow",
                                                              r, r.orig_chain_id, r.withdrawal_id));
        };
    };
    auto ek = [](const auto& r) { return detail::escrow_key(r); };
    auto rk = [](const auto& r) { return detail::release_key(r); };

    res.accounting.push_back(detail::account(RuleId::ScValidNativeTokenDeposit, o.rule1, m.deposit_escrow, ek,
                                             escrow_dep(RuleId::ScValidNativeTokenDeposit)));
    res.accounting.push_back(detail::account(RuleId::ScValidErc20TokenDeposit, o.rule2, m.deposit_escrow, ek,
                                             escrow_dep(RuleId::ScValidErc20TokenDeposit)));
    res.accounting.push_back(
        detail::account(RuleId::TcValidErc20TokenDeposit, o.rule3, m.deposit_release, rk, [&](const TcValidDeposit& r) {
            res.anomalies.push_back(detail::unmatched_anomaly(AnomalyKind::UnmatchedLocalDeposit,
                                                              RuleId::TcValidErc20TokenDeposit, "release", r,
                                                              r.chain_id, r.deposit_id));
        }));
    res.accounting.push_back(detail::account(RuleId::TcValidNativeTokenWithdrawal, o.rule5, m.withdrawal_escrow, ek,
                                             escrow_wd(RuleId::TcValidNativeTokenWithdrawal)));
    res.accounting.push_back(detail::account(RuleId::TcValidErc20TokenWithdrawal, o.rule6, m.withdrawal_escrow, ek,
                                             escrow_wd(RuleId::TcValidErc20TokenWithdrawal)));
    res.accounting.push_back(detail::account(
        RuleId::ScValidErc20TokenWithdrawal, o.rule7, m.withdrawal_release, rk, [&](const ScValidWithdrawal& r) {
            res.anomalies.push_back(detail::unmatched_anomaly(AnomalyKind::UnmatchedLocalWithdrawal,
                                                              RuleId::ScValidErc20TokenWithdrawal, "release", r,
                                                              r.chain_id, r.withdrawal_id));
        }));
    sort_anomalies(res.anomalies);
    return res;
}

// Finality violations ---------------------------------------------------------

namespace detail {

template <typename Escrow, typename Release, typename IdOf, typename Build>
void finality_pairs(const FactStore& store, const std::vector<Escrow>& escrows, const std::vector<Release>& releases,
                    IdOf release_id, Build build, std::string_view direction, std::set<Cctx>& seen,
                    std::vector<Anomaly>& out)
{
    GroupIndex<std::string> by_id;
    by_id.build(std::span<const Release>(releases), release_id);
    for (const auto& e : escrows) {
        auto window = store.finality(e.orig_chain_id);
        if (!window) continue;
        for (auto ri : by_id.find(build.id(e))) {
            const auto& r = releases[ri];
            auto cctx = build(e, r);
            if (!cctx) continue;  // join keys differ
            if (finality_satisfied(cctx->orig_timestamp, *window, cctx->dst_timestamp)) continue;
            if (!seen.insert(*cctx).second) continue;
            auto gap = static_cast<std::int64_t>(cctx->dst_timestamp.seconds) -
                       static_cast<std::int64_t>(cctx->orig_timestamp.seconds);
            Anomaly a;
            a.kind = AnomalyKind::FinalityViolation;
            a.severity = Severity::critical;
            a.chains = {cctx->orig_chain_id};
            detail::add_chain(a.chains, cctx->dst_chain_id);
            a.tx_hashes = {cctx->orig_tx_hash, cctx->dst_tx_hash};
            a.amount = cctx->amount;
            a.evidence["direction"] = direction;
            a.evidence["id"] = cctx->id;
            a.evidence["orig_chain_id"] = cctx->orig_chain_id.value;
            a.evidence["dst_chain_id"] = cctx->dst_chain_id.value;
            a.evidence["orig_timestamp"] = cctx->orig_timestamp.seconds;
            a.evidence["dst_timestamp"] = cctx->dst_timestamp.seconds;
            a.evidence["gap"] = gap;
            a.evidence["window"] = *window;
            out.push_back(std::move(a));
        }
    }
}

struct DepositPairBuilder {
    std::string id(const ScValidDeposit& e) const { return e.deposit_id; }
    std::optional<Cctx> operator()(const ScValidDeposit& sc, const TcValidDeposit& tc) const
    {
        if (tc.beneficiary != sc.beneficiary || tc.dst_token != sc.dst_token || tc.chain_id != sc.dst_chain_id ||
            tc.amount != sc.amount) {
            return std::nullopt;
        }
        return Cctx{sc.orig_chain_id, sc.timestamp,  sc.tx_hash,   tc.chain_id,    tc.timestamp,  tc.tx_hash,
                    sc.deposit_id,    sc.orig_token, sc.dst_token, sc.sender,      sc.beneficiary, sc.amount};
    }
};

struct WithdrawalPairBuilder {
    std::string id(const TcValidWithdrawal& e) const { return e.withdrawal_id; }
    std::optional<Cctx> operator()(const TcValidWithdrawal& tc, const ScValidWithdrawal& sc) const
    {
        if (sc.beneficiary != tc.beneficiary || sc.dst_token != tc.dst_token || sc.chain_id != tc.dst_chain_id ||
            sc.amount != tc.amount) {
            return std::nullopt;
        }
        return Cctx{tc.orig_chain_id, tc.timestamp,  tc.tx_hash,   sc.chain_id, sc.timestamp,   sc.tx_hash,
                    tc.withdrawal_id, tc.orig_token, tc.dst_token, tc.sender,   tc.beneficiary, tc.amount};
    }
};

}  // namespace detail

/// Escrow/release pairs that agree on every rule-4/8 join key but fall
/// inside (or before) the origin chain's finality window.
inline std::vector<Anomaly> finality_violations(const FactStore& store, const RuleOutputs& o)
{
    std::vector<Anomaly> out;
    std::set<Cctx> seen_deposit, seen_withdrawal;
    auto dep_id = [](const TcValidDeposit& t) { return t.deposit_id; };
    auto wd_id = [](const ScValidWithdrawal& t) { return t.withdrawal_id; };
    detail::finality_pairs(store, o.rule1, o.rule3, dep_id, detail::DepositPairBuilder{}, "deposit", seen_deposit, out);
    detail::finality_pairs(store, o.rule2, o.rule3, dep_id, detail::DepositPairBuilder{}, "deposit", seen_deposit, out);
    detail::finality_pairs(store, o.rule5, o.rule7, wd_id, detail::WithdrawalPairBuilder{}, "withdrawal",
                           seen_withdrawal, out);
    detail::finality_pairs(store, o.rule6, o.rule7, wd_id, detail::WithdrawalPairBuilder{}, "withdrawal",
                           seen_withdrawal, out);
    sort_anomalies(out);
    return out;
}

// Reused ids ------------------------------------------------------------------

namespace detail {

template <typename F>
void duplicate_ids_in(const FactStore& store, std::string_view direction, auto id_of, std::vector<Anomaly>& out)
{
    auto rows = store.get<F>();
    GroupIndex<std::string> by_id;
    by_id.build(rows, id_of);
    std::vector<std::pair<std::string, std::vector<std::uint32_t>>> groups;
    by_id.for_each_group([&](const std::string& id, std::span<const std::uint32_t> members) {
        if (members.size() > 1) groups.emplace_back(id, std::vector<std::uint32_t>(members.begin(), members.end()));
    });
    for (const auto& [id, members] : groups) {
        Anomaly a;
        a.kind = AnomalyKind::DuplicateId;
        a.severity = Severity::critical;
        boost::multiprecision::cpp_int total = 0;
        for (auto i : members) {
            a.tx_hashes.push_back(rows[i].tx_hash);
            total += rows[i].amount.value();
            for (auto c : store.chains_of(rows[i].tx_hash)) add_chain(a.chains, c);
        }
        std::sort(a.tx_hashes.begin(), a.tx_hashes.end());
        a.tx_hashes.erase(std::unique(a.tx_hashes.begin(), a.tx_hashes.end()), a.tx_hashes.end());
        a.amount = Amount(static_cast<Amount::value_type>(total));
        a.evidence["direction"] = direction;
        a.evidence["relation"] = F::relation;
        a.evidence["id"] = id;
        a.evidence["occurrences"] = members.size();
        out.push_back(std::move(a));
    }
}

inline void ambiguous_in(const std::vector<Cctx>& cctxs, std::string_view direction, std::vector<Anomaly>& out)
{
    std::map<std::string, std::vector<const Cctx*>> by_id;
    for (const auto& c : cctxs) by_id[c.id].push_back(&c);
    for (auto& [id, group] : by_id) {
        if (group.size() < 2) continue;
        std::sort(group.begin(), group.end(), [](const Cctx* a, const Cctx* b) {
            return std::tie(a->dst_timestamp, a->dst_tx_hash, a->orig_timestamp, a->orig_tx_hash) <
                   std::tie(b->dst_timestamp, b->dst_tx_hash, b->orig_timestamp, b->orig_tx_hash);
        });
        Anomaly a;
        a.kind = AnomalyKind::AmbiguousMatch;
        a.severity = Severity::critical;
        std::set<TxHash> txs;
        std::set<TxHash> extra_releases;
        for (std::size_t i = 0; i < group.size(); ++i) {
            const auto* c = group[i];
            txs.insert(c->orig_tx_hash);
            txs.insert(c->dst_tx_hash);
            add_chain(a.chains, c->orig_chain_id);
            add_chain(a.chains, c->dst_chain_id);
            if (i > 0 && c->dst_tx_hash != group[0]->dst_tx_hash) extra_releases.insert(c->dst_tx_hash);
        }
        a.tx_hashes.assign(txs.begin(), txs.end());
        a.amount = group[0]->amount;
        a.evidence["direction"] = direction;
        a.evidence["id"] = id;
        a.evidence["derivations"] = group.size();
        a.evidence["first_release"] = group[0]->dst_tx_hash.to_hex();
        auto extra = ordered_json::array();
        for (const auto& t : extra_releases) extra.push_back(t.to_hex());
        a.evidence["extra_releases"] = std::move(extra);
        out.push_back(std::move(a));
    }
}

}  // namespace detail

/// Release-side ids used by more than one bridge event (DuplicateId), and
/// ids with more than one cross-chain derivation (AmbiguousMatch).
inline std::vector<Anomaly> duplicate_ids(const FactStore& store, const RuleOutputs& o)
{
    std::vector<Anomaly> out;
    detail::duplicate_ids_in<TcTokenDepositedFact>(store, "deposit",
                                                   [](const TcTokenDepositedFact& f) { return f.deposit_id; }, out);
    detail::duplicate_ids_in<ScTokenWithdrewFact>(store, "withdrawal",
                                                  [](const ScTokenWithdrewFact& f) { return f.withdrawal_id; }, out);
    detail::ambiguous_in(o.rule4, "deposit", out);
    detail::ambiguous_in(o.rule8, "withdrawal", out);
    sort_anomalies(out);
    return out;
}

// Latency and value -----------------------------------------------------------

struct PriceEntry {
    double usd = 0;
    unsigned decimals = 18;
};

using PriceTable = std::map<std::pair<ChainId, Address>, PriceEntry>;

/// JSON array of {chain_id, token, usd, decimals}.
inline PriceTable load_price_table(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open price table " + path.string());
    PriceTable table;
    try {
        auto j = nlohmann::json::parse(in);
        for (const auto& e : j) {
            ChainId chain{e.at("chain_id").get<std::uint64_t>()};
            auto token = Address::from_hex(e.at("token").get<std::string>(), "token");
            table[{chain, token}] = PriceEntry{e.at("usd").get<double>(), e.value("decimals", 18u)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    } catch (const EncodingError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return table;
}

/// A non-negative rational rendered with two decimals, rounding half up.
inline std::string format_centi(const boost::multiprecision::cpp_int& hundredths)
{
    boost::multiprecision::cpp_int whole = hundredths / 100;
    auto frac = static_cast<int>(hundredths % 100);
    return whole.str() + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
}

struct LatencyStats {
    std::size_t count = 0;
    std::uint64_t min = 0;
    std::uint64_t max = 0;
    std::uint64_t median = 0;
    std::string avg;  // two decimals
    std::string std;  // population standard deviation, two decimals
    Amount total_value;
    std::optional<double> total_usd;

    ordered_json to_json() const
    {
        ordered_json j;
        j["count"] = count;
        if (count == 0) {
            for (const char* k : {"min", "max", "avg", "std", "median"}) j[k] = nullptr;
        } else {
            j["min"] = min;
            j["max"] = max;
            j["avg"] = avg;
            j["std"] = std;
            j["median"] = median;
        }
        j["total_value"] = total_value.to_string();
        if (total_usd) {
            // Fixed two-decimal rendering keeps the report byte-stable.
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f", *total_usd);
            j["total_usd"] = std::string(buf);
        } else {
            j["total_usd"] = nullptr;
        }
        return j;
    }
};

inline LatencyStats latency_stats(const std::vector<Cctx>& cctxs, const PriceTable* prices = nullptr)
{
    using boost::multiprecision::cpp_int;
    LatencyStats s;
    s.count = cctxs.size();
    cpp_int total = 0;
    std::optional<double> usd;
    if (prices) usd = 0.0;
    std::vector<std::uint64_t> lat;
    lat.reserve(cctxs.size());
    for (const auto& c : cctxs) {
        lat.push_back(c.latency());
        total += c.amount.value();
        if (prices) {
            auto it = prices->find({c.orig_chain_id, c.orig_token});
            if (it != prices->end()) {
                auto units = c.amount.value().convert_to<long double>();
                *usd += static_cast<double>(units / std::pow(10.0L, it->second.decimals) * it->second.usd);
            }
        }
    }
    if (total > cpp_int(Amount::value_type(~Amount::value_type(0)))) throw Error("total value exceeds 256 bits");
    s.total_value = Amount(static_cast<Amount::value_type>(total));
    s.total_usd = usd;
    if (lat.empty()) return s;

    std::sort(lat.begin(), lat.end());
    s.min = lat.front();
    s.max = lat.back();
    s.median = lat[(lat.size() - 1) / 2];

    cpp_int n = lat.size(), sum = 0, sum_sq = 0;
    for (auto x : lat) {
        sum += x;
        sum_sq += cpp_int(x) * x;
    }
    // round(100 * sum / n)
    s.avg = format_centi((sum * 200 + n) / (2 * n));
    // 100 * sqrt(var) with var = (n*sum_sq - sum^2) / n^2, rounded half up:
    // k = floor(sqrt(N/D)); bump when 4N >= (2k+1)^2 D.
    cpp_int num = (n * sum_sq - sum * sum) * 10000;
    cpp_int den = n * n;
    cpp_int k = boost::multiprecision::sqrt(cpp_int(num / den));
    if (4 * num >= (2 * k + 1) * (2 * k + 1) * den) ++k;
    s.std = format_centi(k);
    return s;
}

// Report ----------------------------------------------------------------------

struct Analysis {
    std::vector<Anomaly> anomalies;  // canonical order
    std::vector<RuleAccounting> accounting;
    LatencyStats deposit_latency;
    LatencyStats withdrawal_latency;
};

inline Analysis analyze(const FactStore& store, const RuleOutputs& o, const PriceTable* prices = nullptr)
{
    Analysis a;
    auto local = local_mismatches(store);
    auto unmatched = unmatched_local(o);
    auto finality = finality_violations(store, o);
    auto dup = duplicate_ids(store, o);
    for (auto* part : {&local, &unmatched.anomalies, &finality, &dup}) {
        a.anomalies.insert(a.anomalies.end(), std::make_move_iterator(part->begin()),
                           std::make_move_iterator(part->end()));
    }
    sort_anomalies(a.anomalies);
    a.accounting = std::move(unmatched.accounting);
    a.deposit_latency = latency_stats(o.rule4, prices);
    a.withdrawal_latency = latency_stats(o.rule8, prices);
    return a;
}

inline ordered_json build_report(const FactStore& store, const RuleOutputs& o, const Analysis& a,
                                 const ordered_json& ingest_warnings = ordered_json::array())
{
    ordered_json r;
    r["schema_version"] = 1;

    ordered_json relations = ordered_json::object();
    store.for_each_relation([&](const auto& rel) {
        using F = typename std::decay_t<decltype(rel.rows())>::value_type;
        relations[std::string(F::relation)] = rel.size();
    });
    r["relations"] = std::move(relations);

    ordered_json rules = ordered_json::object();
    o.visit([&](RuleId id, const auto& rows) { rules[std::string(rule_name(id))] = rows.size(); });
    r["rules"] = std::move(rules);

    ordered_json accounting = ordered_json::object();
    for (const auto& acc : a.accounting) {
        accounting[std::string(rule_name(acc.rule))] = {
            {"total", acc.total}, {"matched", acc.matched}, {"unmatched", acc.unmatched}};
    }
    r["accounting"] = std::move(accounting);

    ordered_json counts = ordered_json::object();
    ordered_json grouped = ordered_json::object();
    for (auto kind : kAllAnomalyKinds) {
        auto list = ordered_json::array();
        for (const auto& an : a.anomalies) {
            if (an.kind == kind) list.push_back(an.to_json());
        }
        counts[std::string(anomaly_kind_name(kind))] = list.size();
        grouped[std::string(anomaly_kind_name(kind))] = std::move(list);
    }
    r["anomaly_counts"] = std::move(counts);
    r["anomalies"] = std::move(grouped);
    r["latency"] = {{"deposit", a.deposit_latency.to_json()}, {"withdrawal", a.withdrawal_latency.to_json()}};
    r["ingest_warnings"] = ingest_warnings;
    return r;
}

}  // namespace bridgewatch
