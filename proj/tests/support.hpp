#pragma once

#include <bridgewatch/bridgewatch.hpp>

#include <filesystem>
#include <random>
#include <string>

namespace bwtest {

using namespace bridgewatch;

/// Address whose 20 bytes are all `b`.
inline Address addr(std::uint8_t b)
{
    Address a;
    a.bytes.fill(b);
    return a;
}

/// Tx hash 0x00..0n.
inline TxHash hash(std::uint64_t n)
{
    TxHash h;
    for (int i = 0; i < 8; ++i) h.bytes[31 - i] = static_cast<std::uint8_t>(n >> (8 * i));
    return h;
}

inline Amount amt(std::uint64_t v) { return Amount(v); }

// Fixture participants.
inline const Address u1 = addr(0x11);
inline const Address u2 = addr(0x22);
inline const Address b1 = addr(0xb1);
inline const Address b2 = addr(0xb2);
inline const Address aa = addr(0xaa);
inline const Address cc = addr(0xcc);
inline constexpr ChainId S{1};
inline constexpr ChainId T{100};

/// Static part shared by both fixtures.
struct StaticFacts {
    std::uint64_t source_finality = 1800;
    std::uint64_t target_finality = 45;

    void insert(FactStore& s) const
    {
        s.insert(CctxFinalityFact{S, source_finality});
        s.insert(CctxFinalityFact{T, target_finality});
        s.insert(BridgeControlledAddressFact{S, b1});
        s.insert(BridgeControlledAddressFact{T, b2});
        s.insert(WrappedNativeTokenFact{S, aa});
        s.insert(TokenMappingFact{S, T, aa, cc, "ERC20"});
    }
};

/// Deposit fixture: native escrow of 5 on chain 1 at ts 1000, release on
/// chain 100 at `release_ts`.
struct F1 {
    std::uint64_t escrow_ts = 1000;
    std::uint64_t release_ts = 2900;
    std::uint32_t escrow_status = 1;
    std::uint64_t native_idx = 0;
    std::uint64_t bridge_idx = 1;
    bool with_target_side = true;

    TransactionFact tx1() const { return {Timestamp{escrow_ts}, S, hash(1), 10, u1, b1, amt(5), escrow_status, 21000}; }
    ScDepositFact native() const { return {hash(1), native_idx, u1, b1, amt(5)}; }
    ScTokenDepositedFact deposited() const { return {hash(1), bridge_idx, "7", u2, cc, aa, T, "ERC20", amt(5)}; }
    TransactionFact tx2() const { return {Timestamp{release_ts}, T, hash(2), 20, u1, b2, amt(0), 1, 50000}; }
    Erc20TransferFact release_transfer() const { return {hash(2), T, 0, cc, b2, u2, amt(5)}; }
    TcTokenDepositedFact finalized() const { return {hash(2), 1, "7", u2, cc, amt(5)}; }

    void insert(FactStore& s) const
    {
        s.insert(tx1());
        s.insert(native());
        s.insert(deposited());
        if (with_target_side) {
            s.insert(tx2());
            s.insert(release_transfer());
            s.insert(finalized());
        }
    }
};

/// Withdrawal fixture: native escrow of 5 on chain 100 at ts 5000, native
/// release on chain 1 at `release_ts` through sc_withdrawal.
struct F2 {
    std::uint64_t escrow_ts = 5000;
    std::uint64_t release_ts = 5050;
    std::string escrow_id = "9";
    std::string release_id = "9";
    bool with_mapping = true;

    void insert(FactStore& s) const
    {
        s.insert(WrappedNativeTokenFact{T, cc});
        s.insert(TransactionFact{Timestamp{escrow_ts}, T, hash(3), 30, u2, b2, amt(5), 1, 21000});
        s.insert(TcWithdrawalFact{hash(3), 0, u2, b2, amt(5)});
        s.insert(TcTokenWithdrewFact{hash(3), 1, escrow_id, u1, cc, aa, S, "ERC20", amt(5)});
        s.insert(TransactionFact{Timestamp{release_ts}, S, hash(4), 40, u2, b1, amt(0), 1, 60000});
        s.insert(ScWithdrawalFact{hash(4), 0, b1, u1, amt(5)});
        s.insert(ScTokenWithdrewFact{hash(4), 1, release_id, u1, aa, amt(5)});
    }
};

inline FactStore f1_store(const F1& f = {}, const StaticFacts& st = {})
{
    FactStore s;
    st.insert(s);
    f.insert(s);
    s.seal();
    return s;
}

/// F2 alone, or with the mapping removed.
inline FactStore f2_store(const F2& f = {}, const StaticFacts& st = {})
{
    FactStore s;
    s.insert(CctxFinalityFact{S, st.source_finality});
    s.insert(CctxFinalityFact{T, st.target_finality});
    s.insert(BridgeControlledAddressFact{S, b1});
    s.insert(BridgeControlledAddressFact{T, b2});
    s.insert(WrappedNativeTokenFact{S, aa});
    if (f.with_mapping) s.insert(TokenMappingFact{S, T, aa, cc, "ERC20"});
    f.insert(s);
    s.seal();
    return s;
}

inline FactStore f1_f2_store()
{
    FactStore s;
    StaticFacts{}.insert(s);
    F1{}.insert(s);
    F2{}.insert(s);
    s.seal();
    return s;
}

/// Copy of an (unsealed or sealed) store's facts into a fresh unsealed store.
inline FactStore copy_facts(const FactStore& src)
{
    FactStore out;
    src.for_each_relation([&](const auto& rel) {
        for (const auto& f : rel.rows()) out.insert(f);
    });
    return out;
}

/// Random store over a deliberately tiny value domain so that joins hit
/// often: two chains, a handful of addresses, ids, amounts and timestamps.
inline FactStore random_store(std::uint64_t seed, std::size_t n_facts)
{
    Xoshiro256 rng(seed);
    auto pick = [&](auto n) { return static_cast<std::size_t>(rng.uniform(0, n - 1)); };
    const std::array<ChainId, 2> chains = {S, T};
    const std::array<Address, 6> addrs = {u1, u2, b1, b2, aa, cc};
    const std::array<Address, 3> tokens = {aa, cc, addr(0xdd)};
    const std::array<const char*, 3> ids = {"1", "2", "3"};
    const std::array<const char*, 2> stds = {"ERC20", "NATIVE"};
    auto chain = [&] { return chains[pick(2)]; };
    auto address = [&] { return addrs[pick(addrs.size())]; };
    auto token = [&] { return tokens[pick(tokens.size())]; };
    auto id = [&] { return std::string(ids[pick(ids.size())]); };
    auto amount = [&] { return amt(rng.uniform(0, 2) == 0 ? 0 : rng.uniform(5, 6)); };
    auto tx = [&] { return hash(rng.uniform(1, 12)); };
    auto idx = [&] { return rng.uniform(0, 2); };
    auto ts = [&] { return Timestamp{rng.uniform(0, 100)}; };

    FactStore s;
    s.insert(CctxFinalityFact{S, rng.uniform(1, 40)});
    s.insert(CctxFinalityFact{T, rng.uniform(1, 40)});
    if (rng.uniform(0, 3) == 0) s.insert(CctxFinalityFact{T, rng.uniform(1, 40)});
    s.insert(BridgeControlledAddressFact{S, b1});
    s.insert(BridgeControlledAddressFact{T, b2});
    if (rng.uniform(0, 1)) s.insert(BridgeControlledAddressFact{S, b2});
    for (int i = 0; i < 3; ++i) s.insert(WrappedNativeTokenFact{chain(), token()});
    for (int i = 0; i < 8; ++i) {
        auto c1 = chain();
        s.insert(TokenMappingFact{c1, c1 == S ? T : S, token(), token(), stds[pick(2)]});
    }

    // Whole local flows with fields drawn from the same tiny domain, so the
    // multi-way joins of the native and cross-chain rules fire regularly.
    auto flow_tx = [&](const TxHash& h, const Address& from, const Amount& value) {
        s.insert(TransactionFact{ts(), chain(), h, 0, from, address(), value,
                                 static_cast<std::uint32_t>(rng.uniform(0, 7) == 0 ? 0 : 1), 0});
    };
    auto bridge = [&] { return rng.uniform(0, 1) ? b1 : b2; };

    // Whole flows add up to 3 facts; near the budget only single facts are drawn.
    while (s.size() < n_facts) {
        switch (rng.uniform(0, n_facts - s.size() >= 3 ? 12 : 8)) {
        case 9: {
            auto h = tx();
            auto user = address();
            auto a = amount();
            flow_tx(h, user, a);
            if (rng.uniform(0, 1)) {
                s.insert(ScDepositFact{h, 0, user, bridge(), a});
                s.insert(ScTokenDepositedFact{h, 1, id(), address(), token(), token(), chain(), stds[pick(2)], a});
            } else {
                s.insert(TcWithdrawalFact{h, 0, user, bridge(), a});
                s.insert(TcTokenWithdrewFact{h, 1, id(), address(), token(), token(), chain(), stds[pick(2)], a});
            }
            break;
        }
        case 10: {
            auto h = tx();
            auto benef = address();
            auto tok = token();
            auto a = amount();
            flow_tx(h, address(), amt(0));
            s.insert(Erc20TransferFact{h, chain(), 0, tok, bridge(), benef, a});
            if (rng.uniform(0, 1)) {
                s.insert(TcTokenDepositedFact{h, 1, id(), benef, tok, a});
            } else {
                s.insert(ScTokenWithdrewFact{h, 1, id(), benef, tok, a});
            }
            break;
        }
        case 11: {
            auto h = tx();
            auto benef = address();
            auto a = amount();
            flow_tx(h, address(), amt(0));
            s.insert(ScWithdrawalFact{h, 0, bridge(), benef, a});
            s.insert(ScTokenWithdrewFact{h, 1, id(), benef, token(), a});
            break;
        }
        case 12: {
            auto h = tx();
            auto user = address();
            auto tok = token();
            auto a = amount();
            flow_tx(h, user, amt(0));
            s.insert(Erc20TransferFact{h, chain(), 0, tok, user, bridge(), a});
            if (rng.uniform(0, 1)) {
                s.insert(ScTokenDepositedFact{h, 1, id(), address(), token(), tok, chain(), stds[pick(2)], a});
            } else {
                s.insert(TcTokenWithdrewFact{h, 1, id(), address(), tok, token(), chain(), stds[pick(2)], a});
            }
            break;
        }
        case 0:
            s.insert(TransactionFact{ts(), chain(), tx(), 0, address(), address(), amount(),
                                     static_cast<std::uint32_t>(rng.uniform(0, 5) == 0 ? 0 : 1), 0});
            break;
        case 1: s.insert(Erc20TransferFact{tx(), chain(), idx(), token(), address(), address(), amount()}); break;
        case 2: s.insert(ScDepositFact{tx(), idx(), address(), address(), amount()}); break;
        case 3:
            s.insert(ScTokenDepositedFact{tx(), idx(), id(), address(), token(), token(), chain(), stds[pick(2)],
                                          amount()});
            break;
        case 4: s.insert(TcTokenDepositedFact{tx(), idx(), id(), address(), token(), amount()}); break;
        case 5: s.insert(TcWithdrawalFact{tx(), idx(), address(), address(), amount()}); break;
        case 6:
            s.insert(TcTokenWithdrewFact{tx(), idx(), id(), address(), token(), token(), chain(), stds[pick(2)],
                                         amount()});
            break;
        case 7: s.insert(ScWithdrawalFact{tx(), idx(), address(), address(), amount()}); break;
        case 8: s.insert(ScTokenWithdrewFact{tx(), idx(), id(), address(), token(), amount()}); break;
        }
    }
    return s;
}

/// A small generated scenario with a random subset of its facts dropped,
/// so partially broken flows of realistic shape appear.
inline FactStore mutated_scenario(std::uint64_t seed, std::size_t flows)
{
    ScenarioParams p;
    p.seed = seed;
    p.n_deposits = flows;
    p.n_withdrawals = flows;
    p.anomalies.replayed_id = 1;
    p.anomalies.finality_break = 2;
    p.anomalies.forged_release = 1;
    auto full = generate(p).facts();
    Xoshiro256 rng(seed ^ 0x5eedULL);
    FactStore out;
    full.for_each_relation([&]<typename F>(const Relation<F>& rel) {
        constexpr bool is_static = std::is_same_v<F, CctxFinalityFact> || std::is_same_v<F, TokenMappingFact> ||
                                   std::is_same_v<F, WrappedNativeTokenFact> ||
                                   std::is_same_v<F, BridgeControlledAddressFact>;
        for (const auto& f : rel.rows()) {
            if (is_static || rng.uniform(0, 9) != 0) out.insert(f);
        }
    });
    return out;
}

/// Ground-truth comparison for one scenario: every label must be covered by
/// a detected anomaly of each expected kind citing one of its transactions,
/// and every detected anomaly must cite some labeled transaction.
struct TruthCheck {
    std::size_t labels = 0;
    std::size_t recalled = 0;
    std::size_t false_positives = 0;
    std::vector<std::string> problems;

    bool perfect() const { return recalled == labels && false_positives == 0; }
};

inline TruthCheck check_truth(const GroundTruth& truth, const std::vector<Anomaly>& anomalies)
{
    TruthCheck c;
    c.labels = truth.labels.size();
    auto cites = [](const Anomaly& a, const std::vector<TxHash>& txs) {
        return std::any_of(a.tx_hashes.begin(), a.tx_hashes.end(),
                           [&](const TxHash& h) { return std::find(txs.begin(), txs.end(), h) != txs.end(); });
    };
    for (const auto& label : truth.labels) {
        bool all = true;
        for (auto kind : label.expected) {
            bool hit = std::any_of(anomalies.begin(), anomalies.end(),
                                   [&](const Anomaly& a) { return a.kind == kind && cites(a, label.tx_hashes); });
            if (!hit) {
                all = false;
                c.problems.push_back("missed " + std::string(anomaly_kind_name(kind)) + " for " + label.kind + " " +
                                     label.tx_hashes.front().to_hex());
            }
        }
        if (all) ++c.recalled;
    }
    for (const auto& a : anomalies) {
        bool explained = std::any_of(truth.labels.begin(), truth.labels.end(), [&](const InjectedAnomaly& l) {
            return std::find(l.expected.begin(), l.expected.end(), a.kind) != l.expected.end() &&
                   cites(a, l.tx_hashes);
        });
        if (!explained) {
            ++c.false_positives;
            c.problems.push_back("unexplained " + a.to_json().dump());
        }
    }
    return c;
}

/// Rule and anomaly counts observed on a store, in describe() shape.
inline ExpectedCounts observed_counts(const RuleOutputs& o, const std::vector<Anomaly>& anomalies)
{
    ExpectedCounts e;
    for (auto r : kAllRules) e.rules[r] = o.count(r);
    for (auto k : kAllAnomalyKinds) e.anomalies[k] = count_kind(anomalies, k);
    return e;
}

struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& name)
    {
        path = std::filesystem::temp_directory_path() /
               ("bridgewatch-test-" + name + "-" + std::to_string(std::random_device{}()));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

inline std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace bwtest
