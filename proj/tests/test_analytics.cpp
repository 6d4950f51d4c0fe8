#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <map>

using namespace bwtest;

namespace {

Analysis run(const FactStore& s) { return analyze(s, eval_all(s)); }

std::vector<Anomaly> of_kind(const std::vector<Anomaly>& all, AnomalyKind kind)
{
    std::vector<Anomaly> out;
    for (const auto& a : all) {
        if (a.kind == kind) out.push_back(a);
    }
    return out;
}

FactStore with_static(const std::function<void(FactStore&)>& fn)
{
    FactStore s;
    StaticFacts{}.insert(s);
    fn(s);
    s.seal();
    return s;
}

Cctx cctx_with_latency(std::uint64_t n, std::uint64_t latency)
{
    Cctx c{S, Timestamp{1000}, hash(n), T, Timestamp{1000 + latency}, hash(n + 1000), std::to_string(n),
           aa, cc, u1, u2, amt(5)};
    return c;
}

/// Copy of `src` with the escrow transaction of `tx` moved `shift` seconds earlier.
FactStore shift_escrow(const FactStore& src, const TxHash& tx, std::uint64_t shift)
{
    FactStore out;
    src.for_each_relation([&]<typename F>(const Relation<F>& rel) {
        for (auto f : rel.rows()) {
            if constexpr (std::is_same_v<F, TransactionFact>) {
                if (f.tx_hash == tx) f.timestamp.seconds -= shift;
            }
            out.insert(f);
        }
    });
    out.seal();
    return out;
}

}  // namespace

// Local mismatches -----------------------------------------------------------

TEST(LocalMismatches, TransferIntoBridgeWithoutEvent)
{
    auto s = with_static([](FactStore& s) {
        s.insert(TransactionFact{Timestamp{10}, S, hash(1), 1, u1, aa, amt(0), 1, 0});
        s.insert(Erc20TransferFact{hash(1), S, 0, aa, u1, b1, amt(5)});
    });
    auto out = local_mismatches(s);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].kind, AnomalyKind::SingleTokenEvent);
    EXPECT_EQ(out[0].amount, amt(5));
    EXPECT_EQ(out[0].tx_hashes, std::vector<TxHash>{hash(1)});
    EXPECT_EQ(out[0].evidence["side"], "escrow");
}

TEST(LocalMismatches, BridgeEventWithoutTransfer)
{
    auto s = with_static([](FactStore& s) {
        s.insert(TransactionFact{Timestamp{10}, S, hash(1), 1, u1, b1, amt(0), 1, 0});
        s.insert(F1{}.deposited());
    });
    auto out = local_mismatches(s);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].kind, AnomalyKind::SingleBridgeEvent);
    EXPECT_EQ(out[0].severity, Severity::critical);
    EXPECT_EQ(out[0].chains, std::vector<ChainId>{S});
}

TEST(LocalMismatches, CompleteFlowsAreClean)
{
    EXPECT_TRUE(local_mismatches(f1_store()).empty());
    EXPECT_TRUE(local_mismatches(f2_store()).empty());
}

TEST(LocalMismatches, UnannouncedReleaseIsCritical)
{
    auto s = with_static([](FactStore& s) {
        s.insert(F1{}.tx2());
        s.insert(F1{}.release_transfer());
    });
    auto out = local_mismatches(s);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].kind, AnomalyKind::SingleTokenEvent);
    EXPECT_EQ(out[0].evidence["side"], "release");
    EXPECT_EQ(out[0].severity, Severity::critical);
}

// Unmatched local tuples -----------------------------------------------------

TEST(UnmatchedLocal, DepositWithoutTargetSide)
{
    F1 f;
    f.with_target_side = false;
    auto res = unmatched_local(eval_all(f1_store(f)));
    ASSERT_EQ(res.anomalies.size(), 1u);
    EXPECT_EQ(res.anomalies[0].kind, AnomalyKind::UnmatchedLocalDeposit);
    EXPECT_EQ(res.anomalies[0].evidence["rule"], "SC_ValidNativeTokenDeposit");
    EXPECT_EQ(res.anomalies[0].evidence["side"], "escrow");
}

TEST(UnmatchedLocal, ForgedReleaseOnSource)
{
    auto s = with_static([](FactStore& s) {
        s.insert(TransactionFact{Timestamp{5050}, S, hash(4), 40, u2, b1, amt(0), 1, 60000});
        s.insert(ScWithdrawalFact{hash(4), 0, b1, u1, amt(5)});
        s.insert(ScTokenWithdrewFact{hash(4), 1, "9", u1, aa, amt(5)});
    });
    auto out = eval_all(s);
    ASSERT_EQ(out.rule7.size(), 1u);
    auto res = unmatched_local(out);
    ASSERT_EQ(res.anomalies.size(), 1u);
    EXPECT_EQ(res.anomalies[0].kind, AnomalyKind::UnmatchedLocalWithdrawal);
    EXPECT_EQ(res.anomalies[0].evidence["side"], "release");
    EXPECT_EQ(res.anomalies[0].severity, Severity::critical);
    // the flow is locally consistent, so nothing else fires
    EXPECT_EQ(run(s).anomalies.size(), 1u);
}

TEST(UnmatchedLocal, CompleteFlowsAreClean)
{
    EXPECT_TRUE(unmatched_local(eval_all(f1_f2_store())).anomalies.empty());
}

// Finality ----------------------------------------------------------------------

TEST(Finality, EightySevenSecondsAgainst1800)
{
    F1 f;
    f.release_ts = 1087;
    auto s = f1_store(f);
    auto v = finality_violations(s, eval_all(s));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].evidence["gap"], 87);
    EXPECT_EQ(v[0].evidence["window"], 1800);
    EXPECT_EQ(v[0].evidence["direction"], "deposit");
    EXPECT_EQ(v[0].tx_hashes, (std::vector<TxHash>{hash(1), hash(2)}));
}

TEST(Finality, SixtySixSecondsAgainst78)
{
    F2 f;
    f.release_ts = 5066;
    StaticFacts st;
    st.target_finality = 78;
    auto s = f2_store(f, st);
    auto v = finality_violations(s, eval_all(s));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v[0].evidence["gap"], 66);
    EXPECT_EQ(v[0].evidence["window"], 78);
    EXPECT_EQ(v[0].evidence["direction"], "withdrawal");
}

TEST(Finality, CompliantFlowsAreClean)
{
    auto s = f1_f2_store();
    EXPECT_TRUE(finality_violations(s, eval_all(s)).empty());
}

TEST(Finality, BoundaryIsStrict)
{
    F1 f;
    f.release_ts = 2800;
    auto at = f1_store(f);
    auto at_out = eval_all(at);
    EXPECT_TRUE(at_out.rule4.empty());
    EXPECT_EQ(finality_violations(at, at_out).size(), 1u);

    f.release_ts = 2801;
    auto past = f1_store(f);
    auto past_out = eval_all(past);
    EXPECT_EQ(past_out.rule4.size(), 1u);
    EXPECT_TRUE(finality_violations(past, past_out).empty());
}

TEST(Finality, ShiftingEscrowEarlierRepairsEveryViolation)
{
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        ScenarioParams p;
        p.seed = seed;
        p.n_deposits = 6;
        p.n_withdrawals = 6;
        p.anomalies.finality_break = 4;
        auto s = generate(p).facts();
        s.seal();
        auto violations = finality_violations(s, eval_all(s));
        ASSERT_EQ(violations.size(), 4u);
        for (const auto& v : violations) {
            auto gap = v.evidence["gap"].get<std::int64_t>();
            auto window = v.evidence["window"].get<std::int64_t>();
            auto shifted = shift_escrow(s, v.tx_hashes[0], static_cast<std::uint64_t>(window - gap + 1));
            auto out = eval_all(shifted);
            const auto& set = v.evidence["direction"] == "deposit" ? out.rule4 : out.rule8;
            bool found = std::any_of(set.begin(), set.end(), [&](const Cctx& c) {
                return c.orig_tx_hash == v.tx_hashes[0] && c.dst_tx_hash == v.tx_hashes[1] &&
                       c.latency() == static_cast<std::uint64_t>(window + 1);
            });
            EXPECT_TRUE(found) << v.to_json().dump();
        }
    }
}

// Duplicate ids ------------------------------------------------------------------

TEST(DuplicateIds, TwoReleasesOneId)
{
    auto s = with_static([](FactStore& s) {
        s.insert(TransactionFact{Timestamp{10}, S, hash(4), 40, u2, b1, amt(0), 1, 0});
        s.insert(ScTokenWithdrewFact{hash(4), 1, "9", u1, aa, amt(5)});
        s.insert(TransactionFact{Timestamp{20}, S, hash(5), 41, u2, b1, amt(0), 1, 0});
        s.insert(ScTokenWithdrewFact{hash(5), 1, "9", u1, aa, amt(5)});
    });
    auto out = of_kind(duplicate_ids(s, eval_all(s)), AnomalyKind::DuplicateId);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].evidence["occurrences"], 2);
    EXPECT_EQ(out[0].evidence["id"], "9");
    EXPECT_EQ(out[0].amount, amt(10));
}

TEST(DuplicateIds, UniqueIdsAreClean)
{
    auto s = f1_f2_store();
    EXPECT_TRUE(duplicate_ids(s, eval_all(s)).empty());
}

TEST(DuplicateIds, ReplayedWithdrawalIsAmbiguous)
{
    // F2 plus a second release of the same withdrawal id
    FactStore s;
    StaticFacts{}.insert(s);
    F2{}.insert(s);
    s.insert(TransactionFact{Timestamp{6000}, S, hash(6), 60, u2, b1, amt(0), 1, 0});
    s.insert(ScWithdrawalFact{hash(6), 0, b1, u1, amt(5)});
    s.insert(ScTokenWithdrewFact{hash(6), 1, "9", u1, aa, amt(5)});
    s.seal();
    auto out = eval_all(s);
    EXPECT_EQ(out.rule8.size(), 2u);
    auto dup = duplicate_ids(s, out);
    ASSERT_EQ(count_kind(dup, AnomalyKind::DuplicateId), 1u);
    auto amb = of_kind(dup, AnomalyKind::AmbiguousMatch);
    ASSERT_EQ(amb.size(), 1u);
    EXPECT_EQ(amb[0].evidence["derivations"], 2);
    EXPECT_EQ(amb[0].evidence["first_release"], hash(4).to_hex());
    EXPECT_EQ(amb[0].evidence["extra_releases"], ordered_json::array({hash(6).to_hex()}));
    // both releases joined, so neither is unmatched
    EXPECT_TRUE(unmatched_local(out).anomalies.empty());
}

TEST(DuplicateIds, OccurrencesCoverNonUniqueReleaseTuples)
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto s = random_store(seed, 500);
        s.seal();
        auto dup = of_kind(duplicate_ids(s, eval_all(s)), AnomalyKind::DuplicateId);
        std::size_t covered = 0;
        for (const auto& a : dup) covered += a.evidence["occurrences"].get<std::size_t>();

        std::size_t expected = 0;
        std::map<std::string, std::size_t> dep, wd;
        for (const auto& f : s.get<TcTokenDepositedFact>()) ++dep[f.deposit_id];
        for (const auto& f : s.get<ScTokenWithdrewFact>()) ++wd[f.withdrawal_id];
        for (const auto* m : {&dep, &wd}) {
            for (const auto& [id, n] : *m) {
                if (n > 1) expected += n;
            }
        }
        EXPECT_EQ(covered, expected) << "seed " << seed;
    }
}

// Latency -----------------------------------------------------------------------

TEST(Latency, ThreeValues)
{
    auto st = latency_stats({cctx_with_latency(1, 100), cctx_with_latency(2, 600), cctx_with_latency(3, 200)});
    EXPECT_EQ(st.count, 3u);
    EXPECT_EQ(st.min, 100u);
    EXPECT_EQ(st.max, 600u);
    EXPECT_EQ(st.median, 200u);
    EXPECT_EQ(st.avg, "300.00");
    EXPECT_EQ(st.std, "216.02");
    EXPECT_EQ(st.total_value, amt(15));
}

TEST(Latency, SingleValue)
{
    auto st = latency_stats({cctx_with_latency(1, 45)});
    EXPECT_EQ(st.min, 45u);
    EXPECT_EQ(st.max, 45u);
    EXPECT_EQ(st.median, 45u);
    EXPECT_EQ(st.avg, "45.00");
    EXPECT_EQ(st.std, "0.00");
}

TEST(Latency, EmptySetHasNoStats)
{
    auto j = latency_stats({}).to_json();
    EXPECT_EQ(j["count"], 0);
    EXPECT_TRUE(j["min"].is_null());
    EXPECT_TRUE(j["median"].is_null());
    EXPECT_EQ(j["total_value"], "0");
}

TEST(Latency, EvenCountTakesLowerMiddleAndRoundsHalfUp)
{
    auto st = latency_stats({cctx_with_latency(1, 1), cctx_with_latency(2, 2), cctx_with_latency(3, 4),
                             cctx_with_latency(4, 4)});
    EXPECT_EQ(st.median, 2u);
    EXPECT_EQ(st.avg, "2.75");
    // population variance 1.6875, sqrt = 1.29903...
    EXPECT_EQ(st.std, "1.30");
    auto third = latency_stats({cctx_with_latency(1, 1), cctx_with_latency(2, 1), cctx_with_latency(3, 2)});
    EXPECT_EQ(third.avg, "1.33");
}

TEST(Latency, PriceTableGivesUsdTotal)
{
    TempDir dir("prices");
    {
        std::ofstream out(dir.path / "p.json");
        out << R"([{"chain_id": 1, "token": "0xaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaaa", "usd": 2.5, "decimals": 0}])";
    }
    auto table = load_price_table(dir.path / "p.json");
    auto st = latency_stats(eval_all(f1_store()).rule4, &table);
    ASSERT_TRUE(st.total_usd.has_value());
    EXPECT_EQ(st.to_json()["total_usd"], "12.50");
    EXPECT_TRUE(latency_stats(eval_all(f1_store()).rule4).to_json()["total_usd"].is_null());
}

// Report ------------------------------------------------------------------------

TEST(Report, F1F2IsClean)
{
    auto s = f1_f2_store();
    auto o = eval_all(s);
    auto a = analyze(s, o);
    EXPECT_TRUE(a.anomalies.empty());
    auto r = build_report(s, o, a);
    EXPECT_EQ(r["schema_version"], 1);
    EXPECT_EQ(r["rules"]["CCTX_ValidDeposit"], 1);
    EXPECT_EQ(r["rules"]["CCTX_ValidWithdrawal"], 1);
    for (auto kind : kAllAnomalyKinds) EXPECT_EQ(r["anomaly_counts"][std::string(anomaly_kind_name(kind))], 0);
    EXPECT_EQ(r["latency"]["deposit"]["count"], 1);
    EXPECT_EQ(r["latency"]["withdrawal"]["avg"], "50.00");
}

TEST(Report, EmptyStoreIsAllZero)
{
    FactStore s;
    s.seal();
    auto o = eval_all(s);
    auto r = build_report(s, o, analyze(s, o));
    for (const auto& [k, v] : r["relations"].items()) EXPECT_EQ(v, 0) << k;
    for (const auto& [k, v] : r["rules"].items()) EXPECT_EQ(v, 0) << k;
    for (const auto& [k, v] : r["anomaly_counts"].items()) EXPECT_EQ(v, 0) << k;
    EXPECT_EQ(r["latency"]["deposit"]["count"], 0);
}

TEST(Report, ForgedWithdrawalsCounted)
{
    ScenarioParams p;
    p.seed = 3;
    p.n_deposits = 4;
    p.n_withdrawals = 4;
    p.anomalies.forged_release = 3;
    auto s = generate(p).facts();
    s.seal();
    auto o = eval_all(s);
    auto r = build_report(s, o, analyze(s, o));
    EXPECT_EQ(r["anomaly_counts"]["UnmatchedLocalWithdrawal"], describe(p).anomalies.at(AnomalyKind::UnmatchedLocalWithdrawal));
    EXPECT_EQ(r["anomalies"]["UnmatchedLocalWithdrawal"].size(), 3u);
}

TEST(Report, ByteIdenticalAcrossRunsAndInsertionOrders)
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        auto s = random_store(seed, 500);
        auto reversed = FactStore{};
        s.for_each_relation([&](const auto& rel) {
            auto rows = rel.rows();
            for (auto it = rows.rbegin(); it != rows.rend(); ++it) reversed.insert(*it);
        });
        s.seal();
        reversed.seal();
        auto report = [](const FactStore& st) {
            auto o = eval_all(st);
            return build_report(st, o, analyze(st, o)).dump(2);
        };
        auto first = report(s);
        EXPECT_EQ(report(s), first);
        EXPECT_EQ(report(reversed), first);
    }
}

TEST(Accounting, IdentityHoldsOnEveryStore)
{
    auto check = [](const FactStore& s, const std::string& label) {
        auto o = eval_all(s);
        auto res = unmatched_local(o);
        ASSERT_EQ(res.accounting.size(), 6u);
        for (const auto& acc : res.accounting) {
            EXPECT_EQ(acc.total, o.count(acc.rule)) << label;
            EXPECT_EQ(acc.total, acc.matched + acc.unmatched) << label;
            auto flagged = std::count_if(res.anomalies.begin(), res.anomalies.end(), [&](const Anomaly& a) {
                return a.evidence["rule"] == rule_name(acc.rule);
            });
            EXPECT_EQ(static_cast<std::size_t>(flagged), acc.unmatched) << label << " " << rule_name(acc.rule);
        }
    };
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        auto s = random_store(seed, 500);
        s.seal();
        check(s, "random " + std::to_string(seed));
        auto m = mutated_scenario(seed, 10);
        m.seal();
        check(m, "mutated " + std::to_string(seed));
    }
}
