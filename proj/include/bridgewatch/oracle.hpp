#pragma once

// Reference evaluator for rules 1-8: one nested loop per body atom, in the
// order the rule bodies list them, no indexes. Used only to check the engine.

#include <bridgewatch/rules.hpp>

#include <cstddef>
#include <string>

namespace bridgewatch::oracle {

inline constexpr std::size_t kMaxFacts = 10'000;

class RefusalError : public Error {
public:
    using Error::Error;
};

namespace detail {

inline void guard(const FactStore& store)
{
    if (store.size() > kMaxFacts) {
        throw RefusalError("oracle refuses stores above " + std::to_string(kMaxFacts) + " facts (got " +
                           std::to_string(store.size()) + ")");
    }
}

template <typename F>
bool has(const FactStore& store, const F& wanted)
{
    for (const auto& f : store.get<F>()) {
        if (f == wanted) return true;
    }
    return false;
}

}  // namespace detail

inline std::vector<ScValidDeposit> rule1(const FactStore& s)
{
    std::vector<ScValidDeposit> out;
    for (const auto& dep : s.get<ScTokenDepositedFact>())
        for (const auto& nat : s.get<ScDepositFact>()) {
            if (nat.tx_hash != dep.tx_hash || nat.amount != dep.amount) continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != dep.tx_hash || tx.from != nat.sender || tx.value != dep.amount || tx.status != 1)
                    continue;
                if (!detail::has(s, TokenMappingFact{tx.chain_id, dep.dst_chain_id, dep.orig_token, dep.dst_token,
                                                     dep.standard}))
                    continue;
                if (!detail::has(s, WrappedNativeTokenFact{tx.chain_id, dep.orig_token})) continue;
                if (!detail::has(s, BridgeControlledAddressFact{tx.chain_id, nat.bridge_addr})) continue;
                if (!(dep.event_index > nat.event_index)) continue;
                out.push_back({tx.timestamp, dep.tx_hash, dep.deposit_id, nat.sender, nat.bridge_addr, dep.beneficiary,
                               dep.dst_token, dep.orig_token, tx.chain_id, dep.dst_chain_id, dep.standard, dep.amount});
            }
        }
    normalize(out);
    return out;
}

inline std::vector<ScValidDeposit> rule2(const FactStore& s)
{
    std::vector<ScValidDeposit> out;
    for (const auto& dep : s.get<ScTokenDepositedFact>())
        for (const auto& tr : s.get<Erc20TransferFact>()) {
            if (tr.tx_hash != dep.tx_hash || tr.token != dep.orig_token || tr.amount != dep.amount) continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != dep.tx_hash || tx.chain_id != tr.chain_id || !tx.value.is_zero() || tx.status != 1)
                    continue;
                if (!detail::has(s, TokenMappingFact{tr.chain_id, dep.dst_chain_id, dep.orig_token, dep.dst_token,
                                                     dep.standard}))
                    continue;
                if (!detail::has(s, BridgeControlledAddressFact{tr.chain_id, tr.to})) continue;
                if (!(dep.event_index > tr.event_index)) continue;
                out.push_back({tx.timestamp, dep.tx_hash, dep.deposit_id, tx.from, tr.to, dep.beneficiary,
                               dep.dst_token, dep.orig_token, tr.chain_id, dep.dst_chain_id, dep.standard, dep.amount});
            }
        }
    normalize(out);
    return out;
}

inline std::vector<TcValidDeposit> rule3(const FactStore& s)
{
    std::vector<TcValidDeposit> out;
    for (const auto& dep : s.get<TcTokenDepositedFact>())
        for (const auto& tr : s.get<Erc20TransferFact>()) {
            if (tr.tx_hash != dep.tx_hash || tr.token != dep.dst_token || tr.to != dep.beneficiary ||
                tr.amount != dep.amount)
                continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != dep.tx_hash || tx.chain_id != tr.chain_id || !tx.value.is_zero() || tx.status != 1)
                    continue;
                if (!detail::has(s, BridgeControlledAddressFact{tr.chain_id, tr.from})) continue;
                if (!(dep.event_index > tr.event_index)) continue;
                out.push_back({tx.timestamp, dep.tx_hash, dep.deposit_id, dep.beneficiary, dep.dst_token, tr.chain_id,
                               dep.amount});
            }
        }
    normalize(out);
    return out;
}

inline std::vector<Cctx> rule4(const FactStore& s)
{
    auto released = rule3(s);
    auto escrows = rule2(s);
    auto native = rule1(s);
    escrows.insert(escrows.end(), native.begin(), native.end());

    std::vector<Cctx> out;
    for (const auto& tc : released)
        for (const auto& sc : escrows) {
            if (sc.deposit_id != tc.deposit_id || sc.beneficiary != tc.beneficiary || sc.dst_token != tc.dst_token ||
                sc.dst_chain_id != tc.chain_id || sc.amount != tc.amount)
                continue;
            for (const auto& fin : s.get<CctxFinalityFact>()) {
                if (fin.chain_id != sc.orig_chain_id) continue;
                if (!(sc.timestamp.seconds + fin.finality_seconds < tc.timestamp.seconds)) continue;
                out.push_back({sc.orig_chain_id, sc.timestamp, sc.tx_hash, tc.chain_id, tc.timestamp, tc.tx_hash,
                               sc.deposit_id, sc.orig_token, sc.dst_token, sc.sender, sc.beneficiary, sc.amount});
            }
        }
    normalize(out);
    return out;
}

inline std::vector<TcValidWithdrawal> rule5(const FactStore& s)
{
    std::vector<TcValidWithdrawal> out;
    for (const auto& wd : s.get<TcTokenWithdrewFact>())
        for (const auto& nat : s.get<TcWithdrawalFact>()) {
            if (nat.tx_hash != wd.tx_hash || nat.amount != wd.amount) continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != wd.tx_hash || tx.from != nat.sender || tx.value != wd.amount || tx.status != 1)
                    continue;
                if (!detail::has(s, TokenMappingFact{wd.dst_chain_id, tx.chain_id, wd.dst_token, wd.orig_token,
                                                     wd.standard}))
                    continue;
                if (!detail::has(s, WrappedNativeTokenFact{tx.chain_id, wd.orig_token})) continue;
                if (!detail::has(s, BridgeControlledAddressFact{tx.chain_id, nat.bridge_addr})) continue;
                if (!(wd.event_index > nat.event_index)) continue;
                out.push_back({tx.timestamp, wd.tx_hash, wd.withdrawal_id, nat.sender, nat.bridge_addr, wd.beneficiary,
                               wd.orig_token, wd.dst_token, wd.dst_chain_id, tx.chain_id, wd.standard, wd.amount});
            }
        }
    normalize(out);
    return out;
}

inline std::vector<TcValidWithdrawal> rule6(const FactStore& s)
{
    std::vector<TcValidWithdrawal> out;
    for (const auto& wd : s.get<TcTokenWithdrewFact>())
        for (const auto& tr : s.get<Erc20TransferFact>()) {
            if (tr.tx_hash != wd.tx_hash || tr.token != wd.orig_token || tr.amount != wd.amount) continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != wd.tx_hash || tx.chain_id != tr.chain_id || !tx.value.is_zero() || tx.status != 1)
                    continue;
                if (!detail::has(s, TokenMappingFact{wd.dst_chain_id, tr.chain_id, wd.dst_token, wd.orig_token,
                                                     wd.standard}))
                    continue;
                if (!detail::has(s, BridgeControlledAddressFact{tr.chain_id, tr.to})) continue;
                if (!(wd.event_index > tr.event_index)) continue;
                out.push_back({tx.timestamp, wd.tx_hash, wd.withdrawal_id, tx.from, tr.to, wd.beneficiary,
                               wd.orig_token, wd.dst_token, wd.dst_chain_id, tr.chain_id, wd.standard, wd.amount});
            }
        }
    normalize(out);
    return out;
}

inline std::vector<ScValidWithdrawal> rule7(const FactStore& s)
{
    std::vector<ScValidWithdrawal> out;
    for (const auto& wd : s.get<ScTokenWithdrewFact>()) {
        // erc20_transfer branch of the disjunction
        for (const auto& tr : s.get<Erc20TransferFact>()) {
            if (tr.tx_hash != wd.tx_hash || tr.token != wd.dst_token || tr.to != wd.beneficiary ||
                tr.amount != wd.amount)
                continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != wd.tx_hash || tx.chain_id != tr.chain_id || !tx.value.is_zero() || tx.status != 1)
                    continue;
                if (!detail::has(s, BridgeControlledAddressFact{tr.chain_id, tr.from})) continue;
                if (!(wd.event_index > tr.event_index)) continue;
                out.push_back({tx.timestamp, wd.tx_hash, wd.withdrawal_id, wd.beneficiary, wd.dst_token, tr.chain_id,
                               wd.amount});
            }
        }
        // sc_withdrawal branch
        for (const auto& nat : s.get<ScWithdrawalFact>()) {
            if (nat.tx_hash != wd.tx_hash || nat.beneficiary != wd.beneficiary || nat.amount != wd.amount) continue;
            for (const auto& tx : s.get<TransactionFact>()) {
                if (tx.tx_hash != wd.tx_hash || !tx.value.is_zero() || tx.status != 1) continue;
                if (!detail::has(s, BridgeControlledAddressFact{tx.chain_id, nat.bridge_addr})) continue;
                if (!(wd.event_index > nat.event_index)) continue;
                out.push_back({tx.timestamp, wd.tx_hash, wd.withdrawal_id, wd.beneficiary, wd.dst_token, tx.chain_id,
                               wd.amount});
            }
        }
    }
    normalize(out);
    return out;
}

inline std::vector<Cctx> rule8(const FactStore& s)
{
    auto released = rule7(s);
    auto escrows = rule6(s);
    auto native = rule5(s);
    escrows.insert(escrows.end(), native.begin(), native.end());

    std::vector<Cctx> out;
    for (const auto& sc : released)
        for (const auto& tc : escrows) {
            if (tc.withdrawal_id != sc.withdrawal_id || tc.beneficiary != sc.beneficiary ||
                tc.dst_token != sc.dst_token || tc.dst_chain_id != sc.chain_id || tc.amount != sc.amount)
                continue;
            for (const auto& fin : s.get<CctxFinalityFact>()) {
                if (fin.chain_id != tc.orig_chain_id) continue;
                if (!(tc.timestamp.seconds + fin.finality_seconds < sc.timestamp.seconds)) continue;
                out.push_back({tc.orig_chain_id, tc.timestamp, tc.tx_hash, sc.chain_id, sc.timestamp, sc.tx_hash,
                               tc.withdrawal_id, tc.orig_token, tc.dst_token, tc.sender, tc.beneficiary, tc.amount});
            }
        }
    normalize(out);
    return out;
}

/// Tuple set of one rule; only that rule's slot of the result is filled.
inline RuleOutputs brute_force(RuleId rule, const FactStore& store)
{
    detail::guard(store);
    RuleOutputs out;
    switch (rule) {
    case RuleId::ScValidNativeTokenDeposit: out.rule1 = rule1(store); break;
    case RuleId::ScValidErc20TokenDeposit: out.rule2 = rule2(store); break;
    case RuleId::TcValidErc20TokenDeposit: out.rule3 = rule3(store); break;
    case RuleId::CctxValidDeposit: out.rule4 = rule4(store); break;
    case RuleId::TcValidNativeTokenWithdrawal: out.rule5 = rule5(store); break;
    case RuleId::TcValidErc20TokenWithdrawal: out.rule6 = rule6(store); break;
    case RuleId::ScValidErc20TokenWithdrawal: out.rule7 = rule7(store); break;
    case RuleId::CctxValidWithdrawal: out.rule8 = rule8(store); break;
    }
    return out;
}

inline RuleOutputs brute_force_all(const FactStore& store)
{
    detail::guard(store);
    return {rule1(store), rule2(store), rule3(store), rule4(store),
            rule5(store), rule6(store), rule7(store), rule8(store)};
}

/// Human-readable engine/oracle differences; empty when they agree.
inline std::vector<std::string> diff(const RuleOutputs& engine, const RuleOutputs& reference)
{
    std::vector<std::string> lines;
    auto compare = [&](RuleId id, const auto& mine, const auto& theirs) {
        for (const auto& row : mine) {
            if (!std::binary_search(theirs.begin(), theirs.end(), row)) {
                lines.push_back(std::string(rule_name(id)) + " +engine " + csv_row(row));
            }
        }
        for (const auto& row : theirs) {
            if (!std::binary_search(mine.begin(), mine.end(), row)) {
                lines.push_back(std::string(rule_name(id)) + " +oracle " + csv_row(row));
            }
        }
    };
    compare(RuleId::ScValidNativeTokenDeposit, engine.rule1, reference.rule1);
    compare(RuleId::ScValidErc20TokenDeposit, engine.rule2, reference.rule2);
    compare(RuleId::TcValidErc20TokenDeposit, engine.rule3, reference.rule3);
    compare(RuleId::CctxValidDeposit, engine.rule4, reference.rule4);
    compare(RuleId::TcValidNativeTokenWithdrawal, engine.rule5, reference.rule5);
    compare(RuleId::TcValidErc20TokenWithdrawal, engine.rule6, reference.rule6);
    compare(RuleId::ScValidErc20TokenWithdrawal, engine.rule7, reference.rule7);
    compare(RuleId::CctxValidWithdrawal, engine.rule8, reference.rule8);
    return lines;
}

}  // namespace bridgewatch::oracle
