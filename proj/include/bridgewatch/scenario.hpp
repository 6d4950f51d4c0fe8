#pragma once

// Synthetic two-chain bridge traffic with labeled anomaly injection.
//
// Traffic is first built as a list of SynthTx (a transaction plus its
// bridge/token events), then rendered either straight to facts or to
// receipts whose logs use the ABI below, which the shipped decoder config
// turns back into the same facts.
//
//   TokenDeposited(uint256 id, bytes32 benef, address dstToken, address origToken,
//                  uint256 dstChainId, string standard, uint256 amount)        source
//   TokenDepositFinalized(uint256 id, bytes32 benef, address dstToken, uint256 amount)   target
//   TokenWithdrew(uint256 id, bytes32 benef, address origToken, address dstToken,
//                 uint256 dstChainId, string standard, uint256 amount)         target
//   TokenWithdrawalFinalized(uint256 id, bytes32 benef, address dstToken, uint256 amount) source
//   NativeReleased(bytes32 benef, uint256 amount)                               source
//
// id and benef are indexed (topics 1 and 2; NativeReleased: benef is topic 1).
// Bridge and token addresses are derived from fixed labels and chain ids, not
// the seed, so one decoder config serves every seed with the same chains.

#include <bridgewatch/analytics.hpp>
#include <bridgewatch/ingest.hpp>
#include <bridgewatch/rng.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

namespace bridgewatch {

struct ChainSpec {
    ChainId id;
    std::uint64_t finality_seconds = 0;
    std::uint64_t block_cadence = 12;
    std::uint64_t genesis_timestamp = 1'700'000'000;
    std::uint64_t genesis_block = 1'000'000;
};

struct AnomalySpec {
    std::size_t forged_release = 0;
    std::size_t replayed_id = 0;
    std::size_t finality_break = 0;
    std::size_t direct_transfer = 0;
    std::size_t orphan_bridge_event = 0;

    std::size_t total() const
    {
        return forged_release + replayed_id + finality_break + direct_transfer + orphan_bridge_event;
    }
    friend bool operator==(const AnomalySpec&, const AnomalySpec&) = default;
};

inline constexpr std::array<std::string_view, 5> kInjectionKinds = {
    "forged_release", "replayed_id", "finality_break", "direct_transfer", "orphan_bridge_event"};

inline std::size_t& anomaly_count(AnomalySpec& spec, std::string_view kind)
{
    if (kind == "forged_release") return spec.forged_release;
    if (kind == "replayed_id") return spec.replayed_id;
    if (kind == "finality_break") return spec.finality_break;
    if (kind == "direct_transfer") return spec.direct_transfer;
    if (kind == "orphan_bridge_event") return spec.orphan_bridge_event;
    throw ParamError("unknown anomaly kind '" + std::string(kind) + "'");
}

/// Parses "kind=count[,kind=count...]"; the empty string means no anomalies.
inline AnomalySpec parse_anomaly_spec(std::string_view text)
{
    AnomalySpec spec;
    while (!text.empty()) {
        auto comma = text.find(',');
        auto item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        auto eq = item.find('=');
        if (eq == std::string_view::npos) throw ParamError("anomaly spec item '" + std::string(item) + "' lacks '='");
        auto kind = item.substr(0, eq);
        auto count_text = item.substr(eq + 1);
        std::size_t count = 0;
        auto [ptr, ec] = std::from_chars(count_text.data(), count_text.data() + count_text.size(), count);
        if (ec != std::errc{} || ptr != count_text.data() + count_text.size() || count_text.empty()) {
            throw ParamError("anomaly count '" + std::string(count_text) + "' is not a non-negative integer");
        }
        anomaly_count(spec, kind) += count;
    }
    return spec;
}

struct ScenarioParams {
    std::uint64_t seed = 0;
    std::size_t n_deposits = 0;
    std::size_t n_withdrawals = 0;
    ChainSpec source{ChainId{1}, 1800, 12};
    ChainSpec target{ChainId{100}, 45, 3};
    std::size_t n_erc20_tokens = 2;
    AnomalySpec anomalies;
    std::size_t replay_copies = 3;                      // releases per replayed id
    std::optional<std::size_t> replay_total_releases;  // overrides replay_copies, spread evenly
};

/// How the requested anomalies land on base flows. Everything in describe()
/// and generate() derives from this one split.
struct AnomalyPlan {
    std::size_t finality_break_deposits = 0;
    std::size_t finality_break_withdrawals = 0;
    std::vector<std::size_t> replay_copies;  // per replayed withdrawal, total releases (>= 2)

    std::size_t extra_releases() const
    {
        std::size_t e = 0;
        for (auto k : replay_copies) e += k - 1;
        return e;
    }
};

inline AnomalyPlan plan_anomalies(const ScenarioParams& p)
{
    const auto& a = p.anomalies;
    if (p.source.id.value == 0 || p.target.id.value == 0) throw ParamError("chain ids must be nonzero");
    if (p.source.id == p.target.id) throw ParamError("source and target chains must differ");
    if (p.source.finality_seconds == 0 || p.target.finality_seconds == 0) {
        throw ParamError("finality windows must be positive");
    }
    if (p.source.block_cadence == 0 || p.target.block_cadence == 0) throw ParamError("block cadence must be positive");
    if (a.finality_break > 0 && (p.source.finality_seconds < 2 || p.target.finality_seconds < 2)) {
        throw ParamError("finality_break needs a finality window of at least 2 seconds (a gap in [1, window-1])");
    }
    if (a.replayed_id > p.n_withdrawals) {
        throw ParamError("replayed_id (" + std::to_string(a.replayed_id) + ") exceeds withdrawals (" +
                         std::to_string(p.n_withdrawals) + ")");
    }

    AnomalyPlan plan;
    plan.finality_break_withdrawals = std::min(a.finality_break / 2, p.n_withdrawals - a.replayed_id);
    plan.finality_break_deposits = a.finality_break - plan.finality_break_withdrawals;
    if (plan.finality_break_deposits > p.n_deposits) {
        throw ParamError("finality_break (" + std::to_string(a.finality_break) +
                         ") exceeds the flows available to break");
    }

    if (a.replayed_id > 0) {
        if (p.replay_total_releases) {
            auto total = *p.replay_total_releases;
            if (total < 2 * a.replayed_id) {
                throw ParamError("replay_total_releases must be at least twice replayed_id");
            }
            for (std::size_t i = 0; i < a.replayed_id; ++i) {
                plan.replay_copies.push_back(total / a.replayed_id + (i < total % a.replayed_id ? 1 : 0));
            }
        } else {
            if (p.replay_copies < 2) throw ParamError("replay_copies must be at least 2");
            plan.replay_copies.assign(a.replayed_id, p.replay_copies);
        }
    } else if (p.replay_total_releases && *p.replay_total_releases > 0) {
        throw ParamError("replay_total_releases given without replayed_id");
    }
    return plan;
}

// Flow shapes -----------------------------------------------------------------

enum class DepositKind { native, erc20 };
enum class WithdrawalKind { target_native, wrapped_to_native, erc20 };

/// Deposits cycle native, erc20[0], erc20[1], ...
inline std::pair<DepositKind, std::size_t> deposit_kind(const ScenarioParams& p, std::size_t i)
{
    auto slot = i % (p.n_erc20_tokens + 1);
    if (slot == 0) return {DepositKind::native, 0};
    return {DepositKind::erc20, slot - 1};
}

/// Withdrawals cycle target-native, wrapped-to-native, erc20[0], erc20[1], ...
inline std::pair<WithdrawalKind, std::size_t> withdrawal_kind(const ScenarioParams& p, std::size_t i)
{
    auto slot = i % (p.n_erc20_tokens + 2);
    if (slot == 0) return {WithdrawalKind::target_native, 0};
    if (slot == 1) return {WithdrawalKind::wrapped_to_native, 0};
    return {WithdrawalKind::erc20, slot - 2};
}

// Expected counts ---------------------------------------------------------------

struct ExpectedCounts {
    std::map<RuleId, std::size_t> rules;
    std::map<AnomalyKind, std::size_t> anomalies;

    std::size_t total_anomalies() const
    {
        std::size_t n = 0;
        for (const auto& [k, v] : anomalies) n += v;
        return n;
    }

    ordered_json to_json() const
    {
        ordered_json j;
        ordered_json r = ordered_json::object();
        for (const auto& [id, n] : rules) r[std::string(rule_name(id))] = n;
        j["rules"] = std::move(r);
        ordered_json a = ordered_json::object();
        for (const auto& [k, n] : anomalies) a[std::string(anomaly_kind_name(k))] = n;
        j["anomalies"] = std::move(a);
        return j;
    }
};

/// Closed-form rule and anomaly counts for a parameter set.
inline ExpectedCounts describe(const ScenarioParams& p)
{
    auto plan = plan_anomalies(p);
    const auto& a = p.anomalies;
    std::size_t native_deposits = 0, target_native = 0;
    for (std::size_t i = 0; i < p.n_deposits; ++i) {
        if (deposit_kind(p, i).first == DepositKind::native) ++native_deposits;
    }
    for (std::size_t i = 0; i < p.n_withdrawals; ++i) {
        if (withdrawal_kind(p, i).first == WithdrawalKind::target_native) ++target_native;
    }
    const auto extra = plan.extra_releases();

    ExpectedCounts e;
    e.rules[RuleId::ScValidNativeTokenDeposit] = native_deposits;
    e.rules[RuleId::ScValidErc20TokenDeposit] = p.n_deposits - native_deposits;
    e.rules[RuleId::TcValidErc20TokenDeposit] = p.n_deposits;
    e.rules[RuleId::CctxValidDeposit] = p.n_deposits - plan.finality_break_deposits;
    e.rules[RuleId::TcValidNativeTokenWithdrawal] = target_native;
    e.rules[RuleId::TcValidErc20TokenWithdrawal] = p.n_withdrawals - target_native;
    e.rules[RuleId::ScValidErc20TokenWithdrawal] = p.n_withdrawals + extra + a.forged_release;
    e.rules[RuleId::CctxValidWithdrawal] = p.n_withdrawals - plan.finality_break_withdrawals + extra;

    for (auto k : kAllAnomalyKinds) e.anomalies[k] = 0;
    e.anomalies[AnomalyKind::SingleTokenEvent] = a.direct_transfer;
    e.anomalies[AnomalyKind::SingleBridgeEvent] = a.orphan_bridge_event;
    e.anomalies[AnomalyKind::UnmatchedLocalDeposit] = 2 * plan.finality_break_deposits;
    e.anomalies[AnomalyKind::UnmatchedLocalWithdrawal] = 2 * plan.finality_break_withdrawals + a.forged_release;
    e.anomalies[AnomalyKind::FinalityViolation] = a.finality_break;
    e.anomalies[AnomalyKind::DuplicateId] = a.replayed_id;
    e.anomalies[AnomalyKind::AmbiguousMatch] = a.replayed_id;
    return e;
}

// Synthetic transactions --------------------------------------------------------

struct SynthEvent {
    enum class Kind { Transfer, TokenDeposited, TokenDepositFinalized, TokenWithdrew, TokenWithdrawalFinalized, NativeReleased };

    Kind kind{};
    std::uint64_t log_index = 0;
    Address emitter;  // token contract for Transfer, bridge otherwise
    Address from;     // Transfer only
    Address to;       // Transfer only
    std::string id;
    Bytes32 beneficiary;  // ABI bytes32; a real address is left-padded
    Address token_a;      // dstToken (finalized events), origToken (TokenDeposited/TokenWithdrew)
    Address token_b;      // dstToken for TokenDeposited/TokenWithdrew
    ChainId dst_chain;
    std::string standard;
    Amount amount;
};

struct SynthTx {
    ChainId chain;
    TxHash hash;
    Timestamp timestamp;
    std::uint64_t block_number = 0;
    Address from;
    Address to;
    Amount value;
    std::uint64_t gas_used = 0;
    std::vector<SynthEvent> events;
};

struct InjectedAnomaly {
    std::string kind;  // one of kInjectionKinds
    std::vector<TxHash> tx_hashes;
    std::vector<AnomalyKind> expected;  // detector kinds this injection must raise
};

struct GroundTruth {
    std::vector<InjectedAnomaly> labels;

    ordered_json to_json() const
    {
        auto arr = ordered_json::array();
        for (const auto& l : labels) {
            ordered_json j;
            j["kind"] = l.kind;
            auto txs = ordered_json::array();
            for (const auto& t : l.tx_hashes) txs.push_back(t.to_hex());
            j["tx_hashes"] = std::move(txs);
            auto exp = ordered_json::array();
            for (auto k : l.expected) exp.push_back(anomaly_kind_name(k));
            j["expected"] = std::move(exp);
            arr.push_back(std::move(j));
        }
        return ordered_json{{"labels", std::move(arr)}};
    }
};

inline Address label_address(std::string_view label)
{
    auto digest = keccak256(label);
    return Address::from_span(std::span<const std::uint8_t, 20>(digest.data() + 12, 20));
}

/// Fixed infrastructure of the synthetic bridge for a pair of chains.
struct BridgeLayout {
    ChainSpec source, target;
    Address source_bridge, target_bridge;
    Address weth_source, weth_target;  // source native, wrapped on S and represented on T
    Address wnat_source, wnat_target;  // target native, represented on S and wrapped on T
    std::vector<std::pair<Address, Address>> erc20;  // (on S, on T)

    explicit BridgeLayout(const ScenarioParams& p) : source(p.source), target(p.target)
    {
        auto s = std::to_string(p.source.id.value);
        auto t = std::to_string(p.target.id.value);
        auto name = [&](std::string_view what, const std::string& chain) {
            return label_address("bridgewatch/synthetic/" + std::string(what) + "/" + s + "-" + t + "/" + chain);
        };
        source_bridge = name("bridge", s);
        target_bridge = name("bridge", t);
        weth_source = name("wrapped-source-native", s);
        weth_target = name("wrapped-source-native", t);
        wnat_source = name("wrapped-target-native", s);
        wnat_target = name("wrapped-target-native", t);
        for (std::size_t k = 0; k < p.n_erc20_tokens; ++k) {
            erc20.emplace_back(name("erc20-" + std::to_string(k), s), name("erc20-" + std::to_string(k), t));
        }
    }

    BridgeDecoderConfig decoder_config() const
    {
        BridgeDecoderConfig cfg;
        cfg.chains.push_back({source.id, ChainRole::source, source.finality_seconds, {source_bridge}, weth_source});
        cfg.chains.push_back({target.id, ChainRole::target, target.finality_seconds, {target_bridge}, wnat_target});
        cfg.token_mappings.push_back({source.id, target.id, weth_source, weth_target, "NATIVE"});
        for (const auto& [s, t] : erc20) cfg.token_mappings.push_back({source.id, target.id, s, t, "ERC20"});
        cfg.token_mappings.push_back({source.id, target.id, wnat_source, wnat_target, "NATIVE"});

        using K = FieldSource::Kind;
        using T = FieldSource::Type;
        auto topic = [](std::size_t i, T t) { return FieldSource{K::topic, i, t, {}}; };
        auto data = [](std::size_t i, T t) { return FieldSource{K::data, i, t, {}}; };
        auto event = [&](std::string sig, std::string relation, ChainId chain,
                         std::vector<std::pair<std::string, FieldSource>> fields) {
            EventSpec ev;
            ev.topic0 = event_topic(sig);
            ev.signature = std::move(sig);
            ev.relation = std::move(relation);
            ev.chains = {chain};
            ev.fields = std::move(fields);
            cfg.events.push_back(std::move(ev));
        };
        event("TokenDeposited(uint256,bytes32,address,address,uint256,string,uint256)", "sc_token_deposited",
              source.id,
              {{"deposit_id", topic(1, T::uint)},
               {"beneficiary", topic(2, T::address)},
               {"dst_token", data(0, T::address)},
               {"orig_token", data(1, T::address)},
               {"dst_chain_id", data(2, T::uint)},
               {"standard", data(3, T::string)},
               {"amount", data(4, T::uint)}});
        event("TokenDepositFinalized(uint256,bytes32,address,uint256)", "tc_token_deposited", target.id,
              {{"deposit_id", topic(1, T::uint)},
               {"beneficiary", topic(2, T::address)},
               {"dst_token", data(0, T::address)},
               {"amount", data(1, T::uint)}});
        event("TokenWithdrew(uint256,bytes32,address,address,uint256,string,uint256)", "tc_token_withdrew",
              target.id,
              {{"withdrawal_id", topic(1, T::uint)},
               {"beneficiary", topic(2, T::address)},
               {"orig_token", data(0, T::address)},
               {"dst_token", data(1, T::address)},
               {"dst_chain_id", data(2, T::uint)},
               {"standard", data(3, T::string)},
               {"amount", data(4, T::uint)}});
        event("TokenWithdrawalFinalized(uint256,bytes32,address,uint256)", "sc_token_withdrew", source.id,
              {{"withdrawal_id", topic(1, T::uint)},
               {"beneficiary", topic(2, T::address)},
               {"dst_token", data(0, T::address)},
               {"amount", data(1, T::uint)}});
        event("NativeReleased(bytes32,uint256)", "sc_withdrawal", source.id,
              {{"bridge_addr", FieldSource{K::log_address, 0, T::address, {}}},
               {"beneficiary", topic(1, T::address)},
               {"amount", data(0, T::uint)}});
        return cfg;
    }
};

// Rendering ---------------------------------------------------------------------

namespace detail {

inline std::optional<Address> bytes32_address(const Bytes32& b) { return word_address(b.bytes); }

inline void append_word(std::vector<std::uint8_t>& data, const std::array<std::uint8_t, 32>& w)
{
    data.insert(data.end(), w.begin(), w.end());
}
inline void append_word(std::vector<std::uint8_t>& data, const Address& a) { append_word(data, address_word(a).bytes); }
inline void append_word(std::vector<std::uint8_t>& data, const Amount& v) { append_word(data, v.to_word()); }
inline Bytes32 uint_word(const std::string& decimal)
{
    auto w = Amount::from_decimal(decimal).to_word();
    return Bytes32::from_span(std::span<const std::uint8_t, 32>(w));
}

/// Head words, then the one dynamic string at head slot `string_slot`.
inline std::vector<std::uint8_t> abi_with_string(std::vector<std::array<std::uint8_t, 32>> head,
                                                 std::size_t string_slot, const std::string& s)
{
    head.insert(head.begin() + static_cast<std::ptrdiff_t>(string_slot),
                Amount(static_cast<std::uint64_t>(32 * (head.size() + 1))).to_word());
    std::vector<std::uint8_t> data;
    for (const auto& w : head) append_word(data, w);
    append_word(data, Amount(static_cast<std::uint64_t>(s.size())).to_word());
    std::vector<std::uint8_t> padded(s.begin(), s.end());
    padded.resize((s.size() + 31) / 32 * 32, 0);
    data.insert(data.end(), padded.begin(), padded.end());
    return data;
}

}  // namespace detail

/// Facts a SynthTx stands for, rendered without going through receipts.
/// `source_role` says which native-escrow relation a value transfer into
/// the bridge becomes.
inline void render_facts(const SynthTx& tx, bool source_role, const Address& bridge, FactStore& store)
{
    store.insert(TransactionFact{tx.timestamp, tx.chain, tx.hash, tx.block_number, tx.from, tx.to, tx.value, 1,
                                 tx.gas_used});
    if (!tx.value.is_zero() && tx.to == bridge) {
        if (source_role) store.insert(ScDepositFact{tx.hash, 0, tx.from, tx.to, tx.value});
        else store.insert(TcWithdrawalFact{tx.hash, 0, tx.from, tx.to, tx.value});
    }
    for (const auto& e : tx.events) {
        using K = SynthEvent::Kind;
        auto benef = detail::bytes32_address(e.beneficiary);
        if (e.kind == K::Transfer) {
            store.insert(Erc20TransferFact{tx.hash, tx.chain, e.log_index, e.emitter, e.from, e.to, e.amount});
            continue;
        }
        if (!benef) continue;  // the decoder rejects such events as well
        switch (e.kind) {
        case K::TokenDeposited:
            store.insert(ScTokenDepositedFact{tx.hash, e.log_index, e.id, *benef, e.token_b, e.token_a, e.dst_chain,
                                              e.standard, e.amount});
            break;
        case K::TokenDepositFinalized:
            store.insert(TcTokenDepositedFact{tx.hash, e.log_index, e.id, *benef, e.token_a, e.amount});
            break;
        case K::TokenWithdrew:
            store.insert(TcTokenWithdrewFact{tx.hash, e.log_index, e.id, *benef, e.token_a, e.token_b, e.dst_chain,
                                             e.standard, e.amount});
            break;
        case K::TokenWithdrawalFinalized:
            store.insert(ScTokenWithdrewFact{tx.hash, e.log_index, e.id, *benef, e.token_a, e.amount});
            break;
        case K::NativeReleased:
            store.insert(ScWithdrawalFact{tx.hash, e.log_index, e.emitter, *benef, e.amount});
            break;
        case K::Transfer: break;
        }
    }
}

inline TransactionReceipt render_receipt(const SynthTx& tx)
{
    TransactionReceipt r;
    r.chain_id = tx.chain;
    r.tx_hash = tx.hash;
    r.block_number = tx.block_number;
    r.block_timestamp = tx.timestamp;
    r.from = tx.from;
    r.to = tx.to;
    r.value = tx.value;
    r.status = 1;
    r.gas_used = tx.gas_used;
    using K = SynthEvent::Kind;
    static const Bytes32 t_deposited = event_topic("TokenDeposited(uint256,bytes32,address,address,uint256,string,uint256)");
    static const Bytes32 t_dep_final = event_topic("TokenDepositFinalized(uint256,bytes32,address,uint256)");
    static const Bytes32 t_withdrew = event_topic("TokenWithdrew(uint256,bytes32,address,address,uint256,string,uint256)");
    static const Bytes32 t_wd_final = event_topic("TokenWithdrawalFinalized(uint256,bytes32,address,uint256)");
    static const Bytes32 t_native = event_topic("NativeReleased(bytes32,uint256)");
    for (const auto& e : tx.events) {
        LogEntry log;
        log.address = e.emitter;
        log.log_index = e.log_index;
        auto w = [](const Address& a) { return address_word(a).bytes; };
        switch (e.kind) {
        case K::Transfer:
            log.topics = {erc20_transfer_topic(), address_word(e.from), address_word(e.to)};
            detail::append_word(log.data, e.amount);
            break;
        case K::TokenDeposited:
            log.topics = {t_deposited, detail::uint_word(e.id), e.beneficiary};
            log.data = detail::abi_with_string({w(e.token_b), w(e.token_a), Amount(e.dst_chain.value).to_word(),
                                                e.amount.to_word()},
                                               3, e.standard);
            break;
        case K::TokenDepositFinalized:
            log.topics = {t_dep_final, detail::uint_word(e.id), e.beneficiary};
            detail::append_word(log.data, e.token_a);
            detail::append_word(log.data, e.amount);
            break;
        case K::TokenWithdrew:
            log.topics = {t_withdrew, detail::uint_word(e.id), e.beneficiary};
            log.data = detail::abi_with_string({w(e.token_a), w(e.token_b), Amount(e.dst_chain.value).to_word(),
                                                e.amount.to_word()},
                                               3, e.standard);
            break;
        case K::TokenWithdrawalFinalized:
            log.topics = {t_wd_final, detail::uint_word(e.id), e.beneficiary};
            detail::append_word(log.data, e.token_a);
            detail::append_word(log.data, e.amount);
            break;
        case K::NativeReleased:
            log.topics = {t_native, e.beneficiary};
            detail::append_word(log.data, e.amount);
            break;
        }
        r.logs.push_back(std::move(log));
    }
    return r;
}

// Generation --------------------------------------------------------------------

struct Scenario {
    ScenarioParams params;
    BridgeLayout layout;
    std::vector<SynthTx> txs;  // sorted by (chain, timestamp, hash)
    GroundTruth truth;

    BridgeDecoderConfig decoder_config() const { return layout.decoder_config(); }

    /// Unsealed store holding every fact of the scenario.
    FactStore facts() const
    {
        FactStore store;
        decoder_config().insert_static_facts(store);
        for (const auto& tx : txs) {
            bool src = tx.chain == layout.source.id;
            render_facts(tx, src, src ? layout.source_bridge : layout.target_bridge, store);
        }
        return store;
    }

    std::vector<TransactionReceipt> receipts() const
    {
        std::vector<TransactionReceipt> out;
        out.reserve(txs.size());
        for (const auto& tx : txs) out.push_back(render_receipt(tx));
        return out;
    }
};

namespace detail {

class ScenarioBuilder {
public:
    explicit ScenarioBuilder(const ScenarioParams& p)
        : p_(p), rng_(p.seed), layout_(p), s_clock_(p.source.genesis_timestamp), t_clock_(p.target.genesis_timestamp)
    {
    }

    Scenario build()
    {
        auto plan = plan_anomalies(p_);
        const auto& a = p_.anomalies;
        std::vector<InjectedAnomaly> labels;

        for (std::size_t i = 0; i < p_.n_deposits; ++i) {
            bool broken = i >= p_.n_deposits - plan.finality_break_deposits;
            auto [kind, token] = deposit_kind(p_, i);
            auto [escrow, release] = deposit_flow(kind, token, broken);
            if (broken) {
                labels.push_back({"finality_break",
                                  {escrow, release},
                                  {AnomalyKind::FinalityViolation, AnomalyKind::UnmatchedLocalDeposit}});
            }
        }
        for (std::size_t i = 0; i < p_.n_withdrawals; ++i) {
            bool broken = i >= p_.n_withdrawals - plan.finality_break_withdrawals;
            std::size_t copies = i < plan.replay_copies.size() ? plan.replay_copies[i] : 1;
            auto [kind, token] = withdrawal_kind(p_, i);
            auto txs = withdrawal_flow(kind, token, broken, copies);
            if (broken) {
                labels.push_back({"finality_break",
                                  txs,
                                  {AnomalyKind::FinalityViolation, AnomalyKind::UnmatchedLocalWithdrawal}});
            } else if (copies > 1) {
                labels.push_back({"replayed_id",
                                  std::vector<TxHash>(txs.begin() + 1, txs.end()),
                                  {AnomalyKind::DuplicateId, AnomalyKind::AmbiguousMatch}});
            }
        }
        for (std::size_t i = 0; i < a.forged_release; ++i) {
            labels.push_back({"forged_release", {forged_release(i)}, {AnomalyKind::UnmatchedLocalWithdrawal}});
        }
        for (std::size_t i = 0; i < a.direct_transfer; ++i) {
            labels.push_back({"direct_transfer", {direct_transfer(i)}, {AnomalyKind::SingleTokenEvent}});
        }
        for (std::size_t i = 0; i < a.orphan_bridge_event; ++i) {
            labels.push_back({"orphan_bridge_event", {orphan_event(i)}, {AnomalyKind::SingleBridgeEvent}});
        }

        Scenario sc{p_, layout_, std::move(txs_), GroundTruth{std::move(labels)}};
        std::sort(sc.txs.begin(), sc.txs.end(), [](const SynthTx& x, const SynthTx& y) {
            return std::tie(x.chain, x.timestamp, x.hash) < std::tie(y.chain, y.timestamp, y.hash);
        });
        return sc;
    }

private:
    using K = SynthEvent::Kind;

    Address random_address() { return Address::from_span(std::span<const std::uint8_t, 20>(rng_.bytes<20>())); }
    TxHash random_hash() { return TxHash::from_span(std::span<const std::uint8_t, 32>(rng_.bytes<32>())); }

    /// Log-uniform-ish amount: mantissa in [1, 99999] times 10^e, e in [12, 18].
    Amount random_amount()
    {
        Amount::value_type v = rng_.uniform(1, 99'999);
        auto e = rng_.uniform(12, 18);
        for (std::uint64_t i = 0; i < e; ++i) v *= 10;
        return Amount(v);
    }

    const ChainSpec& spec(ChainId c) const { return c == p_.source.id ? p_.source : p_.target; }
    std::uint64_t& clock(ChainId c) { return c == p_.source.id ? s_clock_ : t_clock_; }

    /// Next escrow-side timestamp on a chain.
    Timestamp tick(ChainId c) { return Timestamp{clock(c) += rng_.uniform(1, 60)}; }

    SynthTx& new_tx(ChainId chain, Timestamp ts, Address from, Address to, Amount value = Amount{})
    {
        SynthTx tx;
        tx.chain = chain;
        tx.hash = random_hash();
        tx.timestamp = ts;
        const auto& cs = spec(chain);
        auto since = ts.seconds > cs.genesis_timestamp ? ts.seconds - cs.genesis_timestamp : 0;
        tx.block_number = cs.genesis_block + since / cs.block_cadence;
        tx.from = from;
        tx.to = to;
        tx.value = std::move(value);
        tx.gas_used = rng_.uniform(21'000, 250'000);
        txs_.push_back(std::move(tx));
        return txs_.back();
    }

    Timestamp release_time(Timestamp escrow, std::uint64_t window, bool broken)
    {
        auto gap = broken ? rng_.uniform(1, window - 1) : rng_.uniform(window + 1, window + 3600);
        return Timestamp{escrow.seconds + gap};
    }

    static SynthEvent transfer(std::uint64_t idx, const Address& token, const Address& from, const Address& to,
                               const Amount& amount)
    {
        SynthEvent e;
        e.kind = K::Transfer;
        e.log_index = idx;
        e.emitter = token;
        e.from = from;
        e.to = to;
        e.amount = amount;
        return e;
    }

    static SynthEvent bridge_event(K kind, std::uint64_t idx, const Address& bridge, std::string id,
                                   const Address& benef, const Amount& amount)
    {
        SynthEvent e;
        e.kind = kind;
        e.log_index = idx;
        e.emitter = bridge;
        e.id = std::move(id);
        e.beneficiary = address_word(benef);
        e.amount = amount;
        return e;
    }

    std::pair<TxHash, TxHash> deposit_flow(DepositKind kind, std::size_t token, bool broken)
    {
        const auto S = p_.source.id, T = p_.target.id;
        auto user = random_address();
        auto benef = random_address();
        auto relayer = random_address();
        auto amount = random_amount();
        auto id = std::to_string(next_deposit_id_++);
        auto t0 = tick(S);
        auto t1 = release_time(t0, p_.source.finality_seconds, broken);

        Address orig_token = kind == DepositKind::native ? layout_.weth_source : layout_.erc20[token].first;
        Address dst_token = kind == DepositKind::native ? layout_.weth_target : layout_.erc20[token].second;
        std::string standard = kind == DepositKind::native ? "NATIVE" : "ERC20";

        auto& escrow = new_tx(S, t0, user, layout_.source_bridge,
                              kind == DepositKind::native ? amount : Amount{});
        if (kind == DepositKind::erc20) escrow.events.push_back(transfer(0, orig_token, user, layout_.source_bridge, amount));
        auto dep = bridge_event(K::TokenDeposited, 1, layout_.source_bridge, id, benef, amount);
        dep.token_a = orig_token;
        dep.token_b = dst_token;
        dep.dst_chain = T;
        dep.standard = standard;
        escrow.events.push_back(std::move(dep));
        auto escrow_hash = escrow.hash;

        auto& release = new_tx(T, t1, relayer, layout_.target_bridge);
        release.events.push_back(transfer(0, dst_token, layout_.target_bridge, benef, amount));
        auto fin = bridge_event(K::TokenDepositFinalized, 1, layout_.target_bridge, id, benef, amount);
        fin.token_a = dst_token;
        release.events.push_back(std::move(fin));
        return {escrow_hash, release.hash};
    }

    /// Returns the escrow hash followed by every release hash.
    std::vector<TxHash> withdrawal_flow(WithdrawalKind kind, std::size_t token, bool broken, std::size_t copies)
    {
        const auto S = p_.source.id, T = p_.target.id;
        auto user = random_address();
        auto benef = random_address();
        auto relayer = random_address();
        auto amount = random_amount();
        auto id = std::to_string(next_withdrawal_id_++);
        auto t0 = tick(T);
        auto t1 = release_time(t0, p_.target.finality_seconds, broken);

        Address orig_token, dst_token;
        std::string standard = "NATIVE";
        switch (kind) {
        case WithdrawalKind::target_native:
            orig_token = layout_.wnat_target;
            dst_token = layout_.wnat_source;
            break;
        case WithdrawalKind::wrapped_to_native:
            orig_token = layout_.weth_target;
            dst_token = layout_.weth_source;
            break;
        case WithdrawalKind::erc20:
            orig_token = layout_.erc20[token].second;
            dst_token = layout_.erc20[token].first;
            standard = "ERC20";
            break;
        }

        std::vector<TxHash> hashes;
        auto& escrow = new_tx(T, t0, user, layout_.target_bridge,
                              kind == WithdrawalKind::target_native ? amount : Amount{});
        if (kind != WithdrawalKind::target_native) {
            escrow.events.push_back(transfer(0, orig_token, user, layout_.target_bridge, amount));
        }
        auto wd = bridge_event(K::TokenWithdrew, 1, layout_.target_bridge, id, benef, amount);
        wd.token_a = orig_token;
        wd.token_b = dst_token;
        wd.dst_chain = S;
        wd.standard = standard;
        escrow.events.push_back(std::move(wd));
        hashes.push_back(escrow.hash);

        for (std::size_t c = 0; c < copies; ++c) {
            if (c > 0) t1.seconds += rng_.uniform(1, 600);
            auto& release = new_tx(S, t1, relayer, layout_.source_bridge);
            if (kind == WithdrawalKind::wrapped_to_native) {
                release.events.push_back(
                    bridge_event(K::NativeReleased, 0, layout_.source_bridge, {}, benef, amount));
            } else {
                release.events.push_back(transfer(0, dst_token, layout_.source_bridge, benef, amount));
            }
            auto fin = bridge_event(K::TokenWithdrawalFinalized, 1, layout_.source_bridge, id, benef, amount);
            fin.token_a = dst_token;
            release.events.push_back(std::move(fin));
            hashes.push_back(release.hash);
        }
        return hashes;
    }

    Address some_source_token(std::size_t i) const
    {
        return layout_.erc20.empty() ? layout_.wnat_source : layout_.erc20[i % layout_.erc20.size()].first;
    }
    Address some_target_token(std::size_t i) const
    {
        return layout_.erc20.empty() ? layout_.weth_target : layout_.erc20[i % layout_.erc20.size()].second;
    }

    /// Release on S for a withdrawal id that was never escrowed on T.
    TxHash forged_release(std::size_t i)
    {
        const auto S = p_.source.id;
        auto attacker = random_address();
        auto amount = random_amount();
        auto token = some_source_token(i);
        auto& tx = new_tx(S, tick(S), attacker, layout_.source_bridge);
        tx.events.push_back(transfer(0, token, layout_.source_bridge, attacker, amount));
        auto fin = bridge_event(K::TokenWithdrawalFinalized, 1, layout_.source_bridge,
                                std::to_string(next_withdrawal_id_++), attacker, amount);
        fin.token_a = token;
        tx.events.push_back(std::move(fin));
        return tx.hash;
    }

    /// Token transfer into a bridge with no bridge event; alternates S, T.
    TxHash direct_transfer(std::size_t i)
    {
        bool on_source = i % 2 == 0;
        auto chain = on_source ? p_.source.id : p_.target.id;
        auto bridge = on_source ? layout_.source_bridge : layout_.target_bridge;
        auto token = on_source ? some_source_token(i / 2) : some_target_token(i / 2);
        auto user = random_address();
        auto amount = random_amount();
        auto& tx = new_tx(chain, tick(chain), user, token);
        tx.events.push_back(transfer(0, token, user, bridge, amount));
        return tx.hash;
    }

    /// Escrow-side bridge event with nothing escrowed; alternates S, T.
    TxHash orphan_event(std::size_t i)
    {
        bool on_source = i % 2 == 0;
        auto user = random_address();
        auto benef = random_address();
        auto amount = random_amount();
        if (on_source) {
            const auto S = p_.source.id;
            auto& tx = new_tx(S, tick(S), user, layout_.source_bridge);
            auto ev = bridge_event(K::TokenDeposited, 0, layout_.source_bridge, std::to_string(next_deposit_id_++),
                                   benef, amount);
            ev.token_a = some_source_token(i / 2);
            ev.token_b = some_target_token(i / 2);
            ev.dst_chain = p_.target.id;
            ev.standard = layout_.erc20.empty() ? "NATIVE" : "ERC20";
            tx.events.push_back(std::move(ev));
            return tx.hash;
        }
        const auto T = p_.target.id;
        auto& tx = new_tx(T, tick(T), user, layout_.target_bridge);
        auto ev = bridge_event(K::TokenWithdrew, 0, layout_.target_bridge, std::to_string(next_withdrawal_id_++),
                               benef, amount);
        ev.token_a = some_target_token(i / 2);
        ev.token_b = some_source_token(i / 2);
        ev.dst_chain = p_.source.id;
        ev.standard = layout_.erc20.empty() ? "NATIVE" : "ERC20";
        tx.events.push_back(std::move(ev));
        return tx.hash;
    }

    const ScenarioParams& p_;
    Xoshiro256 rng_;
    BridgeLayout layout_;
    std::vector<SynthTx> txs_;
    std::uint64_t s_clock_;
    std::uint64_t t_clock_;
    std::uint64_t next_deposit_id_ = 1;
    std::uint64_t next_withdrawal_id_ = 1;
};

}  // namespace detail

inline Scenario generate(const ScenarioParams& params)
{
    return detail::ScenarioBuilder(params).build();
}

inline void write_receipts_jsonl(const Scenario& sc, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    for (const auto& tx : sc.txs) out << receipt_to_json(render_receipt(tx)).dump() << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

inline void write_json_file(const ordered_json& j, const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace bridgewatch
