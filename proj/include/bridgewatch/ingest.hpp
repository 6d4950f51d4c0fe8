#pragma once

// Receipt -> fact decoding. The bridge-specific part lives entirely in a
// BridgeDecoderConfig (JSON): which chains exist, which addresses the bridge
// controls, and for each bridge event signature, which relation it feeds and
// where every column comes from (topic, data word, log/tx field, constant).

#include <bridgewatch/fact_store.hpp>
#include <bridgewatch/keccak.hpp>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace bridgewatch {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct LogEntry {
    Address address;
    std::vector<Bytes32> topics;
    std::vector<std::uint8_t> data;
    std::uint64_t log_index = 0;

    friend bool operator==(const LogEntry&, const LogEntry&) = default;
};

struct TransactionReceipt {
    ChainId chain_id;
    TxHash tx_hash;
    std::uint64_t block_number = 0;
    Timestamp block_timestamp;
    Address from;
    Address to;
    Amount value;
    std::uint32_t status = 1;
    std::uint64_t gas_used = 0;
    std::vector<LogEntry> logs;

    friend bool operator==(const TransactionReceipt&, const TransactionReceipt&) = default;
};

inline Bytes32 event_topic(std::string_view signature)
{
    auto digest = keccak256(signature);
    return Bytes32::from_span(std::span<const std::uint8_t, 32>(digest));
}

inline const Bytes32& erc20_transfer_topic()
{
    static const Bytes32 topic = event_topic("Transfer(address,address,uint256)");
    return topic;
}

/// Left-pads a 20-byte address into a 32-byte ABI word.
inline Bytes32 address_word(const Address& a)
{
    Bytes32 w;
    std::copy(a.bytes.begin(), a.bytes.end(), w.bytes.begin() + 12);
    return w;
}

/// The address in the low 20 bytes of a word, or nullopt if the high 12
/// bytes are not zero.
inline std::optional<Address> word_address(std::span<const std::uint8_t, 32> word)
{
    for (std::size_t i = 0; i < 12; ++i) {
        if (word[i] != 0) return std::nullopt;
    }
    return Address::from_span(word.subspan<12, 20>());
}

// ---------------------------------------------------------------------------
// Receipt JSON

namespace detail {

inline std::uint64_t json_u64(const json& j, const char* field)
{
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    if (j.is_number_integer() && j.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(j.get<std::int64_t>());
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
            auto v = Amount::from_hex(s, field).value();
            if (v > std::numeric_limits<std::uint64_t>::max()) throw EncodingError(field, "exceeds 64 bits");
            return v.convert_to<std::uint64_t>();
        }
        return codec::parse_unsigned<std::uint64_t>(s, field);
    }
    throw EncodingError(field, "expected unsigned integer");
}

inline Amount json_amount(const json& j, const char* field)
{
    if (j.is_number_unsigned()) return Amount(j.get<std::uint64_t>());
    if (j.is_string()) {
        auto s = j.get<std::string>();
        if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) return Amount::from_hex(s, field);
        return Amount::from_decimal(s, field);
    }
    throw EncodingError(field, "expected quantity");
}

inline const json& require(const json& j, const char* field)
{
    auto it = j.find(field);
    if (it == j.end()) throw EncodingError(field, "missing");
    return *it;
}

}  // namespace detail

inline TransactionReceipt receipt_from_json(const json& j)
{
    if (!j.is_object()) throw EncodingError("receipt", "expected JSON object");
    TransactionReceipt r;
    r.chain_id.value = detail::json_u64(detail::require(j, "chainId"), "chainId");
    if (r.chain_id.value == 0) throw EncodingError("chainId", "must be nonzero");
    r.tx_hash = TxHash::from_hex(detail::require(j, "txHash").get<std::string>(), "txHash");
    r.block_number = detail::json_u64(detail::require(j, "blockNumber"), "blockNumber");
    r.block_timestamp.seconds = detail::json_u64(detail::require(j, "blockTimestamp"), "blockTimestamp");
    r.from = Address::from_hex(detail::require(j, "from").get<std::string>(), "from");
    const auto& to = detail::require(j, "to");
    if (!to.is_null()) r.to = Address::from_hex(to.get<std::string>(), "to");
    r.value = detail::json_amount(detail::require(j, "value"), "value");
    auto status = detail::json_u64(detail::require(j, "status"), "status");
    if (status > 1) throw EncodingError("status", "must be 0 or 1");
    r.status = static_cast<std::uint32_t>(status);
    r.gas_used = detail::json_u64(detail::require(j, "gasUsed"), "gasUsed");
    for (const auto& lj : detail::require(j, "logs")) {
        LogEntry log;
        log.address = Address::from_hex(detail::require(lj, "address").get<std::string>(), "logs.address");
        for (const auto& t : detail::require(lj, "topics")) {
            log.topics.push_back(Bytes32::from_hex(t.get<std::string>(), "logs.topics"));
        }
        auto data = hex::decode(detail::require(lj, "data").get<std::string>());
        if (!data) throw EncodingError("logs.data", "malformed hex");
        log.data = std::move(*data);
        log.log_index = detail::json_u64(detail::require(lj, "logIndex"), "logIndex");
        r.logs.push_back(std::move(log));
    }
    for (std::size_t i = 1; i < r.logs.size(); ++i) {
        if (r.logs[i].log_index <= r.logs[i - 1].log_index) {
            throw EncodingError("logIndex", "must be strictly increasing within a receipt");
        }
    }
    return r;
}

inline ordered_json receipt_to_json(const TransactionReceipt& r)
{
    ordered_json j;
    j["chainId"] = r.chain_id.value;
    j["txHash"] = r.tx_hash.to_hex();
    j["blockNumber"] = r.block_number;
    j["blockTimestamp"] = r.block_timestamp.seconds;
    j["from"] = r.from.to_hex();
    j["to"] = r.to.to_hex();
    j["value"] = r.value.to_hex();
    j["status"] = r.status;
    j["gasUsed"] = r.gas_used;
    auto logs = ordered_json::array();
    for (const auto& log : r.logs) {
        ordered_json lj;
        lj["address"] = log.address.to_hex();
        auto topics = ordered_json::array();
        for (const auto& t : log.topics) topics.push_back(t.to_hex());
        lj["topics"] = std::move(topics);
        lj["data"] = hex::encode(log.data);
        lj["logIndex"] = log.log_index;
        logs.push_back(std::move(lj));
    }
    j["logs"] = std::move(logs);
    return j;
}

// ---------------------------------------------------------------------------
// Decoder configuration

enum class ChainRole { source, target };

struct ChainConfig {
    ChainId chain_id;
    ChainRole role = ChainRole::source;
    std::uint64_t finality_seconds = 0;
    std::vector<Address> bridge_addresses;
    std::optional<Address> wrapped_native_token;
};

struct FieldSource {
    enum class Kind { topic, data, log_address, tx_from, tx_to, tx_value, constant };
    enum class Type { address, uint, string };

    Kind kind = Kind::topic;
    std::size_t index = 0;
    Type type = Type::uint;
    std::string constant;
};

struct EventSpec {
    std::string signature;
    Bytes32 topic0;
    std::string relation;
    bool bridge_only = true;
    std::vector<ChainId> chains;  // empty: any configured chain
    std::vector<std::pair<std::string, FieldSource>> fields;
};

struct BridgeDecoderConfig {
    std::vector<ChainConfig> chains;
    std::vector<TokenMappingFact> token_mappings;
    std::vector<EventSpec> events;

    const ChainConfig* chain(ChainId id) const
    {
        auto it = std::find_if(chains.begin(), chains.end(), [&](const ChainConfig& c) { return c.chain_id == id; });
        return it == chains.end() ? nullptr : &*it;
    }

    bool is_bridge(ChainId id, const Address& addr) const
    {
        const auto* c = chain(id);
        return c && std::find(c->bridge_addresses.begin(), c->bridge_addresses.end(), addr) !=
                        c->bridge_addresses.end();
    }

    /// bridge_controlled_address, token_mapping, wrapped_native_token and
    /// cctx_finality facts declared by the configuration.
    void insert_static_facts(FactStore& store) const
    {
        for (const auto& c : chains) {
            store.insert(CctxFinalityFact{c.chain_id, c.finality_seconds});
            for (const auto& a : c.bridge_addresses) store.insert(BridgeControlledAddressFact{c.chain_id, a});
            if (c.wrapped_native_token) store.insert(WrappedNativeTokenFact{c.chain_id, *c.wrapped_native_token});
        }
        for (const auto& m : token_mappings) store.insert(m);
    }
};

namespace detail {

template <typename F>
bool relation_has_column(std::string_view column)
{
    return std::find(F::columns.begin(), F::columns.end(), column) != F::columns.end();
}

/// Calls fn.template operator()<F>() for the event-bearing relation named `name`.
template <typename Fn>
bool with_event_relation(std::string_view name, Fn&& fn)
{
    bool found = false;
    auto try_one = [&]<typename F>() {
        if (!found && F::relation == name) {
            found = true;
            fn.template operator()<F>();
        }
    };
    try_one.template operator()<Erc20TransferFact>();
    try_one.template operator()<ScDepositFact>();
    try_one.template operator()<ScTokenDepositedFact>();
    try_one.template operator()<TcTokenDepositedFact>();
    try_one.template operator()<TcWithdrawalFact>();
    try_one.template operator()<TcTokenWithdrewFact>();
    try_one.template operator()<ScWithdrawalFact>();
    try_one.template operator()<ScTokenWithdrewFact>();
    return found;
}

inline FieldSource field_source_from_json(const json& j, const std::string& where)
{
    FieldSource fs;
    auto source = j.value("source", std::string{});
    static const std::map<std::string, FieldSource::Kind> kinds = {
        {"topic", FieldSource::Kind::topic},         {"data", FieldSource::Kind::data},
        {"log_address", FieldSource::Kind::log_address}, {"tx_from", FieldSource::Kind::tx_from},
        {"tx_to", FieldSource::Kind::tx_to},         {"tx_value", FieldSource::Kind::tx_value},
        {"const", FieldSource::Kind::constant}};
    auto kind = kinds.find(source);
    if (kind == kinds.end()) throw ConfigError(where + ": unknown source '" + source + "'");
    fs.kind = kind->second;
    if (fs.kind == FieldSource::Kind::topic || fs.kind == FieldSource::Kind::data) {
        if (!j.contains("index")) throw ConfigError(where + ": 'index' required");
        fs.index = j.at("index").get<std::size_t>();
        auto type = j.value("type", std::string{});
        if (type == "address") fs.type = FieldSource::Type::address;
        else if (type == "uint") fs.type = FieldSource::Type::uint;
        else if (type == "string") fs.type = FieldSource::Type::string;
        else throw ConfigError(where + ": unknown type '" + type + "'");
        if (fs.kind == FieldSource::Kind::topic && fs.index == 0) throw ConfigError(where + ": topic 0 is the signature");
        if (fs.kind == FieldSource::Kind::topic && fs.type == FieldSource::Type::string) {
            throw ConfigError(where + ": indexed strings are hashed and cannot be decoded");
        }
    } else if (fs.kind == FieldSource::Kind::constant) {
        fs.constant = j.at("value").get<std::string>();
    }
    return fs;
}

inline const char* kind_name(FieldSource::Kind k)
{
    switch (k) {
    case FieldSource::Kind::topic: return "topic";
    case FieldSource::Kind::data: return "data";
    case FieldSource::Kind::log_address: return "log_address";
    case FieldSource::Kind::tx_from: return "tx_from";
    case FieldSource::Kind::tx_to: return "tx_to";
    case FieldSource::Kind::tx_value: return "tx_value";
    case FieldSource::Kind::constant: return "const";
    }
    return "?";
}

inline const char* type_name(FieldSource::Type t)
{
    switch (t) {
    case FieldSource::Type::address: return "address";
    case FieldSource::Type::uint: return "uint";
    case FieldSource::Type::string: return "string";
    }
    return "?";
}

}  // namespace detail

inline BridgeDecoderConfig decoder_config_from_json(const json& j)
{
    BridgeDecoderConfig cfg;
    try {
        for (const auto& cj : j.at("chains")) {
            ChainConfig c;
            c.chain_id.value = cj.at("chain_id").get<std::uint64_t>();
            if (c.chain_id.value == 0) throw ConfigError("chain_id must be nonzero");
            auto role = cj.at("role").get<std::string>();
            if (role == "source") c.role = ChainRole::source;
            else if (role == "target") c.role = ChainRole::target;
            else throw ConfigError("chain " + std::to_string(c.chain_id.value) + ": role must be source or target");
            if (!cj.contains("finality_seconds")) {
                throw ConfigError("chain " + std::to_string(c.chain_id.value) + ": finality_seconds required");
            }
            c.finality_seconds = cj.at("finality_seconds").get<std::uint64_t>();
            if (c.finality_seconds == 0) throw ConfigError("finality_seconds must be positive");
            for (const auto& a : cj.value("bridge_addresses", json::array())) {
                c.bridge_addresses.push_back(Address::from_hex(a.get<std::string>(), "bridge_addresses"));
            }
            if (cj.contains("wrapped_native_token") && !cj.at("wrapped_native_token").is_null()) {
                c.wrapped_native_token =
                    Address::from_hex(cj.at("wrapped_native_token").get<std::string>(), "wrapped_native_token");
            }
            if (cfg.chain(c.chain_id)) throw ConfigError("duplicate chain " + std::to_string(c.chain_id.value));
            cfg.chains.push_back(std::move(c));
        }
        for (const auto& mj : j.value("token_mappings", json::array())) {
            TokenMappingFact m{{mj.at("orig_chain_id").get<std::uint64_t>()},
                               {mj.at("dst_chain_id").get<std::uint64_t>()},
                               Address::from_hex(mj.at("orig_token").get<std::string>(), "orig_token"),
                               Address::from_hex(mj.at("dst_token").get<std::string>(), "dst_token"),
                               mj.at("standard").get<std::string>()};
            validate(m);
            for (auto id : {m.orig_chain_id, m.dst_chain_id}) {
                if (!cfg.chain(id)) {
                    throw ConfigError("token_mapping references chain " + std::to_string(id.value) +
                                      " with no chain entry (and so no finality)");
                }
            }
            cfg.token_mappings.push_back(std::move(m));
        }
        for (const auto& ej : j.value("events", json::array())) {
            EventSpec ev;
            ev.signature = ej.at("signature").get<std::string>();
            ev.topic0 = ej.contains("topic0") ? Bytes32::from_hex(ej.at("topic0").get<std::string>(), "topic0")
                                              : event_topic(ev.signature);
            ev.relation = ej.at("relation").get<std::string>();
            ev.bridge_only = ej.value("emitter", std::string("bridge")) == "bridge";
            for (const auto& cid : ej.value("chains", json::array())) {
                ChainId id{cid.get<std::uint64_t>()};
                if (!cfg.chain(id)) throw ConfigError(ev.signature + ": unknown chain " + std::to_string(id.value));
                ev.chains.push_back(id);
            }
            std::string where = ev.signature;
            bool known = detail::with_event_relation(ev.relation, [&]<typename F>() {
                for (const auto& [column, source] : ej.at("fields").items()) {
                    if (!detail::relation_has_column<F>(column) || column == "tx_hash" || column == "event_index") {
                        throw ConfigError(where + ": relation " + ev.relation + " has no settable column '" +
                                          column + "'");
                    }
                    ev.fields.emplace_back(column, detail::field_source_from_json(source, where + "." + column));
                }
                for (auto column : F::columns) {
                    if (column == "tx_hash" || column == "event_index" || column == "chain_id") continue;
                    bool present = std::any_of(ev.fields.begin(), ev.fields.end(),
                                               [&](const auto& f) { return f.first == column; });
                    if (!present) throw ConfigError(where + ": no extraction rule for column '" + std::string(column) + "'");
                }
            });
            if (!known) throw ConfigError(where + ": '" + ev.relation + "' is not an event relation");
            cfg.events.push_back(std::move(ev));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("decoder config: ") + e.what());
    } catch (const EncodingError& e) {
        throw ConfigError(std::string("decoder config: ") + e.what());
    }
    return cfg;
}

inline ordered_json decoder_config_to_json(const BridgeDecoderConfig& cfg)
{
    ordered_json j;
    auto chains = ordered_json::array();
    for (const auto& c : cfg.chains) {
        ordered_json cj;
        cj["chain_id"] = c.chain_id.value;
        cj["role"] = c.role == ChainRole::source ? "source" : "target";
        cj["finality_seconds"] = c.finality_seconds;
        auto bridges = ordered_json::array();
        for (const auto& a : c.bridge_addresses) bridges.push_back(a.to_hex());
        cj["bridge_addresses"] = std::move(bridges);
        cj["wrapped_native_token"] = c.wrapped_native_token ? ordered_json(c.wrapped_native_token->to_hex()) : ordered_json(nullptr);
        chains.push_back(std::move(cj));
    }
    j["chains"] = std::move(chains);
    auto mappings = ordered_json::array();
    for (const auto& m : cfg.token_mappings) {
        mappings.push_back({{"orig_chain_id", m.orig_chain_id.value},
                            {"dst_chain_id", m.dst_chain_id.value},
                            {"orig_token", m.orig_token.to_hex()},
                            {"dst_token", m.dst_token.to_hex()},
                            {"standard", m.standard}});
    }
    j["token_mappings"] = std::move(mappings);
    auto events = ordered_json::array();
    for (const auto& ev : cfg.events) {
        ordered_json ej;
        ej["signature"] = ev.signature;
        ej["relation"] = ev.relation;
        ej["emitter"] = ev.bridge_only ? "bridge" : "any";
        if (!ev.chains.empty()) {
            auto ids = ordered_json::array();
            for (auto id : ev.chains) ids.push_back(id.value);
            ej["chains"] = std::move(ids);
        }
        ordered_json fields = ordered_json::object();
        for (const auto& [column, fs] : ev.fields) {
            ordered_json fj;
            fj["source"] = detail::kind_name(fs.kind);
            if (fs.kind == FieldSource::Kind::topic || fs.kind == FieldSource::Kind::data) {
                fj["index"] = fs.index;
                fj["type"] = detail::type_name(fs.type);
            }
            if (fs.kind == FieldSource::Kind::constant) fj["value"] = fs.constant;
            fields[column] = std::move(fj);
        }
        ej["fields"] = std::move(fields);
        events.push_back(std::move(ej));
    }
    j["events"] = std::move(events);
    return j;
}

inline BridgeDecoderConfig load_decoder_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open decoder config " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return decoder_config_from_json(j);
}

// ---------------------------------------------------------------------------
// Decoding

using DecodedFact = std::variant<TransactionFact, Erc20TransferFact, ScDepositFact, ScTokenDepositedFact,
                                 TcTokenDepositedFact, TcWithdrawalFact, TcTokenWithdrewFact, ScWithdrawalFact,
                                 ScTokenWithdrewFact>;

struct DecodeWarning {
    ChainId chain_id;
    TxHash tx_hash;
    std::optional<std::uint64_t> log_index;
    std::string reason;

    friend auto operator<=>(const DecodeWarning&, const DecodeWarning&) = default;
};

struct DecodeResult {
    std::vector<DecodedFact> facts;
    std::vector<DecodeWarning> warnings;
};

/// ERC-20 Transfer log -> erc20_transfer fact. Logs with another topic0 give
/// nullopt silently; a Transfer-signature log with the wrong shape gives
/// nullopt plus a warning.
inline std::optional<Erc20TransferFact> decode_erc20_transfer(const LogEntry& log, const TransactionReceipt& receipt,
                                                              std::vector<DecodeWarning>* warnings = nullptr)
{
    if (log.topics.empty() || log.topics[0] != erc20_transfer_topic()) return std::nullopt;
    auto warn = [&](std::string reason) -> std::optional<Erc20TransferFact> {
        if (warnings) warnings->push_back({receipt.chain_id, receipt.tx_hash, log.log_index, std::move(reason)});
        return std::nullopt;
    };
    if (log.topics.size() != 3) {
        return warn("Transfer log with " + std::to_string(log.topics.size()) + " topics (ERC-20 needs 3)");
    }
    if (log.data.size() != 32) return warn("Transfer log data is not a single uint256 word");
    auto from = word_address(log.topics[1].bytes);
    auto to = word_address(log.topics[2].bytes);
    if (!from || !to) return warn("Transfer topic is not a 20-byte address");
    return Erc20TransferFact{receipt.tx_hash,
                             receipt.chain_id,
                             log.log_index,
                             log.address,
                             *from,
                             *to,
                             Amount::from_word(std::span<const std::uint8_t, 32>(log.data.data(), 32))};
}

namespace detail {

class FieldDecodeError : public Error {
public:
    using Error::Error;
};

inline std::span<const std::uint8_t, 32> data_word(const LogEntry& log, std::size_t index)
{
    if (log.data.size() < 32 * (index + 1)) {
        throw FieldDecodeError("data word " + std::to_string(index) + " out of range");
    }
    return std::span<const std::uint8_t, 32>(log.data.data() + 32 * index, 32);
}

inline std::string decode_word(std::span<const std::uint8_t, 32> word, FieldSource::Type type, const std::string& column)
{
    if (type == FieldSource::Type::address) {
        auto a = word_address(word);
        if (!a) throw FieldDecodeError(column + ": 32-byte value is not a 20-byte address");
        return a->to_hex();
    }
    return Amount::from_word(word).to_string();
}

inline std::string extract(const FieldSource& fs, const std::string& column, const LogEntry& log,
                           const TransactionReceipt& receipt)
{
    switch (fs.kind) {
    case FieldSource::Kind::topic:
        if (fs.index >= log.topics.size()) throw FieldDecodeError(column + ": topic " + std::to_string(fs.index) + " missing");
        return decode_word(log.topics[fs.index].bytes, fs.type, column);
    case FieldSource::Kind::data:
        if (fs.type == FieldSource::Type::string) {
            auto offset = Amount::from_word(data_word(log, fs.index)).value();
            if (offset % 32 != 0 || offset >= log.data.size()) throw FieldDecodeError(column + ": bad string offset");
            auto off = offset.convert_to<std::size_t>();
            auto len_v = Amount::from_word(data_word(log, off / 32)).value();
            if (len_v > log.data.size()) throw FieldDecodeError(column + ": bad string length");
            auto len = len_v.convert_to<std::size_t>();
            if (off + 32 + len > log.data.size()) throw FieldDecodeError(column + ": string overruns data");
            return std::string(reinterpret_cast<const char*>(log.data.data() + off + 32), len);
        }
        return decode_word(data_word(log, fs.index), fs.type, column);
    case FieldSource::Kind::log_address: return log.address.to_hex();
    case FieldSource::Kind::tx_from: return receipt.from.to_hex();
    case FieldSource::Kind::tx_to: return receipt.to.to_hex();
    case FieldSource::Kind::tx_value: return receipt.value.to_string();
    case FieldSource::Kind::constant: return fs.constant;
    }
    throw FieldDecodeError(column + ": unsupported source");
}

}  // namespace detail

/// One transaction fact, every ERC-20 transfer, the configured bridge events,
/// and native escrow into a bridge (pseudo event index 0).
inline DecodeResult decode_receipt(const TransactionReceipt& receipt, const BridgeDecoderConfig& config)
{
    const auto* chain = config.chain(receipt.chain_id);
    if (!chain) throw ConfigError("receipt on unconfigured chain " + std::to_string(receipt.chain_id.value));

    DecodeResult out;
    out.facts.emplace_back(TransactionFact{receipt.block_timestamp, receipt.chain_id, receipt.tx_hash,
                                           receipt.block_number, receipt.from, receipt.to, receipt.value,
                                           receipt.status, receipt.gas_used});

    if (!receipt.value.is_zero() && config.is_bridge(receipt.chain_id, receipt.to)) {
        if (chain->role == ChainRole::source) {
            out.facts.emplace_back(ScDepositFact{receipt.tx_hash, 0, receipt.from, receipt.to, receipt.value});
        } else {
            out.facts.emplace_back(TcWithdrawalFact{receipt.tx_hash, 0, receipt.from, receipt.to, receipt.value});
        }
    }

    for (const auto& log : receipt.logs) {
        if (auto transfer = decode_erc20_transfer(log, receipt, &out.warnings)) {
            out.facts.emplace_back(std::move(*transfer));
            continue;
        }
        if (log.topics.empty()) continue;
        for (const auto& ev : config.events) {
            if (ev.topic0 != log.topics[0]) continue;
            if (!ev.chains.empty() && std::find(ev.chains.begin(), ev.chains.end(), receipt.chain_id) == ev.chains.end()) {
                continue;
            }
            if (ev.bridge_only && !config.is_bridge(receipt.chain_id, log.address)) continue;
            detail::with_event_relation(ev.relation, [&]<typename F>() {
                std::vector<std::string> row;
                try {
                    for (auto column : F::columns) {
                        if (column == "tx_hash") {
                            row.push_back(receipt.tx_hash.to_hex());
                        } else if (column == "event_index") {
                            row.push_back(std::to_string(log.log_index));
                        } else {
                            auto it = std::find_if(ev.fields.begin(), ev.fields.end(),
                                                   [&](const auto& f) { return f.first == column; });
                            if (it == ev.fields.end()) {
                                row.push_back(std::to_string(receipt.chain_id.value));  // implicit chain_id
                            } else {
                                row.push_back(detail::extract(it->second, it->first, log, receipt));
                            }
                        }
                    }
                    out.facts.emplace_back(from_row<F>(std::span<const std::string>(row)));
                } catch (const detail::FieldDecodeError& e) {
                    out.warnings.push_back({receipt.chain_id, receipt.tx_hash, log.log_index,
                                            ev.signature + ": " + e.what()});
                } catch (const EncodingError& e) {
                    out.warnings.push_back({receipt.chain_id, receipt.tx_hash, log.log_index,
                                            ev.signature + ": " + e.what()});
                }
            });
        }
    }
    return out;
}

struct IngestReport {
    std::size_t receipts = 0;
    std::vector<DecodeWarning> warnings;

    ordered_json to_json(const FactStore& store) const
    {
        ordered_json j;
        j["receipts"] = receipts;
        ordered_json facts = ordered_json::object();
        store.for_each_relation([&]<typename F>(const Relation<F>& rel) { facts[std::string(F::relation)] = rel.size(); });
        j["facts"] = std::move(facts);
        j["warnings"] = warnings_json(warnings);
        return j;
    }

    static ordered_json warnings_json(const std::vector<DecodeWarning>& warnings)
    {
        auto arr = ordered_json::array();
        for (const auto& w : warnings) {
            ordered_json wj;
            wj["chain_id"] = w.chain_id.value;
            wj["tx_hash"] = w.tx_hash.to_hex();
            wj["log_index"] = w.log_index ? ordered_json(*w.log_index) : ordered_json(nullptr);
            wj["reason"] = w.reason;
            arr.push_back(std::move(wj));
        }
        return arr;
    }
};

struct IngestResult {
    FactStore store;
    IngestReport report;
};

inline void insert_decoded(FactStore& store, const DecodeResult& decoded)
{
    for (const auto& f : decoded.facts) {
        std::visit([&](const auto& fact) { store.insert(fact); }, f);
    }
}

/// Decodes a receipts JSONL file. Fails fast on the first malformed line.
inline IngestResult ingest_jsonl(const std::filesystem::path& receipts_path, const BridgeDecoderConfig& config)
{
    std::ifstream in(receipts_path, std::ios::binary);
    if (!in) throw Error("cannot open receipts file " + receipts_path.string());

    IngestResult result;
    config.insert_static_facts(result.store);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        TransactionReceipt receipt;
        try {
            receipt = receipt_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw ParseError(receipts_path.string(), line_no, std::string("malformed JSON: ") + e.what());
        } catch (const EncodingError& e) {
            throw ParseError(receipts_path.string(), line_no, e.what());
        }
        auto decoded = decode_receipt(receipt, config);
        insert_decoded(result.store, decoded);
        result.report.warnings.insert(result.report.warnings.end(), decoded.warnings.begin(), decoded.warnings.end());
        ++result.report.receipts;
    }
    std::sort(result.report.warnings.begin(), result.report.warnings.end());
    return result;
}

inline IngestResult ingest_jsonl(const std::filesystem::path& receipts_path, const std::filesystem::path& config_path)
{
    return ingest_jsonl(receipts_path, load_decoder_config(config_path));
}

}  // namespace bridgewatch
