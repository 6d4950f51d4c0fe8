#pragma once

#include <bridgewatch/facts.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace bridgewatch {

/// Append-only tuple set. Rows keep insertion order; duplicates collapse.
template <Fact F>
class Relation {
public:
    Relation() : dedupe_(16, IndexHash{&rows_}, IndexEq{&rows_}) {}
    Relation(const Relation& other) : Relation() { *this = other; }
    Relation& operator=(const Relation& other)
    {
        if (this != &other) {
            rows_ = other.rows_;
            dedupe_.clear();
            for (std::uint32_t i = 0; i < rows_.size(); ++i) dedupe_.insert(i);
        }
        return *this;
    }
    Relation(Relation&& other) noexcept : Relation() { *this = std::move(other); }
    Relation& operator=(Relation&& other) noexcept
    {
        rows_ = std::move(other.rows_);
        dedupe_.clear();
        for (std::uint32_t i = 0; i < rows_.size(); ++i) dedupe_.insert(i);
        other.rows_.clear();
        other.dedupe_.clear();
        return *this;
    }

    /// Returns false when an identical tuple is already present.
    bool insert(F fact)
    {
        rows_.push_back(std::move(fact));
        auto [_, inserted] = dedupe_.insert(static_cast<std::uint32_t>(rows_.size() - 1));
        if (!inserted) rows_.pop_back();
        return inserted;
    }

    void reserve(std::size_t n)
    {
        rows_.reserve(n);
        dedupe_.reserve(n);
    }

    std::span<const F> rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    bool empty() const noexcept { return rows_.empty(); }
    const F& operator[](std::size_t i) const { return rows_[i]; }

    bool contains(const F& fact) const
    {
        return std::any_of(rows_.begin(), rows_.end(), [&](const F& r) { return r == fact; });
    }

    std::vector<F> sorted() const
    {
        std::vector<F> out = rows_;
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    struct IndexHash {
        const std::vector<F>* rows;
        std::size_t operator()(std::uint32_t i) const noexcept { return FactHasher<F>{}((*rows)[i]); }
    };
    struct IndexEq {
        const std::vector<F>* rows;
        bool operator()(std::uint32_t a, std::uint32_t b) const noexcept { return (*rows)[a] == (*rows)[b]; }
    };

    std::vector<F> rows_;
    std::unordered_set<std::uint32_t, IndexHash, IndexEq> dedupe_;
};

/// Key -> row-number groups, laid out contiguously (CSR) behind a hash map.
template <typename Key>
class GroupIndex {
public:
    template <typename Row, typename KeyFn>
    void build(std::span<const Row> rows, KeyFn key_of)
    {
        std::unordered_map<Key, std::uint32_t, Hasher> counts;
        counts.reserve(rows.size());
        for (const auto& r : rows) ++counts[key_of(r)];
        ranges_.clear();
        ranges_.reserve(counts.size());
        std::uint32_t offset = 0;
        for (auto& [k, n] : counts) {
            ranges_.emplace(k, std::pair{offset, offset});
            offset += n;
        }
        rows_.assign(rows.size(), 0);
        for (std::uint32_t i = 0; i < rows.size(); ++i) {
            auto& range = ranges_.find(key_of(rows[i]))->second;
            rows_[range.second++] = i;
        }
    }

    std::span<const std::uint32_t> find(const Key& key) const
    {
        auto it = ranges_.find(key);
        if (it == ranges_.end()) return {};
        return std::span<const std::uint32_t>(rows_).subspan(it->second.first,
                                                             it->second.second - it->second.first);
    }

    template <typename Fn>
    void for_each_group(Fn fn) const
    {
        for (const auto& [k, range] : ranges_) {
            fn(k, std::span<const std::uint32_t>(rows_).subspan(range.first, range.second - range.first));
        }
    }

    std::size_t group_count() const noexcept { return ranges_.size(); }

private:
    std::unordered_map<Key, std::pair<std::uint32_t, std::uint32_t>, Hasher> ranges_;
    std::vector<std::uint32_t> rows_;
};

class FactStore {
public:
    template <Fact F>
    bool insert(F fact)
    {
        if (sealed_) throw std::logic_error("FactStore is sealed");
        validate(fact);
        return relation<F>().insert(std::move(fact));
    }

    /// Textual insertion for one tuple of the named relation.
    bool insert_row(std::string_view relation_name, std::span<const std::string_view> row)
    {
        bool known = false;
        bool inserted = false;
        for_each_relation([&]<typename F>(Relation<F>&) {
            if (F::relation == relation_name) {
                known = true;
                inserted = insert(from_row<F>(row));
            }
        });
        if (!known) throw EncodingError("relation", "unknown relation '" + std::string(relation_name) + "'");
        return inserted;
    }

    template <Fact F>
    std::span<const F> get() const noexcept
    {
        return relation<F>().rows();
    }

    template <Fact F>
    const Relation<F>& relation() const noexcept
    {
        return std::get<Relation<F>>(relations_);
    }

    template <typename Fn>
    void for_each_relation(Fn&& fn)
    {
        std::apply([&](auto&... rel) { (fn(rel), ...); }, relations_);
    }
    template <typename Fn>
    void for_each_relation(Fn&& fn) const
    {
        std::apply([&](const auto&... rel) { (fn(rel), ...); }, relations_);
    }

    std::size_t size() const noexcept
    {
        std::size_t n = 0;
        for_each_relation([&](const auto& rel) { n += rel.size(); });
        return n;
    }

    bool sealed() const noexcept { return sealed_; }

    /// Freezes the store and builds the secondary indexes.
    void seal()
    {
        if (sealed_) return;
        build_tx_index<TransactionFact>();
        build_tx_index<Erc20TransferFact>();
        build_tx_index<ScDepositFact>();
        build_tx_index<ScTokenDepositedFact>();
        build_tx_index<TcTokenDepositedFact>();
        build_tx_index<TcWithdrawalFact>();
        build_tx_index<TcTokenWithdrewFact>();
        build_tx_index<ScWithdrawalFact>();
        build_tx_index<ScTokenWithdrewFact>();

        std::get<0>(deposit_id_index_)
            .build(get<ScTokenDepositedFact>(), [](const auto& f) { return f.deposit_id; });
        std::get<1>(deposit_id_index_).build(get<TcTokenDepositedFact>(), [](const auto& f) { return f.deposit_id; });
        std::get<0>(withdrawal_id_index_)
            .build(get<TcTokenWithdrewFact>(), [](const auto& f) { return f.withdrawal_id; });
        std::get<1>(withdrawal_id_index_)
            .build(get<ScTokenWithdrewFact>(), [](const auto& f) { return f.withdrawal_id; });

        for (const auto& f : get<BridgeControlledAddressFact>()) bridge_addresses_.insert({f.chain_id, f.address});
        for (const auto& f : get<WrappedNativeTokenFact>()) wrapped_native_.insert({f.chain_id, f.token});
        for (const auto& f : get<TokenMappingFact>()) {
            token_mappings_.insert({f.orig_chain_id, f.dst_chain_id, f.orig_token, f.dst_token, f.standard});
        }
        for (const auto& f : get<CctxFinalityFact>()) {
            auto [it, fresh] = finality_.emplace(f.chain_id, f.finality_seconds);
            if (!fresh) it->second = std::min(it->second, f.finality_seconds);
        }
        sealed_ = true;
    }

    // --- sealed-store queries ---------------------------------------------

    /// Row numbers of the relation's facts carrying this tx hash.
    template <Fact F>
        requires requires(const F& f) { f.tx_hash; }
    std::span<const std::uint32_t> by_tx(const TxHash& tx) const
    {
        require_sealed();
        return std::get<TxIndex<F>>(tx_indexes_).index.find(tx);
    }

    std::span<const std::uint32_t> sc_deposited_by_id(const std::string& id) const
    {
        require_sealed();
        return std::get<0>(deposit_id_index_).find(id);
    }
    std::span<const std::uint32_t> tc_deposited_by_id(const std::string& id) const
    {
        require_sealed();
        return std::get<1>(deposit_id_index_).find(id);
    }
    std::span<const std::uint32_t> tc_withdrew_by_id(const std::string& id) const
    {
        require_sealed();
        return std::get<0>(withdrawal_id_index_).find(id);
    }
    std::span<const std::uint32_t> sc_withdrew_by_id(const std::string& id) const
    {
        require_sealed();
        return std::get<1>(withdrawal_id_index_).find(id);
    }

    bool is_bridge_controlled(ChainId chain, const Address& addr) const
    {
        require_sealed();
        return bridge_addresses_.contains({chain, addr});
    }
    bool is_wrapped_native(ChainId chain, const Address& token) const
    {
        require_sealed();
        return wrapped_native_.contains({chain, token});
    }
    bool has_mapping(ChainId orig_chain, ChainId dst_chain, const Address& orig_token, const Address& dst_token,
                     const std::string& standard) const
    {
        require_sealed();
        return token_mappings_.contains({orig_chain, dst_chain, orig_token, dst_token, standard});
    }
    /// Smallest finality window declared for the chain, if any.
    std::optional<std::uint64_t> finality(ChainId chain) const
    {
        require_sealed();
        auto it = finality_.find(chain);
        if (it == finality_.end()) return std::nullopt;
        return it->second;
    }

    /// Chain ids referenced by any fact, sorted.
    std::vector<ChainId> referenced_chains() const
    {
        std::set<ChainId> ids;
        for (const auto& f : get<TransactionFact>()) ids.insert(f.chain_id);
        for (const auto& f : get<Erc20TransferFact>()) ids.insert(f.chain_id);
        for (const auto& f : get<ScTokenDepositedFact>()) ids.insert(f.dst_chain_id);
        for (const auto& f : get<TcTokenWithdrewFact>()) ids.insert(f.dst_chain_id);
        for (const auto& f : get<BridgeControlledAddressFact>()) ids.insert(f.chain_id);
        for (const auto& f : get<WrappedNativeTokenFact>()) ids.insert(f.chain_id);
        for (const auto& f : get<TokenMappingFact>()) {
            ids.insert(f.orig_chain_id);
            ids.insert(f.dst_chain_id);
        }
        return {ids.begin(), ids.end()};
    }

    /// Chain of the transaction(s) carrying this hash; empty if unknown.
    std::vector<ChainId> chains_of(const TxHash& tx) const
    {
        std::vector<ChainId> out;
        for (auto i : by_tx<TransactionFact>(tx)) out.push_back(get<TransactionFact>()[i].chain_id);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    /// Set equality, independent of insertion order.
    friend bool operator==(const FactStore& a, const FactStore& b)
    {
        bool equal = true;
        std::apply(
            [&](const auto&... ra) {
                std::apply([&](const auto&... rb) { ((equal = equal && ra.sorted() == rb.sorted()), ...); },
                           b.relations_);
            },
            a.relations_);
        return equal;
    }

private:
    template <Fact F>
    Relation<F>& relation() noexcept
    {
        return std::get<Relation<F>>(relations_);
    }

    template <typename F>
    struct TxIndex {
        GroupIndex<TxHash> index;
    };

    template <typename F>
    void build_tx_index()
    {
        std::get<TxIndex<F>>(tx_indexes_).index.build(get<F>(), [](const F& f) { return f.tx_hash; });
    }

    void require_sealed() const
    {
        if (!sealed_) throw std::logic_error("FactStore must be sealed before querying indexes");
    }

    template <typename... Fs>
    static std::tuple<Relation<Fs>...> make_relations(FactList<Fs...>);

    decltype(make_relations(AllFacts{})) relations_;
    std::tuple<TxIndex<TransactionFact>, TxIndex<Erc20TransferFact>, TxIndex<ScDepositFact>,
               TxIndex<ScTokenDepositedFact>, TxIndex<TcTokenDepositedFact>, TxIndex<TcWithdrawalFact>,
               TxIndex<TcTokenWithdrewFact>, TxIndex<ScWithdrawalFact>, TxIndex<ScTokenWithdrewFact>>
        tx_indexes_;
    std::tuple<GroupIndex<std::string>, GroupIndex<std::string>> deposit_id_index_;
    std::tuple<GroupIndex<std::string>, GroupIndex<std::string>> withdrawal_id_index_;
    std::unordered_set<std::tuple<ChainId, Address>, Hasher> bridge_addresses_;
    std::unordered_set<std::tuple<ChainId, Address>, Hasher> wrapped_native_;
    std::unordered_set<std::tuple<ChainId, ChainId, Address, Address, std::string>, Hasher> token_mappings_;
    std::unordered_map<ChainId, std::uint64_t, Hasher> finality_;
    bool sealed_ = false;
};

}  // namespace bridgewatch
