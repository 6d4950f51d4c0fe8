#include "support.hpp"

#include <gtest/gtest.h>

#include <fstream>

using namespace bwtest;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace

TEST(FactStore, InsertIsIdempotent)
{
    FactStore s;
    EXPECT_TRUE(s.insert(CctxFinalityFact{ChainId{1}, 1800}));
    EXPECT_FALSE(s.insert(CctxFinalityFact{ChainId{1}, 1800}));
    EXPECT_EQ(s.get<CctxFinalityFact>().size(), 1u);
}

TEST(FactStore, RejectsMalformedValues)
{
    FactStore s;
    std::vector<std::string_view> row = {"0x01", "1", "0", "0xZZ00000000000000000000000000000000000000",
                                         "0x1111111111111111111111111111111111111111",
                                         "0x2222222222222222222222222222222222222222", "5"};
    // tx hash is too short as well; the first bad column is reported.
    try {
        s.insert_row("erc20_transfer", row);
        FAIL();
    } catch (const EncodingError& e) {
        EXPECT_EQ(e.field(), "tx_hash");
    }
    const std::string full_hash = hash(1).to_hex();
    row[0] = full_hash;
    try {
        s.insert_row("erc20_transfer", row);
        FAIL();
    } catch (const EncodingError& e) {
        EXPECT_EQ(e.field(), "token");
    }
    EXPECT_THROW(s.insert(TransactionFact{Timestamp{1}, ChainId{1}, hash(1), 0, u1, u2, amt(0), 2, 0}),
                 EncodingError);
    EXPECT_THROW(s.insert(CctxFinalityFact{ChainId{0}, 10}), EncodingError);
    EXPECT_THROW(s.insert(CctxFinalityFact{ChainId{1}, 0}), EncodingError);
    EXPECT_THROW(s.insert(TcTokenDepositedFact{hash(1), 0, "a\tb", u1, aa, amt(1)}), EncodingError);
    EXPECT_THROW(s.insert_row("no_such_relation", {}), EncodingError);
}

TEST(FactStore, SealedStoreRefusesInserts)
{
    FactStore s;
    s.seal();
    EXPECT_THROW(s.insert(CctxFinalityFact{ChainId{1}, 1}), std::logic_error);
}

TEST(FactStore, IndexesByTxAndId)
{
    auto s = f1_f2_store();
    EXPECT_EQ(s.by_tx<TransactionFact>(hash(1)).size(), 1u);
    EXPECT_EQ(s.by_tx<ScTokenDepositedFact>(hash(1)).size(), 1u);
    EXPECT_TRUE(s.by_tx<ScTokenDepositedFact>(hash(2)).empty());
    EXPECT_EQ(s.tc_deposited_by_id("7").size(), 1u);
    EXPECT_EQ(s.sc_withdrew_by_id("9").size(), 1u);
    EXPECT_TRUE(s.is_bridge_controlled(S, b1));
    EXPECT_FALSE(s.is_bridge_controlled(T, b1));
    EXPECT_EQ(s.finality(T), 45u);
    EXPECT_FALSE(s.finality(ChainId{5}).has_value());
}

TEST(FactsIo, LoadsSingleLine)
{
    TempDir dir("load-one");
    write_file(dir.path / "cctx_finality.facts", "1\t1800\n");
    auto s = load_facts_dir(dir.path);
    ASSERT_EQ(s.get<CctxFinalityFact>().size(), 1u);
    EXPECT_EQ(s.get<CctxFinalityFact>()[0].finality_seconds, 1800u);
    EXPECT_EQ(s.size(), 1u);
}

TEST(FactsIo, EmptyDirectoryIsEmptyStore)
{
    TempDir dir("load-empty");
    EXPECT_EQ(load_facts_dir(dir.path).size(), 0u);
    EXPECT_THROW(load_facts_dir(dir.path / "missing"), Error);
}

TEST(FactsIo, WrongColumnCountNamesFileAndLine)
{
    TempDir dir("load-bad");
    auto good = to_line(F1{}.deposited());
    auto cols = split_tabs(good);
    ASSERT_EQ(cols.size(), 9u);
    std::string eight;
    for (std::size_t i = 0; i < 8; ++i) eight += std::string(cols[i]) + (i < 7 ? "\t" : "");
    write_file(dir.path / "sc_token_deposited.facts", good + "\n" + eight + "\n");
    try {
        load_facts_dir(dir.path);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(e.file().find("sc_token_deposited.facts"), std::string::npos);
    }
}

TEST(FactsIo, EncodingErrorInFileCarriesLine)
{
    TempDir dir("load-enc");
    write_file(dir.path / "cctx_finality.facts", "1\t1800\n100\tabc\n");
    try {
        load_facts_dir(dir.path);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
}

TEST(FactsIo, RoundTripIsIdentity)
{
    TempDir dir("roundtrip");
    auto store = copy_facts(f1_f2_store());
    dump_facts_dir(store, dir.path);
    auto back = load_facts_dir(dir.path);
    EXPECT_TRUE(back == store);

    // and files are a fixed point
    TempDir dir2("roundtrip2");
    dump_facts_dir(back, dir2.path);
    for (const auto& entry : fs::directory_iterator(dir.path)) {
        EXPECT_EQ(slurp(entry.path()), slurp(dir2.path / entry.path().filename())) << entry.path();
    }
}

TEST(FactsIo, RandomStoresRoundTrip)
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TempDir dir("roundtrip-rand");
        auto store = random_store(seed, 400);
        dump_facts_dir(store, dir.path);
        EXPECT_TRUE(load_facts_dir(dir.path) == store) << "seed " << seed;
    }
}

TEST(FactsIo, OnlyNonEmptyRelationsAreWritten)
{
    TempDir dir("two-files");
    FactStore s;
    s.insert(CctxFinalityFact{ChainId{1}, 1800});
    s.insert(BridgeControlledAddressFact{ChainId{1}, b1});
    dump_facts_dir(s, dir.path);
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
    EXPECT_EQ(files, 2u);
}

TEST(FactsIo, RowsAreSorted)
{
    TempDir dir("sorted");
    FactStore s;
    s.insert(TcTokenDepositedFact{hash(0xb), 0, "1", u1, aa, amt(1)});
    s.insert(TcTokenDepositedFact{hash(0xa), 0, "1", u1, aa, amt(1)});
    dump_facts_dir(s, dir.path);
    auto text = slurp(dir.path / "tc_token_deposited.facts");
    auto first_nl = text.find('\n');
    EXPECT_LT(text.substr(0, first_nl), text.substr(first_nl + 1));
    EXPECT_NE(text.find("000a\t"), std::string::npos);
    EXPECT_LT(text.find("000a\t"), text.find("000b\t"));
}

TEST(FactsIo, PermutedInputLinesGiveSameStore)
{
    TempDir a("perm-a"), b("perm-b");
    write_file(a.path / "cctx_finality.facts", "1\t1800\n100\t45\n");
    write_file(b.path / "cctx_finality.facts", "100\t45\n1\t1800\n1\t1800\n");
    EXPECT_TRUE(load_facts_dir(a.path) == load_facts_dir(b.path));
}
