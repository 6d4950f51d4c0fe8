#include "support.hpp"

#include <bridgewatch/cli.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace bwtest;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run bw(std::vector<std::string> args)
{
    args.insert(args.begin(), "bridgewatch");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

}  // namespace

TEST(Cli, CleanScenarioEvaluatesClean)
{
    TempDir dir("cli-clean");
    auto facts = (dir.path / "facts").string();
    auto report = (dir.path / "report.json").string();
    ASSERT_EQ(bw({"simulate", "--seed", "1", "--deposits", "5", "--withdrawals", "5", "--anomalies", "", "--out", facts})
                  .code,
              0);
    auto r = bw({"eval", "--facts", facts, "--out", report});
    EXPECT_EQ(r.code, 0) << r.err;
    auto j = read_json(report);
    EXPECT_EQ(j["rules"]["CCTX_ValidDeposit"], 5);
    EXPECT_EQ(j["rules"]["CCTX_ValidWithdrawal"], 5);
    EXPECT_TRUE(r.out.empty());
    EXPECT_TRUE(fs::exists(fs::path(facts) / "ground_truth.json"));
    EXPECT_TRUE(fs::exists(fs::path(facts) / "expected_counts.json"));
}

TEST(Cli, ForgedReleasesExitOne)
{
    TempDir dir("cli-forged");
    auto facts = (dir.path / "facts").string();
    auto report = (dir.path / "report.json").string();
    ASSERT_EQ(bw({"simulate", "--seed", "1", "--deposits", "5", "--withdrawals", "5", "--anomalies",
                  "forged_release=2", "--out", facts})
                  .code,
              0);
    EXPECT_EQ(bw({"eval", "--facts", facts, "--out", report}).code, 1);
    auto j = read_json(report);
    EXPECT_EQ(j["anomaly_counts"]["UnmatchedLocalWithdrawal"], 2);
}

TEST(Cli, BadInputExitsTwo)
{
    TempDir dir("cli-bad");
    EXPECT_EQ(bw({"eval", "--facts", (dir.path / "missing").string(), "--out", (dir.path / "r.json").string()}).code, 2);
    EXPECT_EQ(bw({"eval", "--facts", dir.path.string()}).code, 2);
    EXPECT_EQ(bw({"frobnicate"}).code, 2);
    EXPECT_EQ(bw({}).code, 2);
    EXPECT_EQ(bw({"simulate", "--seed", "1", "--deposits", "1", "--withdrawals", "1", "--anomalies", "bogus=1",
                  "--out", (dir.path / "x").string()})
                  .code,
              2);

    // chain 100 facts without its finality
    auto facts = dir.path / "nofinality";
    fs::create_directories(facts);
    std::ofstream(facts / "cctx_finality.facts") << "1\t1800\n";
    std::ofstream(facts / "transaction.facts") << to_line(F1{}.tx2()) << "\n";
    auto r = bw({"eval", "--facts", facts.string(), "--out", (dir.path / "r.json").string()});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("100"), std::string::npos);
}

TEST(Cli, HelpExitsZero)
{
    auto r = bw({"--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("simulate"), std::string::npos);
}

TEST(Cli, CheckAndStats)
{
    TempDir dir("cli-check");
    auto facts = (dir.path / "facts").string();
    ASSERT_EQ(bw({"simulate", "--seed", "3", "--deposits", "6", "--withdrawals", "4", "--anomalies",
                  "replayed_id=1,finality_break=2", "--out", facts})
                  .code,
              0);
    auto check = bw({"check", "--facts", facts});
    EXPECT_EQ(check.code, 0) << check.out;
    EXPECT_TRUE(check.out.empty());

    auto stats = bw({"stats", "--facts", facts});
    ASSERT_EQ(stats.code, 0) << stats.err;
    auto j = json::parse(stats.out);
    EXPECT_EQ(j["deposit"]["count"], 5);
    EXPECT_TRUE(j["withdrawal"].contains("median"));
}

TEST(Cli, RulesDirGetsOneCsvPerRule)
{
    TempDir dir("cli-csv");
    auto facts = (dir.path / "facts").string();
    ASSERT_EQ(bw({"simulate", "--seed", "3", "--deposits", "2", "--withdrawals", "2", "--out", facts}).code, 0);
    ASSERT_EQ(bw({"eval", "--facts", facts, "--out", (dir.path / "r.json").string(), "--rules-dir",
                  (dir.path / "rules").string()})
                  .code,
              0);
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path / "rules")) ++n;
    EXPECT_EQ(n, 8u);
}

TEST(Cli, ReceiptsPathMatchesFactsPath)
{
    TempDir dir("cli-pipe");
    const std::vector<std::string> common = {"--seed", "11", "--deposits", "8", "--withdrawals", "8", "--anomalies",
                                             "forged_release=1,replayed_id=2,direct_transfer=1,orphan_bridge_event=1,"
                                             "finality_break=2"};
    auto with = [&](std::vector<std::string> head, std::vector<std::string> tail) {
        head.insert(head.end(), common.begin(), common.end());
        head.insert(head.end(), tail.begin(), tail.end());
        return head;
    };
    auto facts = (dir.path / "facts").string();
    auto sim = (dir.path / "sim").string();
    auto ingested = (dir.path / "ingested").string();
    ASSERT_EQ(bw(with({"simulate"}, {"--out", facts})).code, 0);
    ASSERT_EQ(bw(with({"simulate"}, {"--out", sim, "--emit", "receipts"})).code, 0);
    auto ing = bw({"ingest", "--receipts", sim + "/receipts.jsonl", "--config", sim + "/decoder_config.json", "--out",
                   ingested});
    ASSERT_EQ(ing.code, 0) << ing.err;
    EXPECT_TRUE(fs::exists(fs::path(ingested) / "ingest_report.json"));

    EXPECT_EQ(bw({"eval", "--facts", facts, "--out", (dir.path / "a.json").string()}).code, 1);
    EXPECT_EQ(bw({"eval", "--facts", ingested, "--out", (dir.path / "b.json").string()}).code, 1);
    EXPECT_EQ(bw({"eval", "--facts", ingested, "--out", (dir.path / "c.json").string()}).code, 1);
    EXPECT_EQ(slurp(dir.path / "a.json"), slurp(dir.path / "b.json"));
    EXPECT_EQ(slurp(dir.path / "b.json"), slurp(dir.path / "c.json"));
}
