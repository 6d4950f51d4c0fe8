#pragma once

// Command-line front end. run() is the whole program; the executable in
// tools/ only forwards argv, so tests drive commands in-process.
//
// Exit codes: 0 clean, 1 anomalies found (eval) or engine/oracle diff
// (check), 2 bad input/configuration, 3 internal error.

#include <bridgewatch/analytics.hpp>
#include <bridgewatch/facts_io.hpp>
#include <bridgewatch/ingest.hpp>
#include <bridgewatch/oracle.hpp>
#include <bridgewatch/scenario.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace bridgewatch::cli {

enum ExitCode : int { kClean = 0, kAnomalies = 1, kInputError = 2, kInternalError = 3 };

inline constexpr const char* kIngestReportFile = "ingest_report.json";

/// Warnings recorded by `ingest` next to the facts, or an empty list.
inline ordered_json read_ingest_warnings(const std::filesystem::path& facts_dir)
{
    auto path = facts_dir / kIngestReportFile;
    if (!std::filesystem::exists(path)) return ordered_json::array();
    std::ifstream in(path);
    try {
        auto j = ordered_json::parse(in);
        return j.value("warnings", ordered_json::array());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string(), 1, e.what());
    }
}

inline FactStore load_sealed(const std::filesystem::path& facts_dir)
{
    auto store = load_facts_dir(facts_dir);
    store.seal();
    return store;
}

struct EvalResult {
    ordered_json report;
    std::size_t anomalies = 0;
};

inline EvalResult evaluate_dir(const std::filesystem::path& facts_dir, const std::optional<std::filesystem::path>& prices,
                               const std::optional<std::filesystem::path>& rules_dir = std::nullopt)
{
    auto store = load_sealed(facts_dir);
    auto outputs = eval_all(store);
    std::optional<PriceTable> table;
    if (prices) table = load_price_table(*prices);
    auto analysis = analyze(store, outputs, table ? &*table : nullptr);
    if (rules_dir) write_rule_csvs(outputs, *rules_dir);
    return {build_report(store, outputs, analysis, read_ingest_warnings(facts_dir)), analysis.anomalies.size()};
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app{"Cross-chain bridge monitor: decode receipts into facts, evaluate bridge rules, report anomalies",
                 "bridgewatch"};
    app.require_subcommand(1);

    std::string receipts, config, out_dir, facts_dir, report_path, anomalies_spec, emit = "facts";
    std::optional<std::string> prices, rules_dir;
    std::uint64_t seed = 0;
    std::size_t deposits = 0, withdrawals = 0, replay_copies = 3;
    std::optional<std::size_t> replay_total;

    auto* ingest = app.add_subcommand("ingest", "Decode receipts JSONL into a facts directory");
    ingest->add_option("--receipts", receipts, "Receipts JSONL file")->required();
    ingest->add_option("--config", config, "Bridge decoder config (JSON)")->required();
    ingest->add_option("--out", out_dir, "Output facts directory")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate rules and analytics over a facts directory");
    eval->add_option("--facts", facts_dir, "Facts directory")->required();
    eval->add_option("--out", report_path, "Report JSON path")->required();
    eval->add_option("--prices", prices, "Static price table (JSON)");
    eval->add_option("--rules-dir", rules_dir, "Also write one <RuleName>.csv per rule here");

    auto* simulate = app.add_subcommand("simulate", "Generate a synthetic two-chain scenario");
    simulate->add_option("--seed", seed, "RNG seed")->required();
    simulate->add_option("--deposits", deposits, "Number of deposits")->required();
    simulate->add_option("--withdrawals", withdrawals, "Number of withdrawals")->required();
    simulate->add_option("--anomalies", anomalies_spec, "kind=count[,kind=count...]");
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--emit", emit, "facts or receipts")->check(CLI::IsMember({"facts", "receipts"}));
    simulate->add_option("--replay-copies", replay_copies, "Releases per replayed id");
    simulate->add_option("--replay-total", replay_total, "Total releases spread over replayed ids");

    auto* check = app.add_subcommand("check", "Compare rule engine output with the brute-force oracle");
    check->add_option("--facts", facts_dir, "Facts directory")->required();

    auto* stats = app.add_subcommand("stats", "Latency and value statistics per direction");
    stats->add_option("--facts", facts_dir, "Facts directory")->required();
    stats->add_option("--prices", prices, "Static price table (JSON)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kClean;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kClean;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    }

    try {
        if (*ingest) {
            err << "ingesting " << receipts << "\n";
            auto result = ingest_jsonl(receipts, config);
            dump_facts_dir(result.store, out_dir);
            write_json_file(result.report.to_json(result.store), std::filesystem::path(out_dir) / kIngestReportFile);
            err << result.report.receipts << " receipts, " << result.store.size() << " facts, "
                << result.report.warnings.size() << " warnings -> " << out_dir << "\n";
            return kClean;
        }
        if (*eval) {
            err << "evaluating " << facts_dir << "\n";
            auto res = evaluate_dir(facts_dir, prices ? std::optional<std::filesystem::path>(*prices) : std::nullopt,
                                    rules_dir ? std::optional<std::filesystem::path>(*rules_dir) : std::nullopt);
            write_json_file(res.report, report_path);
            err << res.anomalies << " anomalies -> " << report_path << "\n";
            return res.anomalies > 0 ? kAnomalies : kClean;
        }
        if (*simulate) {
            ScenarioParams params;
            params.seed = seed;
            params.n_deposits = deposits;
            params.n_withdrawals = withdrawals;
            params.anomalies = parse_anomaly_spec(anomalies_spec);
            params.replay_copies = replay_copies;
            params.replay_total_releases = replay_total;
            auto expected = describe(params);
            auto sc = generate(params);
            std::filesystem::path dir(out_dir);
            std::filesystem::create_directories(dir);
            if (emit == "receipts") {
                write_receipts_jsonl(sc, dir / "receipts.jsonl");
                write_json_file(decoder_config_to_json(sc.decoder_config()), dir / "decoder_config.json");
            } else {
                dump_facts_dir(sc.facts(), dir);
            }
            write_json_file(sc.truth.to_json(), dir / "ground_truth.json");
            write_json_file(expected.to_json(), dir / "expected_counts.json");
            err << sc.txs.size() << " transactions, " << sc.truth.labels.size() << " injected anomalies -> "
                << out_dir << "\n";
            return kClean;
        }
        if (*check) {
            auto store = load_sealed(facts_dir);
            auto engine = eval_all(store);
            auto reference = oracle::brute_force_all(store);
            auto lines = oracle::diff(engine, reference);
            for (const auto& l : lines) out << l << "\n";
            err << (lines.empty() ? "engine matches oracle on all 8 rules\n" : "engine and oracle differ\n");
            return lines.empty() ? kClean : kAnomalies;
        }
        if (*stats) {
            auto store = load_sealed(facts_dir);
            auto outputs = eval_all(store);
            std::optional<PriceTable> table;
            if (prices) table = load_price_table(*prices);
            const PriceTable* pt = table ? &*table : nullptr;
            ordered_json j;
            j["deposit"] = latency_stats(outputs.rule4, pt).to_json();
            j["withdrawal"] = latency_stats(outputs.rule8, pt).to_json();
            out << j.dump(2) << "\n";
            return kClean;
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}

}  // namespace bridgewatch::cli
