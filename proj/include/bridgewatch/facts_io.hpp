#pragma once

#include <bridgewatch/fact_store.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace bridgewatch {

/// Reads every `<relation>.facts` file present in `dir`. Missing files are
/// empty relations; files for unknown relations are ignored.
inline FactStore load_facts_dir(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error("facts directory not found: " + dir.string());

    FactStore store;
    store.for_each_relation([&]<typename F>(Relation<F>&) {
        auto path = dir / (std::string(F::relation) + ".facts");
        if (!fs::exists(path)) return;
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            auto cols = split_tabs(line);
            if (cols.size() != F::columns.size()) {
                throw ParseError(path.string(), line_no,
                                 "expected " + std::to_string(F::columns.size()) + " columns, got " +
                                     std::to_string(cols.size()));
            }
            try {
                store.insert(from_row<F>(std::span<const std::string_view>(cols)));
            } catch (const EncodingError& e) {
                throw ParseError(path.string(), line_no, e.what());
            }
        }
    });
    return store;
}

template <Fact F>
std::vector<std::string> sorted_lines(const Relation<F>& rel)
{
    std::vector<std::string> lines;
    lines.reserve(rel.size());
    for (const auto& f : rel.rows()) lines.push_back(to_line(f));
    std::sort(lines.begin(), lines.end());
    return lines;
}

/// Writes one file per non-empty relation, rows sorted lexicographically.
inline void dump_facts_dir(const FactStore& store, const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    store.for_each_relation([&]<typename F>(const Relation<F>& rel) {
        auto path = dir / (std::string(F::relation) + ".facts");
        if (rel.empty()) {
            fs::remove(path);
            return;
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        for (const auto& line : sorted_lines(rel)) out << line << '\n';
        if (!out) throw Error("write failed: " + path.string());
    });
}

}  // namespace bridgewatch
