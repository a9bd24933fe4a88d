#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace fairal {

// Shortest round-trip decimal form; parsing it back recovers the exact
// double, which is what "full precision" means for the results schema.
std::string format_double(double v);

// Fixed, versioned results schema. One row per (cell, cycle, split).
inline constexpr char kResultsHeader[] =
    "run_id,bias_preset,composition,strategy,seed,cycle,n_labeled,"
    "dsc_overall,dsc_g1,dsc_g2,delta,essp,group1_ratio,weights_g1,weights_g2,eval_split";

struct ResultRow {
    std::string run_id;
    std::string bias_preset;
    std::string composition;
    std::string strategy;
    std::uint64_t seed = 0;
    std::size_t cycle = 0;
    std::size_t n_labeled = 0;
    double dsc_overall = 0.0;
    double dsc_g1 = 0.0;
    double dsc_g2 = 0.0;
    double delta = 0.0;
    double essp = 0.0;
    double group1_ratio = 0.0;
    std::optional<double> weights_g1;
    std::optional<double> weights_g2;
    std::string eval_split; // "test" or "labeled"
};

std::string results_row_to_csv(const ResultRow& row);

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows);

// Throws DataError on a missing file or malformed header/rows. An empty
// body is returned as an empty vector; callers decide whether that is an
// error.
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

// Optional per-cycle acquisition score dump.
inline constexpr char kScoresHeader[] =
    "run_id,cycle,case_id,group,strategy,raw_entropy,region_size,weight_applied,score,fallback_used";

struct ScoreRow {
    std::string run_id;
    std::size_t cycle = 0;
    std::string case_id;
    std::string group;
    std::string strategy;
    double raw_entropy = 0.0;
    std::size_t region_size = 0;
    double weight_applied = 1.0;
    double score = 0.0;
    bool fallback_used = false;
};

std::string score_row_to_csv(const ScoreRow& row);

} // namespace fairal
