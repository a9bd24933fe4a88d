#pragma once

#include <map>
#include <string>
#include <vector>

#include "fairal/csv.hpp"

namespace fairal {

// Seed-averaged learning curves for one (bias_preset, composition):
// points indexed by cycle, one mean value per strategy per metric.
struct CurveTable {
    std::string bias_preset;
    std::string composition;
    std::vector<std::string> strategies;        // column order
    std::vector<std::size_t> n_labeled;         // row axis, ascending
    // metric name -> rows x strategies means
    std::map<std::string, std::vector<std::vector<double>>> metrics;
};

struct StrategySummary {
    std::string strategy;
    double final_dsc = 0.0;
    double final_delta = 0.0;
    double final_essp = 0.0;
    double final_group1_ratio = 0.0;
    std::size_t n_seeds = 0;
};

struct CompositionSummary {
    std::string bias_preset;
    std::string composition;
    std::vector<StrategySummary> strategies;
    // (MeanEntropy final delta - Weighted final delta) / MeanEntropy final
    // delta, in percent; present only when both strategies appear.
    std::optional<double> delta_reduction_pct;
};

struct ReportData {
    std::vector<CurveTable> curves;
    std::vector<CompositionSummary> summaries;
};

inline constexpr const char* kCurveMetrics[] = {"essp", "delta", "dsc", "group1_ratio"};

// Pure aggregation over test-split rows; throws NoDataError when the
// input holds no usable rows.
ReportData aggregate_results(const std::vector<ResultRow>& rows);

// Columnar curve files (one per preset/composition/metric) plus a
// human-readable summary.txt.
void write_report_files(const ReportData& data, const std::filesystem::path& out_dir);

std::string render_summary(const ReportData& data);

} // namespace fairal
