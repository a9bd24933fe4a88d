#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairal/loop.hpp"

namespace fairal {

inline constexpr char kToolVersion[] = "0.1.0";

// Exit codes shared by the CLI and the in-process command entry points.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitPartialFailure = 3;

struct GenerateOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
};

struct BaselineOptions {
    std::filesystem::path config_path;
    std::filesystem::path out_dir;
};

struct RunOptions {
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> out_dir;        // overrides config
    std::optional<std::vector<std::uint64_t>> seeds;     // overrides config
    std::optional<unsigned> jobs;                        // overrides config
    bool dump_scores = false;                            // OR-ed with config
};

struct ReportOptions {
    std::filesystem::path results_csv;
    std::filesystem::path out_dir;
};

// Resolved grid configuration; every default is echoed into the run
// manifest so what ran is never ambiguous.
struct GridConfig {
    std::filesystem::path cohort_dir;
    std::vector<std::string> compositions; // "50/50", "80/20", "20/80"
    std::vector<StrategyKind> strategies;
    std::vector<std::uint64_t> seeds;
    std::size_t n_initial = 10;
    std::size_t batch_size = 4;
    std::size_t n_cycles = 5;
    std::size_t n_test_per_group = 15;
    int dilation_radius = 2;
    double threshold_value = 0.85;
    TrainConfig train;
    unsigned jobs = 0; // 0 = logical cores
    bool dump_scores = false;
    std::optional<std::filesystem::path> out_dir;
};

// Parsers are exposed for tests; all reject unknown keys and validate
// ranges, throwing ConfigError.
CohortConfig parse_generate_config(const std::filesystem::path& path, std::string& preset_out);
GridConfig parse_grid_config(const std::filesystem::path& path);

// Initial per-group counts for a "a/b" composition of n_initial cases.
std::vector<GroupCount> composition_counts(const std::string& composition, std::size_t n_initial);

int cmd_generate(const GenerateOptions& opt);
int cmd_baseline(const BaselineOptions& opt);
int cmd_run(const RunOptions& opt);
int cmd_report(const ReportOptions& opt);

} // namespace fairal
