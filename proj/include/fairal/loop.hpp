#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairal/acquisition.hpp"
#include "fairal/surrogate.hpp"

namespace fairal {

struct GroupCount {
    GroupId group;
    std::size_t count = 0;
};

struct ALConfig {
    std::size_t n_initial = 10;
    std::size_t batch_size = 4;
    std::size_t n_cycles = 5;
    std::vector<GroupCount> initial_group_counts; // must sum to n_initial
    StrategyKind strategy = StrategyKind::Random;
    int dilation_radius = 2;
    double threshold_value = 0.85;
    TrainConfig train;
    std::uint64_t run_seed = 0;

    // Throws ConfigError on infeasible counts or budgets.
    void validate(std::size_t pool_size) const;
};

// Labeled / unlabeled partition of the training pool.
struct PoolState {
    std::set<std::string> labeled;
    std::set<std::string> unlabeled;
    std::size_t cycle = 0;
};

struct SelectedCase {
    std::string case_id;
    GroupId group;
};

// Everything recorded for one point of the learning curves: the reports
// come from the model trained at this cycle; n_labeled and group1_ratio
// reflect the labeled set after this cycle's batch was added.
struct CycleRecord {
    std::size_t cycle = 0;
    std::size_t n_labeled = 0;
    std::vector<SelectedCase> selected;
    FairnessReport labeled_report;
    FairnessReport test_report;
    std::optional<GroupWeightTable> weights; // present for the weighted strategy
    double group1_ratio = 0.0;
    std::vector<AcquisitionScore> pool_scores; // empty for the cycle-0 record
};

// Deterministically draws the configured per-group counts into the
// labeled set; everything else is unlabeled, cycle = 0.
PoolState init_pool(const std::vector<Case>& cohort, const ALConfig& cfg);

// One full cycle: train from scratch on the labeled cases, compute group
// weights when the strategy needs them, score the unlabeled pool, select
// a batch, move it labeled-ward (the stored ground truth is the oracle),
// evaluate on the held-out test set, and emit the record.
std::pair<PoolState, CycleRecord> run_cycle(const PoolState& state,
                                            const std::vector<Case>& cohort,
                                            const ALConfig& cfg,
                                            const std::vector<Case>& test_set);

// init_pool, a cycle-0 pre-selection evaluation, then n_cycles cycles;
// returns n_cycles + 1 records so curves start at n_labeled = n_initial.
std::vector<CycleRecord> run_experiment(const ALConfig& cfg,
                                        const std::vector<Case>& cohort,
                                        const std::vector<Case>& test_set);

// Distinct groups present in a cohort, ordered by id.
std::vector<GroupId> cohort_groups(const std::vector<Case>& cohort);

} // namespace fairal
