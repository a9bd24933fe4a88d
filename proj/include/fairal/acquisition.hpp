#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairal/metrics.hpp"
#include "fairal/volume.hpp"

namespace fairal {

enum class StrategyKind {
    Random,
    MeanEntropy,
    LocalizedEntropy,
    WeightedLocalizedEntropy,
};

std::string to_string(StrategyKind s);
// Throws ConfigError on an unknown name.
StrategyKind strategy_from_string(const std::string& name);

// Per-group standardized deficit z_g and softmax weight w_g, ordered by
// GroupId. Weights sum to 1; a lower group mean dice gives a larger weight.
struct GroupWeightTable {
    struct Entry {
        GroupId group;
        double mean_dice = 0.0;
        double z = 0.0;
        double w = 0.0;
    };
    std::vector<Entry> entries;

    // Throws MissingGroup when the group is not in the table.
    double weight_of(const GroupId& g) const;
};

struct AcquisitionScore {
    std::string case_id;
    GroupId group;
    double raw_entropy = 0.0;   // H-hat, whole-volume mean H, or the random draw
    std::size_t region_size = 0;
    double weight_applied = 1.0;
    double score = 0.0;         // weight_applied * raw_entropy
    bool fallback_used = false; // empty predicted mask, whole-volume fallback
};

struct LocalizedEntropyResult {
    double h_hat = 0.0;
    std::size_t region_size = 0;
    bool fallback_used = false;
};

// H-hat over R = dilate(threshold(probs, t), radius). An empty predicted
// mask falls back to the whole-volume mean entropy with
// region_size = total voxels.
LocalizedEntropyResult compute_localized_entropy(const ProbabilityVolume& probs,
                                                 int dilation_radius,
                                                 double threshold_value);

// Softmax over standardized scores; exposed so shift invariance and
// normalization are directly testable.
std::vector<double> softmax_weights(const std::vector<double>& z);

// z_g = (mean_all - mean_g) / sigma_all over all labeled-case dices, with
// sigma_all the population standard deviation. sigma_all below 1e-9
// degrades to uniform weights. Throws MissingGroup when a declared group
// has no labeled case.
GroupWeightTable compute_group_weights(const std::vector<CaseScore>& labeled_scores,
                                       const std::vector<GroupId>& declared);

struct PoolCandidate {
    std::string case_id;
    GroupId group;
    const ProbabilityVolume* probs = nullptr;
};

// Scores one pool under the given strategy. `weights` must be present
// exactly when the strategy is WeightedLocalizedEntropy; anything else is
// rejected as a misconfiguration. Random scores depend only on
// (rng_seed, case_id), never on pool order.
std::vector<AcquisitionScore> score_candidates(StrategyKind strategy,
                                               const std::vector<PoolCandidate>& pool,
                                               const std::optional<GroupWeightTable>& weights,
                                               std::uint64_t rng_seed,
                                               int dilation_radius = 2,
                                               double threshold_value = 0.5);

// The b highest-scoring case ids; ties broken by ascending case_id.
// Throws BudgetExceedsPool when b exceeds the pool.
std::vector<std::string> select_batch(const std::vector<AcquisitionScore>& scores, std::size_t b);

} // namespace fairal
