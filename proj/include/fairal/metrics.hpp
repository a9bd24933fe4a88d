#pragma once

#include <string>
#include <vector>

#include "fairal/volume.hpp"

namespace fairal {

struct GroupId {
    int id = 0;
    std::string name;

    bool operator==(const GroupId&) const = default;
    bool operator<(const GroupId& other) const { return id < other.id; }
};

struct CaseScore {
    std::string case_id;
    GroupId group;
    double dice = 0.0; // in [0, 1]
};

struct GroupPerformance {
    GroupId group;
    double mean_dice = 0.0;
    std::size_t count = 0;
};

// DSC_overall is the pooled per-case mean, not the mean of group means;
// delta = sum_g |overall - mean_g|, essp = overall / (1 + delta).
struct FairnessReport {
    double overall_dice = 0.0;
    std::vector<GroupPerformance> per_group; // ordered by GroupId
    double delta = 0.0;
    double essp = 0.0;

    // Mean dice of the named group; NaN when absent.
    double group_dice(const std::string& name) const;
};

// 2|A∩B| / (|A|+|B|); both-empty convention is 1.0.
double dice(const BinaryMask& pred, const BinaryMask& truth);

// Per-group means over whatever groups appear in `scores`, ordered by id.
std::vector<GroupPerformance> group_means(const std::vector<CaseScore>& scores);

// Same, but every group in `declared` must have at least one score;
// throws MissingGroup otherwise.
std::vector<GroupPerformance> group_means(const std::vector<CaseScore>& scores,
                                          const std::vector<GroupId>& declared);

double delta(double overall, const std::vector<GroupPerformance>& per_group);

double essp(double overall, double delta);

// Throws NoDataError on empty input.
FairnessReport fairness_report(const std::vector<CaseScore>& scores);

} // namespace fairal
