#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "fairal/metrics.hpp"
#include "fairal/volume.hpp"

namespace fairal {

inline const GroupId kGroup1{1, "G1"};
inline const GroupId kGroup2{2, "G2"};

// Synthetic biased cohort: both groups share global shape variation;
// Group 1 additionally gets a localized boundary bump whose magnitude is
// drawn from N(bias_mu, bias_sigma), clamped to >= 0.
struct CohortConfig {
    VolumeShape volume_shape{24, 24, 24};
    std::size_t n_per_group = 40;
    double bias_mu = 4.0;    // strong preset; weak preset uses 2.0
    double bias_sigma = 2.0;
    double noise_sigma = 0.35;
    std::uint64_t seed = 0;

    void validate() const;
};

// Named bias presets mirroring the two cohort conditions.
CohortConfig strong_bias_preset();
CohortConfig weak_bias_preset();

struct Case {
    std::string case_id;
    GroupId group;
    ScalarVolume image;
    BinaryMask truth;
};

inline constexpr std::size_t kFeatureCount = 7;
using FeatureVector = std::array<double, kFeatureCount>;

// Per-voxel logistic segmenter weights; w[0] multiplies the constant
// feature and acts as the bias term.
struct SegmenterParams {
    std::array<double, kFeatureCount> w{};
};

struct TrainConfig {
    double learning_rate = 0.5;
    int epochs = 1200;
    double l2 = 1e-4;
    std::uint64_t seed = 0;
};

// Deterministic given cfg.seed; group labels alternate across case ids.
// Throws ConfigError when the shape cannot contain the base ellipsoid.
std::vector<Case> generate_cohort(const CohortConfig& cfg);

// [1, intensity, 3x3x3 boxcar intensity, x, y, z in [-1,1], radius in [0,1]].
FeatureVector extract_features(const ScalarVolume& image,
                               std::uint32_t x, std::uint32_t y, std::uint32_t z);

// Training rows: all foreground voxels plus an equal-count seeded random
// background sample per case (class-balanced subsample).
struct TrainingSet {
    std::vector<FeatureVector> features;
    std::vector<double> labels;
};

TrainingSet build_training_set(const std::vector<Case>& labeled, std::uint64_t seed);

// Mean BCE + l2*||w||^2 and its analytic gradient over a row set.
double bce_loss(const SegmenterParams& params, const TrainingSet& rows, double l2);
std::array<double, kFeatureCount> bce_gradient(const SegmenterParams& params,
                                               const TrainingSet& rows, double l2);

// Full-batch gradient descent from zero init; deterministic given seed.
SegmenterParams train(const std::vector<Case>& labeled, const TrainConfig& hyper);

ProbabilityVolume predict(const SegmenterParams& params, const ScalarVolume& image);

// Dice of thresholded prediction against stored truth.
double evaluate_dice(const SegmenterParams& params, const Case& c, double threshold_value = 0.5);

std::vector<CaseScore> evaluate_cases(const SegmenterParams& params,
                                      const std::vector<Case>& cases,
                                      double threshold_value = 0.5);

} // namespace fairal
