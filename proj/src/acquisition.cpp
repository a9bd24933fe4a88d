#include "fairal/acquisition.hpp"

#include <algorithm>
#include <cmath>

#include "fairal/rng.hpp"

namespace fairal {

std::string to_string(StrategyKind s) {
    switch (s) {
        case StrategyKind::Random: return "Random";
        case StrategyKind::MeanEntropy: return "MeanEntropy";
        case StrategyKind::LocalizedEntropy: return "LocalizedEntropy";
        case StrategyKind::WeightedLocalizedEntropy: return "WeightedLocalizedEntropy";
    }
    return "?";
}

StrategyKind strategy_from_string(const std::string& name) {
    if (name == "Random") return StrategyKind::Random;
    if (name == "MeanEntropy") return StrategyKind::MeanEntropy;
    if (name == "LocalizedEntropy") return StrategyKind::LocalizedEntropy;
    if (name == "WeightedLocalizedEntropy") return StrategyKind::WeightedLocalizedEntropy;
    throw ConfigError("unknown strategy: " + name);
}

double GroupWeightTable::weight_of(const GroupId& g) const {
    for (const auto& e : entries) {
        if (e.group.id == g.id) return e.w;
    }
    throw MissingGroup("no weight for group " + g.name);
}

LocalizedEntropyResult compute_localized_entropy(const ProbabilityVolume& probs,
                                                 int dilation_radius,
                                                 double threshold_value) {
    const ScalarVolume entropy = bernoulli_entropy_map(probs);
    const BinaryMask region = dilate(threshold(probs, threshold_value), dilation_radius);
    LocalizedEntropyResult out;
    try {
        out.h_hat = masked_mean(entropy, region);
        out.region_size = region.popcount();
    } catch (const EmptyRegion&) {
        // Untrained early-cycle models can predict nothing; rank by the
        // whole-volume mean so the pool still orders.
        out.h_hat = masked_mean(entropy, BinaryMask::filled(probs.shape, true));
        out.region_size = probs.shape.total();
        out.fallback_used = true;
    }
    return out;
}

std::vector<double> softmax_weights(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    std::vector<double> w(z.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        w[i] = std::exp(z[i] - zmax);
        sum += w[i];
    }
    for (auto& v : w) v /= sum;
    return w;
}

GroupWeightTable compute_group_weights(const std::vector<CaseScore>& labeled_scores,
                                       const std::vector<GroupId>& declared) {
    if (labeled_scores.empty()) throw NoDataError("compute_group_weights: no labeled scores");
    const auto means = group_means(labeled_scores, declared);

    double mean_all = 0.0;
    for (const auto& s : labeled_scores) mean_all += s.dice;
    mean_all /= static_cast<double>(labeled_scores.size());

    // Population standard deviation over per-case dices.
    double var = 0.0;
    for (const auto& s : labeled_scores) {
        const double d = s.dice - mean_all;
        var += d * d;
    }
    var /= static_cast<double>(labeled_scores.size());
    const double sigma_all = std::sqrt(var);

    std::vector<double> z(means.size(), 0.0);
    if (sigma_all >= 1e-9) {
        for (std::size_t i = 0; i < means.size(); ++i) {
            z[i] = (mean_all - means[i].mean_dice) / sigma_all;
        }
    }
    const auto w = softmax_weights(z);

    GroupWeightTable table;
    table.entries.reserve(means.size());
    for (std::size_t i = 0; i < means.size(); ++i) {
        table.entries.push_back({means[i].group, means[i].mean_dice, z[i], w[i]});
    }
    return table;
}

namespace {

// Case-addressed draw so pool iteration order cannot perturb scores.
double random_score(std::uint64_t seed, const std::string& case_id) {
    Rng rng(derive_seed(seed, case_id));
    return rng.uniform();
}

} // namespace

std::vector<AcquisitionScore> score_candidates(StrategyKind strategy,
                                               const std::vector<PoolCandidate>& pool,
                                               const std::optional<GroupWeightTable>& weights,
                                               std::uint64_t rng_seed,
                                               int dilation_radius,
                                               double threshold_value) {
    const bool weighted = strategy == StrategyKind::WeightedLocalizedEntropy;
    if (weighted && !weights.has_value()) {
        throw ConfigError("weighted strategy requires a group weight table");
    }
    if (!weighted && weights.has_value()) {
        throw ConfigError("group weights supplied for a non-weighted strategy");
    }

    std::vector<AcquisitionScore> out;
    out.reserve(pool.size());
    for (const auto& cand : pool) {
        AcquisitionScore s;
        s.case_id = cand.case_id;
        s.group = cand.group;
        switch (strategy) {
            case StrategyKind::Random:
                s.raw_entropy = random_score(rng_seed, cand.case_id);
                s.region_size = 0;
                break;
            case StrategyKind::MeanEntropy: {
                const ScalarVolume h = bernoulli_entropy_map(*cand.probs);
                s.raw_entropy = masked_mean(h, BinaryMask::filled(cand.probs->shape, true));
                s.region_size = cand.probs->shape.total();
                break;
            }
            case StrategyKind::LocalizedEntropy:
            case StrategyKind::WeightedLocalizedEntropy: {
                const auto le = compute_localized_entropy(*cand.probs, dilation_radius, threshold_value);
                s.raw_entropy = le.h_hat;
                s.region_size = le.region_size;
                s.fallback_used = le.fallback_used;
                break;
            }
        }
        s.weight_applied = weighted ? weights->weight_of(cand.group) : 1.0;
        s.score = s.weight_applied * s.raw_entropy;
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<std::string> select_batch(const std::vector<AcquisitionScore>& scores, std::size_t b) {
    if (b > scores.size()) {
        throw BudgetExceedsPool("batch size exceeds pool size");
    }
    std::vector<const AcquisitionScore*> order;
    order.reserve(scores.size());
    for (const auto& s : scores) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const AcquisitionScore* a, const AcquisitionScore* b) {
        if (a->score != b->score) return a->score > b->score;
        return a->case_id < b->case_id;
    });
    std::vector<std::string> out;
    out.reserve(b);
    for (std::size_t i = 0; i < b; ++i) out.push_back(order[i]->case_id);
    return out;
}

} // namespace fairal
