#include "fairal/loop.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "fairal/rng.hpp"

namespace fairal {

namespace {

std::unordered_map<std::string, const Case*> index_cases(const std::vector<Case>& cohort) {
    std::unordered_map<std::string, const Case*> idx;
    idx.reserve(cohort.size());
    for (const auto& c : cohort) {
        if (!idx.emplace(c.case_id, &c).second) {
            throw DataError("duplicate case id: " + c.case_id);
        }
    }
    return idx;
}

std::vector<const Case*> gather(const std::set<std::string>& ids,
                                const std::unordered_map<std::string, const Case*>& idx) {
    std::vector<const Case*> out;
    out.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = idx.find(id);
        if (it == idx.end()) throw DataError("case id not in cohort: " + id);
        out.push_back(it->second);
    }
    return out;
}

double group1_ratio_of(const std::set<std::string>& labeled,
                       const std::unordered_map<std::string, const Case*>& idx) {
    if (labeled.empty()) return 0.0;
    std::size_t g1 = 0;
    for (const auto& id : labeled) {
        if (idx.at(id)->group.id == kGroup1.id) ++g1;
    }
    return static_cast<double>(g1) / static_cast<double>(labeled.size());
}

std::uint64_t cycle_seed(std::uint64_t run_seed, std::string_view channel, std::size_t cycle) {
    return derive_seed(derive_seed(run_seed, channel), static_cast<std::uint64_t>(cycle));
}

struct TrainedEvaluation {
    SegmenterParams params;
    std::vector<CaseScore> labeled_scores;
    FairnessReport labeled_report;
    FairnessReport test_report;
    std::optional<GroupWeightTable> weights;
};

// Steps shared by the cycle-0 record and every run_cycle: train from
// scratch, score the labeled set, derive weights when needed, evaluate
// the test split.
TrainedEvaluation train_and_evaluate(const PoolState& state,
                                     const std::vector<Case>& cohort,
                                     const std::unordered_map<std::string, const Case*>& idx,
                                     const ALConfig& cfg,
                                     const std::vector<Case>& test_set) {
    TrainedEvaluation ev;
    const auto labeled_cases = gather(state.labeled, idx);
    std::vector<Case> labeled;
    labeled.reserve(labeled_cases.size());
    for (const Case* c : labeled_cases) labeled.push_back(*c);

    TrainConfig hyper = cfg.train;
    hyper.seed = cycle_seed(cfg.run_seed, "train", state.cycle);
    ev.params = train(labeled, hyper);

    ev.labeled_scores = evaluate_cases(ev.params, labeled, cfg.threshold_value);
    ev.labeled_report = fairness_report(ev.labeled_scores);
    if (cfg.strategy == StrategyKind::WeightedLocalizedEntropy) {
        ev.weights = compute_group_weights(ev.labeled_scores, cohort_groups(cohort));
    }
    ev.test_report = fairness_report(evaluate_cases(ev.params, test_set, cfg.threshold_value));
    return ev;
}

} // namespace

void ALConfig::validate(std::size_t pool_size) const {
    if (n_initial < 1) throw ConfigError("n_initial must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be positive");
    std::size_t sum = 0;
    for (const auto& gc : initial_group_counts) sum += gc.count;
    if (sum != n_initial) {
        throw ConfigError("initial group counts must sum to n_initial");
    }
    if (n_initial + n_cycles * batch_size > pool_size) {
        throw ConfigError("labeling budget exceeds pool size");
    }
    if (dilation_radius < 0) throw ConfigError("dilation_radius must be >= 0");
    if (!(threshold_value > 0.0 && threshold_value < 1.0)) {
        throw ConfigError("threshold must be in (0, 1)");
    }
    if (train.epochs < 0) throw ConfigError("epochs must be >= 0");
}

std::vector<GroupId> cohort_groups(const std::vector<Case>& cohort) {
    std::map<int, GroupId> seen;
    for (const auto& c : cohort) seen.emplace(c.group.id, c.group);
    std::vector<GroupId> out;
    out.reserve(seen.size());
    for (const auto& [id, g] : seen) out.push_back(g);
    return out;
}

PoolState init_pool(const std::vector<Case>& cohort, const ALConfig& cfg) {
    cfg.validate(cohort.size());
    index_cases(cohort); // duplicate-id check

    PoolState state;
    for (const auto& c : cohort) state.unlabeled.insert(c.case_id);

    for (const auto& gc : cfg.initial_group_counts) {
        std::vector<std::string> ids;
        for (const auto& c : cohort) {
            if (c.group.id == gc.group.id) ids.push_back(c.case_id);
        }
        std::sort(ids.begin(), ids.end());
        if (ids.size() < gc.count) {
            throw ConfigError("group " + gc.group.name + " has too few cases for the initial draw");
        }
        Rng rng(derive_seed(cfg.run_seed, "init:" + gc.group.name));
        rng.shuffle(ids);
        for (std::size_t i = 0; i < gc.count; ++i) {
            state.labeled.insert(ids[i]);
            state.unlabeled.erase(ids[i]);
        }
    }
    state.cycle = 0;
    return state;
}

std::pair<PoolState, CycleRecord> run_cycle(const PoolState& state,
                                            const std::vector<Case>& cohort,
                                            const ALConfig& cfg,
                                            const std::vector<Case>& test_set) {
    if (state.unlabeled.size() < cfg.batch_size) {
        throw BudgetExceedsPool("unlabeled pool exhausted");
    }
    const auto idx = index_cases(cohort);
    TrainedEvaluation ev = train_and_evaluate(state, cohort, idx, cfg, test_set);

    // Score the unlabeled pool. Random needs no predictions.
    const auto pool_cases = gather(state.unlabeled, idx);
    std::vector<ProbabilityVolume> predictions;
    std::vector<PoolCandidate> candidates;
    candidates.reserve(pool_cases.size());
    if (cfg.strategy != StrategyKind::Random) {
        predictions.reserve(pool_cases.size());
        for (const Case* c : pool_cases) predictions.push_back(predict(ev.params, c->image));
    }
    for (std::size_t i = 0; i < pool_cases.size(); ++i) {
        candidates.push_back({pool_cases[i]->case_id, pool_cases[i]->group,
                              cfg.strategy == StrategyKind::Random ? nullptr : &predictions[i]});
    }
    const auto scores = score_candidates(cfg.strategy, candidates, ev.weights,
                                         cycle_seed(cfg.run_seed, "score", state.cycle),
                                         cfg.dilation_radius, cfg.threshold_value);
    const auto batch = select_batch(scores, cfg.batch_size);

    PoolState next = state;
    CycleRecord rec;
    for (const auto& id : batch) {
        next.labeled.insert(id);
        next.unlabeled.erase(id);
        rec.selected.push_back({id, idx.at(id)->group});
    }
    next.cycle = state.cycle + 1;

    rec.cycle = next.cycle;
    rec.n_labeled = next.labeled.size();
    rec.labeled_report = std::move(ev.labeled_report);
    rec.test_report = std::move(ev.test_report);
    rec.weights = std::move(ev.weights);
    rec.group1_ratio = group1_ratio_of(next.labeled, idx);
    rec.pool_scores = scores;
    return {std::move(next), std::move(rec)};
}

std::vector<CycleRecord> run_experiment(const ALConfig& cfg,
                                        const std::vector<Case>& cohort,
                                        const std::vector<Case>& test_set) {
    PoolState state = init_pool(cohort, cfg);
    const auto idx = index_cases(cohort);

    std::vector<CycleRecord> records;
    records.reserve(cfg.n_cycles + 1);

    // Cycle-0 pre-selection evaluation so curves start at n_initial.
    {
        TrainedEvaluation ev = train_and_evaluate(state, cohort, idx, cfg, test_set);
        CycleRecord rec;
        rec.cycle = 0;
        rec.n_labeled = state.labeled.size();
        rec.labeled_report = std::move(ev.labeled_report);
        rec.test_report = std::move(ev.test_report);
        rec.weights = std::move(ev.weights);
        rec.group1_ratio = group1_ratio_of(state.labeled, idx);
        records.push_back(std::move(rec));
    }

    for (std::size_t i = 0; i < cfg.n_cycles; ++i) {
        auto [next, rec] = run_cycle(state, cohort, cfg, test_set);
        state = std::move(next);
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace fairal
