#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fairal/acquisition.hpp"
#include "fairal/rng.hpp"

using namespace fairal;

namespace {

const GroupId g1{1, "G1"};
const GroupId g2{2, "G2"};
const GroupId g3{3, "G3"};

std::vector<CaseScore> scores_of(const GroupId& g, std::initializer_list<double> dices,
                                 int id_base = 0) {
    std::vector<CaseScore> out;
    int i = id_base;
    for (double d : dices) out.push_back({"c" + std::to_string(i++), g, d});
    return out;
}

// Independent long-double oracle for z-scores and softmax weights,
// kept free of the implementation's code paths.
struct WeightOracle {
    std::vector<long double> z;
    std::vector<long double> w;
};

WeightOracle weight_oracle(const std::vector<long double>& all_dices,
                           const std::vector<long double>& group_means) {
    long double mean = 0.0L;
    for (auto d : all_dices) mean += d;
    mean /= all_dices.size();
    long double var = 0.0L;
    for (auto d : all_dices) var += (d - mean) * (d - mean);
    var /= all_dices.size();
    const long double sigma = sqrtl(var);

    WeightOracle out;
    for (auto gm : group_means) out.z.push_back(sigma < 1e-9L ? 0.0L : (mean - gm) / sigma);
    long double sum = 0.0L;
    for (auto z : out.z) sum += expl(z);
    for (auto z : out.z) out.w.push_back(expl(z) / sum);
    return out;
}

// Brute-force H-hat: straight loops over threshold, one-pass dilations,
// and the region average.
double localized_entropy_oracle(const ProbabilityVolume& probs, int radius, double t) {
    const auto& s = probs.shape;
    std::vector<std::uint8_t> region(s.total());
    for (std::size_t i = 0; i < probs.data.size(); ++i) region[i] = probs.data[i] > t;
    for (int r = 0; r < radius; ++r) {
        auto grown = region;
        for (std::uint32_t z = 0; z < s.nz; ++z)
            for (std::uint32_t y = 0; y < s.ny; ++y)
                for (std::uint32_t x = 0; x < s.nx; ++x) {
                    if (!region[s.index(x, y, z)]) continue;
                    if (x > 0) grown[s.index(x - 1, y, z)] = 1;
                    if (x + 1 < s.nx) grown[s.index(x + 1, y, z)] = 1;
                    if (y > 0) grown[s.index(x, y - 1, z)] = 1;
                    if (y + 1 < s.ny) grown[s.index(x, y + 1, z)] = 1;
                    if (z > 0) grown[s.index(x, y, z - 1)] = 1;
                    if (z + 1 < s.nz) grown[s.index(x, y, z + 1)] = 1;
                }
        region = grown;
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < region.size(); ++i) {
        if (!region[i]) continue;
        const double p = probs.data[i];
        double h = 0.0;
        if (p > 0.0) h -= p * std::log(p);
        if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
        sum += h;
        ++n;
    }
    REQUIRE(n > 0);
    return sum / static_cast<double>(n);
}

// Blob of p=0.5 uncertainty around a confident p=0.9 core, background 0.1.
ProbabilityVolume core_and_blob(VolumeShape s, std::uint32_t cx, std::uint32_t cy, std::uint32_t cz) {
    auto vol = ProbabilityVolume::filled(s, 0.1);
    for (std::uint32_t z = 0; z < s.nz; ++z)
        for (std::uint32_t y = 0; y < s.ny; ++y)
            for (std::uint32_t x = 0; x < s.nx; ++x) {
                const double d = std::sqrt(double(x - cx) * (x - cx) + double(y - cy) * (y - cy) +
                                           double(z - cz) * (z - cz));
                if (d <= 1.5) {
                    vol.data[s.index(x, y, z)] = 0.9;
                } else if (d <= 3.0) {
                    vol.data[s.index(x, y, z)] = 0.5;
                }
            }
    return vol;
}

std::vector<AcquisitionScore> fixed_scores(std::initializer_list<std::pair<const char*, double>> kv) {
    std::vector<AcquisitionScore> out;
    for (const auto& [id, score] : kv) {
        AcquisitionScore s;
        s.case_id = id;
        s.raw_entropy = score;
        s.score = score;
        out.push_back(s);
    }
    return out;
}

} // namespace

TEST_CASE("localized entropy matches the brute-force oracle") {
    const auto vol = core_and_blob({11, 11, 11}, 5, 5, 5);
    const auto res = compute_localized_entropy(vol, 2, 0.5);
    CHECK_FALSE(res.fallback_used);
    CHECK(res.h_hat > 0.0);
    CHECK(res.h_hat <= std::log(2.0) + 1e-12);
    CHECK(res.h_hat == doctest::Approx(localized_entropy_oracle(vol, 2, 0.5)).epsilon(1e-12));

    // different radius, off-center core
    const auto vol2 = core_and_blob({12, 9, 10}, 3, 4, 6);
    for (int radius : {0, 1, 3}) {
        const auto r2 = compute_localized_entropy(vol2, radius, 0.5);
        CHECK(r2.h_hat == doctest::Approx(localized_entropy_oracle(vol2, radius, 0.5)).epsilon(1e-12));
    }
}

TEST_CASE("localized entropy of a uniform confident volume") {
    const auto vol = ProbabilityVolume::filled({6, 6, 6}, 0.9);
    const auto res = compute_localized_entropy(vol, 2, 0.5);
    CHECK_FALSE(res.fallback_used);
    CHECK(res.region_size == vol.shape.total());
    CHECK(res.h_hat == doctest::Approx(0.3250829733914482).epsilon(1e-12));
}

TEST_CASE("empty predicted mask falls back to the whole-volume mean") {
    const auto vol = ProbabilityVolume::filled({6, 6, 6}, 0.2);
    const auto res = compute_localized_entropy(vol, 2, 0.5);
    CHECK(res.fallback_used);
    CHECK(res.region_size == vol.shape.total());
    CHECK(res.h_hat == doctest::Approx(0.5004024235381879).epsilon(1e-12));
}

TEST_CASE("H-hat is invariant to replicating the ROI pattern") {
    // same local pattern twice along z, far apart and away from bounds:
    // the region doubles but per-voxel entropies repeat
    const auto single = core_and_blob({24, 24, 24}, 12, 12, 12);
    auto doubled = ProbabilityVolume::filled({24, 24, 48}, 0.1);
    for (std::uint32_t z = 0; z < 24; ++z)
        for (std::uint32_t y = 0; y < 24; ++y)
            for (std::uint32_t x = 0; x < 24; ++x) {
                const double v = single.data[single.shape.index(x, y, z)];
                doubled.data[doubled.shape.index(x, y, z)] = v;
                doubled.data[doubled.shape.index(x, y, z + 24)] = v;
            }
    const auto a = compute_localized_entropy(single, 2, 0.5);
    const auto b = compute_localized_entropy(doubled, 2, 0.5);
    CHECK(b.region_size == 2 * a.region_size);
    CHECK(b.h_hat == doctest::Approx(a.h_hat).epsilon(1e-9));
}

TEST_CASE("softmax weights normalize and are shift-invariant") {
    Rng rng(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.bounded(4);
        std::vector<double> z(n);
        for (auto& v : z) v = rng.normal(0.0, 3.0);
        const auto w = softmax_weights(z);

        double sum = 0.0;
        for (double v : w) {
            CHECK(v > 0.0);
            sum += v;
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

        const double shift = rng.normal(0.0, 10.0);
        auto shifted = z;
        for (auto& v : shifted) v += shift;
        const auto w2 = softmax_weights(shifted);
        for (std::size_t i = 0; i < n; ++i) CHECK(w2[i] == doctest::Approx(w[i]).epsilon(1e-9));
    }
}

TEST_CASE("group weights: degenerate and frozen examples") {
    // all dices equal -> sigma 0 -> uniform
    auto table = compute_group_weights(
        {{"a", g1, 0.8}, {"b", g1, 0.8}, {"c", g2, 0.8}, {"d", g2, 0.8}}, {g1, g2});
    for (const auto& e : table.entries) {
        CHECK(e.z == 0.0);
        CHECK(e.w == doctest::Approx(0.5).epsilon(1e-12));
    }

    // frozen example, independently computed: G1 {0.7, 0.8}, G2 {0.9, 1.0}
    std::vector<CaseScore> scores = scores_of(g1, {0.7, 0.8});
    auto more = scores_of(g2, {0.9, 1.0}, 10);
    scores.insert(scores.end(), more.begin(), more.end());
    table = compute_group_weights(scores, {g1, g2});
    REQUIRE(table.entries.size() == 2);
    CHECK(table.entries[0].z == doctest::Approx(0.8944271909999159).epsilon(1e-12));
    CHECK(table.entries[1].z == doctest::Approx(-0.8944271909999159).epsilon(1e-12));
    CHECK(table.entries[0].w == doctest::Approx(0.8567867629677748).epsilon(1e-12));
    CHECK(table.entries[1].w == doctest::Approx(0.1432132370322252).epsilon(1e-12));

    // cross-check against the long-double oracle
    const auto oracle = weight_oracle({0.7L, 0.8L, 0.9L, 1.0L}, {0.75L, 0.95L});
    CHECK(table.entries[0].z == doctest::Approx(static_cast<double>(oracle.z[0])).epsilon(1e-12));
    CHECK(table.entries[0].w == doctest::Approx(static_cast<double>(oracle.w[0])).epsilon(1e-12));
    CHECK(table.entries[1].w == doctest::Approx(static_cast<double>(oracle.w[1])).epsilon(1e-12));

    // three equal groups -> thirds
    std::vector<CaseScore> equal;
    for (const auto* g : {&g1, &g2, &g3}) {
        equal.push_back({"e" + g->name, *g, 0.8});
    }
    table = compute_group_weights(equal, {g1, g2, g3});
    for (const auto& e : table.entries) CHECK(e.w == doctest::Approx(1.0 / 3).epsilon(1e-12));

    CHECK_THROWS_AS(compute_group_weights(scores_of(g1, {0.8}), {g1, g2}), MissingGroup);
}

TEST_CASE("worse-performing groups get larger weights, monotonically") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CaseScore> scores;
        const int n1 = 1 + static_cast<int>(rng.bounded(6));
        const int n2 = 1 + static_cast<int>(rng.bounded(6));
        for (int i = 0; i < n1; ++i)
            scores.push_back({"a" + std::to_string(i), g1, rng.uniform(0.5, 1.0)});
        for (int i = 0; i < n2; ++i)
            scores.push_back({"b" + std::to_string(i), g2, rng.uniform(0.5, 1.0)});
        const auto table = compute_group_weights(scores, {g1, g2});
        // ordering invariant: lower mean dice -> larger z -> larger w
        if (table.entries[0].mean_dice < table.entries[1].mean_dice) {
            CHECK(table.entries[0].z > table.entries[1].z);
            CHECK(table.entries[0].w > table.entries[1].w);
        }

        // lowering G1's mean (a uniform shift, other group untouched)
        // never decreases G1's weight
        auto lowered = scores;
        const double eps = rng.uniform(0.01, 0.5);
        for (int i = 0; i < n1; ++i) lowered[i].dice -= eps;
        const auto table2 = compute_group_weights(lowered, {g1, g2});
        CHECK(table2.entries[0].w >= table.entries[0].w - 1e-12);
    }
}

TEST_CASE("score_candidates strategies") {
    const auto confident = ProbabilityVolume::filled({6, 6, 6}, 0.9);
    const auto uncertain = core_and_blob({6, 6, 6}, 3, 3, 3);
    const std::vector<PoolCandidate> pool = {
        {"p1", g1, &confident},
        {"p2", g2, &uncertain},
    };

    SUBCASE("random is deterministic and order-independent") {
        const auto a = score_candidates(StrategyKind::Random, pool, std::nullopt, 42);
        const auto b = score_candidates(StrategyKind::Random, pool, std::nullopt, 42);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].score == b[i].score);
            CHECK(a[i].score >= 0.0);
            CHECK(a[i].score < 1.0);
        }
        const std::vector<PoolCandidate> reversed = {pool[1], pool[0]};
        const auto c = score_candidates(StrategyKind::Random, reversed, std::nullopt, 42);
        CHECK(c[1].score == a[0].score);
        CHECK(c[0].score == a[1].score);
        // different seed -> different draws
        const auto d = score_candidates(StrategyKind::Random, pool, std::nullopt, 43);
        CHECK(d[0].score != a[0].score);
    }

    SUBCASE("mean entropy is the whole-volume average") {
        const auto s = score_candidates(StrategyKind::MeanEntropy, pool, std::nullopt, 0);
        CHECK(s[0].score == doctest::Approx(0.3250829733914482).epsilon(1e-12));
        CHECK(s[0].region_size == confident.shape.total());
        double expected = 0.0;
        for (double p : uncertain.data) {
            if (p > 0.0) expected -= p * std::log(p);
            if (p < 1.0) expected -= (1.0 - p) * std::log(1.0 - p);
        }
        expected /= static_cast<double>(uncertain.data.size());
        CHECK(s[1].score == doctest::Approx(expected).epsilon(1e-12));
    }

    SUBCASE("localized entropy scores are H-hat") {
        const auto s = score_candidates(StrategyKind::LocalizedEntropy, pool, std::nullopt, 0, 2, 0.5);
        CHECK(s[1].score == doctest::Approx(localized_entropy_oracle(uncertain, 2, 0.5)).epsilon(1e-12));
        CHECK(s[1].weight_applied == 1.0);
    }

    SUBCASE("weighted applies the group weight") {
        GroupWeightTable weights;
        weights.entries = {{g1, 0.7, 0.5, 0.8567867629677748}, {g2, 0.9, -0.5, 0.1432132370322252}};
        const auto s = score_candidates(StrategyKind::WeightedLocalizedEntropy, pool, weights, 0, 2, 0.5);
        CHECK(s[0].weight_applied == doctest::Approx(0.8567867629677748));
        CHECK(s[0].score == doctest::Approx(s[0].raw_entropy * 0.8567867629677748).epsilon(1e-12));
        CHECK(s[1].score == doctest::Approx(s[1].raw_entropy * 0.1432132370322252).epsilon(1e-12));
        // frozen product example: H-hat 0.5 in the heavy group
        CHECK(0.5 * 0.8567867629677748 == doctest::Approx(0.4283933814838874).epsilon(1e-12));
    }

    SUBCASE("weight table presence is enforced both ways") {
        GroupWeightTable weights;
        weights.entries = {{g1, 0.7, 0.0, 0.5}, {g2, 0.9, 0.0, 0.5}};
        CHECK_THROWS_AS(
            score_candidates(StrategyKind::WeightedLocalizedEntropy, pool, std::nullopt, 0),
            ConfigError);
        CHECK_THROWS_AS(score_candidates(StrategyKind::LocalizedEntropy, pool, weights, 0),
                        ConfigError);
        CHECK_THROWS_AS(score_candidates(StrategyKind::Random, pool, weights, 0), ConfigError);
    }
}

TEST_CASE("uniform weights reproduce the unweighted ranking exactly") {
    Rng rng(9);
    std::vector<ProbabilityVolume> volumes;
    std::vector<PoolCandidate> pool;
    for (int i = 0; i < 12; ++i) {
        auto vol = ProbabilityVolume::filled({6, 6, 6}, 0.1);
        for (auto& v : vol.data) v = rng.uniform() < 0.2 ? rng.uniform(0.4, 0.95) : v;
        volumes.push_back(std::move(vol));
    }
    for (int i = 0; i < 12; ++i) {
        pool.push_back({"c" + std::to_string(100 + i), i % 2 ? g1 : g2, &volumes[i]});
    }

    GroupWeightTable uniform;
    uniform.entries = {{g1, 0.8, 0.0, 0.5}, {g2, 0.8, 0.0, 0.5}};
    const auto plain = score_candidates(StrategyKind::LocalizedEntropy, pool, std::nullopt, 0, 2, 0.5);
    const auto weighted =
        score_candidates(StrategyKind::WeightedLocalizedEntropy, pool, uniform, 0, 2, 0.5);
    for (std::size_t b = 1; b <= pool.size(); ++b) {
        CHECK(select_batch(plain, b) == select_batch(weighted, b));
    }
}

TEST_CASE("shift-invariance of z leaves the selected batch unchanged") {
    Rng rng(13);
    std::vector<ProbabilityVolume> volumes;
    volumes.reserve(10);
    std::vector<PoolCandidate> pool;
    for (int i = 0; i < 10; ++i) {
        auto vol = ProbabilityVolume::filled({6, 6, 6}, 0.15);
        for (auto& v : vol.data) v = rng.uniform() < 0.3 ? rng.uniform(0.3, 0.9) : v;
        volumes.push_back(std::move(vol));
        pool.push_back({"c" + std::to_string(i), i % 2 ? g1 : g2, &volumes.back()});
    }
    const std::vector<double> z = {1.3, -0.4};
    std::vector<std::string> reference;
    for (double shift : {0.0, 2.5, -7.0}) {
        const auto w = softmax_weights({z[0] + shift, z[1] + shift});
        GroupWeightTable table;
        table.entries = {{g1, 0.0, z[0] + shift, w[0]}, {g2, 0.0, z[1] + shift, w[1]}};
        const auto scores =
            score_candidates(StrategyKind::WeightedLocalizedEntropy, pool, table, 0, 2, 0.5);
        if (shift == 0.0) {
            reference = select_batch(scores, 4);
        } else {
            CHECK(select_batch(scores, 4) == reference);
        }
    }
}

TEST_CASE("select_batch ordering and ties") {
    CHECK(select_batch(fixed_scores({{"a", 0.9}, {"b", 0.1}, {"c", 0.5}}), 2) ==
          std::vector<std::string>{"a", "c"});
    CHECK(select_batch(fixed_scores({{"d", 0.3}, {"b", 0.3}, {"a", 0.3}, {"c", 0.3}}), 2) ==
          std::vector<std::string>{"a", "b"});
    CHECK(select_batch(fixed_scores({{"a", 0.9}, {"b", 0.1}, {"c", 0.5}}), 3) ==
          std::vector<std::string>{"a", "c", "b"});
    CHECK_THROWS_AS(select_batch(fixed_scores({{"a", 0.9}}), 2), BudgetExceedsPool);

    // input order must not matter
    const auto batch1 = select_batch(fixed_scores({{"a", 0.5}, {"b", 0.5}, {"c", 0.7}}), 2);
    const auto batch2 = select_batch(fixed_scores({{"c", 0.7}, {"b", 0.5}, {"a", 0.5}}), 2);
    CHECK(batch1 == batch2);
}
