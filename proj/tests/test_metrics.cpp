#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fairal/metrics.hpp"
#include "fairal/rng.hpp"

using namespace fairal;

namespace {

const GroupId g1{1, "G1"};
const GroupId g2{2, "G2"};
const GroupId g3{3, "G3"};

BinaryMask mask_of(std::initializer_list<std::uint8_t> bits) {
    BinaryMask m{{static_cast<std::uint32_t>(bits.size()), 1, 1}, bits};
    return m;
}

std::vector<CaseScore> scores_of(const GroupId& g, std::initializer_list<double> dices,
                                 int id_base = 0) {
    std::vector<CaseScore> out;
    int i = id_base;
    for (double d : dices) out.push_back({"c" + std::to_string(i++), g, d});
    return out;
}

std::vector<CaseScore> concat(std::vector<CaseScore> a, const std::vector<CaseScore>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

} // namespace

TEST_CASE("dice examples") {
    const auto a = mask_of({1, 1, 0, 0, 1});
    CHECK(dice(a, a) == doctest::Approx(1.0));

    const auto b = mask_of({0, 0, 1, 1, 0});
    CHECK(dice(a, b) == doctest::Approx(0.0));

    // |A| = 4, |B| = 6, |A∩B| = 3 -> 0.6
    BinaryMask pred{{10, 1, 1}, {1, 1, 1, 1, 0, 0, 0, 0, 0, 0}};
    BinaryMask truth{{10, 1, 1}, {1, 1, 1, 0, 1, 1, 1, 0, 0, 0}};
    CHECK(dice(pred, truth) == doctest::Approx(0.6));

    // both empty -> 1.0 by convention
    const auto none = mask_of({0, 0, 0});
    CHECK(dice(none, none) == doctest::Approx(1.0));
    // empty vs nonempty -> 0 by the formula
    CHECK(dice(none, mask_of({1, 0, 0})) == doctest::Approx(0.0));

    CHECK_THROWS_AS(dice(a, mask_of({1, 1})), ShapeMismatch);
}

TEST_CASE("dice is symmetric") {
    Rng rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        BinaryMask x{{8, 4, 2}, {}}, y{{8, 4, 2}, {}};
        x.data.resize(x.shape.total());
        y.data.resize(y.shape.total());
        for (auto& v : x.data) v = rng.uniform() < 0.4;
        for (auto& v : y.data) v = rng.uniform() < 0.4;
        CHECK(dice(x, y) == doctest::Approx(dice(y, x)).epsilon(1e-15));
    }
}

TEST_CASE("group means") {
    auto means = group_means(concat(scores_of(g1, {0.8}), scores_of(g2, {0.9}, 10)));
    REQUIRE(means.size() == 2);
    CHECK(means[0].group == g1);
    CHECK(means[0].mean_dice == doctest::Approx(0.8));
    CHECK(means[1].mean_dice == doctest::Approx(0.9));

    means = group_means(scores_of(g1, {0.5, 0.7}));
    REQUIRE(means.size() == 1);
    CHECK(means[0].mean_dice == doctest::Approx(0.6));

    means = group_means(concat(scores_of(g1, {0.7, 0.8}), scores_of(g2, {0.9, 1.0}, 10)));
    CHECK(means[0].mean_dice == doctest::Approx(0.75));
    CHECK(means[1].mean_dice == doctest::Approx(0.95));

    CHECK_THROWS_AS(group_means(scores_of(g1, {0.5}), {g1, g2}), MissingGroup);
    CHECK_NOTHROW(group_means(concat(scores_of(g1, {0.5}), scores_of(g2, {0.6}, 5)), {g1, g2}));
}

TEST_CASE("delta examples") {
    CHECK(delta(0.84, {{g1, 0.75, 15}, {g2, 0.93, 15}}) == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(delta(0.9, {{g1, 0.9, 3}}) == doctest::Approx(0.0));
    CHECK(delta(0.90, {{g1, 0.90, 2}, {g2, 0.90, 2}}) == doctest::Approx(0.0));
}

TEST_CASE("essp examples") {
    CHECK(essp(0.84, 0.18) == doctest::Approx(0.84 / 1.18).epsilon(1e-12));
    CHECK(essp(0.84, 0.18) == doctest::Approx(0.7119).epsilon(5e-4));
    CHECK(essp(0.77, 0.0) == doctest::Approx(0.77));
    // formula, not the table's rounded value
    CHECK(essp(0.91, 0.04) == doctest::Approx(0.875).epsilon(1e-12));
}

TEST_CASE("fairness_report composes the pieces") {
    auto r = fairness_report(concat(scores_of(g1, {1.0}), scores_of(g2, {1.0}, 10)));
    CHECK(r.overall_dice == doctest::Approx(1.0));
    CHECK(r.delta == doctest::Approx(0.0));
    CHECK(r.essp == doctest::Approx(1.0));

    // Table-style row: 15 cases at 0.75 vs 15 at 0.93
    std::vector<CaseScore> t3;
    for (int i = 0; i < 15; ++i) t3.push_back({"a" + std::to_string(i), g1, 0.75});
    for (int i = 0; i < 15; ++i) t3.push_back({"b" + std::to_string(i), g2, 0.93});
    r = fairness_report(t3);
    CHECK(r.overall_dice == doctest::Approx(0.84).epsilon(1e-12));
    CHECK(r.delta == doctest::Approx(0.18).epsilon(1e-12));
    CHECK(r.essp == doctest::Approx(0.7119).epsilon(5e-4));

    r = fairness_report(concat(scores_of(g1, {0.7, 0.8}), scores_of(g2, {0.9, 1.0}, 10)));
    CHECK(r.overall_dice == doctest::Approx(0.85));
    CHECK(r.delta == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(r.essp == doctest::Approx(0.85 / 1.2).epsilon(1e-12));
    CHECK(r.group_dice("G1") == doctest::Approx(0.75));
    CHECK(r.group_dice("G2") == doctest::Approx(0.95));

    CHECK_THROWS_AS(fairness_report({}), NoDataError);
}

TEST_CASE("pooled mean, not mean of group means") {
    // 3 cases at 0.6 vs 1 case at 1.0: pooled 0.7, group-mean average 0.8
    auto r = fairness_report(concat(scores_of(g1, {0.6, 0.6, 0.6}), scores_of(g2, {1.0}, 10)));
    CHECK(r.overall_dice == doctest::Approx(0.7));
}

TEST_CASE("report invariants over random score sets") {
    Rng rng(777);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<CaseScore> scores;
        const int n1 = 1 + static_cast<int>(rng.bounded(6));
        const int n2 = 1 + static_cast<int>(rng.bounded(6));
        for (int i = 0; i < n1; ++i) scores.push_back({"x" + std::to_string(i), g1, rng.uniform()});
        for (int i = 0; i < n2; ++i) scores.push_back({"y" + std::to_string(i), g2, rng.uniform()});
        const auto r = fairness_report(scores);

        CHECK(r.essp <= r.overall_dice + 1e-15);
        if (r.delta == 0.0) CHECK(r.essp == doctest::Approx(r.overall_dice));
        CHECK(r.delta == doctest::Approx(delta(r.overall_dice, r.per_group)).epsilon(1e-12));

        // relabeling invariance
        std::vector<CaseScore> relabeled = scores;
        for (auto& s : relabeled) s.group = s.group.id == 1 ? GroupId{9, "Z"} : GroupId{4, "A"};
        CHECK(fairness_report(relabeled).delta == doctest::Approx(r.delta).epsilon(1e-12));

        // equal-sized groups: delta collapses to |mean1 - mean2|
        if (n1 == n2) {
            const double gap = std::abs(r.per_group[0].mean_dice - r.per_group[1].mean_dice);
            CHECK(r.delta == doctest::Approx(gap).epsilon(1e-9));
        }
    }
}
