#include "fairal/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace fairal {

double FairnessReport::group_dice(const std::string& name) const {
    for (const auto& g : per_group) {
        if (g.group.name == name) return g.mean_dice;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double dice(const BinaryMask& pred, const BinaryMask& truth) {
    if (pred.shape != truth.shape) {
        throw ShapeMismatch("dice: mask shapes differ");
    }
    std::size_t a = 0, b = 0, both = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool pa = pred.data[i] != 0;
        const bool pb = truth.data[i] != 0;
        a += pa;
        b += pb;
        both += (pa && pb);
    }
    if (a + b == 0) return 1.0; // both agree on absence
    return 2.0 * static_cast<double>(both) / static_cast<double>(a + b);
}

std::vector<GroupPerformance> group_means(const std::vector<CaseScore>& scores) {
    std::map<int, GroupPerformance> acc;
    for (const auto& s : scores) {
        auto& g = acc[s.group.id];
        if (g.count == 0) g.group = s.group;
        g.mean_dice += s.dice;
        g.count += 1;
    }
    std::vector<GroupPerformance> out;
    out.reserve(acc.size());
    for (auto& [id, g] : acc) {
        g.mean_dice /= static_cast<double>(g.count);
        out.push_back(g);
    }
    return out;
}

std::vector<GroupPerformance> group_means(const std::vector<CaseScore>& scores,
                                          const std::vector<GroupId>& declared) {
    auto out = group_means(scores);
    for (const auto& d : declared) {
        const bool present = std::any_of(out.begin(), out.end(),
                                         [&](const GroupPerformance& g) { return g.group.id == d.id; });
        if (!present) throw MissingGroup("group " + d.name + " has no scores");
    }
    return out;
}

double delta(double overall, const std::vector<GroupPerformance>& per_group) {
    double d = 0.0;
    for (const auto& g : per_group) {
        d += std::abs(overall - g.mean_dice);
    }
    return d;
}

double essp(double overall, double delta) {
    return overall / (1.0 + delta);
}

FairnessReport fairness_report(const std::vector<CaseScore>& scores) {
    if (scores.empty()) throw NoDataError("fairness_report: no case scores");
    FairnessReport r;
    double sum = 0.0;
    for (const auto& s : scores) sum += s.dice;
    r.overall_dice = sum / static_cast<double>(scores.size());
    r.per_group = group_means(scores);
    r.delta = delta(r.overall_dice, r.per_group);
    r.essp = essp(r.overall_dice, r.delta);
    return r;
}

} // namespace fairal
