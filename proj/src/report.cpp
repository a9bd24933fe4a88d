#include "fairal/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fairal/errors.hpp"

namespace fairal {

namespace {

double metric_of(const ResultRow& r, const std::string& name) {
    if (name == "essp") return r.essp;
    if (name == "delta") return r.delta;
    if (name == "dsc") return r.dsc_overall;
    if (name == "group1_ratio") return r.group1_ratio;
    throw DataError("unknown curve metric: " + name);
}

std::string sanitize(std::string s) {
    for (char& c : s) {
        if (c == '/' || c == ' ') c = '-';
    }
    return s;
}

} // namespace

ReportData aggregate_results(const std::vector<ResultRow>& rows) {
    std::vector<const ResultRow*> test_rows;
    for (const auto& r : rows) {
        if (r.eval_split == "test") test_rows.push_back(&r);
    }
    if (test_rows.empty()) {
        throw NoDataError("results csv holds no test-split rows");
    }

    // (preset, composition) -> strategy -> cycle -> rows
    std::map<std::pair<std::string, std::string>,
             std::map<std::string, std::map<std::size_t, std::vector<const ResultRow*>>>>
        cells;
    for (const ResultRow* r : test_rows) {
        cells[{r->bias_preset, r->composition}][r->strategy][r->cycle].push_back(r);
    }

    ReportData data;
    for (const auto& [key, strategies] : cells) {
        CurveTable table;
        table.bias_preset = key.first;
        table.composition = key.second;

        std::set<std::size_t> cycles;
        for (const auto& [strat, per_cycle] : strategies) {
            table.strategies.push_back(strat);
            for (const auto& [cycle, rs] : per_cycle) cycles.insert(cycle);
        }

        std::map<std::size_t, std::size_t> cycle_row; // cycle -> row index
        for (std::size_t cycle : cycles) {
            cycle_row[cycle] = table.n_labeled.size();
            std::size_t n_labeled = 0;
            for (const auto& [strat, per_cycle] : strategies) {
                auto it = per_cycle.find(cycle);
                if (it != per_cycle.end() && !it->second.empty()) {
                    n_labeled = it->second.front()->n_labeled;
                    break;
                }
            }
            table.n_labeled.push_back(n_labeled);
        }

        for (const char* metric : kCurveMetrics) {
            auto& grid = table.metrics[metric];
            grid.assign(table.n_labeled.size(),
                        std::vector<double>(table.strategies.size(),
                                            std::numeric_limits<double>::quiet_NaN()));
            for (std::size_t si = 0; si < table.strategies.size(); ++si) {
                const auto& per_cycle = strategies.at(table.strategies[si]);
                for (const auto& [cycle, rs] : per_cycle) {
                    double sum = 0.0;
                    for (const ResultRow* r : rs) sum += metric_of(*r, metric);
                    grid[cycle_row[cycle]][si] = sum / static_cast<double>(rs.size());
                }
            }
        }

        CompositionSummary summary;
        summary.bias_preset = table.bias_preset;
        summary.composition = table.composition;
        const std::size_t last = table.n_labeled.size() - 1;
        for (std::size_t si = 0; si < table.strategies.size(); ++si) {
            StrategySummary ss;
            ss.strategy = table.strategies[si];
            ss.final_dsc = table.metrics["dsc"][last][si];
            ss.final_delta = table.metrics["delta"][last][si];
            ss.final_essp = table.metrics["essp"][last][si];
            ss.final_group1_ratio = table.metrics["group1_ratio"][last][si];
            const auto& per_cycle = strategies.at(ss.strategy);
            auto it = per_cycle.rbegin();
            ss.n_seeds = it == per_cycle.rend() ? 0 : it->second.size();
            summary.strategies.push_back(ss);
        }
        const auto find_final_delta = [&](const std::string& name) -> std::optional<double> {
            for (const auto& ss : summary.strategies) {
                if (ss.strategy == name) return ss.final_delta;
            }
            return std::nullopt;
        };
        const auto d_entropy = find_final_delta("MeanEntropy");
        const auto d_weighted = find_final_delta("WeightedLocalizedEntropy");
        if (d_entropy && d_weighted && *d_entropy > 0.0) {
            summary.delta_reduction_pct = (*d_entropy - *d_weighted) / *d_entropy * 100.0;
        }

        data.curves.push_back(std::move(table));
        data.summaries.push_back(std::move(summary));
    }
    return data;
}

void write_report_files(const ReportData& data, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    for (const auto& table : data.curves) {
        for (const char* metric : kCurveMetrics) {
            const auto name = "curve_" + sanitize(table.bias_preset) + "_" +
                              sanitize(table.composition) + "_" + metric + ".tsv";
            std::ofstream os(out_dir / name, std::ios::trunc);
            if (!os) throw DataError("cannot write curve file: " + name);
            os << "n_labeled";
            for (const auto& s : table.strategies) os << '\t' << s;
            os << '\n';
            const auto& grid = table.metrics.at(metric);
            for (std::size_t row = 0; row < table.n_labeled.size(); ++row) {
                os << table.n_labeled[row];
                for (std::size_t si = 0; si < table.strategies.size(); ++si) {
                    os << '\t' << format_double(grid[row][si]);
                }
                os << '\n';
            }
        }
    }
    std::ofstream os(out_dir / "summary.txt", std::ios::trunc);
    if (!os) throw DataError("cannot write summary.txt");
    os << render_summary(data);
}

std::string render_summary(const ReportData& data) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    for (const auto& s : data.summaries) {
        os << "== " << s.bias_preset << " bias, composition " << s.composition
           << " (final cycle, seed-averaged) ==\n";
        os.precision(4);
        for (const auto& ss : s.strategies) {
            os << "  " << ss.strategy << ": DSC " << ss.final_dsc << "  delta " << ss.final_delta
               << "  ESSP " << ss.final_essp << "  G1 ratio " << ss.final_group1_ratio << "  ("
               << ss.n_seeds << " seeds)\n";
        }
        if (s.delta_reduction_pct) {
            os.precision(1);
            os << "  delta reduction, weighted vs mean entropy: " << *s.delta_reduction_pct
               << "%\n";
        }
    }
    return os.str();
}

} // namespace fairal
