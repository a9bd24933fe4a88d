#include "fairal/commands.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "fairal/cohort_store.hpp"
#include "fairal/csv.hpp"
#include "fairal/report.hpp"
#include "fairal/rng.hpp"

namespace fairal {

namespace {

using nlohmann::json;

json load_json(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path.string());
    try {
        json j;
        is >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed config " + path.string() + ": " + e.what());
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw ConfigError(where + ": unknown key '" + key + "'");
        }
    }
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

TrainConfig parse_train_section(const json& j) {
    TrainConfig t;
    if (!j.contains("train")) return t;
    const json& section = j.at("train");
    reject_unknown_keys(section, {"learning_rate", "epochs", "l2"}, "train");
    t.learning_rate = get_or(section, "learning_rate", t.learning_rate);
    t.epochs = get_or(section, "epochs", t.epochs);
    t.l2 = get_or(section, "l2", t.l2);
    if (t.learning_rate <= 0.0) throw ConfigError("train.learning_rate must be > 0");
    if (t.epochs < 0) throw ConfigError("train.epochs must be >= 0");
    if (t.l2 < 0.0) throw ConfigError("train.l2 must be >= 0");
    return t;
}

std::string iso_utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sanitize_token(std::string s) {
    for (char& c : s) {
        if (c == '/' || c == ' ') c = '-';
    }
    return s;
}

} // namespace

CohortConfig parse_generate_config(const std::filesystem::path& path, std::string& preset_out) {
    const json j = load_json(path);
    reject_unknown_keys(j, {"preset", "shape", "n_per_group", "bias_mu", "bias_sigma",
                            "noise_sigma", "seed"},
                        "generate config");

    const std::string preset = get_or<std::string>(j, "preset", "strong");
    CohortConfig cfg;
    if (preset == "strong") {
        cfg = strong_bias_preset();
    } else if (preset == "weak") {
        cfg = weak_bias_preset();
    } else if (preset == "custom") {
        if (!j.contains("bias_mu") || !j.contains("bias_sigma")) {
            throw ConfigError("custom preset requires bias_mu and bias_sigma");
        }
    } else {
        throw ConfigError("preset must be strong, weak, or custom");
    }
    if (preset != "custom" && (j.contains("bias_mu") || j.contains("bias_sigma"))) {
        throw ConfigError("bias_mu/bias_sigma are only valid with preset=custom");
    }
    cfg.bias_mu = get_or(j, "bias_mu", cfg.bias_mu);
    cfg.bias_sigma = get_or(j, "bias_sigma", cfg.bias_sigma);
    cfg.noise_sigma = get_or(j, "noise_sigma", cfg.noise_sigma);
    cfg.n_per_group = get_or(j, "n_per_group", cfg.n_per_group);
    cfg.seed = get_or(j, "seed", cfg.seed);
    if (j.contains("shape")) {
        const auto shape = get_or<std::vector<std::uint32_t>>(j, "shape", {});
        if (shape.size() != 3) throw ConfigError("shape must list exactly 3 extents");
        cfg.volume_shape = {shape[0], shape[1], shape[2]};
    }
    cfg.validate();
    preset_out = preset;
    return cfg;
}

std::vector<GroupCount> composition_counts(const std::string& composition, std::size_t n_initial) {
    const auto slash = composition.find('/');
    if (slash == std::string::npos) {
        throw ConfigError("composition must look like '50/50', got '" + composition + "'");
    }
    const std::string a_str = composition.substr(0, slash);
    const std::string b_str = composition.substr(slash + 1);
    unsigned a = 0, b = 0;
    const auto ra = std::from_chars(a_str.data(), a_str.data() + a_str.size(), a);
    const auto rb = std::from_chars(b_str.data(), b_str.data() + b_str.size(), b);
    if (ra.ec != std::errc() || rb.ec != std::errc() || ra.ptr != a_str.data() + a_str.size() ||
        rb.ptr != b_str.data() + b_str.size() || a + b == 0) {
        throw ConfigError("composition must look like '50/50', got '" + composition + "'");
    }
    const double frac = static_cast<double>(a) / static_cast<double>(a + b);
    const std::size_t g1 = static_cast<std::size_t>(std::llround(frac * static_cast<double>(n_initial)));
    return {{kGroup1, g1}, {kGroup2, n_initial - g1}};
}

GridConfig parse_grid_config(const std::filesystem::path& path) {
    const json j = load_json(path);
    reject_unknown_keys(j, {"cohort_dir", "compositions", "strategies", "seeds", "n_initial",
                            "batch_size", "n_cycles", "n_test_per_group", "dilation_radius",
                            "threshold", "train", "jobs", "dump_scores", "out_dir"},
                        "grid config");

    GridConfig g;
    if (!j.contains("cohort_dir")) throw ConfigError("grid config requires cohort_dir");
    g.cohort_dir = get_or<std::string>(j, "cohort_dir", "");
    g.compositions = get_or<std::vector<std::string>>(j, "compositions", {"50/50", "80/20", "20/80"});
    const auto strategy_names = get_or<std::vector<std::string>>(
        j, "strategies",
        {"Random", "MeanEntropy", "LocalizedEntropy", "WeightedLocalizedEntropy"});
    for (const auto& name : strategy_names) g.strategies.push_back(strategy_from_string(name));
    g.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {1, 2, 3, 4, 5});
    g.n_initial = get_or(j, "n_initial", g.n_initial);
    g.batch_size = get_or(j, "batch_size", g.batch_size);
    g.n_cycles = get_or(j, "n_cycles", g.n_cycles);
    g.n_test_per_group = get_or(j, "n_test_per_group", g.n_test_per_group);
    g.dilation_radius = get_or(j, "dilation_radius", g.dilation_radius);
    g.threshold_value = get_or(j, "threshold", g.threshold_value);
    g.train = parse_train_section(j);
    g.jobs = get_or(j, "jobs", g.jobs);
    g.dump_scores = get_or(j, "dump_scores", g.dump_scores);
    if (j.contains("out_dir")) g.out_dir = std::filesystem::path(get_or<std::string>(j, "out_dir", ""));

    if (g.compositions.empty()) throw ConfigError("compositions must be nonempty");
    if (g.strategies.empty()) throw ConfigError("strategies must be nonempty");
    if (g.seeds.empty()) throw ConfigError("seeds must be nonempty");
    for (const auto& comp : g.compositions) composition_counts(comp, g.n_initial);
    return g;
}

namespace {

struct BaselineConfig {
    std::filesystem::path cohort_dir;
    std::size_t n_test_per_group = 15;
    double threshold_value = 0.85;
    TrainConfig train;
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> out_dir;
};

BaselineConfig parse_baseline_config(const std::filesystem::path& path) {
    const json j = load_json(path);
    reject_unknown_keys(j, {"cohort_dir", "n_test_per_group", "threshold", "train", "seed", "out_dir"},
                        "baseline config");
    BaselineConfig b;
    if (!j.contains("cohort_dir")) throw ConfigError("baseline config requires cohort_dir");
    b.cohort_dir = get_or<std::string>(j, "cohort_dir", "");
    b.n_test_per_group = get_or(j, "n_test_per_group", b.n_test_per_group);
    b.threshold_value = get_or(j, "threshold", b.threshold_value);
    b.train = parse_train_section(j);
    b.seed = get_or(j, "seed", b.seed);
    if (j.contains("out_dir")) b.out_dir = std::filesystem::path(get_or<std::string>(j, "out_dir", ""));
    return b;
}

double group1_share(const std::vector<Case>& cases) {
    if (cases.empty()) return 0.0;
    std::size_t g1 = 0;
    for (const auto& c : cases) g1 += c.group.id == kGroup1.id;
    return static_cast<double>(g1) / static_cast<double>(cases.size());
}

ResultRow report_to_row(const FairnessReport& report) {
    ResultRow row;
    row.dsc_overall = report.overall_dice;
    row.dsc_g1 = report.group_dice("G1");
    row.dsc_g2 = report.group_dice("G2");
    row.delta = report.delta;
    row.essp = report.essp;
    return row;
}

int to_exit_code(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfigError;
    return kExitDataError;
}

} // namespace

int cmd_generate(const GenerateOptions& opt) {
    try {
        std::string preset;
        const CohortConfig cfg = parse_generate_config(opt.config_path, preset);
        const auto cohort = generate_cohort(cfg);
        save_cohort(opt.out_dir, cohort, cfg, preset);
        std::cout << "wrote " << cohort.size() << " cases (" << preset << " preset) to "
                  << opt.out_dir.string() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "generate: " << e.what() << "\n";
        return to_exit_code(e);
    }
}

int cmd_baseline(const BaselineOptions& opt) {
    try {
        BaselineConfig cfg = parse_baseline_config(opt.config_path);
        if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
        if (!cfg.out_dir) throw ConfigError("baseline needs an output directory (--out or out_dir)");

        const LoadedCohort cohort = load_cohort(cfg.cohort_dir);
        const CohortSplit split = split_cohort(cohort.cases, cfg.n_test_per_group);

        struct Composition {
            const char* name;
            std::vector<Case> cases;
        };
        std::vector<Composition> compositions;
        compositions.push_back({"pooled", split.train});
        Composition g1{"g1_only", {}}, g2{"g2_only", {}};
        for (const auto& c : split.train) {
            (c.group.id == kGroup1.id ? g1.cases : g2.cases).push_back(c);
        }
        compositions.push_back(std::move(g1));
        compositions.push_back(std::move(g2));

        std::vector<ResultRow> rows;
        for (const auto& comp : compositions) {
            if (comp.cases.empty()) throw DataError("baseline: training composition is empty");
            TrainConfig hyper = cfg.train;
            hyper.seed = derive_seed(cfg.seed, comp.name);
            const SegmenterParams params = train(comp.cases, hyper);
            const FairnessReport report =
                fairness_report(evaluate_cases(params, split.test, cfg.threshold_value));

            ResultRow row = report_to_row(report);
            row.run_id = std::string("baseline_") + comp.name;
            row.bias_preset = cohort.manifest.preset;
            row.composition = comp.name;
            row.strategy = "baseline";
            row.seed = cfg.seed;
            row.cycle = 0;
            row.n_labeled = comp.cases.size();
            row.group1_ratio = group1_share(comp.cases);
            row.eval_split = "test";
            rows.push_back(std::move(row));
        }

        std::filesystem::create_directories(*cfg.out_dir);
        write_results_csv(*cfg.out_dir / "baseline.csv", rows);
        for (const auto& row : rows) {
            std::cout << row.composition << " (n=" << row.n_labeled << "): DSC(G1) " << row.dsc_g1
                      << "  DSC(G2) " << row.dsc_g2 << "  DSC " << row.dsc_overall << "  ESSP "
                      << row.essp << "  delta " << row.delta << "\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "baseline: " << e.what() << "\n";
        return to_exit_code(e);
    }
}

namespace {

struct GridCell {
    std::string run_id;
    std::string composition;
    StrategyKind strategy;
    std::uint64_t seed;
};

struct CellOutput {
    bool ok = false;
    std::string error;
    std::vector<ResultRow> test_rows;
    std::vector<ResultRow> labeled_rows;
    std::vector<ScoreRow> score_rows;
};

ResultRow record_to_row(const CycleRecord& rec, const GridCell& cell, const std::string& preset,
                        bool labeled_split) {
    ResultRow row = report_to_row(labeled_split ? rec.labeled_report : rec.test_report);
    row.run_id = cell.run_id;
    row.bias_preset = preset;
    row.composition = cell.composition;
    row.strategy = to_string(cell.strategy);
    row.seed = cell.seed;
    row.cycle = rec.cycle;
    row.n_labeled = rec.n_labeled;
    row.group1_ratio = rec.group1_ratio;
    if (rec.weights) {
        for (const auto& e : rec.weights->entries) {
            if (e.group.id == kGroup1.id) row.weights_g1 = e.w;
            if (e.group.id == kGroup2.id) row.weights_g2 = e.w;
        }
    }
    row.eval_split = labeled_split ? "labeled" : "test";
    return row;
}

CellOutput run_grid_cell(const GridCell& cell, const GridConfig& grid, const std::string& preset,
                         const std::vector<Case>& train_pool, const std::vector<Case>& test_set) {
    CellOutput out;
    ALConfig cfg;
    cfg.n_initial = grid.n_initial;
    cfg.batch_size = grid.batch_size;
    cfg.n_cycles = grid.n_cycles;
    cfg.initial_group_counts = composition_counts(cell.composition, grid.n_initial);
    cfg.strategy = cell.strategy;
    cfg.dilation_radius = grid.dilation_radius;
    cfg.threshold_value = grid.threshold_value;
    cfg.train = grid.train;
    cfg.run_seed = cell.seed;

    const auto records = run_experiment(cfg, train_pool, test_set);
    for (const auto& rec : records) {
        out.test_rows.push_back(record_to_row(rec, cell, preset, false));
        out.labeled_rows.push_back(record_to_row(rec, cell, preset, true));
        for (const auto& s : rec.pool_scores) {
            out.score_rows.push_back({cell.run_id, rec.cycle, s.case_id, s.group.name,
                                      to_string(cell.strategy), s.raw_entropy, s.region_size,
                                      s.weight_applied, s.score, s.fallback_used});
        }
    }
    out.ok = true;
    return out;
}

unsigned resolve_jobs(const GridConfig& grid, const std::optional<unsigned>& flag_jobs) {
    unsigned jobs = grid.jobs;
    if (flag_jobs) jobs = *flag_jobs;
    if (const char* env = std::getenv("FAIRAL_JOBS")) {
        unsigned v = 0;
        const std::string s(env);
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            throw ConfigError("FAIRAL_JOBS must be a nonnegative integer");
        }
        jobs = v;
    }
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    return jobs;
}

json grid_to_json(const GridConfig& g) {
    json strategies = json::array();
    for (const auto& s : g.strategies) strategies.push_back(to_string(s));
    return {
        {"cohort_dir", g.cohort_dir.string()},
        {"compositions", g.compositions},
        {"strategies", strategies},
        {"seeds", g.seeds},
        {"n_initial", g.n_initial},
        {"batch_size", g.batch_size},
        {"n_cycles", g.n_cycles},
        {"n_test_per_group", g.n_test_per_group},
        {"dilation_radius", g.dilation_radius},
        {"threshold", g.threshold_value},
        {"train",
         {{"learning_rate", g.train.learning_rate}, {"epochs", g.train.epochs}, {"l2", g.train.l2}}},
        {"dump_scores", g.dump_scores},
    };
}

} // namespace

int cmd_run(const RunOptions& opt) {
    try {
        GridConfig grid = parse_grid_config(opt.config_path);
        if (opt.out_dir) grid.out_dir = opt.out_dir;
        if (opt.seeds) grid.seeds = *opt.seeds;
        grid.dump_scores = grid.dump_scores || opt.dump_scores;
        if (!grid.out_dir) throw ConfigError("run needs an output directory (--out or out_dir)");
        if (grid.seeds.empty()) throw ConfigError("seeds must be nonempty");
        const unsigned jobs = resolve_jobs(grid, opt.jobs);

        const std::string started = iso_utc_now();
        const LoadedCohort cohort = load_cohort(grid.cohort_dir);
        const CohortSplit split = split_cohort(cohort.cases, grid.n_test_per_group);
        if (grid.n_initial + grid.n_cycles * grid.batch_size > split.train.size()) {
            throw ConfigError("labeling budget exceeds the training pool");
        }

        std::vector<GridCell> cells;
        for (const auto& comp : grid.compositions) {
            for (const auto strategy : grid.strategies) {
                for (const auto seed : grid.seeds) {
                    GridCell cell;
                    cell.composition = comp;
                    cell.strategy = strategy;
                    cell.seed = seed;
                    cell.run_id = cohort.manifest.preset + "_" + sanitize_token(comp) + "_" +
                                  to_string(strategy) + "_s" + std::to_string(seed);
                    cells.push_back(std::move(cell));
                }
            }
        }

        std::vector<CellOutput> outputs(cells.size());
        std::atomic<std::size_t> next{0};
        std::mutex log_mutex;
        auto worker = [&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                try {
                    outputs[i] = run_grid_cell(cells[i], grid, cohort.manifest.preset, split.train,
                                               split.test);
                } catch (const std::exception& e) {
                    outputs[i].ok = false;
                    outputs[i].error = e.what();
                }
                std::lock_guard lock(log_mutex);
                std::cerr << "[" << cells[i].run_id << "] "
                          << (outputs[i].ok ? "done" : "FAILED: " + outputs[i].error) << "\n";
            }
        };
        std::vector<std::thread> threads;
        for (unsigned t = 0; t < std::min<std::size_t>(jobs, cells.size()); ++t) {
            threads.emplace_back(worker);
        }
        for (auto& t : threads) t.join();

        // Single writer, canonical cell order, so reruns are byte-identical.
        std::filesystem::create_directories(*grid.out_dir);
        std::vector<ResultRow> test_rows, labeled_rows;
        std::vector<ScoreRow> score_rows;
        std::size_t failed = 0;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (!outputs[i].ok) {
                ++failed;
                continue;
            }
            test_rows.insert(test_rows.end(), outputs[i].test_rows.begin(), outputs[i].test_rows.end());
            labeled_rows.insert(labeled_rows.end(), outputs[i].labeled_rows.begin(),
                                outputs[i].labeled_rows.end());
            score_rows.insert(score_rows.end(), outputs[i].score_rows.begin(),
                              outputs[i].score_rows.end());
        }
        write_results_csv(*grid.out_dir / "results.csv", test_rows);
        write_results_csv(*grid.out_dir / "results_labeled.csv", labeled_rows);
        if (grid.dump_scores) {
            std::ofstream os(*grid.out_dir / "scores.csv", std::ios::trunc);
            if (!os) throw DataError("cannot write scores.csv");
            os << kScoresHeader << '\n';
            for (const auto& row : score_rows) os << score_row_to_csv(row) << '\n';
        }

        json manifest = {
            {"tool_version", kToolVersion},
            {"started", started},
            {"finished", iso_utc_now()},
            {"resolved_config", grid_to_json(grid)},
            {"jobs", jobs},
            {"cohort",
             {{"dir", grid.cohort_dir.string()},
              {"preset", cohort.manifest.preset},
              {"seed", cohort.manifest.config.seed},
              {"n_cases", cohort.cases.size()}}},
        };
        manifest["cells"] = json::array();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            manifest["cells"].push_back({{"run_id", cells[i].run_id},
                                         {"composition", cells[i].composition},
                                         {"strategy", to_string(cells[i].strategy)},
                                         {"seed", cells[i].seed},
                                         {"status", outputs[i].ok ? "ok" : "failed"},
                                         {"error", outputs[i].error}});
        }
        manifest["outputs"] = json::object();
        manifest["outputs"]["results.csv"] = file_digest(*grid.out_dir / "results.csv");
        manifest["outputs"]["results_labeled.csv"] = file_digest(*grid.out_dir / "results_labeled.csv");
        if (grid.dump_scores) {
            manifest["outputs"]["scores.csv"] = file_digest(*grid.out_dir / "scores.csv");
        }
        std::ofstream os(*grid.out_dir / "run_manifest.json", std::ios::trunc);
        if (!os) throw DataError("cannot write run_manifest.json");
        os << manifest.dump(2) << '\n';

        std::cout << "wrote " << test_rows.size() << " result rows from " << cells.size() - failed
                  << "/" << cells.size() << " cells to " << grid.out_dir->string() << "\n";
        return failed == 0 ? kExitOk : kExitPartialFailure;
    } catch (const std::exception& e) {
        std::cerr << "run: " << e.what() << "\n";
        return to_exit_code(e);
    }
}

int cmd_report(const ReportOptions& opt) {
    try {
        const auto rows = read_results_csv(opt.results_csv);
        const ReportData data = aggregate_results(rows);
        write_report_files(data, opt.out_dir);
        std::cout << render_summary(data);
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "report: " << e.what() << "\n";
        return to_exit_code(e);
    }
}

} // namespace fairal
