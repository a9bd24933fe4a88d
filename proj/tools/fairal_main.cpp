#include <CLI11.hpp>

#include "fairal/commands.hpp"

// fairal: fairness-aware active-learning experiments on synthetic voxel
// cohorts. Subcommands: generate, baseline, run, report.
int main(int argc, char** argv) {
    CLI::App app{"fairness-aware active learning for voxel segmentation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string results_csv;
    std::vector<std::uint64_t> seeds;
    unsigned jobs = 0;
    bool jobs_given = false;
    bool dump_scores = false;

    auto* generate = app.add_subcommand("generate", "generate a synthetic cohort on disk");
    generate->add_option("--config", config_path, "cohort config (JSON)")->required();
    generate->add_option("--out", out_dir, "output cohort directory")->required();

    auto* baseline = app.add_subcommand("baseline", "full-data baseline compositions");
    baseline->add_option("--config", config_path, "baseline config (JSON)")->required();
    baseline->add_option("--out", out_dir, "output directory");

    auto* run = app.add_subcommand("run", "run an experiment grid");
    run->add_option("--config", config_path, "grid config (JSON)")->required();
    run->add_option("--out", out_dir, "output directory (overrides config)");
    run->add_option("--seeds", seeds, "per-run seeds (overrides config)")->delimiter(',');
    run->add_option("--jobs", jobs, "worker threads, 0 = logical cores")
        ->each([&](const std::string&) { jobs_given = true; });
    run->add_flag("--dump-scores", dump_scores, "also write per-cycle acquisition scores");

    auto* report = app.add_subcommand("report", "aggregate a results CSV into curves + summary");
    report->add_option("results", results_csv, "results.csv from a run")->required();
    report->add_option("--out", out_dir, "output directory for curve files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? fairal::kExitOk : fairal::kExitConfigError;
    }

    if (generate->parsed()) {
        return fairal::cmd_generate({config_path, out_dir});
    }
    if (baseline->parsed()) {
        return fairal::cmd_baseline({config_path, out_dir});
    }
    if (run->parsed()) {
        fairal::RunOptions opt;
        opt.config_path = config_path;
        if (!out_dir.empty()) opt.out_dir = out_dir;
        if (!seeds.empty()) opt.seeds = seeds;
        if (jobs_given) opt.jobs = jobs;
        opt.dump_scores = dump_scores;
        return fairal::cmd_run(opt);
    }
    return fairal::cmd_report({results_csv, out_dir});
}
