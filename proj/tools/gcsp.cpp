// Command-line front end: build -> (reduce) -> anneal -> refine -> bench -> export.
// Exit codes: 0 success, 1 configuration/validation error, 2 runtime error.

#include <CLI11.hpp>
#include <iostream>

#include "gcsp/cli.hpp"

namespace {

gcsp::RunConfig load_with_overrides(const std::string& config_path,
                                    const std::optional<int>& n_runs,
                                    const std::optional<std::uint64_t>& seed,
                                    const std::optional<int>& n_steps,
                                    const std::optional<int>& parallelism,
                                    const std::optional<std::string>& output_dir) {
    gcsp::RunConfig cfg = gcsp::load_config(config_path);
    if (n_runs) {
        cfg.n_runs = *n_runs;
        cfg.raw["batch"]["n_runs"] = *n_runs;
    }
    if (seed) {
        cfg.master_seed = *seed;
        cfg.raw["batch"]["master_seed"] = *seed;
    }
    if (n_steps) {
        cfg.schedule.n_steps = *n_steps;
        cfg.raw["schedule"]["n_steps"] = *n_steps;
    }
    if (parallelism) {
        cfg.parallelism = *parallelism;
        cfg.raw["batch"]["parallelism"] = *parallelism;
    }
    if (output_dir) {
        cfg.output_dir = *output_dir;
        cfg.raw["output_dir"] = *output_dir;
    }
    return cfg;
}

void report_error(const char* kind, const std::string& what) {
    nlohmann::json rec;
    rec["error"] = kind;
    rec["detail"] = what;
    std::cerr << rec.dump() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"grand-canonical crystal structure prediction via lattice HUBO annealing"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<int> n_runs, n_steps, parallelism;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output_dir;
    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "run configuration (json)")->required();
        sub->add_option("--runs", n_runs, "override batch.n_runs");
        sub->add_option("--seed", seed, "override batch.master_seed");
        sub->add_option("--steps", n_steps, "override schedule.n_steps");
        sub->add_option("--parallelism", parallelism, "override batch.parallelism");
        sub->add_option("-o,--output", output_dir, "override output_dir");
    };

    auto* build = app.add_subcommand("build", "assemble the polynomial and write hubo.poly");
    add_common(build);

    auto* anneal = app.add_subcommand("anneal", "run a batch of annealing runs");
    add_common(anneal);
    std::string poly_path;
    anneal->add_option("-p,--poly", poly_path, "polynomial file (defaults to <output>/hubo.poly)");

    auto* refine = app.add_subcommand("refine", "relax batch results off the grid and label them");
    add_common(refine);
    std::string results_path;
    refine->add_option("-r,--results", results_path, "results csv (defaults to <output>/results.csv)");

    auto* bench = app.add_subcommand("bench", "histogram and run statistics for a batch");
    add_common(bench);
    std::string bench_results, run_id = "run", bench_poly;
    bench->add_option("-r,--results", bench_results, "results csv (defaults to <output>/results.csv)");
    bench->add_option("--run-id", run_id, "file-name prefix for the emitted tables");
    bench->add_option("-p,--poly", bench_poly,
                      "polynomial file for the schedule sweep (defaults to <output>/hubo.poly)");

    auto* exp = app.add_subcommand("export", "decode a bitstring to extended xyz");
    add_common(exp);
    std::string bits_hex, out_name = "structure.xyz";
    exp->add_option("--bits", bits_hex, "bitstring in results-csv hex encoding")->required();
    exp->add_option("--name", out_name, "output file name");

    CLI11_PARSE(app, argc, argv);

    try {
        gcsp::RunConfig cfg;
        try {
            cfg = load_with_overrides(config_path, n_runs, seed, n_steps, parallelism, output_dir);
        } catch (const gcsp::ConfigError& e) {
            for (const auto& msg : e.errors()) report_error("config", msg);
            return 1;
        }
        if (build->parsed()) return gcsp::cmd_build(cfg);
        if (anneal->parsed()) {
            if (poly_path.empty()) poly_path = cfg.output_dir + "/hubo.poly";
            return gcsp::cmd_anneal(cfg, poly_path);
        }
        if (refine->parsed()) {
            if (results_path.empty()) results_path = cfg.output_dir + "/results.csv";
            return gcsp::cmd_refine(cfg, results_path);
        }
        if (bench->parsed()) {
            if (bench_results.empty()) bench_results = cfg.output_dir + "/results.csv";
            return gcsp::cmd_bench(cfg, bench_results, run_id, bench_poly);
        }
        if (exp->parsed()) return gcsp::cmd_export(cfg, bits_hex, out_name);
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return 2;
    }
    return 0;
}
