#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "gcsp/bench.hpp"
#include "gcsp/config.hpp"
#include "gcsp/io.hpp"
#include "gcsp/refine.hpp"

namespace gcsp {

namespace fs = std::filesystem;

inline void echo_config(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    std::ofstream out(fs::path(cfg.output_dir) / "effective_config.json");
    out << cfg.raw.dump(2) << "\n";
}

/// Build the full polynomial for a config: coefficients (+ optional clamp),
/// then optional deduc-reduc, then optional penalty. Returns the polynomial
/// and a JSON build report with per-order counts at every stage.
inline std::pair<HuboPolynomial, nlohmann::json> build_pipeline(const RunConfig& cfg) {
    const UnitCell cell = cfg.cell();
    const SpeciesSet species = cfg.species();
    const SiteGrid grid = build_grid(cell, cfg.granularity, species);
    const PotentialModel model = cfg.potential();

    nlohmann::json report;
    report["num_vars"] = grid.n_vars();
    report["n_sites"] = grid.n_sites();

    HuboPolynomial poly = build_hubo(grid, cell, model, cfg.clamp);
    const auto dump_counts = [](const std::map<int, std::size_t>& c) {
        nlohmann::json j;
        for (const auto& [k, v] : c) j[std::to_string(k)] = v;
        return j;
    };
    report["terms_built"] = dump_counts(poly.count_by_order());
    if (cfg.clamp) report["clamp_eV"] = *cfg.clamp;

    if (cfg.reduction_threshold) {
        auto [reduced, rep] = deduc_reduc(poly, *cfg.reduction_threshold);
        poly = std::move(reduced);
        nlohmann::json rj;
        rj["threshold_eV"] = rep.threshold;
        rj["pairs_clamped"] = rep.pairs_clamped;
        rj["removed_by_order"] = dump_counts(rep.removed_by_order);
        rj["before_by_order"] = dump_counts(rep.before_by_order);
        rj["after_by_order"] = dump_counts(rep.after_by_order);
        rj["convention_note"] = rep.convention_note;
        report["reduction"] = rj;
    }

    if (cfg.penalty) {
        if (cfg.penalty->kind == PenaltyKind::Absolute)
            add_absolute_penalty(poly, grid, *cfg.penalty);
        else
            add_relative_penalty(poly, grid, *cfg.penalty);
        report["terms_with_penalty"] = dump_counts(poly.count_by_order());
    }
    report["terms_final"] = dump_counts(poly.count_by_order());
    report["offset_eV"] = poly.offset();
    return {std::move(poly), std::move(report)};
}

/// build: write the polynomial file and a report with per-order term counts.
inline int cmd_build(const RunConfig& cfg) {
    echo_config(cfg);
    auto [poly, report] = build_pipeline(cfg);
    const fs::path dir(cfg.output_dir);
    export_poly(poly, (dir / "hubo.poly").string());
    std::ofstream rep(dir / "build_report.json");
    rep << report.dump(2) << "\n";
    std::cout << report.dump(2) << "\n";
    return 0;
}

/// anneal: run the batch over a polynomial file, write the results CSV.
inline int cmd_anneal(const RunConfig& cfg, const std::string& poly_path) {
    echo_config(cfg);
    const HuboPolynomial poly = import_poly(poly_path);
    const SiteGrid grid = cfg.grid();
    if (grid.n_vars() != poly.num_vars())
        throw std::runtime_error("polynomial size does not match the config grid");
    const auto results = run_batch(poly, grid.n_sites(), grid.n_species(), cfg.schedule,
                                   cfg.n_runs, cfg.master_seed, cfg.parallelism);
    const fs::path dir(cfg.output_dir);
    write_results_csv((dir / "results.csv").string(), results, grid.n_sites(), grid.n_species());

    nlohmann::json summary;
    summary["n_runs"] = cfg.n_runs;
    summary["rng"] = Xoshiro256ss::algorithm_name;
    summary["mean_final_energy"] = [&] {
        double a = 0.0;
        for (const auto& r : results) a += r.final_energy;
        return a / results.size();
    }();
    if (cfg.gs_energy) {
        const RunStats st = batch_stats(results, cfg.schedule.n_steps, *cfg.gs_energy, cfg.gs_tol);
        summary["p_gs"] = st.p_gs;
        summary["mean_residual_eV"] = st.mean_residual;
        summary["tau_mean_s"] = st.tau_mean;
        summary["tts_s"] = st.tts_s;
        summary["tts_regularization"] = "P_GS=1 uses eps = 1/(n_runs+1)";
    }
    std::ofstream sum(dir / "anneal_summary.json");
    sum << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

/// refine: BFGS-relax every row of a results CSV, append a label column,
/// export one extended-XYZ per distinct labeled minimum.
inline int cmd_refine(const RunConfig& cfg, const std::string& results_path) {
    echo_config(cfg);
    const UnitCell cell = cfg.cell();
    const SpeciesSet species = cfg.species();
    const SiteGrid grid = build_grid(cell, cfg.granularity, species);
    const PotentialModel model = cfg.potential();
    auto results = read_results_csv(results_path, grid.n_vars());

    std::vector<std::string> labels;
    labels.reserve(results.size());
    std::set<std::string> exported;
    const fs::path dir(cfg.output_dir);
    std::size_t failures = 0;
    for (const auto& r : results) {
        const AtomList atoms = decode(r.bits, grid, cell);
        std::string label = "unclassified";
        try {
            const RelaxResult rr =
                bfgs_relax(atoms, cell, model, cfg.relax_tol_grad, cfg.relax_max_iter);
            if (!rr.diagnostic.empty()) {
                ++failures;
                std::cerr << "{\"event\":\"relax_failure\",\"detail\":\"" << rr.diagnostic
                          << "\"}\n";
            }
            label = classify(rr.atoms, rr.final_energy, cfg.catalog, species.size(),
                             cfg.classify_tol);
            if (label != "unclassified" && !exported.count(label)) {
                exported.insert(label);
                std::ostringstream cm;
                cm << "energy_eV=" << std::setprecision(12) << rr.final_energy;
                write_xyz((dir / (label + ".xyz")).string(), rr.atoms, cell, species, cm.str());
            }
        } catch (const std::exception& e) {
            ++failures;
            std::cerr << "{\"event\":\"relax_failure\",\"detail\":\"" << e.what() << "\"}\n";
        }
        labels.push_back(label);
    }
    write_results_csv((dir / "results_labeled.csv").string(), results, grid.n_sites(),
                      grid.n_species(), &labels);
    nlohmann::json summary;
    summary["rows"] = results.size();
    summary["relax_failures"] = failures;
    nlohmann::json freq;
    for (const auto& l : labels) {
        const std::string key = l;
        freq[key] = freq.value(key, 0) + 1;
    }
    summary["label_counts"] = freq;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

/// bench: histogram + stats tables from a results CSV; optionally a
/// schedule-length sweep table when analysis.sweep_steps is configured.
inline int cmd_bench(const RunConfig& cfg, const std::string& results_path,
                     const std::string& run_id = "run", const std::string& poly_path = "") {
    echo_config(cfg);
    const SiteGrid grid = cfg.grid();
    const auto results = read_results_csv(results_path, grid.n_vars());
    const fs::path dir(cfg.output_dir);

    if (!cfg.gs_energy) {
        std::cout << "{\"notice\":\"gs_energy missing: histogram uses the batch minimum, "
                     "TTS omitted\"}\n";
    }
    const double ref = cfg.gs_energy ? *cfg.gs_energy : [&] {
        double m = results.front().final_energy;
        for (const auto& r : results) m = std::min(m, r.final_energy);
        return m;
    }();

    const std::vector<int>* comp = cfg.expected_composition ? &*cfg.expected_composition : nullptr;
    const auto bins =
        histogram(results, ref, cfg.bin_width, grid.n_sites(), grid.n_species(), comp);
    {
        std::ofstream out(dir / (run_id + ".hist.csv"));
        out << "bin_lo,bin_hi,count,count_expected_density\n";
        out << std::setprecision(17);
        for (const auto& b : bins)
            out << b.lo << "," << b.hi << "," << b.count << "," << b.count_expected_density
                << "\n";
    }

    nlohmann::json summary;
    summary["n_runs"] = results.size();
    if (cfg.gs_energy) {
        const RunStats st = batch_stats(results, cfg.schedule.n_steps, ref, cfg.gs_tol);
        summary["p_gs"] = st.p_gs;
        summary["ground_state_count"] = st.ground_state_count;
        summary["mean_residual_eV"] = st.mean_residual;
        summary["tts_s"] = st.tts_s;
        summary["tau_mean_s"] = st.tau_mean;
        summary["tts_regularization"] = "P_GS=1 uses eps = 1/(n_runs+1)";
    }
    if (!cfg.sweep_steps.empty()) {
        if (!cfg.gs_energy)
            throw std::runtime_error("bench sweep requires analysis.gs_energy");
        const std::string pp = poly_path.empty()
                                   ? (fs::path(cfg.output_dir) / "hubo.poly").string()
                                   : poly_path;
        const HuboPolynomial poly = import_poly(pp);
        if (poly.num_vars() != grid.n_vars())
            throw std::runtime_error("polynomial size does not match the config grid");
        std::vector<AnnealSchedule> schedules;
        for (int n : cfg.sweep_steps)
            schedules.push_back({cfg.schedule.t_max, cfg.schedule.t_min, n});
        const auto rows = schedule_sweep(poly, grid.n_sites(), grid.n_species(), schedules,
                                         cfg.n_runs, cfg.master_seed, *cfg.gs_energy,
                                         cfg.gs_tol, cfg.parallelism);
        std::ofstream out(dir / (run_id + ".sweep.csv"));
        out << "n_steps,p_gs,mean_residual,tau_mean_s,tts_s,min_tts\n";
        out << std::setprecision(17);
        for (const auto& r : rows)
            out << r.n_steps << "," << r.p_gs << "," << r.mean_residual << "," << r.tau_mean
                << "," << r.tts_s << "," << (r.min_tts ? 1 : 0) << "\n";
        summary["sweep_rows"] = rows.size();
    }
    std::ofstream sum(dir / (run_id + ".summary.json"));
    sum << summary.dump(2) << "\n";
    std::cout << summary.dump(2) << "\n";
    return 0;
}

/// export: decode a bitstring (hex) to extended-XYZ.
inline int cmd_export(const RunConfig& cfg, const std::string& bitstring_hex,
                      const std::string& out_name = "structure.xyz") {
    echo_config(cfg);
    const UnitCell cell = cfg.cell();
    const SpeciesSet species = cfg.species();
    const SiteGrid grid = build_grid(cell, cfg.granularity, species);
    const auto bits = hex_to_bits(bitstring_hex, grid.n_vars());
    const AtomList atoms = decode(bits, grid, cell);
    write_xyz((fs::path(cfg.output_dir) / out_name).string(), atoms, cell, species);
    std::cout << "{\"atoms\":" << atoms.size() << "}\n";
    return 0;
}

} // namespace gcsp
