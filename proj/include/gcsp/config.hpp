#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcsp/anneal.hpp"
#include "gcsp/cell.hpp"
#include "gcsp/hubo.hpp"
#include "gcsp/potential.hpp"
#include "gcsp/refine.hpp"

namespace gcsp {

/// Validation failure carrying one message per offending field path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errs) {
        std::string s = "configuration invalid:";
        for (const auto& e : errs) s += "\n  " + e;
        return s;
    }
    std::vector<std::string> errors_;
};

/// Run configuration: one structured-text (JSON) file with sections mirroring
/// the pipeline stages. Referenced files are checked before any compute.
struct RunConfig {
    // cell/grid
    std::array<Vec3, 3> basis{};
    std::array<bool, 3> pbc{true, true, true};
    std::array<int, 3> granularity{1, 1, 1};
    std::vector<std::string> species_names;

    // potential
    std::string potential_kind; ///< "lj" | "sw"
    std::string potential_params_path;

    // optional model shaping
    std::optional<double> clamp;               ///< eV
    std::optional<double> reduction_threshold; ///< eV

    // optional penalty
    std::optional<PenaltySpec> penalty;

    // schedule + batch
    AnnealSchedule schedule;
    int n_runs = 1;
    std::uint64_t master_seed = 1;
    int parallelism = 1;

    // analysis
    std::optional<double> gs_energy; ///< eV
    double gs_tol = 1e-6;            ///< eV
    double bin_width = 0.1;          ///< eV
    std::optional<std::vector<int>> expected_composition;
    std::vector<int> sweep_steps; ///< schedule lengths for the bench sweep table
    MinimaCatalog catalog;
    double classify_tol = 0.05; ///< eV
    double relax_tol_grad = 1e-6;
    int relax_max_iter = 500;

    std::string output_dir = ".";
    nlohmann::json raw; ///< effective config, echoed for provenance

    SpeciesSet species() const { return SpeciesSet(species_names); }
    UnitCell cell() const { return UnitCell(basis, pbc); }
    SiteGrid grid() const {
        const SpeciesSet sp = species();
        return build_grid(cell(), granularity, sp);
    }
    PotentialModel potential() const {
        const SpeciesSet sp = species();
        PotentialModel m = PotentialModel::load(potential_params_path, sp);
        m.validate_complete(sp);
        return m;
    }
};

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError({"cannot open config file: " + path});
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError({std::string("json parse error: ") + e.what()});
    }

    std::vector<std::string> errs;
    RunConfig cfg;
    cfg.raw = j;

    const auto need = [&](const char* key) -> const nlohmann::json* {
        if (!j.contains(key)) {
            errs.push_back(std::string(key) + ": missing required section");
            return nullptr;
        }
        return &j.at(key);
    };

    if (const auto* cell = need("cell")) {
        try {
            const auto& b = cell->at("basis");
            for (int i = 0; i < 3; ++i)
                cfg.basis[static_cast<std::size_t>(i)] = {b.at(i).at(0).get<double>(),
                                                          b.at(i).at(1).get<double>(),
                                                          b.at(i).at(2).get<double>()};
        } catch (const std::exception&) {
            errs.push_back("cell.basis: expected a 3x3 array of numbers (Angstrom)");
        }
        try {
            const auto& p = cell->at("pbc");
            for (int i = 0; i < 3; ++i) cfg.pbc[static_cast<std::size_t>(i)] = p.at(i).get<bool>();
        } catch (const std::exception&) {
            errs.push_back("cell.pbc: expected an array of 3 booleans");
        }
        try {
            const auto& g = cell->at("granularity");
            if (g.is_number_integer()) {
                cfg.granularity = {g.get<int>(), g.get<int>(), g.get<int>()};
            } else {
                for (int i = 0; i < 3; ++i)
                    cfg.granularity[static_cast<std::size_t>(i)] = g.at(i).get<int>();
            }
            for (int i = 0; i < 3; ++i)
                if (cfg.granularity[static_cast<std::size_t>(i)] < 1)
                    errs.push_back("cell.granularity: entries must be >= 1");
        } catch (const std::exception&) {
            errs.push_back("cell.granularity: expected an integer or array of 3 integers");
        }
    }

    if (j.contains("species")) {
        try {
            cfg.species_names = j.at("species").get<std::vector<std::string>>();
        } catch (const std::exception&) {
            errs.push_back("species: expected an array of names");
        }
        if (cfg.species_names.empty()) errs.push_back("species: must not be empty");
    } else {
        errs.push_back("species: missing required section");
    }

    if (const auto* pot = need("potential")) {
        cfg.potential_kind = pot->value("kind", "");
        if (cfg.potential_kind != "lj" && cfg.potential_kind != "sw")
            errs.push_back("potential.kind: expected \"lj\" or \"sw\"");
        cfg.potential_params_path = pot->value("params", "");
        if (cfg.potential_params_path.empty())
            errs.push_back("potential.params: missing parameter file path");
        else if (!std::filesystem::exists(cfg.potential_params_path))
            errs.push_back("potential.params: file does not exist: " + cfg.potential_params_path);
    }

    if (j.contains("clamp")) {
        const double c = j.at("clamp").get<double>();
        if (!(c > 0.0)) errs.push_back("clamp: must be > 0 eV");
        cfg.clamp = c;
    }
    if (j.contains("reduction_threshold")) {
        const double t = j.at("reduction_threshold").get<double>();
        if (!(t > 0.0)) errs.push_back("reduction_threshold: must be > 0 eV");
        cfg.reduction_threshold = t;
    }

    if (j.contains("penalty")) {
        const auto& p = j.at("penalty");
        PenaltySpec spec;
        const std::string kind = p.value("kind", "");
        spec.strength = p.value("strength", 0.0);
        if (!(spec.strength > 0.0)) errs.push_back("penalty.strength: must be > 0");
        if (kind == "absolute") {
            spec.kind = PenaltyKind::Absolute;
            if (!p.contains("targets") || !p.at("targets").is_object()) {
                errs.push_back("penalty.targets: expected an object {species: count}");
            } else {
                for (const auto& [name, v] : p.at("targets").items()) {
                    const auto it =
                        std::find(cfg.species_names.begin(), cfg.species_names.end(), name);
                    if (it == cfg.species_names.end()) {
                        errs.push_back("penalty.targets: unknown species " + name);
                        continue;
                    }
                    spec.targets[static_cast<int>(it - cfg.species_names.begin())] =
                        v.get<double>();
                }
            }
        } else if (kind == "relative") {
            spec.kind = PenaltyKind::Relative;
            try {
                const auto pr = p.at("pair").get<std::vector<std::string>>();
                if (pr.size() != 2) throw std::runtime_error("size");
                const auto find = [&](const std::string& n) {
                    const auto it = std::find(cfg.species_names.begin(), cfg.species_names.end(), n);
                    if (it == cfg.species_names.end())
                        throw std::runtime_error("unknown species " + n);
                    return static_cast<int>(it - cfg.species_names.begin());
                };
                spec.species_a = find(pr[0]);
                spec.species_b = find(pr[1]);
            } catch (const std::exception&) {
                errs.push_back("penalty.pair: expected an array of two known species names");
            }
            spec.ratio = p.value("ratio", 0.0);
            if (!(spec.ratio > 0.0)) errs.push_back("penalty.ratio: must be > 0");
        } else {
            errs.push_back("penalty.kind: expected \"absolute\" or \"relative\"");
        }
        cfg.penalty = spec;
    }

    if (j.contains("schedule")) {
        const auto& s = j.at("schedule");
        cfg.schedule.t_max = s.value("t_max", 0.0);
        cfg.schedule.t_min = s.value("t_min", 0.0);
        cfg.schedule.n_steps = s.value("n_steps", 0);
        if (!(cfg.schedule.t_min > 0.0) || !(cfg.schedule.t_max >= cfg.schedule.t_min))
            errs.push_back("schedule: requires t_max >= t_min > 0");
        if (cfg.schedule.n_steps < 1) errs.push_back("schedule.n_steps: must be >= 1");
    }

    if (j.contains("batch")) {
        const auto& b = j.at("batch");
        cfg.n_runs = b.value("n_runs", 1);
        cfg.master_seed = b.value("master_seed", std::uint64_t{1});
        cfg.parallelism = b.value("parallelism", 1);
        if (cfg.n_runs < 1) errs.push_back("batch.n_runs: must be >= 1");
        if (cfg.parallelism < 1) errs.push_back("batch.parallelism: must be >= 1");
    }

    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        if (a.contains("gs_energy")) cfg.gs_energy = a.at("gs_energy").get<double>();
        cfg.gs_tol = a.value("gs_tol", 1e-6);
        cfg.bin_width = a.value("bin_width", 0.1);
        if (!(cfg.bin_width > 0.0)) errs.push_back("analysis.bin_width: must be > 0");
        if (a.contains("expected_composition"))
            cfg.expected_composition = a.at("expected_composition").get<std::vector<int>>();
        if (a.contains("sweep_steps")) {
            cfg.sweep_steps = a.at("sweep_steps").get<std::vector<int>>();
            for (int n : cfg.sweep_steps)
                if (n < 1) errs.push_back("analysis.sweep_steps: entries must be >= 1");
        }
        cfg.classify_tol = a.value("classify_tol", 0.05);
        cfg.relax_tol_grad = a.value("relax_tol_grad", 1e-6);
        cfg.relax_max_iter = a.value("relax_max_iter", 500);
        if (a.contains("catalog")) {
            for (const auto& e : a.at("catalog")) {
                MinimaEntry entry;
                entry.name = e.value("name", "");
                if (entry.name.empty()) {
                    errs.push_back("analysis.catalog: entry missing name");
                    continue;
                }
                if (e.contains("composition"))
                    entry.composition = e.at("composition").get<std::vector<int>>();
                if (e.contains("energy")) entry.energy = e.at("energy").get<double>();
                if (e.contains("energy_max")) entry.energy_max = e.at("energy_max").get<double>();
                cfg.catalog.add(std::move(entry));
            }
        }
    }

    cfg.output_dir = j.value("output_dir", std::string("."));

    if (!errs.empty()) throw ConfigError(std::move(errs));

    // structural validation (basis, grid) before any compute
    try {
        cfg.cell();
    } catch (const std::exception& e) {
        errs.push_back(std::string("cell.basis: ") + e.what());
    }
    if (errs.empty() && !cfg.species_names.empty()) {
        try {
            cfg.species();
        } catch (const std::exception& e) {
            errs.push_back(std::string("species: ") + e.what());
        }
    }
    if (!errs.empty()) throw ConfigError(std::move(errs));
    return cfg;
}

} // namespace gcsp
