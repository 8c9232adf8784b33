#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "gcsp/anneal.hpp"

namespace gcsp {

/// Fraction of runs whose final energy lies within tol of the ground state.
inline double ground_state_prob(const std::vector<RunResult>& results, double gs_energy,
                                double tol = 1e-6) {
    if (results.empty()) throw std::invalid_argument("ground_state_prob: empty batch");
    std::size_t hits = 0;
    for (const auto& r : results)
        if (std::abs(r.final_energy - gs_energy) <= tol) ++hits;
    return static_cast<double>(hits) / static_cast<double>(results.size());
}

/// Time-to-solution: TTS(tau) = tau ln(1 - p_r) / ln(1 - P_GS).
/// P_GS = 0 maps to the +infinity sentinel. P_GS = 1 is regularized with
/// eps = 1/(n_runs + 1) standing in for 1 - P_GS (rule-of-succession bound;
/// n_runs = 0 leaves eps at the most conservative 1).
inline double tts(double tau, double p_gs, double p_r = 0.99, int n_runs = 0) {
    if (p_gs < 0.0 || p_gs > 1.0) throw std::invalid_argument("tts: p_gs outside [0, 1]");
    if (p_gs == 0.0) return std::numeric_limits<double>::infinity();
    double miss = 1.0 - p_gs;
    if (p_gs >= 1.0) miss = 1.0 / (static_cast<double>(n_runs) + 1.0);
    return tau * std::log(1.0 - p_r) / std::log(miss);
}

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    std::size_t count_expected_density = 0; ///< rows whose composition matches the target
};

/// Residual-energy histogram (residual = E - gs_energy), with a per-density
/// split when a target composition is supplied. Composition comes from the
/// per-species set-bit counts of each run.
inline std::vector<HistogramBin> histogram(const std::vector<RunResult>& results,
                                           double gs_energy, double bin_width, int n_sites,
                                           int n_species,
                                           const std::vector<int>* expected_composition = nullptr) {
    if (!(bin_width > 0.0)) throw std::invalid_argument("histogram: bin width must be > 0");
    if (results.empty()) return {};
    double max_res = 0.0;
    for (const auto& r : results) max_res = std::max(max_res, r.final_energy - gs_energy);
    double min_res = 0.0;
    for (const auto& r : results) min_res = std::min(min_res, r.final_energy - gs_energy);
    const long lo_bin = static_cast<long>(std::floor(min_res / bin_width));
    const long hi_bin = static_cast<long>(std::floor(max_res / bin_width));
    std::vector<HistogramBin> bins(static_cast<std::size_t>(hi_bin - lo_bin + 1));
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].lo = (lo_bin + static_cast<long>(b)) * bin_width;
        bins[b].hi = bins[b].lo + bin_width;
    }
    for (const auto& r : results) {
        const double res = r.final_energy - gs_energy;
        const long b = static_cast<long>(std::floor(res / bin_width)) - lo_bin;
        auto& bin = bins[static_cast<std::size_t>(b)];
        ++bin.count;
        if (expected_composition) {
            std::vector<int> comp(static_cast<std::size_t>(n_species), 0);
            for (int s = 0; s < n_species; ++s)
                for (int i = 0; i < n_sites; ++i)
                    if (r.bits[static_cast<std::size_t>(s * n_sites + i)])
                        ++comp[static_cast<std::size_t>(s)];
            if (comp == *expected_composition) ++bin.count_expected_density;
        }
    }
    return bins;
}

struct RunStats {
    int n_steps = 0;
    int n_runs = 0;
    std::size_t ground_state_count = 0;
    double p_gs = 0.0;
    double mean_residual = 0.0; ///< eV
    double tau_mean = 0.0;      ///< s, mean annealing wall time per run
    double tts_s = 0.0;         ///< s
    bool min_tts = false;       ///< flagged on the minimum-TTS row of a sweep
};

inline RunStats batch_stats(const std::vector<RunResult>& results, int n_steps, double gs_energy,
                            double gs_tol = 1e-6, double p_r = 0.99) {
    RunStats st;
    st.n_steps = n_steps;
    st.n_runs = static_cast<int>(results.size());
    double acc_res = 0.0, acc_tau = 0.0;
    for (const auto& r : results) {
        if (std::abs(r.final_energy - gs_energy) <= gs_tol) ++st.ground_state_count;
        acc_res += r.final_energy - gs_energy;
        acc_tau += r.wall_time_s;
    }
    st.p_gs = static_cast<double>(st.ground_state_count) / st.n_runs;
    st.mean_residual = acc_res / st.n_runs;
    st.tau_mean = acc_tau / st.n_runs;
    st.tts_s = tts(st.tau_mean, st.p_gs, p_r, st.n_runs);
    return st;
}

/// One RunStats row per schedule; the minimum-TTS row is flagged.
inline std::vector<RunStats> schedule_sweep(const HuboPolynomial& poly, int n_sites,
                                            int n_species,
                                            const std::vector<AnnealSchedule>& schedules,
                                            int n_runs, std::uint64_t master_seed,
                                            double gs_energy, double gs_tol = 1e-6,
                                            int parallelism = 1) {
    if (schedules.empty()) throw std::invalid_argument("schedule_sweep: empty schedule list");
    std::vector<RunStats> rows;
    rows.reserve(schedules.size());
    for (const auto& sched : schedules) {
        const auto results = run_batch(poly, n_sites, n_species, sched, n_runs,
                                       master_seed, parallelism);
        rows.push_back(batch_stats(results, sched.n_steps, gs_energy, gs_tol));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < rows.size(); ++i)
        if (rows[i].tts_s < rows[best].tts_s) best = i;
    rows[best].min_tts = true;
    return rows;
}

} // namespace gcsp
