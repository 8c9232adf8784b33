#pragma once

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <atomic>
#include <cstdint>
#include <future>
#include <string>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "gcsp/hubo.hpp"
#include "gcsp/rng.hpp"

namespace gcsp {

struct AnnealSchedule {
    double t_max = 1e-2; ///< eV
    double t_min = 1e-4; ///< eV
    int n_steps = 30;    ///< Monte Carlo steps per spin (sweeps)

    void validate() const {
        if (!(t_min > 0.0) || !(t_max >= t_min))
            throw std::invalid_argument("schedule requires t_max >= t_min > 0");
        if (n_steps < 1) throw std::invalid_argument("schedule requires n_steps >= 1");
    }
};

/// Geometric cooling: T(x) = T_max (T_min/T_max)^(x/N_steps).
inline double temperature(const AnnealSchedule& s, int x) {
    if (x < 0 || x > s.n_steps) throw std::out_of_range("temperature: step index out of range");
    return s.t_max * std::pow(s.t_min / s.t_max, static_cast<double>(x) / s.n_steps);
}

/// Bitstring over (site, species) variables with cached per-species
/// population lists (set and unset variables per species block).
class Configuration {
public:
    Configuration(int n_sites, int n_species)
        : n_sites_(n_sites), n_species_(n_species),
          bits_(static_cast<std::size_t>(n_sites) * static_cast<std::size_t>(n_species), 0),
          slot_(bits_.size()), set_(static_cast<std::size_t>(n_species)),
          unset_(static_cast<std::size_t>(n_species)) {
        for (int s = 0; s < n_species; ++s)
            for (int i = 0; i < n_sites; ++i) {
                const int v = s * n_sites + i;
                slot_[static_cast<std::size_t>(v)] =
                    static_cast<int>(unset_[static_cast<std::size_t>(s)].size());
                unset_[static_cast<std::size_t>(s)].push_back(v);
            }
    }

    static Configuration random(int n_sites, int n_species, Xoshiro256ss& rng) {
        Configuration c(n_sites, n_species);
        for (int v = 0; v < c.num_vars(); ++v)
            if (rng.next() & 1ULL) c.flip(v);
        return c;
    }

    static Configuration from_bits(int n_sites, int n_species,
                                   const std::vector<std::uint8_t>& bits) {
        Configuration c(n_sites, n_species);
        if (bits.size() != c.bits_.size())
            throw std::invalid_argument("from_bits: length mismatch");
        for (std::size_t v = 0; v < bits.size(); ++v)
            if (bits[v]) c.flip(static_cast<int>(v));
        return c;
    }

    int num_vars() const { return static_cast<int>(bits_.size()); }
    int n_sites() const { return n_sites_; }
    int n_species() const { return n_species_; }
    bool get(int v) const { return bits_[static_cast<std::size_t>(v)] != 0; }
    const std::vector<std::uint8_t>& bits() const { return bits_; }
    int species_of(int v) const { return v / n_sites_; }

    const std::vector<int>& set_vars(int species) const {
        return set_[static_cast<std::size_t>(species)];
    }
    const std::vector<int>& unset_vars(int species) const {
        return unset_[static_cast<std::size_t>(species)];
    }
    int count(int species) const {
        return static_cast<int>(set_[static_cast<std::size_t>(species)].size());
    }

    void flip(int v) {
        const int s = species_of(v);
        auto& from = bits_[static_cast<std::size_t>(v)] ? set_[static_cast<std::size_t>(s)]
                                                        : unset_[static_cast<std::size_t>(s)];
        auto& to = bits_[static_cast<std::size_t>(v)] ? unset_[static_cast<std::size_t>(s)]
                                                      : set_[static_cast<std::size_t>(s)];
        const int pos = slot_[static_cast<std::size_t>(v)];
        const int last = from.back();
        from[static_cast<std::size_t>(pos)] = last;
        slot_[static_cast<std::size_t>(last)] = pos;
        from.pop_back();
        slot_[static_cast<std::size_t>(v)] = static_cast<int>(to.size());
        to.push_back(v);
        bits_[static_cast<std::size_t>(v)] ^= 1;
    }

private:
    int n_sites_, n_species_;
    std::vector<std::uint8_t> bits_;
    std::vector<int> slot_; ///< position of each var inside its current list
    std::vector<std::vector<int>> set_, unset_;
};

/// Energy change of flipping `var`, by direct scan of the polynomial: the sum
/// of coefficients of terms containing var whose other variables are all 1,
/// signed by flip direction. Reference implementation for tests and the
/// public operation; the annealer keeps the same quantity incrementally.
inline double delta_flip(const HuboPolynomial& poly, const Configuration& config, int var) {
    if (var < 0 || var >= poly.num_vars()) throw std::out_of_range("delta_flip: var out of range");
    double s = 0.0;
    const auto& bits = config.bits();
    for (const auto& t : poly.terms()) {
        if (!t.contains(static_cast<std::uint32_t>(var))) continue;
        bool others = true;
        for (int i = 0; i < t.order; ++i) {
            const int w = static_cast<int>(t.idx[static_cast<std::size_t>(i)]);
            if (w != var && !bits[static_cast<std::size_t>(w)]) { others = false; break; }
        }
        if (others) s += t.coeff;
    }
    return config.get(var) ? -s : s;
}

// ---------------------------------------------------------------------------
// Compiled polynomial for fast annealing
// ---------------------------------------------------------------------------

/// Immutable compiled view of a HuboPolynomial (order <= 3), shared by all
/// runs of a batch. Linear coefficients are dense, pair coefficients are a
/// dense matrix for small systems (hash map otherwise), and cubic terms are
/// indexed by the pairs they contain so flip/exchange deltas touch only the
/// set variables' neighborhoods.
class SaPolynomial {
public:
    explicit SaPolynomial(const HuboPolynomial& poly)
        : nvars_(poly.num_vars()), offset_(poly.offset()) {
        if (poly.max_order() > 3)
            throw std::invalid_argument("annealer supports polynomial order <= 3");
        lin_.assign(static_cast<std::size_t>(nvars_), 0.0);
        dense_pairs_ = nvars_ <= 2048;
        if (dense_pairs_)
            pair_mat_.assign(static_cast<std::size_t>(nvars_) * static_cast<std::size_t>(nvars_), 0.0);

        struct CubicRef { std::uint64_t pair; std::uint32_t third; double coeff; };
        std::vector<CubicRef> refs;
        std::vector<std::pair<int, double>> adj_count;
        for (const auto& t : poly.terms()) {
            if (t.order == 1) {
                lin_[t.idx[0]] = t.coeff;
            } else if (t.order == 2) {
                set_pair(t.idx[0], t.idx[1], t.coeff);
                pair_adj_[t.idx[0]].push_back({t.idx[1], t.coeff});
                pair_adj_[t.idx[1]].push_back({t.idx[0], t.coeff});
            } else {
                const std::uint32_t a = t.idx[0], b = t.idx[1], c = t.idx[2];
                refs.push_back({pair_key(a, b), c, t.coeff});
                refs.push_back({pair_key(a, c), b, t.coeff});
                refs.push_back({pair_key(b, c), a, t.coeff});
            }
        }
        std::sort(refs.begin(), refs.end(),
                  [](const CubicRef& x, const CubicRef& y) { return x.pair < y.pair; });
        cubic_third_.reserve(refs.size());
        cubic_coeff_.reserve(refs.size());
        for (std::size_t i = 0; i < refs.size();) {
            std::size_t j = i;
            while (j < refs.size() && refs[j].pair == refs[i].pair) ++j;
            cubic_index_[refs[i].pair] = {static_cast<std::uint32_t>(cubic_third_.size()),
                                          static_cast<std::uint32_t>(j - i)};
            for (std::size_t k = i; k < j; ++k) {
                cubic_third_.push_back(refs[k].third);
                cubic_coeff_.push_back(refs[k].coeff);
            }
            i = j;
        }
    }

    int num_vars() const { return nvars_; }
    double offset() const { return offset_; }
    double linear(int v) const { return lin_[static_cast<std::size_t>(v)]; }

    double pair(int a, int b) const {
        if (dense_pairs_)
            return pair_mat_[static_cast<std::size_t>(a) * static_cast<std::size_t>(nvars_) +
                             static_cast<std::size_t>(b)];
        auto it = pair_map_.find(pair_key(static_cast<std::uint32_t>(std::min(a, b)),
                                          static_cast<std::uint32_t>(std::max(a, b))));
        return it == pair_map_.end() ? 0.0 : it->second;
    }

    const std::vector<std::pair<std::uint32_t, double>>& pair_neighbors(int v) const {
        static const std::vector<std::pair<std::uint32_t, double>> empty;
        auto it = pair_adj_.find(static_cast<std::uint32_t>(v));
        return it == pair_adj_.end() ? empty : it->second;
    }

    /// Cubic terms containing the (unordered) pair {a, b}: spans of
    /// (third_variable, coefficient).
    std::pair<const std::uint32_t*, std::size_t> cubics_of_pair(int a, int b,
                                                                const double** coeffs) const {
        auto it = cubic_index_.find(pair_key(static_cast<std::uint32_t>(std::min(a, b)),
                                             static_cast<std::uint32_t>(std::max(a, b))));
        if (it == cubic_index_.end()) {
            *coeffs = nullptr;
            return {nullptr, 0};
        }
        *coeffs = cubic_coeff_.data() + it->second.first;
        return {cubic_third_.data() + it->second.first, it->second.second};
    }

private:
    static std::uint64_t pair_key(std::uint32_t a, std::uint32_t b) {
        return (static_cast<std::uint64_t>(a) << 32) | b;
    }
    void set_pair(std::uint32_t a, std::uint32_t b, double c) {
        if (dense_pairs_) {
            pair_mat_[static_cast<std::size_t>(a) * static_cast<std::size_t>(nvars_) + b] = c;
            pair_mat_[static_cast<std::size_t>(b) * static_cast<std::size_t>(nvars_) + a] = c;
        } else {
            pair_map_[pair_key(a, b)] = c;
        }
    }

    int nvars_;
    double offset_;
    std::vector<double> lin_;
    bool dense_pairs_ = true;
    std::vector<double> pair_mat_;
    std::unordered_map<std::uint64_t, double> pair_map_;
    std::unordered_map<std::uint32_t, std::vector<std::pair<std::uint32_t, double>>> pair_adj_;
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> cubic_index_;
    std::vector<std::uint32_t> cubic_third_;
    std::vector<double> cubic_coeff_;
};

struct RunResult {
    std::vector<std::uint8_t> bits;
    double final_energy = 0.0; ///< eV; equals evaluate(poly, bits)
    double wall_time_s = 0.0;  ///< annealing portion only
    std::uint64_t seed = 0;
    std::uint64_t attempted_moves = 0;
    std::string rng_algorithm = Xoshiro256ss::algorithm_name;
};

namespace detail {

/// Per-run mutable annealing state: configuration plus maintained flip
/// deltas. deltaE[v] is always the exact energy change of flipping v in the
/// current configuration.
class SaState {
public:
    SaState(const SaPolynomial& sp, Configuration&& config)
        : sp_(sp), config_(std::move(config)) {
        delta_.assign(static_cast<std::size_t>(sp_.num_vars()), 0.0);
        for (int v = 0; v < sp_.num_vars(); ++v) delta_[static_cast<std::size_t>(v)] = scan_delta(v);
    }

    const Configuration& config() const { return config_; }
    double delta(int v) const { return delta_[static_cast<std::size_t>(v)]; }

    double exchange_delta(int i, int j) const {
        // i set, j unset, same species. Shared terms would otherwise be
        // double counted: subtract contributions of terms containing both
        // whose remaining variables are set.
        double corr = sp_.pair(i, j);
        const double* cc = nullptr;
        auto [thirds, n] = sp_.cubics_of_pair(i, j, &cc);
        for (std::size_t k = 0; k < n; ++k)
            if (config_.get(static_cast<int>(thirds[k]))) corr += cc[k];
        return delta_[static_cast<std::size_t>(i)] + delta_[static_cast<std::size_t>(j)] - corr;
    }

    /// Commit a flip and maintain all deltas.
    void flip(int v) {
        const bool setting = !config_.get(v);
        if (!setting) config_.flip(v); // remove from the set list before the scan
        const double sgn = setting ? 1.0 : -1.0;
        for (const auto& [w, c] : sp_.pair_neighbors(v)) {
            if (static_cast<int>(w) == v) continue;
            delta_[w] += (config_.get(static_cast<int>(w)) ? -sgn : sgn) * c;
        }
        for (int s = 0; s < config_.n_species(); ++s) {
            for (const int u : config_.set_vars(s)) {
                if (u == v) continue;
                const double* cc = nullptr;
                auto [thirds, n] = sp_.cubics_of_pair(v, u, &cc);
                for (std::size_t k = 0; k < n; ++k) {
                    const int t = static_cast<int>(thirds[k]);
                    if (t == u || t == v) continue;
                    delta_[static_cast<std::size_t>(t)] +=
                        (config_.get(t) ? -sgn : sgn) * cc[k];
                }
            }
        }
        delta_[static_cast<std::size_t>(v)] = -delta_[static_cast<std::size_t>(v)];
        if (setting) config_.flip(v);
    }

    double scan_delta(int v) const {
        double s = sp_.linear(v);
        for (int sp = 0; sp < config_.n_species(); ++sp)
            for (const int w : config_.set_vars(sp)) {
                if (w == v) continue;
                s += sp_.pair(v, w);
                const double* cc = nullptr;
                auto [thirds, n] = sp_.cubics_of_pair(v, w, &cc);
                for (std::size_t k = 0; k < n; ++k) {
                    const int t = static_cast<int>(thirds[k]);
                    if (t != v && t > w && config_.get(t)) s += cc[k];
                }
            }
        return config_.get(v) ? -s : s;
    }

private:
    const SaPolynomial& sp_;
    Configuration config_;
    std::vector<double> delta_;
};

} // namespace detail

/// One Monte Carlo step per spin: every variable gets a flip proposal in
/// lexicographic site order, then every opposite-valued same-species pair
/// present at the start of the exchange phase gets an exchange proposal in a
/// fresh random order (skipping pairs invalidated by earlier accepted
/// exchanges). Metropolis acceptance min(1, exp(-dE/T)) throughout. Returns
/// the attempted-move count.
///
/// The ordered flip pass matters: on coarse grids the hot-phase shedding of
/// a dense random start can otherwise overshoot into few-atom dead ends that
/// the temperature window cannot escape, measurably lowering the
/// ground-state rate.
inline std::uint64_t sweep(detail::SaState& state, double temp, Xoshiro256ss& rng,
                           std::vector<std::pair<int, int>>& pair_scratch, double& energy) {
    std::uint64_t attempts = 0;
    const auto accept = [&](double dE) {
        if (dE <= 0.0) return true;
        return rng.uniform() < std::exp(-dE / temp);
    };

    for (int v = 0; v < state.config().num_vars(); ++v) {
        ++attempts;
        const double dE = state.delta(v);
        if (accept(dE)) {
            state.flip(v);
            energy += dE;
        }
    }

    auto& pairs = pair_scratch;
    pairs.clear();
    for (int s = 0; s < state.config().n_species(); ++s)
        for (const int i : state.config().set_vars(s))
            for (const int j : state.config().unset_vars(s)) pairs.push_back({i, j});
    rng.shuffle(pairs);
    for (const auto& [i, j] : pairs) {
        if (!state.config().get(i) || state.config().get(j)) continue; // stale
        ++attempts;
        const double dE = state.exchange_delta(i, j);
        if (accept(dE)) {
            state.flip(i);
            state.flip(j);
            energy += dE;
        }
    }
    return attempts;
}

/// Full annealing run: bit-for-bit reproducible given (seed, poly, schedule).
/// The grid layout (site count, species count) controls which exchanges are
/// legal; `initial` overrides the uniform random starting configuration.
inline RunResult run_sa(const SaPolynomial& sp, const HuboPolynomial& poly, int n_sites,
                        int n_species, const AnnealSchedule& schedule, std::uint64_t seed,
                        const Configuration* initial = nullptr) {
    schedule.validate();
    if (n_sites * n_species != poly.num_vars())
        throw std::invalid_argument("run_sa: grid layout does not match polynomial size");
    Xoshiro256ss rng(seed);
    Configuration config =
        initial ? *initial : Configuration::random(n_sites, n_species, rng);
    detail::SaState state(sp, std::move(config));
    double energy = poly.evaluate(state.config().bits());

    RunResult res;
    res.seed = seed;
    std::vector<std::pair<int, int>> pairs;
    const auto t0 = std::chrono::steady_clock::now();
    for (int x = 0; x < schedule.n_steps; ++x) {
        res.attempted_moves += sweep(state, temperature(schedule, x), rng, pairs, energy);
#ifndef NDEBUG
        assert(std::abs(energy - poly.evaluate(state.config().bits())) <= 1e-8);
#endif
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.wall_time_s = std::chrono::duration<double>(t1 - t0).count();
    res.bits = state.config().bits();
    res.final_energy = poly.evaluate(res.bits);
    return res;
}

/// Independent runs with per-run seeds derived from the master seed. The
/// result list is identical regardless of the parallelism degree.
inline std::vector<RunResult> run_batch(const HuboPolynomial& poly, int n_sites, int n_species,
                                        const AnnealSchedule& schedule, int n_runs,
                                        std::uint64_t master_seed, int parallelism = 1) {
    if (n_runs < 1) throw std::invalid_argument("run_batch: n_runs must be >= 1");
    if (parallelism < 1) parallelism = 1;
    const SaPolynomial sp(poly);
    std::vector<RunResult> results(static_cast<std::size_t>(n_runs));
    std::atomic<int> next{0};
    const auto worker = [&]() {
        for (;;) {
            const int idx = next.fetch_add(1);
            if (idx >= n_runs) return;
            const std::uint64_t seed = derive_run_seed(master_seed, static_cast<std::uint64_t>(idx));
            results[static_cast<std::size_t>(idx)] =
                run_sa(sp, poly, n_sites, n_species, schedule, seed);
        }
    };
    if (parallelism == 1) {
        worker();
    } else {
        std::vector<std::future<void>> futs;
        for (int t = 0; t < parallelism; ++t)
            futs.push_back(std::async(std::launch::async, worker));
        for (auto& f : futs) f.get();
    }
    return results;
}

} // namespace gcsp
