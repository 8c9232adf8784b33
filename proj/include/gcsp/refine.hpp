#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gcsp/anneal.hpp"
#include "gcsp/cell.hpp"
#include "gcsp/energy.hpp"

namespace gcsp {

/// Decode a bitstring into an atom list: one atom per set bit, at the site
/// position, with the variable's species.
inline AtomList decode(const std::vector<std::uint8_t>& bits, const SiteGrid& grid,
                       const UnitCell& cell) {
    if (static_cast<int>(bits.size()) != grid.n_vars())
        throw std::invalid_argument("decode: bitstring length mismatch");
    AtomList atoms;
    for (int v = 0; v < grid.n_vars(); ++v)
        if (bits[static_cast<std::size_t>(v)])
            atoms.push_back({grid.var_species(v), site_position(grid, cell, grid.var_site(v)), false});
    return atoms;
}

inline std::vector<int> species_counts(const AtomList& atoms, int n_species) {
    std::vector<int> c(static_cast<std::size_t>(n_species), 0);
    for (const auto& a : atoms) ++c[static_cast<std::size_t>(a.species)];
    return c;
}

struct RelaxResult {
    AtomList atoms;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    int iterations = 0;
    bool converged = false;
    double grad_norm = 0.0; ///< max-norm, eV/Angstrom
    std::string diagnostic;
};

namespace detail {

inline double pbc_total(const PotentialModel& model, const UnitCell& cell, const AtomList& atoms) {
    return energy_pbc(model, cell, atoms).total();
}

/// Central-difference gradient of the periodic energy over Cartesian
/// coordinates, step h.
inline void fd_gradient(const PotentialModel& model, const UnitCell& cell, AtomList& atoms,
                        double h, std::vector<double>& grad) {
    const std::size_t n = atoms.size();
    grad.assign(3 * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double* comp[3] = {&atoms[i].pos.x, &atoms[i].pos.y, &atoms[i].pos.z};
        for (int d = 0; d < 3; ++d) {
            const double orig = *comp[d];
            *comp[d] = orig + h;
            const double ep = pbc_total(model, cell, atoms);
            *comp[d] = orig - h;
            const double em = pbc_total(model, cell, atoms);
            *comp[d] = orig;
            grad[3 * i + static_cast<std::size_t>(d)] = (ep - em) / (2.0 * h);
        }
    }
}

} // namespace detail

namespace detail {
inline RelaxResult bfgs_descend(const AtomList& start, const UnitCell& cell,
                                const PotentialModel& model, double tol_grad, int max_iter,
                                double fd_step);
}

/// Quasi-Newton (BFGS) relaxation of the periodic configuration energy over
/// Cartesian coordinates at fixed cell and composition. Gradients by central
/// finite differences; backtracking line search with the Armijo condition;
/// the inverse-Hessian approximation is reset when the curvature condition
/// fails. Coordinates are wrapped back into the cell along periodic axes.
///
/// A converged state is verified to be a minimum rather than a
/// symmetry-protected saddle: the coordinates are given a tiny deterministic
/// jitter and re-descended; the displaced result is kept only when it finds
/// strictly lower energy (high-symmetry grid states can have exactly zero
/// gradient while being unstable).
inline RelaxResult bfgs_relax(const AtomList& start, const UnitCell& cell,
                              const PotentialModel& model, double tol_grad = 1e-6,
                              int max_iter = 500, double fd_step = 1e-5) {
    RelaxResult res = detail::bfgs_descend(start, cell, model, tol_grad, max_iter, fd_step);
    if (!res.converged || res.atoms.empty()) return res;
    Xoshiro256ss jitter_rng(0x5add1eULL);
    for (int cycle = 0; cycle < 3; ++cycle) {
        AtomList moved = res.atoms;
        for (auto& a : moved)
            a.pos += Vec3{(jitter_rng.uniform() - 0.5) * 1e-3,
                          (jitter_rng.uniform() - 0.5) * 1e-3,
                          (jitter_rng.uniform() - 0.5) * 1e-3};
        RelaxResult probe = detail::bfgs_descend(moved, cell, model, tol_grad, max_iter, fd_step);
        if (!probe.converged || probe.final_energy >= res.final_energy - 1e-9) break;
        probe.initial_energy = res.initial_energy;
        probe.iterations += res.iterations;
        res = std::move(probe);
    }
    return res;
}

namespace detail {
inline RelaxResult bfgs_descend(const AtomList& start, const UnitCell& cell,
                                const PotentialModel& model, double tol_grad,
                                int max_iter, double fd_step) {
    RelaxResult res;
    res.atoms = start;
    const std::size_t n = start.size();
    const std::size_t dim = 3 * n;
    res.initial_energy = detail::pbc_total(model, cell, res.atoms);
    res.final_energy = res.initial_energy;
    if (n == 0) {
        res.converged = true;
        return res;
    }
    if (!std::isfinite(res.initial_energy)) {
        res.diagnostic = "non-finite energy at the starting configuration";
        return res;
    }

    const auto get_x = [&](std::vector<double>& x) {
        x.resize(dim);
        for (std::size_t i = 0; i < n; ++i) {
            x[3 * i] = res.atoms[i].pos.x;
            x[3 * i + 1] = res.atoms[i].pos.y;
            x[3 * i + 2] = res.atoms[i].pos.z;
        }
    };
    const auto set_x = [&](const std::vector<double>& x) {
        for (std::size_t i = 0; i < n; ++i)
            res.atoms[i].pos = {x[3 * i], x[3 * i + 1], x[3 * i + 2]};
    };
    const auto max_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    };

    std::vector<double> x, g, g_new, p, s, y;
    get_x(x);
    detail::fd_gradient(model, cell, res.atoms, fd_step, g);
    res.grad_norm = max_norm(g);

    // inverse Hessian approximation, dense (systems here are tens of atoms)
    std::vector<double> H(dim * dim, 0.0);
    const auto reset_H = [&]() {
        std::fill(H.begin(), H.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) H[i * dim + i] = 1.0;
    };
    reset_H();

    double f = res.initial_energy;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (res.grad_norm <= tol_grad) {
            res.converged = true;
            break;
        }
        res.iterations = iter + 1;

        p.assign(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < dim; ++j) acc += H[i * dim + j] * g[j];
            p[i] = -acc;
        }
        double gTp = 0.0;
        for (std::size_t i = 0; i < dim; ++i) gTp += g[i] * p[i];
        if (gTp >= 0.0) { // not a descent direction: restart from steepest descent
            reset_H();
            for (std::size_t i = 0; i < dim; ++i) p[i] = -g[i];
            gTp = 0.0;
            for (std::size_t i = 0; i < dim; ++i) gTp += g[i] * p[i];
        }

        // Armijo backtracking
        const double c1 = 1e-4;
        double alpha = 1.0;
        double f_new = 0.0;
        bool ok = false;
        std::vector<double> x_new(dim);
        for (int bt = 0; bt < 40; ++bt) {
            for (std::size_t i = 0; i < dim; ++i) x_new[i] = x[i] + alpha * p[i];
            set_x(x_new);
            f_new = detail::pbc_total(model, cell, res.atoms);
            if (!std::isfinite(f_new)) {
                res.diagnostic = "non-finite energy during line search";
                set_x(x);
                res.final_energy = f;
                return res;
            }
            if (f_new <= f + c1 * alpha * gTp) {
                ok = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!ok) { // no progress possible at machine resolution
            set_x(x);
            res.converged = res.grad_norm <= tol_grad;
            break;
        }

        detail::fd_gradient(model, cell, res.atoms, fd_step, g_new);
        s.resize(dim);
        y.resize(dim);
        double sy = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            s[i] = alpha * p[i];
            y[i] = g_new[i] - g[i];
            sy += s[i] * y[i];
        }
        if (sy > 1e-12) {
            // BFGS inverse update: H <- (I - s y^T / sy) H (I - y s^T / sy) + s s^T / sy
            std::vector<double> Hy(dim, 0.0);
            for (std::size_t i = 0; i < dim; ++i) {
                double acc = 0.0;
                for (std::size_t j = 0; j < dim; ++j) acc += H[i * dim + j] * y[j];
                Hy[i] = acc;
            }
            double yHy = 0.0;
            for (std::size_t i = 0; i < dim; ++i) yHy += y[i] * Hy[i];
            for (std::size_t i = 0; i < dim; ++i)
                for (std::size_t j = 0; j < dim; ++j) {
                    H[i * dim + j] += (sy + yHy) * s[i] * s[j] / (sy * sy) -
                                      (Hy[i] * s[j] + s[i] * Hy[j]) / sy;
                }
        } else {
            reset_H();
        }

        x = x_new;
        f = f_new;
        g = g_new;
        res.grad_norm = max_norm(g);
        res.final_energy = f;
    }
    res.final_energy = f;
    if (res.grad_norm <= tol_grad) res.converged = true;

    // wrap back into the cell along periodic axes
    for (auto& a : res.atoms) a.pos = cell.wrap(a.pos);
    return res;
}
} // namespace detail

// ---------------------------------------------------------------------------
// Classification against known minima
// ---------------------------------------------------------------------------

struct MinimaEntry {
    std::string name;
    std::vector<int> composition;  ///< per-species atom counts
    double energy = 0.0;           ///< eV (point entries)
    double energy_max = std::numeric_limits<double>::quiet_NaN(); ///< set => band [energy, energy_max]

    bool is_band() const { return std::isfinite(energy_max); }
};

struct MinimaCatalog {
    std::vector<MinimaEntry> entries;

    void add(MinimaEntry e) {
        for (const auto& x : entries)
            if (x.name == e.name) throw std::invalid_argument("duplicate catalog entry: " + e.name);
        entries.push_back(std::move(e));
    }
};

/// Nearest catalog entry by energy with matching composition within the
/// tolerance; "unclassified" otherwise. Band entries match any energy inside
/// [energy, energy_max].
inline std::string classify(const AtomList& atoms, double energy, const MinimaCatalog& catalog,
                            int n_species, double energy_tol) {
    const std::vector<int> comp = species_counts(atoms, n_species);
    std::string best = "unclassified";
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& e : catalog.entries) {
        if (!e.composition.empty() && e.composition != comp) continue;
        if (e.is_band()) {
            if (energy >= e.energy - energy_tol && energy <= e.energy_max + energy_tol) {
                const double mid = 0.5 * (e.energy + e.energy_max);
                const double d = std::abs(energy - mid);
                if (d < best_dist) {
                    best_dist = d;
                    best = e.name;
                }
            }
        } else {
            const double d = std::abs(energy - e.energy);
            if (d <= energy_tol && d < best_dist) {
                best_dist = d;
                best = e.name;
            }
        }
    }
    return best;
}

} // namespace gcsp
