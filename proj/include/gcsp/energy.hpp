#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "gcsp/cell.hpp"
#include "gcsp/potential.hpp"

namespace gcsp {

/// Per-order energy decomposition (index = interaction order m).
struct EnergyBreakdown {
    std::vector<double> by_order; ///< by_order[m] for m in 2..M, eV; index 0/1 unused

    double order(int m) const {
        return m < static_cast<int>(by_order.size()) ? by_order[static_cast<std::size_t>(m)] : 0.0;
    }
    double total() const {
        double t = 0.0;
        for (double e : by_order) t += e;
        return t;
    }
    EnergyBreakdown& operator+=(const EnergyBreakdown& o) {
        if (o.by_order.size() > by_order.size()) by_order.resize(o.by_order.size(), 0.0);
        for (std::size_t i = 0; i < o.by_order.size(); ++i) by_order[i] += o.by_order[i];
        return *this;
    }
};

/// F_ell(Y): sum of V_ell over strictly increasing index ell-tuples of a
/// finite atom set (open boundaries). The per-order total-energy oracle.
inline double oracle_F(const PotentialModel& model, const AtomList& atoms, int order) {
    const std::size_t n = atoms.size();
    if (order == 2) {
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                e += model.pair_energy(atoms[i].species, atoms[j].species,
                                       (atoms[i].pos - atoms[j].pos).norm());
        return e;
    }
    if (order == 3) {
        if (!model.has_three_body()) return 0.0;
        double e = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                for (std::size_t k = j + 1; k < n; ++k)
                    e += model.v3(atoms[i].species, atoms[j].species, atoms[k].species,
                                  atoms[i].pos, atoms[j].pos, atoms[k].pos);
        return e;
    }
    throw std::invalid_argument("oracle_F: unsupported interaction order " +
                                std::to_string(order));
}

/// Total energy of a finite cluster (open boundaries), per order.
inline EnergyBreakdown cluster_energy(const PotentialModel& model, const AtomList& atoms) {
    EnergyBreakdown e;
    e.by_order.assign(static_cast<std::size_t>(model.max_order()) + 1, 0.0);
    e.by_order[2] = oracle_F(model, atoms, 2);
    if (model.has_three_body()) e.by_order[3] = oracle_F(model, atoms, 3);
    return e;
}

/// Configuration energy of one unit cell under periodic boundary conditions.
///
/// Equals (1/ell) sum_j [F_ell(SC) - F_ell(SC \ {x_j})] summed over orders,
/// with SC the supercell from make_supercell at the model's full reach. The
/// equivalent per-center form evaluated here visits each anchored tuple once:
///   order 2: (1/2) sum_{i in cell} sum_{J in SC, J != i} V2(x_i, x_J)
///   order 3: sum_{c in cell} sum_{unordered SC pairs {J,K}, J,K != c} h(c; J, K)
/// Atoms must lie inside the cell along periodic axes.
inline EnergyBreakdown energy_pbc(const PotentialModel& model, const UnitCell& cell,
                                  const AtomList& atoms) {
    EnergyBreakdown e;
    e.by_order.assign(static_cast<std::size_t>(model.max_order()) + 1, 0.0);
    if (atoms.empty()) return e;

    const AtomList sc = make_supercell(cell, atoms, model.reach());
    const std::size_t n_orig = atoms.size();

    // Pair part.
    const double rc2 = model.max_pair_cutoff();
    double e2 = 0.0;
    for (std::size_t i = 0; i < n_orig; ++i) {
        for (std::size_t j = 0; j < sc.size(); ++j) {
            if (j == i) continue;
            const double r = (sc[j].pos - atoms[i].pos).norm();
            if (r >= rc2) continue;
            e2 += 0.5 * model.pair_energy(atoms[i].species, sc[j].species, r);
        }
    }
    e.by_order[2] = e2;

    // Angular part, centers anchored in the cell. Wings range over all
    // supercell atoms within the wing cutoff of the center.
    if (model.has_three_body()) {
        const double rc3 = model.max_wing_cutoff();
        double e3 = 0.0;
        std::vector<Vec3> wing_d;
        std::vector<int> wing_s;
        for (std::size_t c = 0; c < n_orig; ++c) {
            wing_d.clear();
            wing_s.clear();
            for (std::size_t j = 0; j < sc.size(); ++j) {
                if (j == c) continue;
                const Vec3 d = sc[j].pos - atoms[c].pos;
                const double r2 = d.norm2();
                if (r2 >= rc3 * rc3 || r2 <= 0.0) continue;
                wing_d.push_back(d);
                wing_s.push_back(sc[j].species);
            }
            for (std::size_t a = 0; a < wing_d.size(); ++a)
                for (std::size_t b = a + 1; b < wing_d.size(); ++b)
                    e3 += model.triple_term(atoms[c].species, wing_s[a], wing_s[b],
                                            wing_d[a], wing_d[b]);
        }
        e.by_order[3] = e3;
    }
    return e;
}

} // namespace gcsp
