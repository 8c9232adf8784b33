#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcsp/vec3.hpp"

namespace gcsp {

struct Species {
    int id = 0;
    std::string name;
};

/// Dense, name-unique species table. Index == id.
class SpeciesSet {
public:
    SpeciesSet() = default;
    explicit SpeciesSet(const std::vector<std::string>& names) {
        for (const auto& n : names) add(n);
    }

    int add(const std::string& name) {
        if (find(name) >= 0)
            throw std::invalid_argument("duplicate species name: " + name);
        species_.push_back({static_cast<int>(species_.size()), name});
        return species_.back().id;
    }

    int find(const std::string& name) const {
        for (const auto& s : species_)
            if (s.name == name) return s.id;
        return -1;
    }

    int require(const std::string& name) const {
        const int id = find(name);
        if (id < 0) throw std::invalid_argument("unknown species: " + name);
        return id;
    }

    const Species& operator[](int id) const { return species_.at(static_cast<std::size_t>(id)); }
    int size() const { return static_cast<int>(species_.size()); }
    bool empty() const { return species_.empty(); }

    auto begin() const { return species_.begin(); }
    auto end() const { return species_.end(); }

private:
    std::vector<Species> species_;
};

/// Periodic simulation cell: three basis vectors (Angstrom) plus per-axis
/// periodicity flags. Immutable after construction.
class UnitCell {
public:
    UnitCell(const std::array<Vec3, 3>& basis, const std::array<bool, 3>& pbc)
        : basis_(basis), pbc_(pbc) {
        const double vol = volume();
        if (!(vol > 1e-12))
            throw std::invalid_argument("unit cell basis is degenerate (volume <= 0)");
    }

    const Vec3& basis(int i) const { return basis_[static_cast<std::size_t>(i)]; }
    bool periodic(int i) const { return pbc_[static_cast<std::size_t>(i)]; }
    const std::array<bool, 3>& pbc() const { return pbc_; }

    double volume() const {
        return std::abs(basis_[0].dot(basis_[1].cross(basis_[2])));
    }

    /// Perpendicular height of the cell along axis i (distance between the
    /// lattice planes spanned by the other two axes). This, not |a_i|, sets
    /// the image count needed to cover a given interaction range in skewed
    /// cells.
    double height(int i) const {
        const Vec3& a = basis_[static_cast<std::size_t>(i)];
        const Vec3& b = basis_[(i + 1) % 3];
        const Vec3& c = basis_[(i + 2) % 3];
        const Vec3 n = b.cross(c);
        return std::abs(a.dot(n)) / n.norm();
    }

    Vec3 cartesian(const Vec3& frac) const {
        return basis_[0] * frac.x + basis_[1] * frac.y + basis_[2] * frac.z;
    }

    Vec3 fractional(const Vec3& cart) const {
        // Solve [a0 a1 a2]^T f = cart via Cramer's rule.
        const Vec3 &a = basis_[0], &b = basis_[1], &c = basis_[2];
        const double det = a.dot(b.cross(c));
        return {cart.dot(b.cross(c)) / det, cart.dot(c.cross(a)) / det,
                cart.dot(a.cross(b)) / det};
    }

    /// Wrap a Cartesian position back into the cell along periodic axes.
    Vec3 wrap(const Vec3& cart) const {
        Vec3 f = fractional(cart);
        double fr[3] = {f.x, f.y, f.z};
        for (int i = 0; i < 3; ++i)
            if (periodic(i)) fr[i] -= std::floor(fr[i]);
        return cartesian({fr[0], fr[1], fr[2]});
    }

private:
    std::array<Vec3, 3> basis_;
    std::array<bool, 3> pbc_;
};

struct Atom {
    int species = 0;
    Vec3 pos;
    bool image = false; ///< true for periodic copies produced by make_supercell
};

using AtomList = std::vector<Atom>;

/// Discrete site lattice over a unit cell. Site k has fractional coordinates
/// k_i / g_i with k_i in {0..G_i}; G_i = g_i - 1 on periodic axes (the point
/// at fraction 1 is the image of the point at 0) and G_i = g_i on open axes.
/// Variable indexing is species-major: var = species * n_sites + site.
class SiteGrid {
public:
    SiteGrid(const UnitCell& cell, const std::array<int, 3>& granularity,
             const SpeciesSet& species)
        : granularity_(granularity), n_species_(species.size()) {
        for (int i = 0; i < 3; ++i)
            if (granularity_[static_cast<std::size_t>(i)] < 1)
                throw std::invalid_argument("grid granularity must be >= 1 on every axis");
        if (species.empty())
            throw std::invalid_argument("species list must not be empty");
        std::array<int, 3> npts{};
        for (int i = 0; i < 3; ++i) {
            const int g = granularity_[static_cast<std::size_t>(i)];
            npts[static_cast<std::size_t>(i)] = cell.periodic(i) ? g : g + 1;
        }
        // Lexicographic in (k1, k2, k3) so output files are deterministic.
        for (int k1 = 0; k1 < npts[0]; ++k1)
            for (int k2 = 0; k2 < npts[1]; ++k2)
                for (int k3 = 0; k3 < npts[2]; ++k3)
                    sites_.push_back({k1, k2, k3});
        axis_points_ = npts;
    }

    int n_sites() const { return static_cast<int>(sites_.size()); }
    int n_species() const { return n_species_; }
    int n_vars() const { return n_sites() * n_species_; }
    const std::array<int, 3>& granularity() const { return granularity_; }
    const std::array<int, 3>& axis_points() const { return axis_points_; }
    const std::array<int, 3>& site_k(int site) const {
        return sites_.at(static_cast<std::size_t>(site));
    }

    Vec3 fractional(int site) const {
        const auto& k = site_k(site);
        return {static_cast<double>(k[0]) / granularity_[0],
                static_cast<double>(k[1]) / granularity_[1],
                static_cast<double>(k[2]) / granularity_[2]};
    }

    int var_index(int site, int species) const {
        if (site < 0 || site >= n_sites() || species < 0 || species >= n_species_)
            throw std::out_of_range("var_index: site or species out of range");
        return species * n_sites() + site;
    }
    int var_site(int var) const { return var % n_sites(); }
    int var_species(int var) const { return var / n_sites(); }

private:
    std::array<int, 3> granularity_;
    std::array<int, 3> axis_points_{};
    int n_species_;
    std::vector<std::array<int, 3>> sites_;
};

inline SiteGrid build_grid(const UnitCell& cell, const std::array<int, 3>& granularity,
                           const SpeciesSet& species) {
    return SiteGrid(cell, granularity, species);
}

inline SiteGrid build_grid(const UnitCell& cell, int g, const SpeciesSet& species) {
    return SiteGrid(cell, {g, g, g}, species);
}

inline Vec3 site_position(const SiteGrid& grid, const UnitCell& cell, int site) {
    if (site < 0 || site >= grid.n_sites())
        throw std::out_of_range("site_position: index out of range");
    return cell.cartesian(grid.fractional(site));
}

/// Replicate `atoms` along the periodic axes far enough that no original atom
/// has a nonzero interaction with anything outside the result. `cutoff` must
/// be the full interaction reach of the potential (for an M-body term this is
/// up to (M-1) times the wing cutoff, since a distant pair can interact
/// through an image between them). Originals keep image == false.
inline AtomList make_supercell(const UnitCell& cell, const AtomList& atoms, double cutoff) {
    if (!(cutoff > 0.0)) throw std::invalid_argument("make_supercell: cutoff must be > 0");
    std::array<int, 3> reps{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        if (!cell.periodic(i)) continue;
        const double h = cell.height(i);
        if (!(h > 1e-12)) throw std::invalid_argument("make_supercell: degenerate cell height");
        reps[static_cast<std::size_t>(i)] = static_cast<int>(std::ceil(cutoff / h));
    }
    AtomList out;
    out.reserve(atoms.size() * static_cast<std::size_t>((2 * reps[0] + 1) *
                                                        (2 * reps[1] + 1) * (2 * reps[2] + 1)));
    for (const auto& a : atoms) out.push_back({a.species, a.pos, false});
    for (int n1 = -reps[0]; n1 <= reps[0]; ++n1)
        for (int n2 = -reps[1]; n2 <= reps[1]; ++n2)
            for (int n3 = -reps[2]; n3 <= reps[2]; ++n3) {
                if (n1 == 0 && n2 == 0 && n3 == 0) continue;
                const Vec3 shift = cell.basis(0) * n1 + cell.basis(1) * n2 + cell.basis(2) * n3;
                for (const auto& a : atoms) out.push_back({a.species, a.pos + shift, true});
            }
    return out;
}

/// Lattice translation vectors (excluding zero) covering |n| up to `cutoff`
/// along periodic axes. Used by the direct image sums.
inline std::vector<Vec3> lattice_images(const UnitCell& cell, double cutoff) {
    std::array<int, 3> reps{0, 0, 0};
    for (int i = 0; i < 3; ++i) {
        if (!cell.periodic(i)) continue;
        reps[static_cast<std::size_t>(i)] = static_cast<int>(std::ceil(cutoff / cell.height(i)));
    }
    std::vector<Vec3> out;
    for (int n1 = -reps[0]; n1 <= reps[0]; ++n1)
        for (int n2 = -reps[1]; n2 <= reps[1]; ++n2)
            for (int n3 = -reps[2]; n3 <= reps[2]; ++n3) {
                if (n1 == 0 && n2 == 0 && n3 == 0) continue;
                out.push_back(cell.basis(0) * n1 + cell.basis(1) * n2 + cell.basis(2) * n3);
            }
    return out;
}

} // namespace gcsp
