#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "gcsp/cell.hpp"
#include "gcsp/energy.hpp"
#include "gcsp/potential.hpp"

namespace gcsp {

/// Stored coefficient placed on same-site pairs of different species, whose
/// physical value is the r=0 sentinel. Finite so that clamping and threshold
/// reduction stay well-defined; any configuration activating such a pair is
/// pushed far above every physical energy scale.
inline constexpr double kSameSiteCoeff = 1e6; // eV

inline constexpr double kCoeffDropTol = 1e-12; // eV, zero-coefficient drop

struct HuboTerm {
    std::array<std::uint32_t, 4> idx{}; ///< strictly increasing variable indices
    std::uint8_t order = 0;
    double coeff = 0.0; ///< eV

    bool contains(std::uint32_t v) const {
        for (int i = 0; i < order; ++i)
            if (idx[static_cast<std::size_t>(i)] == v) return true;
        return false;
    }
};

inline bool term_tuple_less(const HuboTerm& a, const HuboTerm& b) {
    const int n = std::min(a.order, b.order);
    for (int i = 0; i < n; ++i) {
        if (a.idx[static_cast<std::size_t>(i)] != b.idx[static_cast<std::size_t>(i)])
            return a.idx[static_cast<std::size_t>(i)] < b.idx[static_cast<std::size_t>(i)];
    }
    return a.order < b.order;
}

/// Sparse pseudo-Boolean polynomial: map from sorted variable-index tuples to
/// coefficients in eV plus a constant offset. Terms are kept sorted; the
/// evaluation accumulates in that fixed order, so results are deterministic.
class HuboPolynomial {
public:
    explicit HuboPolynomial(int num_vars = 0) : num_vars_(num_vars) {}

    int num_vars() const { return num_vars_; }
    double offset() const { return offset_; }
    void set_offset(double v) { offset_ = v; }
    void add_offset(double v) { offset_ += v; }

    const std::vector<HuboTerm>& terms() const { return terms_; }
    std::size_t num_terms() const { return terms_.size(); }

    int max_order() const {
        int m = 0;
        for (const auto& t : terms_) m = std::max(m, static_cast<int>(t.order));
        return m;
    }

    std::map<int, std::size_t> count_by_order() const {
        std::map<int, std::size_t> c;
        for (const auto& t : terms_) ++c[t.order];
        return c;
    }

    /// Bulk insert of (tuple, delta) updates; merges duplicates against the
    /// existing terms and drops coefficients below the zero tolerance.
    /// Tuples must be strictly increasing (binary idempotence is absorbed by
    /// the caller before this point).
    void apply_updates(std::vector<HuboTerm>&& updates) {
        for (auto& u : updates) validate_tuple(u);
        std::sort(updates.begin(), updates.end(), term_tuple_less);
        // merge duplicate update tuples
        std::vector<HuboTerm> merged;
        merged.reserve(updates.size());
        for (auto& u : updates) {
            if (!merged.empty() && same_tuple(merged.back(), u))
                merged.back().coeff += u.coeff;
            else
                merged.push_back(u);
        }
        std::vector<HuboTerm> out;
        out.reserve(terms_.size() + merged.size());
        std::size_t i = 0, j = 0;
        while (i < terms_.size() || j < merged.size()) {
            if (j == merged.size() ||
                (i < terms_.size() && term_tuple_less(terms_[i], merged[j]))) {
                out.push_back(terms_[i++]);
            } else if (i == terms_.size() || term_tuple_less(merged[j], terms_[i])) {
                if (std::abs(merged[j].coeff) >= kCoeffDropTol) out.push_back(merged[j]);
                ++j;
            } else {
                HuboTerm t = terms_[i++];
                t.coeff += merged[j++].coeff;
                if (std::abs(t.coeff) >= kCoeffDropTol) out.push_back(t);
            }
        }
        terms_ = std::move(out);
    }

    void add_term(std::initializer_list<std::uint32_t> tuple, double coeff) {
        HuboTerm t;
        t.order = static_cast<std::uint8_t>(tuple.size());
        std::size_t k = 0;
        for (auto v : tuple) t.idx[k++] = v;
        t.coeff = coeff;
        std::vector<HuboTerm> u{t};
        apply_updates(std::move(u));
    }

    double evaluate(const std::vector<std::uint8_t>& bits) const {
        if (static_cast<int>(bits.size()) != num_vars_)
            throw std::invalid_argument("evaluate: configuration length mismatch");
        double e = offset_;
        for (const auto& t : terms_) {
            bool all = true;
            for (int i = 0; i < t.order; ++i)
                if (!bits[t.idx[static_cast<std::size_t>(i)]]) { all = false; break; }
            if (all) e += t.coeff;
        }
        return e;
    }

    /// Internal hook for builders that emit tuples in globally sorted order.
    void set_terms_sorted(std::vector<HuboTerm>&& terms) {
        for (auto& t : terms) validate_tuple(t);
        for (std::size_t i = 1; i < terms.size(); ++i)
            if (!term_tuple_less(terms[i - 1], terms[i]))
                throw std::logic_error("set_terms_sorted: tuples not strictly sorted");
        terms_ = std::move(terms);
    }

private:
    static bool same_tuple(const HuboTerm& a, const HuboTerm& b) {
        return !term_tuple_less(a, b) && !term_tuple_less(b, a);
    }
    void validate_tuple(const HuboTerm& t) const {
        if (t.order < 1 || t.order > 4)
            throw std::invalid_argument("term order must be in 1..4");
        for (int i = 0; i < t.order; ++i) {
            if (t.idx[static_cast<std::size_t>(i)] >= static_cast<std::uint32_t>(num_vars_))
                throw std::invalid_argument("term variable index out of range");
            if (i > 0 && t.idx[static_cast<std::size_t>(i)] <= t.idx[static_cast<std::size_t>(i - 1)])
                throw std::invalid_argument("term tuple must be strictly increasing");
        }
    }

    int num_vars_ = 0;
    double offset_ = 0.0;
    std::vector<HuboTerm> terms_;
};

// ---------------------------------------------------------------------------
// Coefficient construction
// ---------------------------------------------------------------------------

namespace detail {

/// Lattice translations n with |delta + n| < rc along periodic axes (exact
/// window per axis from the dual-plane projection bound).
inline void images_within(const UnitCell& cell, const Vec3& delta, double rc,
                          std::vector<Vec3>& out) {
    out.clear();
    if (!(rc > 0.0)) return;
    const Vec3 f = cell.fractional(delta);
    const double fr[3] = {f.x, f.y, f.z};
    int lo[3], hi[3];
    for (int i = 0; i < 3; ++i) {
        if (!cell.periodic(i)) {
            lo[i] = hi[i] = 0;
            continue;
        }
        const double w = rc / cell.height(i);
        lo[i] = static_cast<int>(std::ceil(-fr[i] - w));
        hi[i] = static_cast<int>(std::floor(-fr[i] + w));
    }
    const double rc2 = rc * rc;
    for (int n1 = lo[0]; n1 <= hi[0]; ++n1)
        for (int n2 = lo[1]; n2 <= hi[1]; ++n2)
            for (int n3 = lo[2]; n3 <= hi[2]; ++n3) {
                const Vec3 n = cell.basis(0) * n1 + cell.basis(1) * n2 + cell.basis(2) * n3;
                if ((delta + n).norm2() < rc2) out.push_back(n);
            }
}

/// Linear coefficient: E({x}) = self-interaction of one atom with its own
/// periodic images. Site-independent (the image vectors are lattice vectors).
inline double linear_coeff(const PotentialModel& model, const UnitCell& cell, int species) {
    double e = 0.0;
    std::vector<Vec3> imgs = lattice_images(cell, model.max_pair_cutoff());
    for (const auto& n : imgs) {
        const double r = n.norm();
        e += 0.5 * model.pair_energy(species, species, r);
    }
    if (model.has_three_body() && model.has_triplet_channel(species, species, species)) {
        const double rc3 = model.wing_cutoff(species, species);
        std::vector<Vec3> w = lattice_images(cell, rc3);
        for (std::size_t a = 0; a < w.size(); ++a)
            for (std::size_t b = a + 1; b < w.size(); ++b)
                e += model.triple_term(species, species, species, w[a], w[b]);
    }
    return e;
}

/// Pair coefficient for atoms on distinct sites:
///   H = sum_n V2(xa, xb + n)
///     + sum over unordered image pairs of b within wing reach of a:
///         h(a; b+u, b+v), plus the symmetric term centered on b.
inline double pair_coeff(const PotentialModel& model, const UnitCell& cell, int sa,
                         const Vec3& xa, int sb, const Vec3& xb,
                         std::vector<Vec3>& scratch) {
    double e = 0.0;
    const Vec3 delta = xb - xa;
    images_within(cell, delta, model.pair_cutoff(sa, sb), scratch);
    for (const auto& n : scratch) e += model.pair_energy(sa, sb, (delta + n).norm());

    if (model.has_three_body()) {
        if (model.has_triplet_channel(sa, sb, sb)) {
            images_within(cell, delta, model.wing_cutoff(sa, sb), scratch);
            for (std::size_t u = 0; u < scratch.size(); ++u)
                for (std::size_t v = u + 1; v < scratch.size(); ++v)
                    e += model.triple_term(sa, sb, sb, delta + scratch[u], delta + scratch[v]);
        }
        if (model.has_triplet_channel(sb, sa, sa)) {
            images_within(cell, -delta, model.wing_cutoff(sb, sa), scratch);
            for (std::size_t u = 0; u < scratch.size(); ++u)
                for (std::size_t v = u + 1; v < scratch.size(); ++v)
                    e += model.triple_term(sb, sa, sa, -delta + scratch[u], -delta + scratch[v]);
        }
    }
    return e;
}

/// Triple coefficient over three distinct sites: all angular terms that need
/// exactly these three atoms, i.e. each center with independent image choices
/// for the two wings.
inline double triple_coeff(const PotentialModel& model, const UnitCell& cell,
                           const std::array<int, 3>& sp, const std::array<Vec3, 3>& x,
                           std::vector<Vec3>& u_scratch, std::vector<Vec3>& v_scratch) {
    double e = 0.0;
    for (int c = 0; c < 3; ++c) {
        const int w1 = (c + 1) % 3, w2 = (c + 2) % 3;
        if (!model.has_triplet_channel(sp[c], sp[w1], sp[w2])) continue;
        const Vec3 d1 = x[w1] - x[c];
        const Vec3 d2 = x[w2] - x[c];
        images_within(cell, d1, model.wing_cutoff(sp[c], sp[w1]), u_scratch);
        if (u_scratch.empty()) continue;
        images_within(cell, d2, model.wing_cutoff(sp[c], sp[w2]), v_scratch);
        for (const auto& u : u_scratch)
            for (const auto& v : v_scratch)
                e += model.triple_term(sp[c], sp[w1], sp[w2], d1 + u, d2 + v);
    }
    return e;
}

inline void place_pair(const SiteGrid& grid, int i, int j, int s1, int s2, double coeff,
                       std::vector<HuboTerm>& terms) {
    if (std::abs(coeff) < kCoeffDropTol) return;
    std::uint32_t a = static_cast<std::uint32_t>(grid.var_index(i, s1));
    std::uint32_t b = static_cast<std::uint32_t>(grid.var_index(j, s2));
    if (a > b) std::swap(a, b);
    HuboTerm t;
    t.order = 2;
    t.idx = {a, b, 0, 0};
    t.coeff = coeff;
    terms.push_back(t);
}

} // namespace detail

/// Assemble the HUBO whose evaluation at any bitstring equals the periodic
/// configuration energy of the decoded structure (before clamping). If
/// `clamp` is set, every pair coefficient J is stored as min(J, clamp).
/// Same-site different-species pairs get the finite sentinel coefficient.
inline HuboPolynomial build_hubo(const SiteGrid& grid, const UnitCell& cell,
                                 const PotentialModel& model,
                                 std::optional<double> clamp = std::nullopt) {
    if (model.max_order() > 3)
        throw std::invalid_argument("build_hubo: interaction orders above 3 are not implemented");

    const int n_sites = grid.n_sites();
    const int n_species = grid.n_species();
    HuboPolynomial poly(grid.n_vars());

    std::vector<Vec3> pos(static_cast<std::size_t>(n_sites));
    for (int i = 0; i < n_sites; ++i)
        pos[static_cast<std::size_t>(i)] = site_position(grid, cell, i);

    const auto cap = [&](double j) { return clamp ? std::min(j, *clamp) : j; };

    std::vector<HuboTerm> terms;
    std::vector<Vec3> scr1, scr2;

    // Linear terms: per-species self-image energy.
    for (int s = 0; s < n_species; ++s) {
        const double c = detail::linear_coeff(model, cell, s);
        if (std::abs(c) < kCoeffDropTol) continue;
        for (int i = 0; i < n_sites; ++i) {
            HuboTerm t;
            t.order = 1;
            t.idx[0] = static_cast<std::uint32_t>(grid.var_index(i, s));
            t.coeff = c;
            terms.push_back(t);
        }
    }

    // Pair terms.
    for (int i = 0; i < n_sites; ++i) {
        // same-site cross-species pairs: hard exclusion sentinel
        for (int s1 = 0; s1 < n_species; ++s1)
            for (int s2 = s1 + 1; s2 < n_species; ++s2) {
                HuboTerm t;
                t.order = 2;
                std::uint32_t a = static_cast<std::uint32_t>(grid.var_index(i, s1));
                std::uint32_t b = static_cast<std::uint32_t>(grid.var_index(i, s2));
                if (a > b) std::swap(a, b);
                t.idx = {a, b, 0, 0};
                t.coeff = cap(kSameSiteCoeff);
                terms.push_back(t);
            }
        for (int j = i + 1; j < n_sites; ++j) {
            for (int s1 = 0; s1 < n_species; ++s1)
                for (int s2 = 0; s2 < n_species; ++s2) {
                    // unordered variable pair {(i,s1),(j,s2)}; skip the
                    // duplicate enumeration of same-species combinations
                    if (s2 < s1) continue;
                    const double c = detail::pair_coeff(model, cell, s1, pos[static_cast<std::size_t>(i)],
                                                        s2, pos[static_cast<std::size_t>(j)], scr1);
                    detail::place_pair(grid, i, j, s1, s2, cap(c), terms);
                    if (s1 != s2) {
                        const double c2 = detail::pair_coeff(model, cell, s2, pos[static_cast<std::size_t>(i)],
                                                             s1, pos[static_cast<std::size_t>(j)], scr1);
                        detail::place_pair(grid, i, j, s2, s1, cap(c2), terms);
                    }
                }
        }
    }

    // Triple terms.
    if (model.has_three_body()) {
        const double rc3 = model.max_wing_cutoff();
        // neighbor candidates by minimum-image distance
        std::vector<std::vector<int>> nbr(static_cast<std::size_t>(n_sites));
        for (int i = 0; i < n_sites; ++i)
            for (int j = 0; j < n_sites; ++j) {
                if (j == i) continue;
                detail::images_within(cell, pos[static_cast<std::size_t>(j)] - pos[static_cast<std::size_t>(i)],
                                      rc3, scr1);
                if (!scr1.empty()) nbr[static_cast<std::size_t>(i)].push_back(j);
            }
        const auto is_center = [&](int c, int w1, int w2) {
            const auto& l = nbr[static_cast<std::size_t>(c)];
            return std::binary_search(l.begin(), l.end(), w1) &&
                   std::binary_search(l.begin(), l.end(), w2);
        };
        for (int x = 0; x < n_sites; ++x) {
            const auto& lx = nbr[static_cast<std::size_t>(x)];
            for (std::size_t a = 0; a < lx.size(); ++a)
                for (std::size_t b = a + 1; b < lx.size(); ++b) {
                    int t0 = x, t1 = lx[a], t2 = lx[b];
                    int sorted[3] = {t0, t1, t2};
                    std::sort(sorted, sorted + 3);
                    // count each site triple once: x must be its smallest valid center
                    bool canonical = true;
                    for (int m = 0; m < 3 && sorted[m] < x; ++m) {
                        const int o1 = sorted[(m + 1) % 3], o2 = sorted[(m + 2) % 3];
                        if (is_center(sorted[m], o1, o2)) { canonical = false; break; }
                    }
                    if (!canonical) continue;
                    const std::array<Vec3, 3> xs = {pos[static_cast<std::size_t>(sorted[0])],
                                                    pos[static_cast<std::size_t>(sorted[1])],
                                                    pos[static_cast<std::size_t>(sorted[2])]};
                    std::array<int, 3> sp{};
                    for (sp[0] = 0; sp[0] < n_species; ++sp[0])
                        for (sp[1] = 0; sp[1] < n_species; ++sp[1])
                            for (sp[2] = 0; sp[2] < n_species; ++sp[2]) {
                                const double c = detail::triple_coeff(model, cell, sp, xs, scr1, scr2);
                                if (std::abs(c) < kCoeffDropTol) continue;
                                HuboTerm t;
                                t.order = 3;
                                std::uint32_t v[3] = {
                                    static_cast<std::uint32_t>(grid.var_index(sorted[0], sp[0])),
                                    static_cast<std::uint32_t>(grid.var_index(sorted[1], sp[1])),
                                    static_cast<std::uint32_t>(grid.var_index(sorted[2], sp[2]))};
                                std::sort(v, v + 3);
                                t.idx = {v[0], v[1], v[2], 0};
                                t.coeff = c;
                                terms.push_back(t);
                            }
                }
        }
    }

    poly.apply_updates(std::move(terms));
    return poly;
}

// ---------------------------------------------------------------------------
// Penalty terms
// ---------------------------------------------------------------------------

enum class PenaltyKind { Absolute, Relative };

struct PenaltySpec {
    PenaltyKind kind = PenaltyKind::Absolute;
    double strength = 0.0; ///< P, eV

    /// absolute: target particle count per species id
    std::map<int, double> targets;

    /// relative: count(species_a) - ratio * count(species_b) is penalized
    int species_a = 0;
    int species_b = 0;
    double ratio = 1.0;

    void validate() const {
        if (!(strength > 0.0)) throw std::invalid_argument("penalty strength must be > 0");
        if (kind == PenaltyKind::Relative && !(ratio > 0.0))
            throw std::invalid_argument("relative penalty ratio must be > 0");
    }
};

/// Add P (sum_x b_x^s - C_s)^2 for every species with a target, expanded over
/// binary variables: +P C^2 to the offset, P(1-2C) to each linear term of the
/// species, +2P to each same-species pair.
inline void add_absolute_penalty(HuboPolynomial& poly, const SiteGrid& grid,
                                 const PenaltySpec& spec) {
    if (spec.kind != PenaltyKind::Absolute)
        throw std::invalid_argument("add_absolute_penalty: spec kind mismatch");
    spec.validate();
    const double P = spec.strength;
    std::vector<HuboTerm> updates;
    for (const auto& [s, target] : spec.targets) {
        if (s < 0 || s >= grid.n_species())
            throw std::invalid_argument("absolute penalty: species id out of range");
        poly.add_offset(P * target * target);
        for (int i = 0; i < grid.n_sites(); ++i) {
            HuboTerm t;
            t.order = 1;
            t.idx[0] = static_cast<std::uint32_t>(grid.var_index(i, s));
            t.coeff = P * (1.0 - 2.0 * target);
            updates.push_back(t);
        }
        for (int i = 0; i < grid.n_sites(); ++i)
            for (int j = i + 1; j < grid.n_sites(); ++j) {
                HuboTerm t;
                t.order = 2;
                t.idx = {static_cast<std::uint32_t>(grid.var_index(i, s)),
                         static_cast<std::uint32_t>(grid.var_index(j, s)), 0, 0};
                if (t.idx[0] > t.idx[1]) std::swap(t.idx[0], t.idx[1]);
                t.coeff = 2.0 * P;
                updates.push_back(t);
            }
    }
    poly.apply_updates(std::move(updates));
}

/// Add P (sum b^{s1} - c * sum b^{s2})^2 expanded over binary variables.
inline void add_relative_penalty(HuboPolynomial& poly, const SiteGrid& grid,
                                 const PenaltySpec& spec) {
    if (spec.kind != PenaltyKind::Relative)
        throw std::invalid_argument("add_relative_penalty: spec kind mismatch");
    spec.validate();
    const int sa = spec.species_a, sb = spec.species_b;
    if (sa < 0 || sa >= grid.n_species() || sb < 0 || sb >= grid.n_species() || sa == sb)
        throw std::invalid_argument("relative penalty: invalid species pair");
    const double P = spec.strength, c = spec.ratio;
    std::vector<HuboTerm> updates;
    const int n = grid.n_sites();
    const auto var = [&](int site, int s) {
        return static_cast<std::uint32_t>(grid.var_index(site, s));
    };
    for (int i = 0; i < n; ++i) {
        HuboTerm ta;
        ta.order = 1;
        ta.idx[0] = var(i, sa);
        ta.coeff = P;
        updates.push_back(ta);
        HuboTerm tb;
        tb.order = 1;
        tb.idx[0] = var(i, sb);
        tb.coeff = P * c * c;
        updates.push_back(tb);
    }
    const auto add_pair = [&](std::uint32_t a, std::uint32_t b, double coeff) {
        if (a > b) std::swap(a, b);
        HuboTerm t;
        t.order = 2;
        t.idx = {a, b, 0, 0};
        t.coeff = coeff;
        updates.push_back(t);
    };
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            add_pair(var(i, sa), var(j, sa), 2.0 * P);
            add_pair(var(i, sb), var(j, sb), 2.0 * P * c * c);
        }
        for (int j = 0; j < n; ++j) add_pair(var(i, sa), var(j, sb), -2.0 * P * c);
    }
    poly.apply_updates(std::move(updates));
}

// ---------------------------------------------------------------------------
// deduc-reduc
// ---------------------------------------------------------------------------

struct ReductionReport {
    double threshold = 0.0;
    std::size_t pairs_clamped = 0;
    std::map<int, std::size_t> removed_by_order;
    std::map<int, std::size_t> before_by_order;
    std::map<int, std::size_t> after_by_order;
    std::string convention_note;
};

/// Remove every stored term of order >= 3 whose index tuple contains a pair
/// {i, j} with original pair coefficient J_ij > T, and replace each such
/// J_ij by min(J_ij, T).
inline std::pair<HuboPolynomial, ReductionReport> deduc_reduc(const HuboPolynomial& poly,
                                                              double threshold) {
    if (!(threshold > 0.0)) throw std::invalid_argument("deduc_reduc: threshold must be > 0");
    ReductionReport rep;
    rep.threshold = threshold;
    rep.before_by_order = poly.count_by_order();
    rep.convention_note =
        "term counts are stored nonzero species-decorated tuples (zero tolerance 1e-12 eV); "
        "tuples containing a zero-distance same-site pair are represented by the pair "
        "sentinel only and never enumerated at order >= 3";

    std::unordered_set<std::uint64_t> hot;
    for (const auto& t : poly.terms())
        if (t.order == 2 && t.coeff > threshold)
            hot.insert(static_cast<std::uint64_t>(t.idx[0]) << 32 | t.idx[1]);

    HuboPolynomial out(poly.num_vars());
    out.set_offset(poly.offset());
    std::vector<HuboTerm> kept;
    kept.reserve(poly.num_terms());
    for (const auto& t : poly.terms()) {
        if (t.order == 2 && t.coeff > threshold) {
            HuboTerm c = t;
            c.coeff = threshold;
            kept.push_back(c);
            ++rep.pairs_clamped;
            continue;
        }
        if (t.order >= 3) {
            bool drop = false;
            for (int a = 0; a < t.order && !drop; ++a)
                for (int b = a + 1; b < t.order && !drop; ++b) {
                    const std::uint64_t key =
                        static_cast<std::uint64_t>(t.idx[static_cast<std::size_t>(a)]) << 32 |
                        t.idx[static_cast<std::size_t>(b)];
                    if (hot.count(key)) drop = true;
                }
            if (drop) {
                ++rep.removed_by_order[t.order];
                continue;
            }
        }
        kept.push_back(t);
    }
    out.set_terms_sorted(std::move(kept));
    rep.after_by_order = out.count_by_order();
    return {std::move(out), rep};
}

// ---------------------------------------------------------------------------
// Polynomial files
// ---------------------------------------------------------------------------

/// Text format: `#vars N`, `#offset E`, then one term per line as
/// `i1 i2 ... ik coeff` with strictly increasing indices, coefficients with
/// full round-trip precision.
inline void export_poly(const HuboPolynomial& poly, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open polynomial file for writing: " + path);
    out << "#vars " << poly.num_vars() << "\n";
    out << "#offset " << std::setprecision(17) << poly.offset() << "\n";
    for (const auto& t : poly.terms()) {
        for (int i = 0; i < t.order; ++i) out << t.idx[static_cast<std::size_t>(i)] << " ";
        out << std::setprecision(17) << t.coeff << "\n";
    }
    if (!out) throw std::runtime_error("write failure on polynomial file: " + path);
}

inline HuboPolynomial import_poly(const std::string& path,
                                  std::vector<std::string>* warnings = nullptr) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open polynomial file: " + path);
    std::string line;
    int lineno = 0;
    int nvars = -1;
    double offset = 0.0;
    std::vector<HuboTerm> terms;
    const auto fail = [&](const std::string& msg) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "#vars") {
            if (!(ls >> nvars) || nvars < 0) fail("malformed #vars header");
            continue;
        }
        if (first == "#offset") {
            if (!(ls >> offset)) fail("malformed #offset header");
            continue;
        }
        if (first[0] == '#') continue;
        if (nvars < 0) fail("term line before #vars header");
        std::vector<double> nums;
        double v;
        std::istringstream again(line);
        while (again >> v) nums.push_back(v);
        if (!again.eof()) fail("unparseable token on term line");
        if (nums.size() < 2) fail("term line needs at least one index and a coefficient");
        if (nums.size() > 5) fail("term order above 4 is not supported");
        HuboTerm t;
        t.order = static_cast<std::uint8_t>(nums.size() - 1);
        for (std::size_t i = 0; i + 1 < nums.size(); ++i) {
            const double d = nums[i];
            if (d < 0 || d != std::floor(d) || d >= static_cast<double>(nvars))
                fail("bad variable index");
            t.idx[i] = static_cast<std::uint32_t>(d);
            if (i > 0 && t.idx[i] <= t.idx[i - 1]) fail("indices must be strictly increasing");
        }
        t.coeff = nums.back();
        terms.push_back(t);
    }
    if (nvars < 0) throw std::runtime_error(path + ": missing #vars header");

    std::sort(terms.begin(), terms.end(), term_tuple_less);
    std::vector<HuboTerm> merged;
    for (const auto& t : terms) {
        if (!merged.empty() && !term_tuple_less(merged.back(), t) &&
            !term_tuple_less(t, merged.back())) {
            merged.back().coeff += t.coeff;
            if (warnings)
                warnings->push_back("duplicate term tuple merged (coefficients summed)");
        } else {
            merged.push_back(t);
        }
    }
    std::vector<HuboTerm> kept;
    for (const auto& t : merged)
        if (std::abs(t.coeff) >= kCoeffDropTol) kept.push_back(t);

    HuboPolynomial poly(nvars);
    poly.set_offset(offset);
    poly.set_terms_sorted(std::move(kept));
    return poly;
}

} // namespace gcsp
