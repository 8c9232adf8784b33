#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "gcsp/cell.hpp"
#include "gcsp/vec3.hpp"

namespace gcsp {

enum class PotentialKind { LennardJones, StillingerWeber };

struct LjPairParams {
    double epsilon = 0.0; ///< eV
    double sigma = 0.0;   ///< Angstrom
    double rcut = 0.0;    ///< Angstrom
};

struct SwPairParams {
    double A = 0.0; ///< eV
    double B = 0.0; ///< Angstrom^p
    double p = 0.0;
    double q = 0.0;
    double rho = 0.0;  ///< Angstrom
    double rmax = 0.0; ///< Angstrom, hard two-body cutoff
};

/// Three-body channel keyed by (center species; unordered wing species).
struct SwTripletParams {
    double lambda = 0.0;     ///< eV
    double cos_theta0 = 0.0;
    double rho = 0.0;        ///< Angstrom, both legs
    double rmax = 0.0;       ///< Angstrom, wing cutoff from the center
};

/// Species-symmetric m-body potential with hard cutoffs. Covers the shifted
/// 12-6 Lennard-Jones (pair only) and the monolayer-MX2 style Stillinger-Weber
/// (pair + angular three-body). All parameters come from a plain-text table;
/// nothing is hard-coded. Immutable after load, evaluation is reentrant.
class PotentialModel {
public:
    PotentialKind kind() const { return kind_; }
    int max_order() const { return triplets_.empty() ? 2 : 3; }
    bool has_three_body() const { return !triplets_.empty(); }

    /// Largest two-body cutoff over species pairs.
    double max_pair_cutoff() const { return max_rc2_; }
    /// Largest three-body wing cutoff over channels (0 if pair-only).
    double max_wing_cutoff() const { return max_rc3_; }

    /// Full interaction reach: a pair of atoms can interact through an
    /// angular term centered between them, so three-body terms couple atoms
    /// out to twice the wing cutoff.
    double reach() const { return std::max(max_rc2_, 2.0 * max_rc3_); }

    /// Two-body energy for species (s1, s2) at separation r. Returns the
    /// positive-infinity sentinel at r == 0 (caller clamps).
    double pair_energy(int s1, int s2, double r) const {
        if (r <= 0.0) return std::numeric_limits<double>::infinity();
        if (kind_ == PotentialKind::LennardJones) {
            const auto& p = lj_lookup(s1, s2);
            if (r >= p.rcut) return 0.0;
            const double sr6 = std::pow(p.sigma / r, 6);
            const double src6 = std::pow(p.sigma / p.rcut, 6);
            return 4.0 * p.epsilon * (sr6 * sr6 - sr6) -
                   4.0 * p.epsilon * (src6 * src6 - src6);
        }
        const auto& p = sw_lookup(s1, s2);
        if (r >= p.rmax) return 0.0;
        const double rep = p.B / std::pow(r, p.p);
        const double att = p.q == 0.0 ? 1.0 : 1.0 / std::pow(r, p.q);
        return p.A * (rep - att) * std::exp(p.rho / (r - p.rmax));
    }

    double pair_cutoff(int s1, int s2) const {
        if (kind_ == PotentialKind::LennardJones) return lj_lookup(s1, s2).rcut;
        return sw_lookup(s1, s2).rmax;
    }

    /// Angular three-body term h(center; w1, w2) for one center/wing-pair
    /// assignment. d1, d2 are wing positions relative to the center.
    double triple_term(int s_center, int s_w1, int s_w2, const Vec3& d1, const Vec3& d2) const {
        const SwTripletParams* t = triplet_find(s_center, s_w1, s_w2);
        if (!t || t->lambda == 0.0) return 0.0;
        const double r1 = d1.norm(), r2 = d2.norm();
        if (r1 <= 0.0 || r2 <= 0.0) return std::numeric_limits<double>::infinity();
        if (r1 >= t->rmax || r2 >= t->rmax) return 0.0;
        const double c = d1.dot(d2) / (r1 * r2);
        const double dc = c - t->cos_theta0;
        return t->lambda * std::exp(t->rho / (r1 - t->rmax) + t->rho / (r2 - t->rmax)) * dc * dc;
    }

    double wing_cutoff(int s_center, int s_wing) const {
        double rc = 0.0;
        for (const auto& [key, t] : triplets_) {
            const int sc = static_cast<int>(key >> 32);
            const int lo = static_cast<int>((key >> 16) & 0xffff);
            const int hi = static_cast<int>(key & 0xffff);
            if (sc != s_center) continue;
            if (lo == s_wing || hi == s_wing) rc = std::max(rc, t.rmax);
        }
        return rc;
    }

    bool has_triplet_channel(int s_center, int s_w1, int s_w2) const {
        return triplet_find(s_center, s_w1, s_w2) != nullptr;
    }

    /// Symmetric full three-body potential V3: sum of the three
    /// center-assignments. Arguments are absolute positions.
    double v3(int sa, int sb, int sc, const Vec3& a, const Vec3& b, const Vec3& c) const {
        return triple_term(sa, sb, sc, b - a, c - a) +
               triple_term(sb, sa, sc, a - b, c - b) +
               triple_term(sc, sa, sb, a - c, b - c);
    }

    /// Verify a parameter entry exists for every species tuple the lattice
    /// can form; throws naming the first missing tuple.
    void validate_complete(const SpeciesSet& species) const {
        for (int i = 0; i < species.size(); ++i)
            for (int j = i; j < species.size(); ++j) {
                if (kind_ == PotentialKind::LennardJones) {
                    if (!lj_.count(pair_key(i, j)))
                        throw std::runtime_error("missing lj pair parameters for (" +
                                                 species[i].name + ", " + species[j].name + ")");
                } else if (!sw2_.count(pair_key(i, j))) {
                    throw std::runtime_error("missing sw pair parameters for (" +
                                             species[i].name + ", " + species[j].name + ")");
                }
            }
    }

    static PotentialModel load(const std::string& path, const SpeciesSet& species) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open potential parameter file: " + path);
        return parse(in, species, path);
    }

    /// Parameter file grammar (one entry per line, '#' starts a comment):
    ///   kind lj|sw
    ///   pair <S1> <S2> key value ...        (epsilon/sigma/rcut or A/B/p/q/rho/rmax)
    ///   triplet <center> <W1> <W2> key value ...  (lambda/cos_theta0/rho/rmax)
    static PotentialModel parse(std::istream& in, const SpeciesSet& species,
                                const std::string& origin = "<stream>") {
        PotentialModel m;
        bool kind_set = false;
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::istringstream ls(line);
            std::string tag;
            if (!(ls >> tag)) continue;
            const auto fail = [&](const std::string& msg) {
                throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": " + msg);
            };
            if (tag == "kind") {
                std::string k;
                ls >> k;
                if (k == "lj") m.kind_ = PotentialKind::LennardJones;
                else if (k == "sw") m.kind_ = PotentialKind::StillingerWeber;
                else fail("unknown potential kind '" + k + "'");
                kind_set = true;
            } else if (tag == "pair") {
                if (!kind_set) fail("'pair' before 'kind'");
                std::string n1, n2;
                if (!(ls >> n1 >> n2)) fail("pair: expected two species names");
                const int s1 = species.require(n1), s2 = species.require(n2);
                auto kv = parse_kv(ls, fail);
                if (m.kind_ == PotentialKind::LennardJones) {
                    LjPairParams p;
                    p.epsilon = take(kv, "epsilon", fail);
                    p.sigma = take(kv, "sigma", fail);
                    p.rcut = take(kv, "rcut", fail);
                    m.lj_[pair_key(s1, s2)] = p;
                    m.max_rc2_ = std::max(m.max_rc2_, p.rcut);
                } else {
                    SwPairParams p;
                    p.A = take(kv, "A", fail);
                    p.B = take(kv, "B", fail);
                    p.p = take(kv, "p", fail);
                    p.q = take(kv, "q", fail);
                    p.rho = take(kv, "rho", fail);
                    p.rmax = take(kv, "rmax", fail);
                    m.sw2_[pair_key(s1, s2)] = p;
                    m.max_rc2_ = std::max(m.max_rc2_, p.rmax);
                }
                if (!kv.empty()) fail("pair: unknown key '" + kv.begin()->first + "'");
            } else if (tag == "triplet") {
                if (!kind_set) fail("'triplet' before 'kind'");
                if (m.kind_ != PotentialKind::StillingerWeber)
                    fail("triplet entries are only valid for kind sw");
                std::string nc, n1, n2;
                if (!(ls >> nc >> n1 >> n2)) fail("triplet: expected three species names");
                const int sc = species.require(nc);
                const int s1 = species.require(n1), s2 = species.require(n2);
                auto kv = parse_kv(ls, fail);
                SwTripletParams t;
                t.lambda = take(kv, "lambda", fail);
                t.cos_theta0 = take(kv, "cos_theta0", fail);
                t.rho = take(kv, "rho", fail);
                t.rmax = take(kv, "rmax", fail);
                if (!kv.empty()) fail("triplet: unknown key '" + kv.begin()->first + "'");
                m.triplets_[triplet_key(sc, s1, s2)] = t;
                m.max_rc3_ = std::max(m.max_rc3_, t.rmax);
            } else {
                fail("unknown entry '" + tag + "'");
            }
        }
        if (!kind_set)
            throw std::runtime_error(origin + ": missing 'kind' entry");
        return m;
    }

private:
    static std::map<std::string, double> parse_kv(std::istringstream& ls,
                                                  const std::function<void(const std::string&)>& fail) {
        std::map<std::string, double> kv;
        std::string key;
        while (ls >> key) {
            double value;
            if (!(ls >> value)) fail("expected numeric value after '" + key + "'");
            kv[key] = value;
        }
        return kv;
    }
    static double take(std::map<std::string, double>& kv, const std::string& key,
                       const std::function<void(const std::string&)>& fail) {
        auto it = kv.find(key);
        if (it == kv.end()) fail("missing key '" + key + "'");
        const double v = it->second;
        kv.erase(it);
        return v;
    }

    static std::uint32_t pair_key(int s1, int s2) {
        const int lo = std::min(s1, s2), hi = std::max(s1, s2);
        return static_cast<std::uint32_t>(lo) << 16 | static_cast<std::uint32_t>(hi);
    }
    static std::uint64_t triplet_key(int sc, int s1, int s2) {
        const int lo = std::min(s1, s2), hi = std::max(s1, s2);
        return (static_cast<std::uint64_t>(sc) << 32) |
               (static_cast<std::uint64_t>(lo) << 16) | static_cast<std::uint64_t>(hi);
    }

    const LjPairParams& lj_lookup(int s1, int s2) const {
        auto it = lj_.find(pair_key(s1, s2));
        if (it == lj_.end())
            throw std::runtime_error("missing lj pair parameters for species ids (" +
                                     std::to_string(s1) + ", " + std::to_string(s2) + ")");
        return it->second;
    }
    const SwPairParams& sw_lookup(int s1, int s2) const {
        auto it = sw2_.find(pair_key(s1, s2));
        if (it == sw2_.end())
            throw std::runtime_error("missing sw pair parameters for species ids (" +
                                     std::to_string(s1) + ", " + std::to_string(s2) + ")");
        return it->second;
    }
    const SwTripletParams* triplet_find(int sc, int s1, int s2) const {
        auto it = triplets_.find(triplet_key(sc, s1, s2));
        return it == triplets_.end() ? nullptr : &it->second;
    }

    PotentialKind kind_ = PotentialKind::LennardJones;
    std::map<std::uint32_t, LjPairParams> lj_;
    std::map<std::uint32_t, SwPairParams> sw2_;
    std::map<std::uint64_t, SwTripletParams> triplets_;
    double max_rc2_ = 0.0;
    double max_rc3_ = 0.0;
};

} // namespace gcsp
