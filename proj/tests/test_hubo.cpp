#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "gcsp/hubo.hpp"
#include "gcsp/refine.hpp"
#include "gcsp/rng.hpp"
#include "support/oracles.hpp"

using namespace gcsp;
using namespace gcsp::testing;

namespace {

const HuboTerm* find_term(const HuboPolynomial& poly, std::initializer_list<std::uint32_t> tuple) {
    for (const auto& t : poly.terms()) {
        if (t.order != static_cast<int>(tuple.size())) continue;
        bool eq = true;
        int i = 0;
        for (auto v : tuple)
            if (t.idx[static_cast<std::size_t>(i++)] != v) { eq = false; break; }
        if (eq) return &t;
    }
    return nullptr;
}

std::vector<std::uint8_t> random_bits(int n, Xoshiro256ss& rng) {
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n));
    for (auto& b : bits) b = rng.next() & 1ULL;
    return bits;
}

bool has_same_site_collision(const std::vector<std::uint8_t>& bits, const SiteGrid& grid) {
    for (int i = 0; i < grid.n_sites(); ++i) {
        int occ = 0;
        for (int s = 0; s < grid.n_species(); ++s)
            occ += bits[static_cast<std::size_t>(grid.var_index(i, s))];
        if (occ > 1) return true;
    }
    return false;
}

} // namespace

TEST_CASE("build: linear coefficient equals the single-atom periodic self-energy") {
    const UnitCell cell = krypton_cell();
    const SpeciesSet sp = kr_species();
    const PotentialModel model = kr_model();
    const SiteGrid grid = build_grid(cell, 2, sp);
    const HuboPolynomial poly = build_hubo(grid, cell, model);

    const AtomList one = {{0, site_position(grid, cell, 0), false}};
    const double e1 = energy_pbc(model, cell, one).total();
    const auto* t = find_term(poly, {0});
    REQUIRE(t != nullptr);
    CHECK_THAT(t->coeff - e1, Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("build: pair coefficient obeys inclusion-exclusion") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    const SiteGrid grid = build_grid(cell, 2, kr_species());
    const HuboPolynomial poly = build_hubo(grid, cell, model);

    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 5; ++b) {
            const AtomList both = {{0, site_position(grid, cell, a), false},
                                   {0, site_position(grid, cell, b), false}};
            const AtomList xa = {both[0]}, xb = {both[1]};
            const double want = energy_pbc(model, cell, both).total() -
                                energy_pbc(model, cell, xa).total() -
                                energy_pbc(model, cell, xb).total();
            const auto* t = find_term(poly, {static_cast<std::uint32_t>(a),
                                             static_cast<std::uint32_t>(b)});
            REQUIRE(t != nullptr);
            CHECK_THAT(t->coeff - want, Catch::Matchers::WithinAbs(0.0, 1e-10));
        }
}

TEST_CASE("build: three-body inclusion-exclusion on the MoS2 g=2 grid") {
    const UnitCell cell = mos2_cell();
    const PotentialModel model = mos2_model();
    const SiteGrid grid = build_grid(cell, {2, 2, 2}, mos2_species());
    const HuboPolynomial poly = build_hubo(grid, cell, model);

    int checked = 0;
    for (const auto& t : poly.terms()) {
        if (t.order != 3) continue;
        if (++checked > 25) break;
        AtomList atoms;
        for (int i = 0; i < 3; ++i) {
            const int v = static_cast<int>(t.idx[static_cast<std::size_t>(i)]);
            atoms.push_back({grid.var_species(v), site_position(grid, cell, grid.var_site(v)),
                             false});
        }
        const auto E = [&](std::initializer_list<int> which) {
            AtomList sub;
            for (int w : which) sub.push_back(atoms[static_cast<std::size_t>(w)]);
            return energy_pbc(model, cell, sub).total();
        };
        double h = E({0, 1, 2});
        h -= E({0, 1}) - E({0}) - E({1});
        h -= E({0, 2}) - E({0}) - E({2});
        h -= E({1, 2}) - E({1}) - E({2});
        h -= E({0}) + E({1}) + E({2});
        CHECK_THAT(t.coeff - h, Catch::Matchers::WithinAbs(0.0, 1e-10));
    }
    REQUIRE(checked > 0);
}

TEST_CASE("build: krypton g=4 polynomial reproduces the fcc energy") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    const SiteGrid grid = build_grid(cell, 4, kr_species());
    const HuboPolynomial poly = build_hubo(grid, cell, model);
    const auto bits = krypton_fcc_bits(grid);
    const double via_poly = poly.evaluate(bits);
    CHECK_THAT(via_poly, Catch::Matchers::WithinAbs(-0.431, 1e-3));
    const double via_direct = direct_image_sum(model, cell, decode(bits, grid, cell));
    CHECK_THAT(via_poly - via_direct, Catch::Matchers::WithinAbs(0.0, 1e-8));
}

TEST_CASE("oracle equivalence: random bitstrings, krypton g=2..3 and MoS2 g=2", "[slow]") {
    Xoshiro256ss rng(0xfeedbeef);
    for (int g : {2, 3}) {
        const UnitCell cell = krypton_cell();
        const PotentialModel model = kr_model();
        const SiteGrid grid = build_grid(cell, g, kr_species());
        const HuboPolynomial poly = build_hubo(grid, cell, model);
        for (int trial = 0; trial < 50; ++trial) {
            const auto bits = random_bits(grid.n_vars(), rng);
            const double via_poly = poly.evaluate(bits);
            const double via_pbc = energy_pbc(model, cell, decode(bits, grid, cell)).total();
            REQUIRE_THAT(via_poly - via_pbc, Catch::Matchers::WithinAbs(0.0, 1e-8));
        }
    }
    {
        const UnitCell cell = mos2_cell();
        const PotentialModel model = mos2_model();
        const SiteGrid grid = build_grid(cell, {2, 2, 2}, mos2_species());
        const HuboPolynomial poly = build_hubo(grid, cell, model);
        int done = 0;
        while (done < 50) {
            const auto bits = random_bits(grid.n_vars(), rng);
            if (has_same_site_collision(bits, grid)) continue; // no finite reference energy
            ++done;
            const double via_poly = poly.evaluate(bits);
            const double via_pbc = energy_pbc(model, cell, decode(bits, grid, cell)).total();
            REQUIRE_THAT(via_poly - via_pbc, Catch::Matchers::WithinAbs(0.0, 1e-8));
        }
    }
}

TEST_CASE("absolute penalty: expansion coefficients and zero set") {
    const UnitCell cell = krypton_cell();
    const SiteGrid grid = build_grid(cell, 4, kr_species());
    HuboPolynomial poly(grid.n_vars()); // empty: inspect the pure penalty algebra
    PenaltySpec spec;
    spec.kind = PenaltyKind::Absolute;
    spec.strength = 1.0;
    spec.targets[0] = 4.0;
    add_absolute_penalty(poly, grid, spec);

    CHECK_THAT(poly.offset(), Catch::Matchers::WithinAbs(16.0, 1e-14));
    const auto* lin = find_term(poly, {7});
    REQUIRE(lin != nullptr);
    CHECK_THAT(lin->coeff, Catch::Matchers::WithinAbs(-7.0, 1e-14));
    const auto* pair = find_term(poly, {3, 11});
    REQUIRE(pair != nullptr);
    CHECK_THAT(pair->coeff, Catch::Matchers::WithinAbs(2.0, 1e-14));

    std::vector<std::uint8_t> bits(64, 0);
    for (int i = 0; i < 4; ++i) bits[static_cast<std::size_t>(10 + 7 * i)] = 1;
    CHECK_THAT(poly.evaluate(bits), Catch::Matchers::WithinAbs(0.0, 1e-12));
    bits[60] = 1; // five ones
    CHECK_THAT(poly.evaluate(bits), Catch::Matchers::WithinAbs(1.0, 1e-12));

    Xoshiro256ss rng(4242);
    for (int t = 0; t < 200; ++t) {
        const auto b = random_bits(64, rng);
        int count = 0;
        for (auto v : b) count += v;
        const double e = poly.evaluate(b);
        if (count == 4)
            REQUIRE_THAT(e, Catch::Matchers::WithinAbs(0.0, 1e-12));
        else
            REQUIRE(e > 0.0);
        REQUIRE_THAT(e, Catch::Matchers::WithinAbs(std::pow(count - 4.0, 2), 1e-10));
    }
}

TEST_CASE("relative penalty: ratio zero set and arithmetic") {
    const UnitCell cell = mos2_cell();
    const SiteGrid grid = build_grid(cell, mos2_granularity(), mos2_species());
    HuboPolynomial poly(grid.n_vars());
    PenaltySpec spec;
    spec.kind = PenaltyKind::Relative;
    spec.strength = 10.0;
    spec.species_a = 0; // Mo
    spec.species_b = 1; // S
    spec.ratio = 0.5;
    add_relative_penalty(poly, grid, spec);

    const auto with_counts = [&](int n_mo, int n_s) {
        std::vector<std::uint8_t> bits(static_cast<std::size_t>(grid.n_vars()), 0);
        for (int i = 0; i < n_mo; ++i)
            bits[static_cast<std::size_t>(grid.var_index(i, 0))] = 1;
        for (int i = 0; i < n_s; ++i)
            bits[static_cast<std::size_t>(grid.var_index(i, 1))] = 1;
        return poly.evaluate(bits);
    };
    CHECK_THAT(with_counts(4, 8), Catch::Matchers::WithinAbs(0.0, 1e-10));
    CHECK_THAT(with_counts(5, 10), Catch::Matchers::WithinAbs(0.0, 1e-10));
    CHECK_THAT(with_counts(4, 7), Catch::Matchers::WithinAbs(2.5, 1e-10));

    Xoshiro256ss rng(88);
    for (int t = 0; t < 100; ++t) {
        const auto b = random_bits(grid.n_vars(), rng);
        int mo = 0, s = 0;
        for (int i = 0; i < grid.n_sites(); ++i) {
            mo += b[static_cast<std::size_t>(grid.var_index(i, 0))];
            s += b[static_cast<std::size_t>(grid.var_index(i, 1))];
        }
        const double expect = 10.0 * std::pow(mo - 0.5 * s, 2);
        REQUIRE_THAT(poly.evaluate(b) - expect, Catch::Matchers::WithinAbs(0.0, 1e-8));
    }
}

TEST_CASE("deduc-reduc: clamping rule, cubic removal, infinite threshold") {
    HuboPolynomial poly(5);
    poly.add_term({0}, -1.0);
    poly.add_term({0, 1}, 25.0);
    poly.add_term({1, 2}, 5.0);
    poly.add_term({0, 1, 2}, -0.5);
    poly.add_term({0, 1, 3}, 2.0);
    poly.add_term({1, 2, 3}, 1.5);

    auto [reduced, rep] = deduc_reduc(poly, 10.0);
    const auto* pair = find_term(reduced, {0, 1});
    REQUIRE(pair != nullptr);
    CHECK(pair->coeff == 10.0);
    CHECK(find_term(reduced, {0, 1, 2}) == nullptr);
    CHECK(find_term(reduced, {0, 1, 3}) == nullptr);
    CHECK(find_term(reduced, {1, 2, 3}) != nullptr);
    CHECK(rep.pairs_clamped == 1);
    CHECK(rep.removed_by_order.at(3) == 2);
    CHECK(rep.before_by_order.at(3) == 3);
    CHECK(rep.after_by_order.at(3) == 1);

    auto [same, rep2] = deduc_reduc(poly, 1e12);
    CHECK(same.num_terms() == poly.num_terms());
    CHECK(rep2.pairs_clamped == 0);
    CHECK(rep2.removed_by_order.empty());
}

TEST_CASE("deduc-reduc: argmin preserved on an enumerable system") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    const SiteGrid grid = build_grid(cell, 2, kr_species());
    const HuboPolynomial poly = build_hubo(grid, cell, model);
    const auto [bits0, e0] = brute_force_argmin(poly);
    double max_opt_pair = 0.0;
    for (const auto& t : poly.terms())
        if (t.order == 2 && bits0[t.idx[0]] && bits0[t.idx[1]])
            max_opt_pair = std::max(max_opt_pair, t.coeff);
    const double threshold = std::max(max_opt_pair * 2.0, 1.0);
    auto [reduced, rep] = deduc_reduc(poly, threshold);
    const auto [bits1, e1] = brute_force_argmin(reduced);
    CHECK(bits0 == bits1);
}

TEST_CASE("ground-state invariance under the 1 eV clamp (brute force)") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    const SiteGrid grid = build_grid(cell, 2, kr_species());
    const HuboPolynomial plain = build_hubo(grid, cell, model);
    const HuboPolynomial clamped = build_hubo(grid, cell, model, 1.0);
    const auto [b0, e0] = brute_force_argmin(plain);
    const auto [b1, e1] = brute_force_argmin(clamped);
    CHECK(b0 == b1);
}

TEST_CASE("evaluate: offset, single term, random polynomial against naive sum") {
    HuboPolynomial poly(6);
    poly.set_offset(0.25);
    CHECK(poly.evaluate(std::vector<std::uint8_t>(6, 0)) == 0.25);
    poly.add_term({3}, -1.5);
    std::vector<std::uint8_t> one(6, 0);
    one[3] = 1;
    CHECK_THAT(poly.evaluate(one), Catch::Matchers::WithinAbs(-1.25, 1e-15));

    Xoshiro256ss rng(31337);
    HuboPolynomial rp(6);
    rp.set_offset(rng.uniform() - 0.5);
    for (int t = 0; t < 30; ++t) {
        std::uint32_t a = static_cast<std::uint32_t>(rng.uniform_int(6));
        std::uint32_t b = static_cast<std::uint32_t>(rng.uniform_int(6));
        std::uint32_t c = static_cast<std::uint32_t>(rng.uniform_int(6));
        const double coeff = rng.uniform() * 4.0 - 2.0;
        if (a == b || b == c || a == c) continue;
        std::uint32_t v[3] = {a, b, c};
        std::sort(v, v + 3);
        rp.add_term({v[0], v[1], v[2]}, coeff);
    }
    for (int t = 0; t < 64; ++t) {
        const auto bits = random_bits(6, rng);
        REQUIRE_THAT(rp.evaluate(bits) - naive_evaluate(rp, bits),
                     Catch::Matchers::WithinAbs(0.0, 1e-12));
    }
    CHECK_THROWS_AS(rp.evaluate(std::vector<std::uint8_t>(5, 0)), std::invalid_argument);
}

TEST_CASE("polynomial files: round trip, empty file, duplicate merge") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "gcsp_poly_test";
    fs::create_directories(dir);

    const UnitCell cell = krypton_cell();
    const SiteGrid grid = build_grid(cell, 2, kr_species());
    const HuboPolynomial poly = build_hubo(grid, cell, kr_model());
    const std::string path = (dir / "kr.poly").string();
    export_poly(poly, path);
    const HuboPolynomial back = import_poly(path);
    REQUIRE(back.num_vars() == poly.num_vars());
    REQUIRE(back.num_terms() == poly.num_terms());
    REQUIRE(back.offset() == poly.offset());
    for (std::size_t i = 0; i < poly.num_terms(); ++i) {
        REQUIRE(back.terms()[i].order == poly.terms()[i].order);
        REQUIRE(back.terms()[i].idx == poly.terms()[i].idx);
        REQUIRE(back.terms()[i].coeff == poly.terms()[i].coeff);
    }

    HuboPolynomial empty(3);
    const std::string epath = (dir / "empty.poly").string();
    export_poly(empty, epath);
    const HuboPolynomial eback = import_poly(epath);
    CHECK(eback.num_terms() == 0);
    CHECK(eback.num_vars() == 3);

    {
        std::ofstream out(dir / "dup.poly");
        out << "#vars 4\n#offset 0\n0 1 1.5\n0 1 2.5\n2 -1.0\n";
    }
    std::vector<std::string> warnings;
    const HuboPolynomial dup = import_poly((dir / "dup.poly").string(), &warnings);
    REQUIRE(warnings.size() == 1);
    const auto* merged = find_term(dup, {0, 1});
    REQUIRE(merged != nullptr);
    CHECK(merged->coeff == 4.0);

    {
        std::ofstream out(dir / "bad.poly");
        out << "#vars 4\n1 0 2.0\n";
    }
    CHECK_THROWS_WITH(import_poly((dir / "bad.poly").string()),
                      Catch::Matchers::ContainsSubstring(":2:"));
}

TEST_CASE("oracle equivalence holds with a penalty added on top") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    const SiteGrid grid = build_grid(cell, 2, kr_species());
    HuboPolynomial poly = build_hubo(grid, cell, model);
    PenaltySpec spec;
    spec.kind = PenaltyKind::Absolute;
    spec.strength = 2.5;
    spec.targets[0] = 3.0;
    add_absolute_penalty(poly, grid, spec);

    Xoshiro256ss rng(606);
    for (int t = 0; t < 60; ++t) {
        const auto bits = random_bits(grid.n_vars(), rng);
        int count = 0;
        for (auto b : bits) count += b;
        const double physics = energy_pbc(model, cell, decode(bits, grid, cell)).total();
        const double penalty = 2.5 * std::pow(count - 3.0, 2);
        REQUIRE_THAT(poly.evaluate(bits) - (physics + penalty),
                     Catch::Matchers::WithinAbs(0.0, 1e-8));
    }
}
