#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gcsp/refine.hpp"
#include "gcsp/rng.hpp"
#include "support/oracles.hpp"

using namespace gcsp;
using namespace gcsp::testing;

TEST_CASE("decode: empty string, fcc occupation, bit count") {
    const UnitCell cell = krypton_cell();
    const SiteGrid grid = build_grid(cell, 4, kr_species());

    CHECK(decode(std::vector<std::uint8_t>(static_cast<std::size_t>(grid.n_vars()), 0), grid,
                 cell)
              .empty());

    const auto bits = krypton_fcc_bits(grid);
    const AtomList atoms = decode(bits, grid, cell);
    REQUIRE(atoms.size() == 4);
    // origin and the three face centers
    const double a = 5.653;
    const std::vector<Vec3> expect = {
        {0, 0, 0}, {a / 2, a / 2, 0}, {a / 2, 0, a / 2}, {0, a / 2, a / 2}};
    for (const auto& e : expect) {
        bool found = false;
        for (const auto& at : atoms)
            if ((at.pos - e).norm() < 1e-12) found = true;
        CHECK(found);
    }

    Xoshiro256ss rng(11);
    for (int t = 0; t < 20; ++t) {
        std::vector<std::uint8_t> rb(static_cast<std::size_t>(grid.n_vars()));
        int ones = 0;
        for (auto& b : rb) {
            b = rng.next() & 1ULL;
            ones += b;
        }
        REQUIRE(decode(rb, grid, cell).size() == static_cast<std::size_t>(ones));
    }
}

TEST_CASE("bfgs: already-optimal dimer stays put") {
    const UnitCell open({Vec3{60, 0, 0}, Vec3{0, 60, 0}, Vec3{0, 0, 60}}, {false, false, false});
    const PotentialModel model = kr_model();
    const double rmin = std::pow(2.0, 1.0 / 6.0) * 3.65;
    const AtomList dimer = {{0, {20, 20, 20}, false}, {0, {20 + rmin, 20, 20}, false}};
    const RelaxResult r = bfgs_relax(dimer, open, model);
    CHECK(r.converged);
    CHECK(r.iterations <= 2);
    CHECK_THAT((r.atoms[0].pos - dimer[0].pos).norm(), Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK_THAT((r.atoms[1].pos - dimer[1].pos).norm(), Catch::Matchers::WithinAbs(0.0, 1e-6));
    CHECK(r.final_energy <= r.initial_energy + 1e-8);
}

TEST_CASE("bfgs: perturbed fcc returns to the reference energy") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    Xoshiro256ss rng(314159);
    const double e_ref = energy_pbc(model, cell, krypton_fcc_atoms()).total();
    for (int trial = 0; trial < 3; ++trial) {
        AtomList atoms = krypton_fcc_atoms();
        for (auto& a : atoms) {
            a.pos += Vec3{(rng.uniform() - 0.5) * 0.2, (rng.uniform() - 0.5) * 0.2,
                          (rng.uniform() - 0.5) * 0.2};
        }
        const RelaxResult r = bfgs_relax(atoms, cell, model, 1e-6, 500);
        CHECK(r.converged);
        CHECK_THAT(r.final_energy - e_ref, Catch::Matchers::WithinAbs(0.0, 1e-4));
        CHECK(r.final_energy <= r.initial_energy + 1e-8);
    }
}

TEST_CASE("finite differences: central difference converges at second order") {
    const UnitCell open({Vec3{60, 0, 0}, Vec3{0, 60, 0}, Vec3{0, 0, 60}}, {false, false, false});
    const PotentialModel model = kr_model();
    AtomList dimer = {{0, {20, 20, 20}, false}, {0, {23.4, 20.5, 20.2}, false}};
    const auto dir_deriv = [&](double h) {
        AtomList plus = dimer, minus = dimer;
        plus[1].pos += Vec3{h, 0, 0};
        minus[1].pos -= Vec3{h, 0, 0};
        return (energy_pbc(model, open, plus).total() - energy_pbc(model, open, minus).total()) /
               (2.0 * h);
    };
    const double ref = dir_deriv(1e-7);
    const double err1 = std::abs(dir_deriv(4e-3) - ref);
    const double err2 = std::abs(dir_deriv(2e-3) - ref);
    CHECK(err2 < err1);
    CHECK_THAT(err1 / err2, Catch::Matchers::WithinAbs(4.0, 1.0));
}

TEST_CASE("bfgs: relaxation invariant under lattice translation of the input") {
    const UnitCell cell = krypton_cell();
    const PotentialModel model = kr_model();
    AtomList atoms = krypton_fcc_atoms();
    atoms[1].pos += Vec3{0.05, -0.04, 0.03};
    const RelaxResult r0 = bfgs_relax(atoms, cell, model);
    AtomList moved = atoms;
    for (auto& a : moved) a.pos = cell.wrap(a.pos + cell.basis(0) + cell.basis(2) * 2.0);
    const RelaxResult r1 = bfgs_relax(moved, cell, model);
    CHECK_THAT(r0.final_energy - r1.final_energy, Catch::Matchers::WithinAbs(0.0, 1e-6));
}

TEST_CASE("classify: point entries, bands, composition gating") {
    MinimaCatalog cat;
    cat.add({"fcc", {4}, -0.431, std::numeric_limits<double>::quiet_NaN()});
    cat.add({"fcc-1", {3}, -0.2281, std::numeric_limits<double>::quiet_NaN()});
    cat.add({"band", {5}, -9.0, -5.0});

    AtomList four(4, Atom{0, {0, 0, 0}, false});
    AtomList three(3, Atom{0, {0, 0, 0}, false});
    AtomList five(5, Atom{0, {0, 0, 0}, false});

    CHECK(classify(four, -0.4311, cat, 1, 0.01) == "fcc");
    CHECK(classify(three, -0.2283, cat, 1, 0.01) == "fcc-1");
    CHECK(classify(four, -0.2283, cat, 1, 0.01) == "unclassified"); // composition mismatch
    CHECK(classify(four, -0.60, cat, 1, 0.01) == "unclassified");   // too far in energy
    CHECK(classify(five, -7.3, cat, 1, 0.01) == "band");
    CHECK(classify(five, -4.0, cat, 1, 0.01) == "unclassified");
}

TEST_CASE("classify: catalog rejects duplicate names") {
    MinimaCatalog cat;
    cat.add({"x", {}, 0.0, std::numeric_limits<double>::quiet_NaN()});
    CHECK_THROWS_AS(cat.add({"x", {}, 1.0, std::numeric_limits<double>::quiet_NaN()}),
                    std::invalid_argument);
}
