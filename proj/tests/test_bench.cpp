#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "gcsp/bench.hpp"
#include "support/oracles.hpp"

using namespace gcsp;

namespace {

RunResult make_run(double energy, const std::vector<std::uint8_t>& bits, double wall = 0.01) {
    RunResult r;
    r.final_energy = energy;
    r.bits = bits;
    r.wall_time_s = wall;
    return r;
}

} // namespace

TEST_CASE("ground_state_prob: all, none, half") {
    const std::vector<std::uint8_t> b(4, 0);
    std::vector<RunResult> all = {make_run(-1.0, b), make_run(-1.0, b)};
    CHECK(ground_state_prob(all, -1.0) == 1.0);
    std::vector<RunResult> none = {make_run(-0.5, b), make_run(-0.7, b)};
    CHECK(ground_state_prob(none, -1.0) == 0.0);
    std::vector<RunResult> half = {make_run(-1.0, b), make_run(-0.5, b)};
    CHECK(ground_state_prob(half, -1.0) == 0.5);
    CHECK_THROWS_AS(ground_state_prob({}, 0.0), std::invalid_argument);
}

TEST_CASE("tts: fixed point, closed form, sentinels, regularization") {
    CHECK_THAT(tts(3.5, 0.99), Catch::Matchers::WithinRel(3.5, 1e-12));
    CHECK_THAT(tts(1.0, 0.5), Catch::Matchers::WithinAbs(6.6439, 5e-4));
    CHECK(std::isinf(tts(1.0, 0.0)));
    const double reg = tts(2.0, 1.0, 0.99, 999);
    CHECK_THAT(reg, Catch::Matchers::WithinRel(2.0 * std::log(0.01) / std::log(1.0 / 1000.0),
                                               1e-12));
    CHECK_THROWS_AS(tts(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("tts is monotonically decreasing in p_gs") {
    double prev = tts(1.0, 0.05);
    for (double p = 0.10; p < 1.0; p += 0.05) {
        const double cur = tts(1.0, p);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("histogram: single run, totals, density split") {
    const int n_sites = 4, n_species = 1;
    std::vector<std::uint8_t> two(4, 0);
    two[0] = two[1] = 1;
    std::vector<std::uint8_t> three = two;
    three[2] = 1;

    std::vector<RunResult> one = {make_run(-1.0, two)};
    const auto bins1 = histogram(one, -1.0, 0.5, n_sites, n_species);
    REQUIRE(bins1.size() == 1);
    CHECK(bins1[0].lo == 0.0);
    CHECK(bins1[0].count == 1);

    std::vector<RunResult> batch = {make_run(-1.0, two), make_run(-0.8, two),
                                    make_run(-0.3, three), make_run(-0.9, three),
                                    make_run(-0.05, two)};
    const std::vector<int> want{2};
    const auto bins = histogram(batch, -1.0, 0.25, n_sites, n_species, &want);
    std::size_t total = 0, density = 0;
    for (const auto& b : bins) {
        total += b.count;
        density += b.count_expected_density;
    }
    CHECK(total == batch.size());
    CHECK(density == 3);
    CHECK_THROWS_AS(histogram(batch, -1.0, 0.0, n_sites, n_species), std::invalid_argument);
}

TEST_CASE("schedule_sweep: single schedule row is consistent with tts()") {
    // an easy polynomial every run solves: p_gs = 1, deterministic checks only
    HuboPolynomial poly(6);
    for (std::uint32_t v = 0; v < 6; ++v) poly.add_term({v}, v < 2 ? -1.0 : 1.0);
    const double gs = -2.0;
    const std::vector<AnnealSchedule> schedules = {{1e-2, 1e-4, 12}};
    const auto rows = schedule_sweep(poly, 6, 1, schedules, 8, 42, gs);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].min_tts);
    CHECK(rows[0].n_runs == 8);
    CHECK_THAT(rows[0].tts_s,
               Catch::Matchers::WithinRel(tts(rows[0].tau_mean, rows[0].p_gs, 0.99, 8), 1e-12));
    CHECK(rows[0].ground_state_count <= 8);
    CHECK_THAT(rows[0].p_gs * 8.0,
               Catch::Matchers::WithinAbs(static_cast<double>(rows[0].ground_state_count), 1e-12));
}

TEST_CASE("batch_stats is a pure function of the result list") {
    const std::vector<std::uint8_t> b(4, 0);
    std::vector<RunResult> batch = {make_run(-1.0, b), make_run(-0.6, b), make_run(-1.0, b)};
    const RunStats a = batch_stats(batch, 10, -1.0);
    const RunStats c = batch_stats(batch, 10, -1.0);
    CHECK(a.p_gs == c.p_gs);
    CHECK(a.mean_residual == c.mean_residual);
    CHECK(a.tts_s == c.tts_s);
    CHECK(a.ground_state_count == 2);
}

TEST_CASE("schedule sweep: longer schedules do not raise the mean residual", "[slow]") {
    // statistical monotonicity on a real system: krypton g=4, clamped build
    const auto cell = gcsp::testing::krypton_cell();
    const auto grid = gcsp::build_grid(cell, 4, gcsp::testing::kr_species());
    const auto poly = gcsp::build_hubo(grid, cell, gcsp::testing::kr_model(), 1.0);
    const double gs = poly.evaluate(gcsp::testing::krypton_fcc_bits(grid));
    const std::vector<AnnealSchedule> schedules = {{1e-2, 1e-4, 3}, {1e-2, 1e-4, 30}};
    const auto rows = schedule_sweep(poly, grid.n_sites(), 1, schedules, 300, 5, gs);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].mean_residual <= rows[0].mean_residual + 1e-12);
    CHECK(rows[1].p_gs >= rows[0].p_gs);
}
