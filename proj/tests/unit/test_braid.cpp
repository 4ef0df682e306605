#include <cmath>
#include <stdexcept>
#include <random>

#include "csflow/braid.hpp"
#include "csflow/generalized_flow.hpp"
#include "doctest.h"

using namespace csflow;

namespace {

// Two strands trade x1 positions; `below` picks which one passes at smaller x2.
TrajectoryEnsemble crossing(bool left_passes_below) {
    const double a = left_passes_below ? 0.3 : 0.7;
    const double b = left_passes_below ? 0.7 : 0.3;
    TrajectoryEnsemble e;
    e.length = 1.0;
    e.positions = {{{0.2, 0.5}, {0.55, a}, {0.8, 0.5}}, {{0.8, 0.5}, {0.45, b}, {0.2, 0.5}}};
    return e;
}

std::vector<int> random_word(std::mt19937_64& rng, std::size_t strands, std::size_t len) {
    std::vector<int> w;
    for (std::size_t i = 0; i < len; ++i) {
        const int g = 1 + static_cast<int>(rng() % (strands - 1));
        w.push_back(rng() % 2 ? g : -g);
        // plant cancelling pairs often enough to exercise the reduction
        if (rng() % 3 == 0) w.push_back(-w.back());
    }
    return w;
}

}  // namespace

TEST_SUITE("braid") {

TEST_CASE("parallel slabs give the empty word") {
    // strands of one slab share a slope and never cross
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        std::mt19937_64 rng(seed);
        const CellGrid g{5, 4, 2.0};
        std::vector<double> v(4);
        for (auto& x : v) x = std::uniform_real_distribution<double>(-0.3, 0.3)(rng);
        const TrajectoryEnsemble all = parallel_flow_ensemble(g, v, 1.0, 6);
        for (std::size_t m = 0; m < g.n2; ++m) {
            TrajectoryEnsemble slab;
            slab.length = all.length;
            slab.positions.assign(all.positions.begin() + m * g.n1, all.positions.begin() + (m + 1) * g.n1);
            const BraidRecord r = braid_word(slab);
            CAPTURE(seed);
            CAPTURE(m);
            CHECK(r.strands == 5);
            CHECK(r.word.empty());
            for (std::size_t i = 0; i < r.strands; ++i) CHECK(r.permutation[i] == i);
        }
    }
}

TEST_CASE("single crossing fixtures") {
    const BraidRecord up = braid_word(crossing(true));
    CHECK(up.word == std::vector<int>{1});
    CHECK(up.permutation == std::vector<std::size_t>{1, 0});
    CHECK(std::abs(up.winding[0][1]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(up.winding[0][1] == doctest::Approx(up.winding[1][0]));

    const BraidRecord down = braid_word(crossing(false));
    CHECK(down.word == std::vector<int>{-1});
    CHECK(std::abs(down.winding[0][1]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(down.winding[0][1] == doctest::Approx(-up.winding[0][1]));

    CHECK(winding_of_word(up.word, 2)[0][1] == doctest::Approx(up.winding[0][1]));
    CHECK(isotopy_invariants_equal(up, down).verdict == IsotopyVerdict::distinct);
    CHECK(isotopy_invariants_equal(up, up).verdict == IsotopyVerdict::indistinguishable);
}

TEST_CASE("periodic winding counts laps") {
    // strand 1 laps strand 0 once in x1 over six slices
    TrajectoryEnsemble e;
    e.length = 1.0;
    e.positions.assign(2, {});
    for (int s = 0; s <= 6; ++s) {
        e.positions[0].push_back({0.1, 0.25});
        e.positions[1].push_back({std::fmod(0.5 + s / 6.0, 1.0), 0.75});
    }
    const BraidRecord r = braid_word(e);
    CHECK(r.periodic_winding[0][1] == 1);
    CHECK(r.periodic_winding[1][0] == -1);
}

TEST_CASE("strands meeting in the plane are rejected") {
    TrajectoryEnsemble e;
    e.length = 1.0;
    e.positions = {{{0.3, 0.5}, {0.6, 0.5}}, {{0.6, 0.5}, {0.3, 0.5}}};
    CHECK_THROWS_AS(braid_word(e), std::invalid_argument);
}

TEST_CASE("free reduction keeps permutation and winding") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 2 + rng() % 5;
        const auto w = random_word(rng, n, rng() % 12);
        const auto r = free_reduce(w);
        REQUIRE(permutation_of_word(r, n) == permutation_of_word(w, n));
        REQUIRE(winding_of_word(r, n) == winding_of_word(w, n));
        REQUIRE(writhe(r) == writhe(w));
        for (std::size_t i = 1; i < r.size(); ++i) REQUIRE(r[i] != -r[i - 1]);
        REQUIRE(free_reduce(r) == r);
    }
}

TEST_CASE("permutation of a word by hand") {
    // sigma_1 sigma_2 on three strands: 0 -> 2, 1 -> 0, 2 -> 1
    CHECK(permutation_of_word({1, 2}, 3) == std::vector<std::size_t>{2, 0, 1});
    CHECK(writhe({1, -2, 2, 1}) == 2);
    CHECK(free_reduce({1, -2, 2, -1, 3}) == std::vector<int>{3});
}

TEST_CASE("strand counts must match") {
    BraidRecord a = braid_word(crossing(true));
    BraidRecord b = a;
    b.strands = 3;
    CHECK_THROWS_AS(isotopy_invariants_equal(a, b), std::invalid_argument);
    CHECK(to_string(IsotopyVerdict::distinct) != to_string(IsotopyVerdict::indistinguishable));
}

}
