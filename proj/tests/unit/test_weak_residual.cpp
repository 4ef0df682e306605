#include <cmath>
#include <stdexcept>

#include "csflow/euler_channel.hpp"
#include "csflow/weak_residual.hpp"
#include "doctest.h"

using namespace csflow;

namespace {

FlowState cell(const Grid& g, std::size_t q, std::size_t n, cplx c) {
    FlowState s = FlowState::zero(g);
    s.omega_hat[(n - 1) * g.half() + q] = c;
    return s;
}

std::vector<FlowState> run(FlowState s, const ForceField& f, double T, std::size_t steps) {
    ChannelSolver solver(s.grid);
    std::vector<FlowState> out{s};
    for (std::size_t i = 0; i < steps; ++i) {
        solver.step(s, T / steps, f);
        out.push_back(s);
    }
    return out;
}

BumpTest modal(std::size_t q, std::size_t n, double phase) {
    BumpTest b;
    b.q = q;
    b.x2_mode = n;
    b.phase = phase;
    b.t_center = 0.5;
    b.t_half_width = 0.45;
    return b;
}

}  // namespace

TEST_SUITE("weak_residual") {

TEST_CASE("a steady cell leaves no residual") {
    const Grid g{16, 16, 2.0};
    const auto snaps = run(cell(g, 1, 1, {0.5, 0.2}), ForceField::zero(g), 1.0, 40);
    for (std::size_t n : {1, 2}) {
        const WeakResidual r = weak_residual(snaps, modal(1, n, 0.3), modal(1, n, 0.0));
        CHECK(std::abs(r.momentum) <= 1e-10);
        CHECK(std::abs(r.incompressibility) <= 1e-12);
    }
    BumpTest bump;  // wall-supported bump in x2
    bump.t_half_width = 0.45;
    const WeakResidual r = weak_residual(snaps, bump, bump);
    CHECK(std::abs(r.momentum) <= 1e-8);
}

TEST_CASE("growing cell: residual balances the force pairing") {
    // curl f equal to the cell itself gives omega(t) = (1 + t) cell exactly,
    // since the advection of a Laplacian eigenfunction vanishes.
    const Grid g{16, 16, 2.0};
    const cplx c{0.4, -0.1};
    FlowState s0 = cell(g, 1, 2, c);
    ForceField f = ForceField::zero(g);
    f.curl_hat = s0.omega_hat;
    const auto snaps = run(s0, f, 1.0, 400);
    std::vector<ForceField> forces(snaps.size(), f);
    std::vector<double> times;
    for (const auto& s : snaps) times.push_back(s.t);
    CHECK(std::abs(snaps.back().omega_hat[g.half() + 1] - 2.0 * c) <= 1e-12);

    const BumpTest v = modal(1, 2, 0.7);
    const double pairing = force_pairing(forces, times, v);
    CHECK(std::abs(pairing) > 1e-3);
    const WeakResidual r = weak_residual(snaps, v, v);
    CHECK(r.momentum == doctest::Approx(-pairing).epsilon(1e-8));
}

TEST_CASE("unforced residual shrinks as the step is refined") {
    const Grid g{16, 16, 2.0};
    FlowState s0 = from_profile(StepProfile::uniform({0.5, -0.5}), 0.4, g);
    s0.omega_hat[g.half() + 1] = {0.4, 0.1};
    s0.omega_hat[2 * g.half() + 2] = {-0.3, 0.2};
    const BumpTest v = BumpTest::random_modal(0.0, 1.0, 2, 3, 17);
    const BumpTest phi = BumpTest::random_modal(0.0, 1.0, 2, 3, 18);
    const double coarse = std::abs(weak_residual(run(s0, ForceField::zero(g), 1.0, 25), v, phi).momentum);
    const double fine = std::abs(weak_residual(run(s0, ForceField::zero(g), 1.0, 50), v, phi).momentum);
    CAPTURE(coarse);
    CAPTURE(fine);
    CHECK(fine * 3.5 <= coarse);
}

TEST_CASE("admissibility is enforced") {
    const Grid g{16, 16, 2.0};
    const auto snaps = run(cell(g, 1, 1, {0.5, 0.0}), ForceField::zero(g), 1.0, 10);
    BumpTest late;
    late.t_center = 0.9;
    late.t_half_width = 0.3;
    CHECK_THROWS_AS(weak_residual(snaps, late, modal(1, 1, 0.0)), std::invalid_argument);
    BumpTest wall;
    wall.x2_center = 0.1;
    wall.x2_half_width = 0.2;
    CHECK_THROWS_AS(weak_residual(snaps, wall, modal(1, 1, 0.0)), std::invalid_argument);
    std::vector<FlowState> two(snaps.begin(), snaps.begin() + 2);
    CHECK_THROWS_AS(weak_residual(two, modal(1, 1, 0.0), modal(1, 1, 0.0)), std::invalid_argument);
}

TEST_CASE("random test functions are deterministic and admissible") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const BumpTest a = BumpTest::random_modal(0.0, 2.0, 3, 4, seed);
        const BumpTest b = BumpTest::random_modal(0.0, 2.0, 3, 4, seed);
        CHECK(a.q == b.q);
        CHECK(a.phase == b.phase);
        CHECK(a.x2_mode >= 1);
        CHECK(a.x2_mode <= 4);
        CHECK(a.q <= 3);
        CHECK(a.t_center - a.t_half_width > 0.0);
        CHECK(a.t_center + a.t_half_width < 2.0);
    }
}

}
