#include <cmath>
#include <stdexcept>

#include "csflow/control.hpp"
#include "doctest.h"

using namespace csflow;

namespace {

ControlOptions small() {
    ControlOptions o;
    o.grid = {16, 32, 2.0};
    return o;
}

// sqrt(L) times the L2(0,1) distance of two mean profiles by the midpoint
// rule on the solver grid, which integrates the retained cosine modes exactly.
double midpoint_distance(const StepProfile& u, const StepProfile& v, const ControlOptions& o) {
    ChannelSolver solver(o.grid);
    const auto a = solver.mean_profile(from_profile(u, o.mollify_width, o.grid));
    const auto b = solver.mean_profile(from_profile(v, o.mollify_width, o.grid));
    double s = 0.0;
    for (std::size_t m = 0; m < a.size(); ++m) s += (a[m] - b[m]) * (a[m] - b[m]);
    return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace

TEST_SUITE("control") {

TEST_CASE("schedule interpolation, jumps and cost") {
    const Grid g{8, 8, 2.0};
    ForcingSchedule s = ForcingSchedule::zero(g, 2.0);
    REQUIRE(s.times.size() >= 2);
    s.times = {0.0, 1.0, 1.0, 2.0};
    s.fields.assign(4, ForceField::zero(g));
    s.fields[1].mean_accel = 2.0;
    s.fields[2].mean_accel = -1.0;
    s.fields[3].mean_accel = -1.0;
    CHECK_NOTHROW(s.validate());
    ForceField f;
    s.at(0.5, f);
    CHECK(f.mean_accel == doctest::Approx(1.0));
    s.at(1.0, f);
    CHECK(f.mean_accel == doctest::Approx(-1.0));
    CHECK_THROWS_AS(s.at(2.5, f), std::out_of_range);
    // trapezoid of |f| = sqrt(L) |m0|: 0.5 * 2 + 1 * 1
    CHECK(s.cost() == doctest::Approx(std::sqrt(2.0) * 2.0));

    ForcingSchedule c = concatenate(s, s);
    CHECK(c.horizon == doctest::Approx(4.0));
    CHECK(c.cost() == doctest::Approx(2.0 * s.cost()));

    ForcingSchedule bad = s;
    bad.times = {0.0, 1.5, 1.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.times = {0.0, 1.0, 1.0, 1.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("baseline ramp: closed-form cost, independent of T, exact endpoint") {
    const ControlOptions o = small();
    const StepProfile u = StepProfile::uniform({1.0, -1.0});
    const StepProfile v = StepProfile::uniform({-1.0, 1.0});
    const double expect = midpoint_distance(u, v, o) * std::sqrt(o.grid.length);
    for (double T : {1.0, 10.0, 50.0}) {
        const ForcingSchedule s = baseline_ramp(u, v, T, o);
        CHECK(s.cost() == doctest::Approx(expect).epsilon(1e-9));
        const TransferReport r = verify_transfer(u, s, v, o);
        CHECK(r.endpoint_error <= 1e-10);
        CHECK(r.field_error <= 1e-10);
        CHECK(r.cost == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK_THROWS_AS(baseline_ramp(u, v, 0.0, o), std::invalid_argument);
}

TEST_CASE("mean profile distance") {
    const ControlOptions o = small();
    const StepProfile u = StepProfile::uniform({1.0, -1.0});
    const FlowState s = from_profile(u, o.mollify_width, o.grid);
    CHECK(mean_profile_distance(s, u, o.mollify_width) <= 1e-14);
    const StepProfile v = StepProfile::uniform({-1.0, 1.0});
    CHECK(mean_profile_distance(s, v, o.mollify_width) ==
          doctest::Approx(midpoint_distance(u, v, o)).epsilon(1e-9));
}

TEST_CASE("transposition: endpoint reached, cost falls with the horizon") {
    const ControlOptions o = small();
    const StepProfile p = StepProfile::uniform({1.0, -1.0});
    const StepProfile v = apply_move(p, Transpose{1});
    double previous = INFINITY;
    for (double T : {5.0, 10.0, 20.0}) {
        const ForcingSchedule s = transposition_control(p, 1, T, 0.5, o);
        const TransferReport r = verify_transfer(p, s, v, o);
        CAPTURE(T);
        CHECK(r.endpoint_error <= 0.05 * std::sqrt(2.0 * energy(v)));
        CHECK(r.cost < previous);
        previous = r.cost;
    }
}

TEST_CASE("collision control reaches the collided profile") {
    const ControlOptions o = small();
    const StepProfile p({0.0, 2.0 / 3.0, 1.0}, {0.0, 3.0});
    const StepProfile v = apply_move(p, Collide{1});
    const ForcingSchedule s = collision_control(p, 1, 20.0, 0.5, o);
    const TransferReport r = verify_transfer(p, s, v, o);
    CHECK(r.endpoint_error <= 0.05 * std::sqrt(2.0 * energy(v)));
    const Diagnostics& a = r.diagnostics.front();
    const Diagnostics& b = r.diagnostics.back();
    CHECK(b.momentum == doctest::Approx(a.momentum).epsilon(0.02));
    CHECK(b.energy == doctest::Approx(a.energy).epsilon(0.02));
}

TEST_CASE("replay is deterministic") {
    const ControlOptions o = small();
    const StepProfile p = StepProfile::uniform({1.0, -1.0});
    const ForcingSchedule s = transposition_control(p, 1, 4.0, 0.5, o);
    const TransferReport a = verify_transfer(p, s, apply_move(p, Transpose{1}), o);
    const TransferReport b = verify_transfer(p, s, apply_move(p, Transpose{1}), o);
    CHECK(a.final_state.omega_hat == b.final_state.omega_hat);
    CHECK(a.cost == b.cost);
}

TEST_CASE("argument checks") {
    const ControlOptions o = small();
    const StepProfile p = StepProfile::uniform({1.0, -1.0});
    CHECK_THROWS_AS(transposition_control(p, 0, 5.0, 0.5, o), std::invalid_argument);
    CHECK_THROWS_AS(transposition_control(p, 2, 5.0, 0.5, o), std::invalid_argument);
    CHECK_THROWS_AS(transposition_control(p, 1, 5.0, -1.0, o), std::invalid_argument);
    CHECK_THROWS_AS(transposition_control(p, 1, 0.1, 50.0, o), std::invalid_argument);
    ControlOptions other = o;
    other.grid = {16, 16, 2.0};
    const ForcingSchedule s = baseline_ramp(p, p, 1.0, o);
    CHECK_THROWS_AS(verify_transfer(p, s, p, other), std::invalid_argument);
}

TEST_CASE("optimizer never accepts a worse schedule") {
    const ControlOptions o = small();
    const StepProfile u = StepProfile::uniform({1.0, -1.0});
    const StepProfile v = StepProfile::uniform({0.5, -0.5, 0.0});
    OptimizeOptions oo;
    oo.max_evaluations = 8;
    // energy differs, so no exact parallel path: the penalty does the work
    const OptimizeResult r = optimize_schedule(u, v, 2.0, 3, 100.0, 1, o, nullptr, oo);
    CHECK(r.objective <= r.initial_objective);
    for (std::size_t i = 1; i < r.accepted.size(); ++i) CHECK(r.accepted[i] <= r.accepted[i - 1]);
    CHECK(r.weights.size() == 3);
    CHECK(r.evaluations <= oo.max_evaluations + 1);
    const OptimizeResult again = optimize_schedule(u, v, 2.0, 3, 100.0, 1, o, nullptr, oo);
    CHECK(again.objective == r.objective);
}

}
