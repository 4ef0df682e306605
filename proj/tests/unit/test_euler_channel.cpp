#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <complex>
#include <numbers>

#include "csflow/euler_channel.hpp"
#include "doctest.h"

using namespace csflow;
using std::numbers::pi;

namespace {

// Single sine mode: omega = 2 Re(c e^{i alpha_q x1}) sin(n pi x2).
FlowState cell(const Grid& g, std::size_t q, std::size_t n, cplx c, double bulk = 0.0) {
    FlowState s = FlowState::zero(g);
    s.omega_hat[(n - 1) * g.half() + q] = c;
    s.bulk = bulk;
    return s;
}

// Biweight-mollified step profile on the even extension, integrating the
// kernel exactly over each constant piece: an oracle that does not touch the
// cosine series.
double mollified_direct(const StepProfile& p, double w, double x) {
    // integral of 15/16 (1 - r^2)^2 from -1 to r
    auto G = [](double r) {
        r = std::clamp(r, -1.0, 1.0);
        return 15.0 / 16.0 * (r - 2.0 * r * r * r / 3.0 + r * r * r * r * r / 5.0) + 0.5;
    };
    auto ext = [&](double y) { return p(y < 0.0 ? -y : (y > 1.0 ? 2.0 - y : y)); };
    std::vector<double> cuts{x - w, x + w};
    for (double b : p.breakpoints())
        for (double c : {b, -b, 2.0 - b})
            if (c > x - w && c < x + w) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double y = 0.5 * (cuts[i] + cuts[i + 1]);
        // y = x - z, so z runs from x - cuts[i+1] to x - cuts[i]
        s += ext(y) * (G((x - cuts[i]) / w) - G((x - cuts[i + 1]) / w));
    }
    return s;
}

}  // namespace

TEST_SUITE("euler_channel") {

TEST_CASE("biweight transform") {
    CHECK(biweight_transform(0.0) == doctest::Approx(1.0));
    for (double z : {0.3, 1.7, 4.0, 9.5}) {
        double s = 0.0;
        const int n = 4000;
        for (int i = 0; i < n; ++i) {
            const double r = -1.0 + (i + 0.5) * 2.0 / n;
            s += 15.0 / 16.0 * (1 - r * r) * (1 - r * r) * std::cos(z * r);
        }
        CHECK(biweight_transform(z) == doctest::Approx(s * 2.0 / n).epsilon(1e-6));
    }
}

TEST_CASE("mean profile of a mollified step matches quadrature") {
    // the retained cosine tail decays like n^-4, so a fine grid is needed
    const Grid g{8, 512, 2.0};
    const StepProfile p({0.0, 0.3, 0.7, 1.0}, {1.0, -1.0, 0.5});
    const double w = 0.2;
    FlowState s = from_profile(p, w, g);
    ChannelSolver solver(g);
    const auto ubar = solver.mean_profile(s);
    double worst = 0.0;
    for (std::size_t m = 0; m < g.n2; ++m) worst = std::max(worst, std::abs(ubar[m] - mollified_direct(p, w, g.x2(m))));
    CHECK(worst <= 1e-6);
    CHECK_THROWS_AS(from_profile(p, 0.0, g), std::invalid_argument);
    CHECK_THROWS_AS(from_profile(p, 1.0 / 1024, g), std::invalid_argument);
}

TEST_CASE("parallel flow is a fixed point bit for bit") {
    const Grid g{32, 32, 2.0};
    FlowState s = from_profile(StepProfile::uniform({1.0, -1.0}), 0.25, g);
    const FlowState s0 = s;
    ChannelSolver solver(g);
    for (int i = 0; i < 50; ++i) solver.step(s, 0.01);
    CHECK(s.omega_hat == s0.omega_hat);
    CHECK(s.bulk == s0.bulk);
    CHECK(s.t == doctest::Approx(0.5));
}

TEST_CASE("energy and enstrophy of a single cell") {
    const Grid g{32, 32, 2.0};
    const cplx c{0.3, -0.4};  // |c| = 0.5
    FlowState s = cell(g, 1, 2, c);
    const double k2 = g.alpha(1) * g.alpha(1) + 4 * pi * pi;
    const double a = 2.0 * std::abs(c) / k2;
    Diagnostics d = diagnostics(s);
    CHECK(d.energy == doctest::Approx(a * a * k2 * g.length / 8.0).epsilon(1e-12));
    CHECK(d.enstrophy == doctest::Approx(std::norm(c) * g.length / 2.0).epsilon(1e-12));
    CHECK(d.momentum == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("a cell is steady and translates with the bulk velocity") {
    const Grid g{32, 32, 2.0};
    const double b = 0.7, T = 1.0, dt = 0.01;
    FlowState s = cell(g, 1, 1, {0.5, 0.0}, b);
    ChannelSolver solver(g);
    for (int i = 0; i < 100; ++i) solver.step(s, dt);
    // exact for the ODE: e^{-i alpha b T}; exact for RK4: R(z)^steps
    const cplx z{0.0, -g.alpha(1) * b * dt};
    const cplx R = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
    const cplx expect = cplx{0.5, 0.0} * std::pow(R, 100);
    CHECK(std::abs(s.omega_hat[1] - expect) <= 1e-13);
    CHECK(std::abs(expect - cplx{0.5, 0.0} * std::exp(cplx{0.0, -g.alpha(1) * b * T})) <= 1e-8);
    double rest = 0.0;
    for (std::size_t i = 0; i < s.omega_hat.size(); ++i)
        if (i != 1) rest = std::max(rest, std::abs(s.omega_hat[i]));
    CHECK(rest <= 1e-12);
}

TEST_CASE("uniform mean acceleration raises the momentum linearly") {
    const Grid g{16, 16, 2.0};
    FlowState s = FlowState::zero(g);
    ForceField f = ForceField::zero(g);
    f.mean_accel = 0.25;
    ChannelSolver solver(g);
    for (int i = 0; i < 40; ++i) solver.step(s, 0.05, f);
    CHECK(s.bulk == doctest::Approx(0.5));
    CHECK(solver.diagnostics(s).momentum == doctest::Approx(0.5 * g.length));
    CHECK(f.norm() == doctest::Approx(0.25 * std::sqrt(g.length)));
}

TEST_CASE("unforced run conserves energy, momentum and enstrophy") {
    const Grid g{32, 32, 2.0};
    FlowState s = from_profile(StepProfile::uniform({0.5, -0.5}), 0.4, g);
    s.omega_hat[(3 - 1) * g.half() + 1] += cplx{0.05, 0.02};
    s.omega_hat[(1 - 1) * g.half() + 2] += cplx{-0.03, 0.01};
    ChannelSolver solver(g);
    const Diagnostics d0 = solver.diagnostics(s);
    for (int i = 0; i < 100; ++i) solver.step(s, 0.01);
    const Diagnostics d1 = solver.diagnostics(s);
    CHECK(std::abs(d1.energy - d0.energy) <= 1e-6 * d0.energy);
    CHECK(std::abs(d1.momentum - d0.momentum) <= 1e-12);
    // int omega = L (ubar(0) - ubar(1)) is not an invariant with walls
    CHECK(std::abs(d1.enstrophy - d0.enstrophy) <= 1e-5 * d0.enstrophy);
}

TEST_CASE("CFL violation and blow-up are numerical errors") {
    const Grid g{16, 16, 2.0};
    FlowState s = from_profile(StepProfile::uniform({20.0, -20.0}), 0.4, g);
    s.omega_hat[g.half() + 1] += cplx{1.0, 0.0};
    ChannelSolver solver(g);
    CHECK_THROWS_AS(solver.step(s, 0.5), NumericalError);
}

TEST_CASE("upsampling keeps the represented field") {
    const Grid g{16, 16, 2.0};
    FlowState s = from_profile(StepProfile::uniform({1.0, 0.0, -1.0}), 0.3, g);
    s.omega_hat[2 * g.half() + 3] = cplx{0.2, 0.1};
    const FlowState f = upsample(s, 3);
    CHECK(f.grid.n1 == 48);
    const Diagnostics a = diagnostics(s), b = diagnostics(f);
    CHECK(b.energy == doctest::Approx(a.energy).epsilon(1e-12));
    CHECK(b.enstrophy == doctest::Approx(a.enstrophy).epsilon(1e-12));
    CHECK(b.momentum == doctest::Approx(a.momentum).epsilon(1e-12));
}

TEST_CASE("physical fields round trip") {
    const Grid g{16, 16, 2.0};
    FlowState s = from_profile(StepProfile::uniform({1.0, -0.5}), 0.3, g);
    s.omega_hat[g.half() + 2] = cplx{0.1, -0.2};
    s.t = 1.5;
    ChannelSolver solver(g);
    const FlowState r = solver.state_from_fields(solver.vorticity(s), solver.mean_profile(s), s.t);
    CHECK(r.bulk == doctest::Approx(s.bulk).scale(1.0));
    double diff = 0.0;
    for (std::size_t i = 0; i < s.omega_hat.size(); ++i) diff = std::max(diff, std::abs(r.omega_hat[i] - s.omega_hat[i]));
    CHECK(diff <= 1e-12);
    CHECK(r.t == 1.5);
}

TEST_CASE("velocity is divergence free and tangent at the walls") {
    const Grid g{32, 32, 2.0};
    FlowState s = cell(g, 2, 3, {0.4, 0.1});
    ChannelSolver solver(g);
    std::vector<double> u1, u2;
    solver.velocity(s, u1, u2);
    // u2 of a sine-mode stream function is sin(n pi x2) in x2: small at the
    // first and last midpoints, exactly zero at the walls themselves.
    double edge = 0.0, inner = 0.0;
    for (std::size_t i = 0; i < g.n1; ++i) {
        edge = std::max({edge, std::abs(u2[i]), std::abs(u2[(g.n2 - 1) * g.n1 + i])});
        inner = std::max(inner, std::abs(u2[(g.n2 / 2 + 2) * g.n1 + i]));
    }
    CHECK(edge < 0.5 * inner);
}

}
