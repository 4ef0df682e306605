#include "csflow/weak_residual.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace csflow {

namespace {

// exp(-1/(1-s^2)) and its first two derivatives in the original variable.
struct Bump {
    double f = 0.0, d1 = 0.0, d2 = 0.0;
};

Bump bump(double x, double center, double half_width) {
    const double s = (x - center) / half_width;
    if (std::abs(s) >= 1.0) return {};
    const double w = 1.0 - s * s;
    const double f = std::exp(-1.0 / w);
    const double g1 = -2.0 * s / (w * w);
    const double g2 = -2.0 / (w * w) - 8.0 * s * s / (w * w * w);
    return {f, f * g1 / half_width, f * (g1 * g1 + g2) / (half_width * half_width)};
}

Bump profile(double x2, const BumpTest& b) {
    if (b.x2_mode == 0) return bump(x2, b.x2_center, b.x2_half_width);
    const double k = std::numbers::pi * static_cast<double>(b.x2_mode);
    const double s = std::sin(k * x2);
    return {s, k * std::cos(k * x2), -k * k * s};
}

// Scalar test functions take cos(n pi x2) in sine mode: u . grad phi is then
// a cosine series in x2, which the midpoint rule integrates exactly.
Bump scalar_profile(double x2, const BumpTest& b) {
    if (b.x2_mode == 0) return bump(x2, b.x2_center, b.x2_half_width);
    const double k = std::numbers::pi * static_cast<double>(b.x2_mode);
    const double c = std::cos(k * x2);
    return {c, -k * std::sin(k * x2), -k * k * c};
}

void check_support(const BumpTest& b, double t0, double t1) {
    if (!(b.t_half_width > 0.0))
        throw std::invalid_argument("test function: half widths must be positive");
    if (b.x2_mode == 0) {
        if (!(b.x2_half_width > 0.0))
            throw std::invalid_argument("test function: half widths must be positive");
        if (b.x2_center - b.x2_half_width <= 0.0 || b.x2_center + b.x2_half_width >= 1.0)
            throw std::invalid_argument("test function support touches the walls");
    }
    if (b.t_center - b.t_half_width <= t0 || b.t_center + b.t_half_width >= t1)
        throw std::invalid_argument("test function support touches the time boundary");
}

double uniform_spacing(std::span<const double> times) {
    if (times.size() < 3) throw std::invalid_argument("weak residual: need at least 3 snapshots");
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) throw std::invalid_argument("weak residual: times must increase");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (std::abs(times[k] - times[k - 1] - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
            throw std::invalid_argument("weak residual: snapshots must be equally spaced");
    return dt;
}

double trapezoid_weight(std::size_t k, std::size_t n, double dt) {
    return (k == 0 || k + 1 == n) ? 0.5 * dt : dt;
}

ForceField refine(const ForceField& f, std::size_t factor) {
    FlowState s{f.grid, 0.0, f.curl_hat, f.mean_accel};
    FlowState up = upsample(s, factor);
    return ForceField{up.grid, std::move(up.omega_hat), f.mean_accel};
}

}  // namespace

BumpTest BumpTest::random(double t0, double t1, std::size_t max_q, std::uint64_t seed) {
    if (!(t1 > t0)) throw std::invalid_argument("BumpTest::random: empty time interval");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    BumpTest b;
    b.amplitude = 0.5 + u(rng);
    b.q = std::uniform_int_distribution<std::size_t>(0, std::max<std::size_t>(max_q, 1))(rng);
    b.phase = 2.0 * std::acos(-1.0) * u(rng);
    const double span = t1 - t0;
    b.t_half_width = span * (0.25 + 0.2 * u(rng));
    b.t_center = t0 + span * 0.5 + (span * 0.5 - b.t_half_width) * (2.0 * u(rng) - 1.0) * 0.9;
    b.x2_half_width = 0.15 + 0.25 * u(rng);
    const double room = 0.5 - b.x2_half_width;
    b.x2_center = 0.5 + room * (2.0 * u(rng) - 1.0) * 0.9;
    return b;
}

BumpTest BumpTest::random_modal(double t0, double t1, std::size_t max_q, std::size_t max_n,
                                std::uint64_t seed) {
    BumpTest b = random(t0, t1, max_q, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    b.x2_mode = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(max_n, 1))(rng);
    return b;
}

WeakResidual weak_residual(std::span<const FlowState> snapshots, const BumpTest& stream,
                           const BumpTest& scalar, std::size_t refinement) {
    if (snapshots.size() < 3) throw std::invalid_argument("weak residual: need at least 3 snapshots");
    std::vector<double> times;
    for (const auto& s : snapshots) {
        if (!(s.grid == snapshots.front().grid))
            throw std::invalid_argument("weak residual: snapshots on different grids");
        times.push_back(s.t);
    }
    const double dt = uniform_spacing(times);
    check_support(stream, times.front(), times.back());
    check_support(scalar, times.front(), times.back());

    if (refinement == 0) throw std::invalid_argument("weak residual: refinement must be >= 1");
    const Grid& coarse = snapshots.front().grid;
    const Grid g{coarse.n1 * refinement, coarse.n2 * refinement, coarse.length};
    ChannelSolver solver(g);
    const double cell = g.dx1() * g.dx2();
    const double av = g.alpha(stream.q);
    const double ap = g.alpha(scalar.q);

    // spatial profiles are time independent
    std::vector<Bump> bv(g.n2), bp(g.n2);
    for (std::size_t m = 0; m < g.n2; ++m) {
        bv[m] = profile(g.x2(m), stream);
        bp[m] = scalar_profile(g.x2(m), scalar);
    }

    WeakResidual r;
    std::vector<double> u1, u2;
    for (std::size_t k = 0; k < snapshots.size(); ++k) {
        const double t = times[k];
        const Bump tv = bump(t, stream.t_center, stream.t_half_width);
        const Bump tp = bump(t, scalar.t_center, scalar.t_half_width);
        if (tv.f == 0.0 && tv.d1 == 0.0 && tp.f == 0.0) continue;
        solver.velocity(upsample(snapshots[k], refinement), u1, u2);

        double mom = 0.0, inc = 0.0;
        for (std::size_t m = 0; m < g.n2; ++m) {
            const Bump& b = bv[m];
            const Bump& c = bp[m];
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x1 = g.x1(i);
                const double cv = std::cos(av * x1 + stream.phase);
                const double sv = std::sin(av * x1 + stream.phase);
                const double a = u1[m * g.n1 + i];
                const double bb = u2[m * g.n1 + i];
                // v = A tau (beta' C, alpha beta S)
                const double v1t = tv.d1 * b.d1 * cv;
                const double v2t = tv.d1 * av * b.f * sv;
                const double d1v1 = -tv.f * b.d1 * av * sv;
                const double d2v1 = tv.f * b.d2 * cv;
                const double d1v2 = tv.f * av * av * b.f * cv;
                const double d2v2 = tv.f * av * b.d1 * sv;
                mom += a * v1t + bb * v2t + a * a * d1v1 + a * bb * (d2v1 + d1v2) + bb * bb * d2v2;

                const double cp = std::cos(ap * x1 + scalar.phase);
                const double sp = std::sin(ap * x1 + scalar.phase);
                inc += tp.f * (-a * ap * c.f * sp + bb * c.d1 * cp);
            }
        }
        const double w = trapezoid_weight(k, snapshots.size(), dt) * cell;
        r.momentum += w * stream.amplitude * mom;
        r.incompressibility += w * scalar.amplitude * inc;
    }
    return r;
}

double force_pairing(std::span<const ForceField> forces, std::span<const double> times,
                     const BumpTest& stream, std::size_t refinement) {
    if (forces.size() != times.size())
        throw std::invalid_argument("force_pairing: one time per force sample");
    if (refinement == 0) throw std::invalid_argument("force_pairing: refinement must be >= 1");
    const double dt = uniform_spacing(times);
    check_support(stream, times.front(), times.back());
    const Grid& coarse = forces.front().grid;
    const Grid g{coarse.n1 * refinement, coarse.n2 * refinement, coarse.length};
    ChannelSolver solver(g);
    const double av = g.alpha(stream.q);
    std::vector<double> f1, f2;
    double total = 0.0;
    for (std::size_t k = 0; k < forces.size(); ++k) {
        const Bump tv = bump(times[k], stream.t_center, stream.t_half_width);
        if (tv.f == 0.0) continue;
        solver.force_components(refine(forces[k], refinement), f1, f2);
        double s = 0.0;
        for (std::size_t m = 0; m < g.n2; ++m) {
            const Bump b = profile(g.x2(m), stream);
            for (std::size_t i = 0; i < g.n1; ++i) {
                const double x1 = g.x1(i);
                s += f1[m * g.n1 + i] * b.d1 * std::cos(av * x1 + stream.phase) +
                     f2[m * g.n1 + i] * av * b.f * std::sin(av * x1 + stream.phase);
            }
        }
        total += trapezoid_weight(k, forces.size(), dt) * g.dx1() * g.dx2() * stream.amplitude * tv.f * s;
    }
    return total;
}

}  // namespace csflow
