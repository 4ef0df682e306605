#pragma once

#include <cstdint>
#include <span>

#include "csflow/euler_channel.hpp"

namespace csflow {

/// Smooth test function on space-time
///     chi(t, x) = A tau(t) beta(x2) cos(alpha_q x1 + phase)
/// where tau is the bump exp(-1 / (1 - s^2)), |s| < 1, centred at t_center.
/// beta is the same bump centred at x2_center when x2_mode = 0, otherwise
/// sin(n pi x2) with n = x2_mode.
///
/// Used as a stream function, v = (d2 chi, -d1 chi): divergence-free, and
/// either vanishing near the walls (bump) or tangent to them (sine mode,
/// where the boundary terms of the weak form still vanish because u . n = 0).
/// A sine-mode field with small q and n lies in the solver's retained modes,
/// so the truncated dynamics satisfy the weak identity exactly against it
/// and only time discretization error remains. Also used as a scalar test
/// function phi = A tau(t) beta(x2) cos(alpha_q x1 + phase), where the sine
/// mode takes beta = cos(n pi x2) (phi needs no wall condition).
struct BumpTest {
    double amplitude = 1.0;
    std::size_t q = 1;
    double phase = 0.0;
    double t_center = 0.5;
    double t_half_width = 0.4;
    double x2_center = 0.5;
    double x2_half_width = 0.3;
    std::size_t x2_mode = 0;

    /// Random admissible test function with support inside
    /// (t0, t1) x channel interior; deterministic in seed.
    static BumpTest random(double t0, double t1, std::size_t max_q, std::uint64_t seed);
    /// Random sine-mode test function, q <= max_q, 1 <= n <= max_n, time
    /// support inside (t0, t1); deterministic in seed.
    static BumpTest random_modal(double t0, double t1, std::size_t max_q, std::size_t max_n,
                                 std::uint64_t seed);
};

struct WeakResidual {
    /// int_Q (u, d_t v) + (u (x) u, grad v)
    double momentum = 0.0;
    /// int_Q (u, grad phi)
    double incompressibility = 0.0;
};

/// Space-time integrals of the weak Euler identities over equally spaced
/// snapshots: trapezoid rule in time, midpoint rule in space on the state
/// spectrally interpolated to a grid `refinement` times finer (the fields are
/// band-limited, so only the test function needs the extra points).
///
/// Throws std::invalid_argument when fewer than 3 snapshots are given, the
/// spacing is not uniform, the grids differ, or either test function's
/// support reaches the walls or the first or last snapshot time.
WeakResidual weak_residual(std::span<const FlowState> snapshots, const BumpTest& stream,
                           const BumpTest& scalar, std::size_t refinement = 4);

/// int_Q (f, v) with v from the stream test function, for forces sampled at
/// the same times as the snapshots. A forced trajectory satisfies
/// weak_residual(...).momentum = -force_pairing(...).
double force_pairing(std::span<const ForceField> forces, std::span<const double> times,
                     const BumpTest& stream, std::size_t refinement = 4);

}  // namespace csflow
