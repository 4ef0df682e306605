#pragma once

#include <cstdint>
#include <vector>

#include "csflow/euler_channel.hpp"
#include "csflow/profile.hpp"

namespace csflow {

/// Grid and time stepping shared by schedule construction and replay.
///
/// The mollifier width is wide on purpose: sharper two-layer profiles are
/// Kelvin-Helmholtz unstable, and an open-loop schedule replayed over a long
/// horizon amplifies round-off through any unstable mode.
struct ControlOptions {
    Grid grid{32, 32, 2.0};
    double mollify_width = 0.5;
    /// Upper bound on the replay step. Replay uses T / ceil(T / dt) with dt
    /// reduced below solver_dt when the initial flow would exceed CFL 0.4.
    double solver_dt = 0.0125;
    double sample_dt = 0.1;     ///< spacing of stored schedule samples (upper bound; at least 32 intervals)
    std::size_t diagnostics_every = 40;  ///< solver steps between recorded diagnostics
};

/// Time samples of an admissible force, piecewise linear in between.
///
/// Sample times are non-decreasing. A repeated time marks a jump: at(t)
/// returns the later sample. Every field is a ForceField (curl plus uniform
/// mean acceleration), so divergence-free and wall-tangent by construction.
struct ForcingSchedule {
    double horizon = 0.0;
    std::vector<double> times;
    std::vector<ForceField> fields;

    static ForcingSchedule zero(const Grid& grid, double horizon);

    /// int_0^T ||f||_{L2} dt by the trapezoid rule over the samples.
    double cost() const;
    /// Linear interpolation; throws std::out_of_range outside [0, horizon].
    void at(double t, ForceField& out) const;
    const Grid& grid() const { return fields.front().grid; }

    /// Throws std::invalid_argument unless times start at 0, end at horizon,
    /// never decrease, and all fields share one grid.
    void validate() const;
};

/// Schedule s1 followed by s2 shifted by s1's horizon. Both samples at the
/// join are kept, so cost(concatenate) = cost(s1) + cost(s2).
ForcingSchedule concatenate(const ForcingSchedule& s1, const ForcingSchedule& s2);

struct TransferReport {
    double horizon = 0.0;
    /// L2(0, 1) distance of the final mean profile to the mollified target.
    double endpoint_error = 0.0;
    /// Full-field distance ||u(T) - V||_{L2(channel)} / sqrt(L); includes the
    /// non-parallel remainder that the mean-profile error ignores.
    double field_error = 0.0;
    double cost = 0.0;
    std::size_t steps = 0;
    std::vector<Diagnostics> diagnostics;
    /// Accumulated cost at each diagnostics entry.
    std::vector<double> cost_accum;
    FlowState final_state;
};

/// f = ((V - U)/T, 0) with both profiles mollified. Constant in time, so two
/// samples. The straight line of parallel flows solves the forced equation
/// exactly; the cost ||V - U||_{L2(channel)} does not depend on T.
/// Throws std::invalid_argument for T <= 0.
ForcingSchedule baseline_ramp(const StepProfile& u, const StepProfile& v, double horizon,
                              const ControlOptions& opt = {});

/// Prescribed path from u to target: the mean profile blends the two
/// mollified profiles with the smoothstep 3s^2 - 2s^3 (s = t/T), and a cell
/// of stream function
///     psi = amplitude (h^2/T) sin(pi s) sin(alpha_1 (x1 - c t)) sin^4(pi (x2 - a)/h)
/// recirculates fluid over the band [a, a + h] while drifting at speed c.
/// The schedule is the residual d_t omega + u . grad omega of that path,
/// formed with the solver's own dealiased operator, plus d_t of the bulk.
ForcingSchedule kinematic_transfer(const StepProfile& u, const StepProfile& target, double horizon,
                                   double band_lo, double band_hi, double drift, double amplitude,
                                   const ControlOptions& opt = {});

/// Exchange of layers k and k+1 (1-based) along a kinematic path; the
/// endpoint is apply_move(p, Transpose{k}). The cell spans both layers and
/// drifts at their mean velocity, so its velocity scale is amplitude * h / T.
/// Throws std::invalid_argument for bad k, amplitude <= 0, T <= 0, a band
/// narrower than 4 grid cells, or a path that would exceed the solver CFL
/// limit at opt.solver_dt ("amplitude too large for the grid").
ForcingSchedule transposition_control(const StepProfile& p, std::size_t k, double horizon,
                                      double amplitude, const ControlOptions& opt = {});

/// As transposition_control, with endpoint apply_move(p, Collide{k}).
ForcingSchedule collision_control(const StepProfile& p, std::size_t k, double horizon,
                                  double amplitude, const ControlOptions& opt = {});

/// Replays the schedule from from_profile(u) and compares with from_profile(v).
/// Deterministic: same inputs, same report bit for bit.
/// Throws std::invalid_argument if the schedule grid differs from opt.grid,
/// and propagates NumericalError from the solver.
TransferReport verify_transfer(const StepProfile& u, const ForcingSchedule& schedule,
                               const StepProfile& v, const ControlOptions& opt = {});

struct OptimizeResult {
    ForcingSchedule schedule;
    double objective = 0.0;           ///< cost + penalty * endpoint_error^2
    double initial_objective = 0.0;
    std::vector<double> accepted;     ///< objective after each accepted move, non-increasing
    std::vector<double> weights;      ///< final multipliers 1 + theta_j
    std::size_t evaluations = 0;
};

struct OptimizeOptions {
    std::size_t max_evaluations = 40;
    double initial_step = 0.25;
    double min_step = 1e-3;
};

/// Direct shooting on f_theta(t) = sum_j (1 + theta_j) h_j(t) f0(t), h_j the
/// hat functions on basis_size equal time cells (a partition of unity), f0
/// the initial schedule (the smoothstep kinematic path without a cell when
/// none is given). Coordinate descent with steps +-delta, halving delta
/// after an unproductive sweep. The two trial points of a coordinate are
/// evaluated concurrently; acceptance is by lower objective, ties to +delta.
/// Solver failures make a candidate infeasible. seed shuffles the sweep order.
OptimizeResult optimize_schedule(const StepProfile& u, const StepProfile& v, double horizon,
                                 std::size_t basis_size, double penalty, std::uint64_t seed,
                                 const ControlOptions& opt = {},
                                 const ForcingSchedule* initial = nullptr,
                                 const OptimizeOptions& oo = {});

/// L2(0, 1) distance between the mean profile of a state and
/// from_profile(p) on the same grid, exact from the cosine coefficients.
double mean_profile_distance(const FlowState& s, const StepProfile& p, double mollify_width);

}  // namespace csflow
