#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "csflow/profile.hpp"

namespace csflow {

/// Thrown when source and target do not share momentum and energy.
class PlanPreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Plan {
    std::vector<Move> moves;
    std::vector<StepProfile> snapshots;  ///< profile after each move (empty unless requested)
    double achieved_error = 0.0;
    bool converged = false;
};

struct PlanOptions {
    double eps = 1e-3;
    /// Move cap; 0 selects 10 K² with K the segment count of the common
    /// refinement of source and target.
    std::size_t budget = 0;
    std::uint64_t seed = 0;
    bool record_snapshots = false;
    /// Tolerance of the momentum / energy precondition.
    double invariant_tol = 1e-8;
};

/// Connects source to target (equal momentum and energy) by Refine, Transpose
/// and Collide moves.
///
/// Exchange phase: pieces of the source that already carry a target value are
/// claimed first. Each remaining target value v is then produced by cutting a
/// piece a and a partner b so that colliding masses x and r x sends a to v,
/// with r = (u_a - v) / (u_a + v - 2 u_b); the target whose best collision
/// covers the largest share of its unmet length goes next. When no single
/// collision reaches any open value, a piece at one end of the pool is
/// reflected across the other end to widen the value range. The finished
/// pieces are finally put in target order by adjacent transpositions. Several
/// seeded attempts with randomized tie-breaking run from the source and the
/// closest one is kept.
///
/// If the best attempt misses eps, a greedy phase follows: at every step it
/// applies the Collide or Transpose, optionally preceded by a Refine with
/// λ ∈ {1/8, …, 7/8}, that most reduces the squared L² error, with a seeded
/// random Transpose on plateaus. Every move conserves momentum and energy, so
/// both phases stay on the constraint set.
///
/// Throws PlanPreconditionError when the invariants differ by more than
/// options.invariant_tol, std::invalid_argument for eps <= 0.
Plan plan(const StepProfile& source, const StepProfile& target, const PlanOptions& options = {});

struct ReachableInstance {
    StepProfile target;
    Plan generating_plan;
};

/// Applies n_moves random valid moves to source; deterministic in seed.
ReachableInstance random_reachable_target(const StepProfile& source, std::size_t n_moves,
                                          std::uint64_t seed);

/// Random profile with K segments, random breakpoints and values in [-2, 2].
StepProfile random_profile(std::size_t segments, std::uint64_t seed);

/// Replays moves from source and returns the L² distance of the result to target.
double replay_error(const StepProfile& source, const std::vector<Move>& moves,
                    const StepProfile& target);

}  // namespace csflow
