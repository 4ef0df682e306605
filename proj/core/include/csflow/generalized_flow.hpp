#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace csflow {

using Point = std::array<double, 2>;  ///< (x1, x2), x1 periodic with period L

/// Finite sample of a generalized flow: N trajectories with equal weight
/// 1/N, each given at slices + 1 equally spaced times on [0, T].
struct TrajectoryEnsemble {
    double length = 1.0;  ///< period L in x1
    /// positions[i][s]: particle i at slice s
    std::vector<std::vector<Point>> positions;

    std::size_t particles() const { return positions.size(); }
    /// Number of time intervals S (slices stored: S + 1).
    std::size_t intervals() const { return positions.empty() ? 0 : positions.front().size() - 1; }

    /// Throws std::invalid_argument on ragged data, fewer than 2 slices,
    /// non-finite values or points outside [0, L) x [0, 1].
    void validate() const;
};

/// x1 difference b - a taken the short way around the period.
double periodic_delta(double a, double b, double length);

/// (1/N) sum_i sum_s |x_i(s+1) - x_i(s)|^2 / (2 dt), dt = T / S.
double action(const TrajectoryEnsemble& e, double horizon);

/// sum_s dt * sqrt((1/N) sum_i |dx_i|^2 / dt^2). Satisfies
/// path_length^2 <= 2 T action by Cauchy-Schwarz.
double path_length(const TrajectoryEnsemble& e, double horizon);

/// n1 x n2 uniform cells over [0, L) x [0, 1]; cell c = m * n1 + i has
/// centre ((i + 1/2) L / n1, (m + 1/2) / n2).
struct CellGrid {
    std::size_t n1 = 2;
    std::size_t n2 = 1;
    double length = 1.0;

    std::size_t size() const { return n1 * n2; }
    Point center(std::size_t c) const;
    /// Squared distance between cell centres, x1 the short way.
    double distance2(std::size_t a, std::size_t b) const;
    void validate() const;
};

struct IncompressibilityReport {
    bool ok = true;
    /// Slice of the first failure, or of the largest deviation when ok.
    std::size_t worst_slice = 0;
    /// Largest distance from a position to its nearest cell centre.
    double worst_deviation = 0.0;
    std::size_t failed_slices = 0;
};

/// Each slice must place exactly one particle within `tolerance` of every
/// cell centre.
IncompressibilityReport incompressibility_check(const TrajectoryEnsemble& e, const CellGrid& grid,
                                                double tolerance = 1e-9);

/// Particle on every cell centre moving with velocity (U(x2), 0):
/// the discrete shadow of the parallel flow of profile values over n2 rows.
/// values[m] is the speed of row m. Throws if a step would move more than
/// half a period (the short-way difference would then be wrong).
TrajectoryEnsemble parallel_flow_ensemble(const CellGrid& grid, const std::vector<double>& values,
                                          double horizon, std::size_t intervals);

struct DiscreteFlowProblem {
    CellGrid grid;
    std::vector<std::size_t> endpoint;  ///< g: particle starting in cell c ends in endpoint[c]
    std::size_t interior_slices = 1;
    double horizon = 1.0;
    /// When present, exact search only accepts ensembles whose braid
    /// invariants match this one's. Candidates whose strands meet in the
    /// plane have no braid and are rejected.
    std::optional<TrajectoryEnsemble> reference;

    /// Throws std::invalid_argument if g is not a bijection on the cells.
    void validate() const;
};

enum class SearchMode { exact, heuristic };

struct MinimizeResult {
    TrajectoryEnsemble ensemble;
    /// assignment[s][i]: cell of particle i at slice s (s = 0..S+1)
    std::vector<std::vector<std::size_t>> assignment;
    double action = 0.0;
    /// false when the heuristic hit its sweep budget before a fixed point,
    /// or when the braid filter rejected every candidate.
    bool converged = true;
    std::size_t nodes = 0;  ///< search nodes (exact) or matchings solved (heuristic)
};

struct MinimizeOptions {
    SearchMode mode = SearchMode::exact;
    std::size_t max_sweeps = 200;
    std::size_t random_starts = 16;  ///< heuristic: extra starts with shuffled interior slices
    std::uint64_t seed = 0;          ///< heuristic: seed of those shuffles
    std::size_t exact_max_cells = 8;
    std::size_t exact_max_slices = 4;
};

/// Least action over per-slice permutations of the cells with slice 0 the
/// identity and the last slice g.
///
/// exact: depth-first branch and bound, slice by slice and particle by
/// particle, bounded below by each particle's unconstrained shortest
/// remaining path (dynamic programming over the cells). Returns the global
/// minimum; among equal minima the lexicographically first assignment.
///
/// heuristic: coordinate descent where each interior slice is re-solved as a
/// min-cost perfect matching against its two neighbours. Starts: every
/// switch from the identity to g at one slice, the straight lines c -> g(c)
/// matched slice by slice to the nearest cells, and random_starts seeded
/// shuffles. The best fixed point wins.
///
/// Throws std::invalid_argument when exact limits are exceeded.
MinimizeResult minimize_action(const DiscreteFlowProblem& p, const MinimizeOptions& opt = {});

/// Min-cost perfect matching on a square cost matrix (Hungarian algorithm).
/// Returns row -> column.
std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace csflow
