#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "csflow/generalized_flow.hpp"

namespace csflow {

/// Braid of an ensemble read off its x1 projection.
///
/// x1 is lifted to the universal cover (each strand unwrapped along its
/// short-way steps), strands are ordered by lifted x1, and every exchange of
/// two neighbours at positions p, p+1 (1-based) emits +-p. The letter is +p
/// when the strand arriving from the left passes at smaller x2, which is
/// exactly when the pair's relative vector turns counterclockwise by about
/// half a turn.
struct BraidRecord {
    std::size_t strands = 0;
    std::vector<int> word;  ///< sign * generator index
    /// permutation[p] = final position (0-based) of the strand that started
    /// at position p.
    std::vector<std::size_t> permutation;
    /// Accumulated turning of x_j - x_i in full turns (lifted x1); symmetric.
    std::vector<std::vector<double>> winding;
    /// Net number of periods strand j gains on strand i; antisymmetric.
    std::vector<std::vector<long>> periodic_winding;
};

/// Throws std::invalid_argument when two strands meet in the plane
/// (a crossing at equal x2, or a coincidence that tie-breaking cannot
/// resolve). Ties in x1 at slice times are broken by adding i * 1e-9 * L to
/// the lifted x1 of particle i.
BraidRecord braid_word(const TrajectoryEnsemble& e);

/// Cancels adjacent g g^{-1} pairs until none remain.
std::vector<int> free_reduce(const std::vector<int>& word);

/// Position permutation produced by a word on n strands.
std::vector<std::size_t> permutation_of_word(const std::vector<int>& word, std::size_t strands);

/// Sum of letter signs.
long writhe(const std::vector<int>& word);

/// Half-turn count per strand pair implied by the word: each letter adds
/// sign / 2 to the pair it exchanges. Labels are starting positions.
std::vector<std::vector<double>> winding_of_word(const std::vector<int>& word, std::size_t strands);

enum class IsotopyVerdict { distinct, indistinguishable };

struct IsotopyComparison {
    IsotopyVerdict verdict = IsotopyVerdict::indistinguishable;
    bool permutation_differs = false;
    bool writhe_differs = false;
    bool winding_differs = false;
    bool periodic_winding_differs = false;
    /// Informational only: different reduced words do not prove distinctness.
    bool reduced_words_equal = true;
};

/// Compares necessary isotopy invariants: endpoint permutation, writhe,
/// winding (per pair, the difference rounded to whole turns) and periodic
/// winding. "distinct" means some invariant differs; "indistinguishable"
/// is not a proof of isotopy. Throws std::invalid_argument when the strand
/// counts differ.
IsotopyComparison isotopy_invariants_equal(const BraidRecord& a, const BraidRecord& b);

std::string to_string(IsotopyVerdict v);

}  // namespace csflow
