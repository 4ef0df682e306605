#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace csflow {

/// Piecewise-constant velocity profile U(x2) on the channel height [0, 1].
///
/// Value k (0-based here) holds on (breakpoints[k], breakpoints[k+1]).
/// Instances are immutable; every operation returns a new profile.
class StepProfile {
public:
    /// Validates and takes ownership. Throws std::invalid_argument if the
    /// breakpoints are not strictly increasing from exactly 0 to exactly 1,
    /// if any value is non-finite, or if the counts disagree.
    StepProfile(std::vector<double> breakpoints, std::vector<double> values);

    /// K segments of equal length.
    static StepProfile uniform(std::vector<double> values);
    static StepProfile constant(double value);

    std::size_t segment_count() const { return values_.size(); }
    std::span<const double> breakpoints() const { return breakpoints_; }
    std::span<const double> values() const { return values_; }

    /// Segment lengths, the masses of the collision law. 0-based index.
    double length(std::size_t k) const { return breakpoints_[k + 1] - breakpoints_[k]; }
    double value(std::size_t k) const { return values_[k]; }

    /// Point evaluation; at a breakpoint the right segment wins.
    double operator()(double x2) const;

    bool operator==(const StepProfile&) const = default;

private:
    std::vector<double> breakpoints_;
    std::vector<double> values_;
};

struct Refine {
    std::size_t k;   ///< 1-based segment index
    double lambda;   ///< split ratio, strictly inside (0, 1)
    bool operator==(const Refine&) const = default;
};

struct Transpose {
    std::size_t k;   ///< acts on segments k and k+1 (1-based)
    bool operator==(const Transpose&) const = default;
};

struct Collide {
    std::size_t k;   ///< acts on segments k and k+1 (1-based)
    bool operator==(const Collide&) const = default;
};

using Move = std::variant<Refine, Transpose, Collide>;

std::string to_string(const Move& m);

/// Tabulated (continuous) profile: piecewise-linear through (x, U) nodes,
/// x strictly increasing from 0 to 1.
struct TabulatedProfile {
    std::vector<double> x;
    std::vector<double> u;

    void validate() const;
    double operator()(double x2) const;
};

/// ∫₀¹ U dx2, exact for the step integrand.
double momentum(const StepProfile& p);

/// ∫₀¹ ½U² dx2.
double energy(const StepProfile& p);

/// ‖p − q‖ in L²(0, 1) on the common refinement of both breakpoint sets.
double l2_distance(const StepProfile& p, const StepProfile& q);

/// ‖f − p‖ in L²(0, 1), integrating the piecewise-linear table exactly.
double l2_distance(const TabulatedProfile& f, const StepProfile& p);

/// Uniform K-cell partition with exact cell averages of the tabulated input.
/// Throws std::invalid_argument for K == 0 or a malformed table.
StepProfile discretize(const TabulatedProfile& samples, std::size_t cells);

/// Elastic-collision map for two masses:
/// v_i = 2 u0 - u_i with u0 = (m1 u1 + m2 u2) / (m1 + m2).
std::pair<double, double> elastic_collision(double m1, double u1, double m2, double u2);

/// Applies one move. Throws std::out_of_range for a bad index and
/// std::invalid_argument for lambda outside (0, 1).
StepProfile apply_move(const StepProfile& p, const Move& m);

StepProfile apply_moves(const StepProfile& p, std::span<const Move> moves);

/// Merges adjacent segments whose values differ by at most tol (the merged
/// value is the length-weighted mean, so momentum is preserved), and drops
/// zero-length segments.
StepProfile normalize(const StepProfile& p, double tol);

}  // namespace csflow
