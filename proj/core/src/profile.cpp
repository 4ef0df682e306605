#include "csflow/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace csflow {

StepProfile::StepProfile(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
    if (values_.empty())
        throw std::invalid_argument("StepProfile: at least one segment required");
    if (breakpoints_.size() != values_.size() + 1)
        throw std::invalid_argument("StepProfile: need exactly one more breakpoint than values");
    if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0)
        throw std::invalid_argument("StepProfile: breakpoints must run from 0 to 1");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i) {
        if (!(breakpoints_[i] > breakpoints_[i - 1]))
            throw std::invalid_argument("StepProfile: breakpoints must be strictly increasing");
    }
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("StepProfile: non-finite value");
    }
}

StepProfile StepProfile::uniform(std::vector<double> values) {
    const std::size_t k = values.size();
    if (k == 0) throw std::invalid_argument("StepProfile::uniform: no values");
    std::vector<double> bp(k + 1);
    for (std::size_t i = 0; i <= k; ++i) bp[i] = static_cast<double>(i) / static_cast<double>(k);
    bp.back() = 1.0;
    return StepProfile(std::move(bp), std::move(values));
}

StepProfile StepProfile::constant(double value) { return StepProfile({0.0, 1.0}, {value}); }

double StepProfile::operator()(double x2) const {
    auto it = std::upper_bound(breakpoints_.begin() + 1, breakpoints_.end() - 1, x2);
    return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

std::string to_string(const Move& m) {
    std::ostringstream os;
    std::visit(
        [&](const auto& mv) {
            using T = std::decay_t<decltype(mv)>;
            if constexpr (std::is_same_v<T, Refine>)
                os << "Refine(" << mv.k << ", " << mv.lambda << ")";
            else if constexpr (std::is_same_v<T, Transpose>)
                os << "Transpose(" << mv.k << ")";
            else
                os << "Collide(" << mv.k << ")";
        },
        m);
    return os.str();
}

void TabulatedProfile::validate() const {
    if (x.size() < 2 || x.size() != u.size())
        throw std::invalid_argument("TabulatedProfile: need >= 2 nodes and matching sizes");
    if (x.front() != 0.0 || x.back() != 1.0)
        throw std::invalid_argument("TabulatedProfile: nodes must cover [0, 1]");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (!(x[i] > x[i - 1]))
            throw std::invalid_argument("TabulatedProfile: nodes must be strictly increasing");
}

double TabulatedProfile::operator()(double x2) const {
    if (x2 <= x.front()) return u.front();
    if (x2 >= x.back()) return u.back();
    auto it = std::upper_bound(x.begin(), x.end(), x2);
    const auto i = static_cast<std::size_t>(it - x.begin());
    const double t = (x2 - x[i - 1]) / (x[i] - x[i - 1]);
    return (1.0 - t) * u[i - 1] + t * u[i];
}

double momentum(const StepProfile& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.segment_count(); ++k) s += p.value(k) * p.length(k);
    return s;
}

double energy(const StepProfile& p) {
    double s = 0.0;
    for (std::size_t k = 0; k < p.segment_count(); ++k)
        s += 0.5 * p.value(k) * p.value(k) * p.length(k);
    return s;
}

namespace {

std::vector<double> merged_breakpoints(std::span<const double> a, std::span<const double> b) {
    std::vector<double> out;
    out.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// ∫ over [a, b] of (α + β x − c)² with the linear piece written as α + β x.
double linear_minus_const_sq(double xa, double ua, double xb, double ub, double c) {
    // On [xa, xb] the integrand is (g(s))², g linear from ga to gb.
    const double ga = ua - c;
    const double gb = ub - c;
    return (xb - xa) * (ga * ga + ga * gb + gb * gb) / 3.0;
}

}  // namespace

double l2_distance(const StepProfile& p, const StepProfile& q) {
    const auto grid = merged_breakpoints(p.breakpoints(), q.breakpoints());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double mid = 0.5 * (grid[i] + grid[i + 1]);
        const double d = p(mid) - q(mid);
        s += d * d * (grid[i + 1] - grid[i]);
    }
    return std::sqrt(s);
}

double l2_distance(const TabulatedProfile& f, const StepProfile& p) {
    f.validate();
    const auto grid = merged_breakpoints(f.x, p.breakpoints());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double xa = grid[i];
        const double xb = grid[i + 1];
        s += linear_minus_const_sq(xa, f(xa), xb, f(xb), p(0.5 * (xa + xb)));
    }
    return std::sqrt(s);
}

StepProfile discretize(const TabulatedProfile& samples, std::size_t cells) {
    if (cells == 0) throw std::invalid_argument("discretize: K must be >= 1");
    samples.validate();
    std::vector<double> bp(cells + 1);
    for (std::size_t i = 0; i <= cells; ++i)
        bp[i] = static_cast<double>(i) / static_cast<double>(cells);
    bp.back() = 1.0;

    const auto grid = merged_breakpoints(samples.x, bp);
    std::vector<double> values(cells, 0.0);
    std::size_t cell = 0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double xa = grid[i];
        const double xb = grid[i + 1];
        while (cell + 1 < cells && xa >= bp[cell + 1]) ++cell;
        // trapezoid is exact on a linear piece
        values[cell] += 0.5 * (samples(xa) + samples(xb)) * (xb - xa);
    }
    for (std::size_t c = 0; c < cells; ++c) values[c] /= (bp[c + 1] - bp[c]);
    return StepProfile(std::move(bp), std::move(values));
}

std::pair<double, double> elastic_collision(double m1, double u1, double m2, double u2) {
    const double u0 = (m1 * u1 + m2 * u2) / (m1 + m2);
    return {2.0 * u0 - u1, 2.0 * u0 - u2};
}

namespace {

void check_pair_index(std::size_t k, std::size_t segments, const char* what) {
    if (k < 1 || k + 1 > segments)
        throw std::out_of_range(std::string(what) + ": pair index out of range");
}

}  // namespace

StepProfile apply_move(const StepProfile& p, const Move& m) {
    std::vector<double> bp(p.breakpoints().begin(), p.breakpoints().end());
    std::vector<double> vals(p.values().begin(), p.values().end());
    const std::size_t n = p.segment_count();

    if (const auto* r = std::get_if<Refine>(&m)) {
        if (r->k < 1 || r->k > n) throw std::out_of_range("Refine: segment index out of range");
        if (!(r->lambda > 0.0 && r->lambda < 1.0))
            throw std::invalid_argument("Refine: lambda must lie strictly inside (0, 1)");
        const std::size_t i = r->k - 1;
        const double split = bp[i] + r->lambda * (bp[i + 1] - bp[i]);
        bp.insert(bp.begin() + static_cast<std::ptrdiff_t>(i) + 1, split);
        vals.insert(vals.begin() + static_cast<std::ptrdiff_t>(i), vals[i]);
    } else if (const auto* t = std::get_if<Transpose>(&m)) {
        check_pair_index(t->k, n, "Transpose");
        const std::size_t i = t->k - 1;
        bp[i + 1] = bp[i] + (bp[i + 2] - bp[i + 1]);
        std::swap(vals[i], vals[i + 1]);
    } else {
        const auto& c = std::get<Collide>(m);
        check_pair_index(c.k, n, "Collide");
        const std::size_t i = c.k - 1;
        auto [v1, v2] = elastic_collision(bp[i + 1] - bp[i], vals[i], bp[i + 2] - bp[i + 1], vals[i + 1]);
        vals[i] = v1;
        vals[i + 1] = v2;
    }
    return StepProfile(std::move(bp), std::move(vals));
}

StepProfile apply_moves(const StepProfile& p, std::span<const Move> moves) {
    StepProfile cur = p;
    for (const auto& m : moves) cur = apply_move(cur, m);
    return cur;
}

StepProfile normalize(const StepProfile& p, double tol) {
    std::vector<double> bp{0.0};
    std::vector<double> vals;
    for (std::size_t k = 0; k < p.segment_count(); ++k) {
        const double len = p.length(k);
        if (len <= 0.0) continue;
        const double v = p.value(k);
        if (!vals.empty() && std::abs(vals.back() - v) <= tol) {
            const double prev_len = bp.back() - bp[bp.size() - 2];
            vals.back() = (vals.back() * prev_len + v * len) / (prev_len + len);
            bp.back() = p.breakpoints()[k + 1];
        } else {
            vals.push_back(v);
            bp.push_back(p.breakpoints()[k + 1]);
        }
    }
    bp.back() = 1.0;
    return StepProfile(std::move(bp), std::move(vals));
}

}  // namespace csflow
