#include "csflow/generalized_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "csflow/braid.hpp"

namespace csflow {

void TrajectoryEnsemble::validate() const {
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("ensemble: period must be positive");
    if (positions.empty()) throw std::invalid_argument("ensemble: no particles");
    const std::size_t slices = positions.front().size();
    if (slices < 2) throw std::invalid_argument("ensemble: need at least 2 slices");
    for (const auto& traj : positions) {
        if (traj.size() != slices) throw std::invalid_argument("ensemble: ragged slice counts");
        for (const auto& x : traj) {
            if (!std::isfinite(x[0]) || !std::isfinite(x[1]))
                throw std::invalid_argument("ensemble: non-finite position");
            if (x[0] < 0.0 || x[0] >= length || x[1] < 0.0 || x[1] > 1.0)
                throw std::invalid_argument("ensemble: position outside the channel");
        }
    }
}

double periodic_delta(double a, double b, double length) {
    double d = std::fmod(b - a, length);
    if (d > 0.5 * length) d -= length;
    if (d < -0.5 * length) d += length;
    return d;
}

namespace {

double step_sum(const TrajectoryEnsemble& e, std::size_t s) {
    double sum = 0.0;
    for (const auto& traj : e.positions) {
        const double d1 = periodic_delta(traj[s][0], traj[s + 1][0], e.length);
        const double d2 = traj[s + 1][1] - traj[s][1];
        sum += d1 * d1 + d2 * d2;
    }
    return sum / static_cast<double>(e.particles());
}

}  // namespace

double action(const TrajectoryEnsemble& e, double horizon) {
    e.validate();
    const double dt = horizon / static_cast<double>(e.intervals());
    double a = 0.0;
    for (std::size_t s = 0; s < e.intervals(); ++s) a += step_sum(e, s);
    return a / (2.0 * dt);
}

double path_length(const TrajectoryEnsemble& e, double horizon) {
    e.validate();
    (void)horizon;  // dt * sqrt(sum / dt^2) does not depend on dt
    double l = 0.0;
    for (std::size_t s = 0; s < e.intervals(); ++s) l += std::sqrt(step_sum(e, s));
    return l;
}

void CellGrid::validate() const {
    if (n1 == 0 || n2 == 0) throw std::invalid_argument("CellGrid: empty grid");
    if (!(length > 0.0)) throw std::invalid_argument("CellGrid: period must be positive");
}

Point CellGrid::center(std::size_t c) const {
    const std::size_t i = c % n1, m = c / n1;
    return {(static_cast<double>(i) + 0.5) * length / static_cast<double>(n1),
            (static_cast<double>(m) + 0.5) / static_cast<double>(n2)};
}

double CellGrid::distance2(std::size_t a, std::size_t b) const {
    const Point pa = center(a), pb = center(b);
    const double d1 = periodic_delta(pa[0], pb[0], length);
    const double d2 = pb[1] - pa[1];
    return d1 * d1 + d2 * d2;
}

IncompressibilityReport incompressibility_check(const TrajectoryEnsemble& e, const CellGrid& grid,
                                                double tolerance) {
    e.validate();
    grid.validate();
    IncompressibilityReport r;
    if (e.particles() != grid.size()) {
        r.ok = false;
        r.failed_slices = e.intervals() + 1;
        r.worst_deviation = std::numeric_limits<double>::infinity();
        return r;
    }
    const double w1 = grid.length / static_cast<double>(grid.n1);
    const double w2 = 1.0 / static_cast<double>(grid.n2);
    std::vector<char> seen(grid.size());
    for (std::size_t s = 0; s <= e.intervals(); ++s) {
        std::fill(seen.begin(), seen.end(), 0);
        bool slice_ok = true;
        double dev = 0.0;
        for (const auto& traj : e.positions) {
            const Point x = traj[s];
            const auto i = std::min(grid.n1 - 1, static_cast<std::size_t>(std::max(0.0, std::floor(x[0] / w1))));
            const auto m = std::min(grid.n2 - 1, static_cast<std::size_t>(std::max(0.0, std::floor(x[1] / w2))));
            const std::size_t c = m * grid.n1 + i;
            const Point ctr = grid.center(c);
            const double d = std::hypot(periodic_delta(ctr[0], x[0], grid.length), x[1] - ctr[1]);
            dev = std::max(dev, d);
            if (d > tolerance || seen[c]) slice_ok = false;
            seen[c] = 1;
        }
        if (!slice_ok) {
            if (r.ok) r.worst_slice = s;
            r.ok = false;
            ++r.failed_slices;
        } else if (r.ok && dev > r.worst_deviation) {
            r.worst_slice = s;
        }
        r.worst_deviation = std::max(r.worst_deviation, dev);
    }
    return r;
}

TrajectoryEnsemble parallel_flow_ensemble(const CellGrid& grid, const std::vector<double>& values,
                                          double horizon, std::size_t intervals) {
    grid.validate();
    if (values.size() != grid.n2) throw std::invalid_argument("parallel_flow_ensemble: one value per row");
    if (intervals == 0) throw std::invalid_argument("parallel_flow_ensemble: need at least one interval");
    const double dt = horizon / static_cast<double>(intervals);
    for (double v : values)
        if (!(std::abs(v) * dt < 0.5 * grid.length))
            throw std::invalid_argument("parallel_flow_ensemble: step longer than half a period");
    TrajectoryEnsemble e;
    e.length = grid.length;
    e.positions.resize(grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
        const Point x0 = grid.center(c);
        const double u = values[c / grid.n1];
        for (std::size_t s = 0; s <= intervals; ++s) {
            double x1 = std::fmod(x0[0] + u * dt * static_cast<double>(s), grid.length);
            if (x1 < 0.0) x1 += grid.length;
            if (x1 >= grid.length) x1 = 0.0;
            e.positions[c].push_back({x1, x0[1]});
        }
    }
    return e;
}

void DiscreteFlowProblem::validate() const {
    grid.validate();
    if (endpoint.size() != grid.size()) throw std::invalid_argument("problem: g must cover every cell");
    std::vector<char> hit(grid.size(), 0);
    for (std::size_t c : endpoint) {
        if (c >= grid.size() || hit[c]) throw std::invalid_argument("problem: g is not a bijection");
        hit[c] = 1;
    }
    if (!(horizon > 0.0)) throw std::invalid_argument("problem: horizon must be positive");
    if (reference) {
        reference->validate();
        if (reference->particles() != grid.size())
            throw std::invalid_argument("problem: reference has the wrong particle count");
    }
}

std::vector<std::size_t> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    // potentials form of the Hungarian algorithm, 1-based internally
    const std::size_t n = cost.size();
    for (const auto& row : cost)
        if (row.size() != n) throw std::invalid_argument("min_cost_assignment: matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> out(n);
    for (std::size_t j = 1; j <= n; ++j) out[p[j] - 1] = j - 1;
    return out;
}

namespace {

using Assignment = std::vector<std::vector<std::size_t>>;

// v beats best by more than round-off; anything finite beats infinity
bool improves(double v, double best) {
    if (std::isinf(best)) return std::isfinite(v);
    return v < best - 1e-12 * std::max(1.0, best);
}

double assignment_sum(const Assignment& a, const CellGrid& g) {
    double s = 0.0;
    for (std::size_t t = 0; t + 1 < a.size(); ++t)
        for (std::size_t i = 0; i < a[t].size(); ++i) s += g.distance2(a[t][i], a[t + 1][i]);
    return s;
}

TrajectoryEnsemble to_ensemble(const Assignment& a, const CellGrid& g) {
    TrajectoryEnsemble e;
    e.length = g.length;
    const std::size_t n = a.front().size();
    e.positions.assign(n, {});
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& slice : a) e.positions[i].push_back(g.center(slice[i]));
    return e;
}

class BranchAndBound {
public:
    BranchAndBound(const DiscreteFlowProblem& p) : p_(p), g_(p.grid), n_(g_.size()), s_(p.interior_slices) {
        d2_.assign(n_, std::vector<double>(n_));
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b) d2_[a][b] = g_.distance2(a, b);
        // lb_[k][a][b]: cheapest k-step path a -> b ignoring other particles
        lb_.assign(s_ + 2, std::vector<std::vector<double>>(n_, std::vector<double>(n_, 0.0)));
        for (std::size_t a = 0; a < n_; ++a)
            for (std::size_t b = 0; b < n_; ++b) lb_[0][a][b] = a == b ? 0.0 : std::numeric_limits<double>::infinity();
        for (std::size_t k = 1; k <= s_ + 1; ++k)
            for (std::size_t a = 0; a < n_; ++a)
                for (std::size_t b = 0; b < n_; ++b) {
                    double best = std::numeric_limits<double>::infinity();
                    for (std::size_t c = 0; c < n_; ++c) best = std::min(best, lb_[k - 1][a][c] + d2_[c][b]);
                    lb_[k][a][b] = best;
                }
        cur_.assign(s_ + 2, std::vector<std::size_t>(n_, 0));
        std::iota(cur_[0].begin(), cur_[0].end(), std::size_t{0});
        cur_[s_ + 1] = p.endpoint;
        if (p.reference) ref_ = braid_word(*p.reference);
    }

    bool run() {
        used_.assign(n_, 0);
        // remaining bound with every particle still at slice 0
        double rem = 0.0;
        for (std::size_t i = 0; i < n_; ++i) rem += lb_[s_ + 1][i][p_.endpoint[i]];
        if (s_ == 0) {
            leaf(0.0);
        } else {
            dfs(1, 0, 0.0, rem);
        }
        return found_;
    }

    Assignment best;
    double best_sum = std::numeric_limits<double>::infinity();
    std::size_t nodes = 0;

private:
    void leaf(double sum) {
        double total = sum;
        for (std::size_t i = 0; i < n_; ++i) total += d2_[cur_[s_][i]][cur_[s_ + 1][i]];
        if (!improves(total, best_sum)) return;
        if (ref_) {
            // strands meeting in the plane form no braid, so no class to match
            BraidRecord rec;
            try {
                rec = braid_word(to_ensemble(cur_, g_));
            } catch (const std::invalid_argument&) {
                return;
            }
            if (isotopy_invariants_equal(rec, *ref_).verdict == IsotopyVerdict::distinct) return;
        }
        best_sum = total;
        best = cur_;
        found_ = true;
    }

    // Assign particle i at slice s. sum covers completed steps; rem bounds the rest.
    void dfs(std::size_t s, std::size_t i, double sum, double rem) {
        ++nodes;
        if (!improves(sum + rem, best_sum)) return;
        if (i == n_) {
            if (s == s_) {
                leaf(sum);
                return;
            }
            used_.assign(n_, 0);
            dfs(s + 1, 0, sum, rem);
            // the caller is still looping over slice s
            rebuild_used(s);
            return;
        }
        const std::size_t from = cur_[s - 1][i];
        const std::size_t to = p_.endpoint[i];
        const std::size_t left = s_ + 1 - s;  // steps after slice s
        const double old = lb_[left + 1][from][to];
        for (std::size_t c = 0; c < n_; ++c) {
            if (used_[c]) continue;
            const double step = d2_[from][c];
            const double nrem = rem - old + lb_[left][c][to];
            cur_[s][i] = c;
            used_[c] = 1;
            dfs(s, i + 1, sum + step, nrem);
            used_[c] = 0;
        }
    }

    void rebuild_used(std::size_t s) {
        used_.assign(n_, 0);
        for (std::size_t i = 0; i < n_; ++i) used_[cur_[s][i]] = 1;
    }

    const DiscreteFlowProblem& p_;
    const CellGrid& g_;
    std::size_t n_, s_;
    std::vector<std::vector<double>> d2_;
    std::vector<std::vector<std::vector<double>>> lb_;
    Assignment cur_;
    std::vector<char> used_;
    std::optional<BraidRecord> ref_;
    bool found_ = false;
};

MinimizeResult finish(const Assignment& a, const DiscreteFlowProblem& p) {
    MinimizeResult r;
    r.assignment = a;
    r.ensemble = to_ensemble(a, p.grid);
    const double dt = p.horizon / static_cast<double>(p.interior_slices + 1);
    r.action = assignment_sum(a, p.grid) / (2.0 * dt * static_cast<double>(p.grid.size()));
    return r;
}

MinimizeResult heuristic(const DiscreteFlowProblem& p, const MinimizeOptions& opt) {
    const CellGrid& g = p.grid;
    const std::size_t n = g.size(), s = p.interior_slices;
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    Assignment best;
    double best_sum = std::numeric_limits<double>::infinity();
    bool all_converged = true;
    std::size_t solved = 0;
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));

    // particles i and j trade cells on slices t1..t2; every slice stays a permutation
    auto block_swap = [&](Assignment& a, double& cur) {
        for (std::size_t t1 = 1; t1 <= s; ++t1)
            for (std::size_t t2 = t1; t2 <= s; ++t2)
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = i + 1; j < n; ++j) {
                        auto edge = [&](std::size_t t, std::size_t x, std::size_t y) {
                            return g.distance2(a[t][x], a[t + 1][y]);
                        };
                        const double before = edge(t1 - 1, i, i) + edge(t1 - 1, j, j) + edge(t2, i, i) + edge(t2, j, j);
                        const double after = edge(t1 - 1, i, j) + edge(t1 - 1, j, i) + edge(t2, j, i) + edge(t2, i, j);
                        if (!improves(cur - before + after, cur)) continue;
                        for (std::size_t t = t1; t <= t2; ++t) std::swap(a[t][i], a[t][j]);
                        cur = assignment_sum(a, g);
                        return true;
                    }
        return false;
    };

    auto descend = [&](Assignment a) {
        a[0] = id;
        a[s + 1] = p.endpoint;
        double cur = assignment_sum(a, g);
        bool fixed = false;
        for (std::size_t sweep = 0; sweep < opt.max_sweeps && !fixed; ++sweep) {
            fixed = true;
            for (std::size_t t = 1; t <= s; ++t) {
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t c = 0; c < n; ++c)
                        cost[i][c] = g.distance2(a[t - 1][i], c) + g.distance2(c, a[t + 1][i]);
                auto m = min_cost_assignment(cost);
                ++solved;
                auto trial = a;
                trial[t] = m;
                const double v = assignment_sum(trial, g);
                if (improves(v, cur)) {
                    a = std::move(trial);
                    cur = v;
                    fixed = false;
                }
            }
            if (fixed && block_swap(a, cur)) fixed = false;
        }
        all_converged = all_converged && fixed;
        if (improves(cur, best_sum)) {
            best_sum = cur;
            best = std::move(a);
        }
    };

    // switch from the identity to g at one slice
    for (std::size_t split = 0; split <= s; ++split) {
        Assignment a(s + 2);
        for (std::size_t t = 0; t <= s + 1; ++t) a[t] = t <= split ? id : p.endpoint;
        descend(std::move(a));
    }

    // straight lines from c to g(c), each slice matched to the nearest cells
    {
        Assignment a(s + 2, id);
        for (std::size_t t = 1; t <= s; ++t) {
            const double f = static_cast<double>(t) / static_cast<double>(s + 1);
            for (std::size_t i = 0; i < n; ++i) {
                const Point a0 = g.center(i), a1 = g.center(p.endpoint[i]);
                const Point x{a0[0] + f * periodic_delta(a0[0], a1[0], g.length), a0[1] + f * (a1[1] - a0[1])};
                for (std::size_t c = 0; c < n; ++c) {
                    const Point y = g.center(c);
                    const double d1 = periodic_delta(x[0], y[0], g.length), d2 = y[1] - x[1];
                    cost[i][c] = d1 * d1 + d2 * d2;
                }
            }
            a[t] = min_cost_assignment(cost);
            ++solved;
        }
        descend(std::move(a));
    }

    // seeded random interior slices
    std::mt19937_64 rng(opt.seed);
    for (std::size_t k = 0; k < opt.random_starts; ++k) {
        Assignment a(s + 2, id);
        for (std::size_t t = 1; t <= s; ++t) std::shuffle(a[t].begin(), a[t].end(), rng);
        descend(std::move(a));
    }

    MinimizeResult r = finish(best, p);
    r.converged = all_converged;
    r.nodes = solved;
    return r;
}

}  // namespace

MinimizeResult minimize_action(const DiscreteFlowProblem& p, const MinimizeOptions& opt) {
    p.validate();
    if (opt.mode == SearchMode::heuristic) return heuristic(p, opt);
    if (p.grid.size() > opt.exact_max_cells || p.interior_slices > opt.exact_max_slices)
        throw std::invalid_argument("minimize_action: instance too large for exact mode");
    BranchAndBound bb(p);
    const bool ok = bb.run();
    if (!ok) {
        // only the braid filter can reject everything
        Assignment a(p.interior_slices + 2);
        std::vector<std::size_t> id(p.grid.size());
        std::iota(id.begin(), id.end(), std::size_t{0});
        for (auto& slice : a) slice = id;
        a.back() = p.endpoint;
        MinimizeResult r = finish(a, p);
        r.converged = false;
        r.nodes = bb.nodes;
        return r;
    }
    MinimizeResult r = finish(bb.best, p);
    r.nodes = bb.nodes;
    return r;
}

}  // namespace csflow
