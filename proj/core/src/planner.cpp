#include "csflow/planner.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <random>

namespace csflow {

namespace {

constexpr double kPieceTol = 1e-12;   // absolute length below which a cut is skipped
constexpr double kMinPiece = 1e-10;  // shorter pool pieces are left alone
constexpr double kMatchTol = 1e-9;    // relative value tolerance for an existing piece
constexpr int kExchangeAttempts = 24;
constexpr double kDistancePenalty = 0.1;

class PlanBuilder {
public:
    PlanBuilder(const StepProfile& source, const StepProfile& target, const PlanOptions& opt,
                std::size_t budget)
        : cur_(source), target_(target), opt_(opt), budget_(budget), rng_(opt.seed) {}

    void reseed(std::uint64_t seed) { rng_.seed(seed); }
    bool exhausted() const { return plan_.moves.size() >= budget_; }
    const StepProfile& current() const { return cur_; }

    void push(const Move& m) {
        if (!tags_.empty()) {
            if (const auto* r = std::get_if<Refine>(&m))
                tags_.insert(tags_.begin() + static_cast<std::ptrdiff_t>(r->k), tags_[r->k - 1]);
            else if (const auto* t = std::get_if<Transpose>(&m))
                std::swap(tags_[t->k - 1], tags_[t->k]);
        }
        cur_ = apply_move(cur_, m);
        plan_.moves.push_back(m);
        if (opt_.record_snapshots) plan_.snapshots.push_back(cur_);
    }

    // Cuts segment i so that its left piece has length x; no-op when x covers it.
    // Returns true when a Refine was issued (segments after i shift by one).
    bool cut(std::size_t i, double x) {
        const double len = cur_.length(i);
        if (len - x <= kPieceTol) return false;
        push(Refine{i + 1, x / len});
        return true;
    }

    // Moves segment `from` to index `to` with adjacent transpositions.
    void bring(std::size_t from, std::size_t to) {
        for (std::size_t p = from; p > to; --p) push(Transpose{p});
        for (std::size_t p = from; p < to; ++p) push(Transpose{p + 1});
    }

    bool exchange_phase(int attempt);
    void greedy_phase();

    Plan finish() {
        plan_.achieved_error = l2_distance(cur_, target_);
        plan_.converged = plan_.achieved_error <= opt_.eps;
        return std::move(plan_);
    }

private:
    double value_scale(std::size_t from) const {
        double s = 1.0;
        for (std::size_t i = from; i < cur_.segment_count(); ++i)
            s = std::max(s, std::abs(cur_.value(i)));
        return s;
    }

    StepProfile cur_;
    StepProfile target_;
    PlanOptions opt_;
    std::size_t budget_;
    std::mt19937_64 rng_;
    Plan plan_;
    std::vector<long> tags_;  // target segment of a finished piece, -1 in the pool
};

bool PlanBuilder::exchange_phase(int attempt) {
    const StepProfile goal = normalize(target_, 0.0);
    const std::size_t m = goal.segment_count();
    std::vector<double> needs(m);
    for (std::size_t j = 0; j < m; ++j) needs[j] = goal.length(j);
    tags_.assign(cur_.segment_count(), -1);

    // A target counts as built once its unmet mass is too small to matter:
    // misplaced mass tau at value gap span adds at most tau span² per target.
    double lo_v = goal.value(0), hi_v = goal.value(0);
    for (std::size_t i = 0; i < cur_.segment_count(); ++i) {
        lo_v = std::min(lo_v, cur_.value(i));
        hi_v = std::max(hi_v, cur_.value(i));
    }
    for (std::size_t j = 0; j < m; ++j) {
        lo_v = std::min(lo_v, goal.value(j));
        hi_v = std::max(hi_v, goal.value(j));
    }
    const double span = std::max(hi_v - lo_v, 1e-300);
    const double done_tol = std::max(
        kPieceTol, opt_.eps * opt_.eps / (16.0 * static_cast<double>(m) * span * span));

    std::uniform_real_distribution<double> jitter(0.0, 1.0);
    const bool randomized = attempt > 0;
    auto in_pool = [&](std::size_t i) { return tags_[i] < 0; };
    auto usable = [&](std::size_t i) { return tags_[i] < 0 && cur_.length(i) > kMinPiece; };

    // Claims pool pieces already carrying target value j. False on budget.
    auto take_matches = [&](std::size_t j) {
        const double v = goal.value(j);
        const double tol = kMatchTol * value_scale(0);
        for (std::size_t i = 0; i < cur_.segment_count() && needs[j] > kPieceTol; ++i) {
            if (!in_pool(i) || std::abs(cur_.value(i) - v) > tol) continue;
            if (exhausted()) return false;
            cut(i, std::min(cur_.length(i), needs[j]));
            tags_[i] = static_cast<long>(j);
            needs[j] -= cur_.length(i);
        }
        return true;
    };

    struct Pair {
        std::size_t a = 0, b = 0;
        double x = 0.0, r = 0.0;
    };
    // Best single collision sending a piece of a to v: r = y / x from the
    // collision law, x capped by both lengths and by the remaining need.
    auto best_pair = [&](double v, double need) {
        Pair best;
        double best_score = 0.0;
        for (std::size_t a = 0; a < cur_.segment_count(); ++a) {
            if (!usable(a)) continue;
            const double ua = cur_.value(a);
            for (std::size_t b = 0; b < cur_.segment_count(); ++b) {
                if (a == b || !usable(b)) continue;
                const double r = (ua - v) / (ua + v - 2.0 * cur_.value(b));
                if (!(r > 0.0) || !std::isfinite(r)) continue;
                const double x = std::min({cur_.length(a), cur_.length(b) / r, need});
                if (x <= kMinPiece || x * r <= kMinPiece) continue;
                // Transpositions dominate the move count, so distant partners
                // must supply proportionally more mass.
                const std::size_t dist = a > b ? a - b : b - a;
                double score = x / (1.0 + kDistancePenalty * static_cast<double>(dist - 1));
                if (randomized) score *= 0.5 + jitter(rng_);
                if (score > best_score * (1.0 + 1e-12)) {
                    best = {a, b, x, r};
                    best_score = score;
                }
            }
        }
        return best;
    };

    for (std::size_t j = 0; j < m; ++j)
        if (!take_matches(j)) return false;

    int widen = 0;
    bool ok = true;
    std::vector<std::size_t> open;
    for (;;) {
        open.clear();
        for (std::size_t j = 0; j < m; ++j)
            if (needs[j] > done_tol) open.push_back(j);
        // The rest of the pool carries the last open value up to round-off.
        if (open.size() <= 1) {
            const long last = static_cast<long>(open.empty() ? m - 1 : open.front());
            for (auto& t : tags_)
                if (t < 0) t = last;
            break;
        }
        if (exhausted()) {
            ok = false;
            break;
        }

        double pool_mass = 0.0, pool_momentum = 0.0;
        for (std::size_t i = 0; i < cur_.segment_count(); ++i) {
            if (!in_pool(i)) continue;
            pool_mass += cur_.length(i);
            pool_momentum += cur_.length(i) * cur_.value(i);
        }
        const double mean = pool_momentum / pool_mass;

        // The target whose best collision covers the largest share of its
        // need goes next; extreme values win ties.
        std::size_t pick = m;
        Pair move;
        double best_score = 0.0;
        for (std::size_t j : open) {
            const Pair p = best_pair(goal.value(j), needs[j]);
            if (p.x <= 0.0) continue;
            const double spread = std::abs(goal.value(j) - mean);
            double score = p.x / needs[j] * (1.0 + 1e-3 * spread);
            if (randomized) score *= 0.5 + jitter(rng_);
            if (score > best_score) {
                best_score = score;
                pick = j;
                move = p;
            }
        }

        if (pick == m) {
            // No single collision reaches any open value: reflect the far end
            // of the pool across its near end toward the most extreme one.
            if (++widen > 64) {
                ok = false;
                break;
            }
            std::size_t far = open.front();
            for (std::size_t j : open)
                if (std::abs(goal.value(j) - mean) > std::abs(goal.value(far) - mean)) far = j;
            std::size_t lo = cur_.segment_count(), hi = cur_.segment_count();
            for (std::size_t i = 0; i < cur_.segment_count(); ++i) {
                if (!usable(i)) continue;
                if (lo == cur_.segment_count() || cur_.value(i) < cur_.value(lo)) lo = i;
                if (hi == cur_.segment_count() || cur_.value(i) > cur_.value(hi)) hi = i;
            }
            if (lo == cur_.segment_count() || cur_.value(lo) == cur_.value(hi)) {
                ok = false;
                break;
            }
            const bool up = goal.value(far) > mean;
            move.a = up ? lo : hi;
            move.b = up ? hi : lo;
            move.r = 3.0;
            move.x = std::min(cur_.length(move.a), cur_.length(move.b) / move.r);
        }

        std::size_t a = move.a;
        std::size_t b = move.b;
        if (cut(a, move.x) && b > a) ++b;
        if (cut(b, move.x * move.r) && a > b) ++a;
        // partner next to the piece, then collide in place
        bring(b, b > a ? a + 1 : a - 1);
        if (exhausted()) {
            ok = false;
            break;
        }
        push(Collide{b > a ? a + 1 : a});
        if (pick < m) {
            tags_[a] = static_cast<long>(pick);
            needs[pick] -= cur_.length(a);
        }
    }

    if (!ok) {
        // Leftover pool pieces go to the open target nearest in value.
        for (std::size_t i = 0; i < tags_.size(); ++i) {
            if (tags_[i] >= 0) continue;
            std::size_t near = open.empty() ? m - 1 : open.front();
            for (std::size_t j : open)
                if (std::abs(goal.value(j) - cur_.value(i)) <
                    std::abs(goal.value(near) - cur_.value(i)))
                    near = j;
            tags_[i] = static_cast<long>(near);
        }
    }

    // Insertion sort of the finished pieces into target order.
    for (std::size_t i = 1; i < tags_.size(); ++i) {
        for (std::size_t p = i; p > 0 && tags_[p - 1] > tags_[p]; --p) {
            if (exhausted()) return false;
            push(Transpose{p});
        }
    }
    tags_.clear();
    return ok;
}

void PlanBuilder::greedy_phase() {
    auto err2 = [&](const StepProfile& p) {
        const double d = l2_distance(p, target_);
        return d * d;
    };
    double current = err2(cur_);
    while (std::sqrt(current) > opt_.eps && !exhausted()) {
        const std::size_t n = cur_.segment_count();
        double best = current;
        std::vector<Move> best_moves;

        auto consider = [&](std::vector<Move> seq) {
            StepProfile p = cur_;
            for (const auto& m : seq) p = apply_move(p, m);
            const double e = err2(p);
            if (e < best - 1e-12) {  // strict: lowest index wins ties
                best = e;
                best_moves = std::move(seq);
            }
        };

        for (std::size_t k = 1; k < n; ++k) {
            consider({Collide{k}});
            consider({Transpose{k}});
        }
        for (std::size_t i = 1; i <= n; ++i) {
            for (int g = 1; g < 8; ++g) {
                const double lambda = g / 8.0;
                if (i > 1) consider({Refine{i, lambda}, Collide{i - 1}});
                if (i < n) consider({Refine{i, lambda}, Collide{i + 1}});
            }
        }

        if (best_moves.empty()) {
            if (n < 2) break;
            std::uniform_int_distribution<std::size_t> pick(1, n - 1);
            push(Transpose{pick(rng_)});
        } else {
            for (const auto& m : best_moves) push(m);
        }
        current = err2(cur_);
    }
}

}  // namespace

Plan plan(const StepProfile& source, const StepProfile& target, const PlanOptions& options) {
    if (!(options.eps > 0.0)) throw std::invalid_argument("plan: eps must be positive");
    if (std::abs(momentum(source) - momentum(target)) > options.invariant_tol ||
        std::abs(energy(source) - energy(target)) > options.invariant_tol)
        throw PlanPreconditionError("plan: source and target differ in momentum or energy");

    // K counts the segments of the common refinement of both breakpoint sets.
    std::vector<double> grid;
    std::merge(source.breakpoints().begin(), source.breakpoints().end(),
               target.breakpoints().begin(), target.breakpoints().end(),
               std::back_inserter(grid));
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    const std::size_t k = grid.size() - 1;
    const std::size_t budget = options.budget ? options.budget : 10 * k * k;

    PlanBuilder builder(source, target, options, budget);
    if (l2_distance(source, target) > options.eps) {
        // Each exchange attempt starts from the source; the closest one is kept.
        double best_err = std::numeric_limits<double>::infinity();
        for (int attempt = 0; attempt < kExchangeAttempts; ++attempt) {
            PlanBuilder trial(source, target, options, budget);
            trial.reseed(options.seed + static_cast<std::uint64_t>(attempt));
            trial.exchange_phase(attempt);
            const double err = l2_distance(trial.current(), target);
            if (err < best_err) {
                best_err = err;
                builder = std::move(trial);
            }
            if (best_err <= options.eps) break;
        }
        if (best_err > options.eps) builder.greedy_phase();
    }
    return builder.finish();
}

ReachableInstance random_reachable_target(const StepProfile& source, std::size_t n_moves,
                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> lam(0.1, 0.9);
    Plan gen;
    StepProfile cur = source;
    for (std::size_t i = 0; i < n_moves; ++i) {
        const std::size_t n = cur.segment_count();
        const int kinds = n >= 2 ? 3 : 1;
        const int kind = std::uniform_int_distribution<int>(0, kinds - 1)(rng);
        Move m;
        if (kind == 0) {
            const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n)(rng);
            m = Refine{k, lam(rng)};
        } else {
            const std::size_t k = std::uniform_int_distribution<std::size_t>(1, n - 1)(rng);
            if (kind == 1)
                m = Transpose{k};
            else
                m = Collide{k};
        }
        cur = apply_move(cur, m);
        gen.moves.push_back(m);
        gen.snapshots.push_back(cur);
    }
    gen.achieved_error = 0.0;
    gen.converged = true;
    return {cur, std::move(gen)};
}

StepProfile random_profile(std::size_t segments, std::uint64_t seed) {
    if (segments == 0) throw std::invalid_argument("random_profile: need >= 1 segment");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> len(0.5, 1.5);
    std::uniform_real_distribution<double> val(-2.0, 2.0);
    std::vector<double> lengths(segments);
    double total = 0.0;
    for (auto& l : lengths) total += (l = len(rng));
    std::vector<double> bp{0.0};
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < segments; ++i) bp.push_back((acc += lengths[i]) / total);
    bp.push_back(1.0);
    std::vector<double> values(segments);
    for (auto& v : values) v = val(rng);
    return StepProfile(std::move(bp), std::move(values));
}

double replay_error(const StepProfile& source, const std::vector<Move>& moves,
                    const StepProfile& target) {
    return l2_distance(apply_moves(source, moves), target);
}

}  // namespace csflow
