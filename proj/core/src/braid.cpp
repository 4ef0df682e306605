#include "csflow/braid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace csflow {

namespace {

constexpr double kTieOffset = 1e-9;

struct Event {
    double tau;
    std::size_t a, b;  // particle indices, a < b
};

}  // namespace

BraidRecord braid_word(const TrajectoryEnsemble& e) {
    e.validate();
    const std::size_t n = e.particles();
    const std::size_t steps = e.intervals();
    const double L = e.length;

    // lifted x1, tie-broken by particle index
    std::vector<std::vector<double>> X(n, std::vector<double>(steps + 1));
    for (std::size_t i = 0; i < n; ++i) {
        const auto& tr = e.positions[i];
        X[i][0] = tr[0][0] + static_cast<double>(i) * kTieOffset * L;
        for (std::size_t s = 0; s < steps; ++s) X[i][s + 1] = X[i][s] + periodic_delta(tr[s][0], tr[s + 1][0], L);
    }
    auto y = [&](std::size_t i, std::size_t s) { return e.positions[i][s][1]; };

    std::vector<std::size_t> order(n);  // order[p] = particle at position p
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return X[a][0] < X[b][0]; });
    for (std::size_t p = 1; p < n; ++p)
        if (!(X[order[p - 1]][0] < X[order[p]][0]))
            throw std::invalid_argument("braid_word: strands coincide at the first slice");
    std::vector<std::size_t> start_pos(n), pos(n);
    for (std::size_t p = 0; p < n; ++p) start_pos[order[p]] = pos[order[p]] = p;

    BraidRecord r;
    r.strands = n;
    r.winding.assign(n, std::vector<double>(n, 0.0));
    r.periodic_winding.assign(n, std::vector<long>(n, 0));

    std::vector<Event> events;
    for (std::size_t s = 0; s < steps; ++s) {
        events.clear();
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = a + 1; b < n; ++b) {
                const double d0 = X[b][s] - X[a][s];
                const double d1 = X[b][s + 1] - X[a][s + 1];
                if (d1 == 0.0) throw std::invalid_argument("braid_word: strands coincide in x1 at a slice");
                if ((d0 < 0.0) != (d1 < 0.0)) events.push_back({d0 / (d0 - d1), a, b});

                // relative turning over the step (the relative vector moves on a segment)
                const double r0x = d0, r0y = y(b, s) - y(a, s);
                const double r1x = d1, r1y = y(b, s + 1) - y(a, s + 1);
                const double turn = std::atan2(r0x * r1y - r0y * r1x, r0x * r1x + r0y * r1y);
                const std::size_t pa = start_pos[a], pb = start_pos[b];
                r.winding[pa][pb] += turn / (2.0 * std::numbers::pi);
            }
        std::sort(events.begin(), events.end(), [](const Event& u, const Event& v) {
            return std::tie(u.tau, u.a, u.b) < std::tie(v.tau, v.a, v.b);
        });
        for (const Event& ev : events) {
            const std::size_t pa = pos[ev.a], pb = pos[ev.b];
            const std::size_t lo = std::min(pa, pb), hi = std::max(pa, pb);
            if (hi != lo + 1) throw std::invalid_argument("braid_word: more than two strands meet in x1");
            const std::size_t left = order[lo], right = order[hi];
            const double yl = y(left, s) + ev.tau * (y(left, s + 1) - y(left, s));
            const double yr = y(right, s) + ev.tau * (y(right, s + 1) - y(right, s));
            if (std::abs(yl - yr) < 1e-12) throw std::invalid_argument("braid_word: strands collide at a crossing");
            const int gen = static_cast<int>(lo + 1);
            r.word.push_back(yl < yr ? gen : -gen);
            std::swap(order[lo], order[hi]);
            pos[left] = hi;
            pos[right] = lo;
        }
    }

    r.permutation.resize(n);
    for (std::size_t i = 0; i < n; ++i) r.permutation[start_pos[i]] = pos[i];
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const std::size_t pa = start_pos[a], pb = start_pos[b];
            const double w = r.winding[pa][pb] + r.winding[pb][pa];
            r.winding[pa][pb] = r.winding[pb][pa] = w;
            const long k = static_cast<long>(std::floor((X[b][steps] - X[a][steps]) / L)) -
                           static_cast<long>(std::floor((X[b][0] - X[a][0]) / L));
            r.periodic_winding[pa][pb] = k;
            r.periodic_winding[pb][pa] = -k;
        }
    return r;
}

std::vector<int> free_reduce(const std::vector<int>& word) {
    std::vector<int> out;
    for (int g : word) {
        if (!out.empty() && out.back() == -g) {
            out.pop_back();
        } else {
            out.push_back(g);
        }
    }
    return out;
}

std::vector<std::size_t> permutation_of_word(const std::vector<int>& word, std::size_t strands) {
    std::vector<std::size_t> order(strands);
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int g : word) {
        const std::size_t p = static_cast<std::size_t>(std::abs(g));
        if (g == 0 || p >= strands) throw std::invalid_argument("permutation_of_word: generator out of range");
        std::swap(order[p - 1], order[p]);
    }
    std::vector<std::size_t> perm(strands);
    for (std::size_t p = 0; p < strands; ++p) perm[order[p]] = p;
    return perm;
}

long writhe(const std::vector<int>& word) {
    long w = 0;
    for (int g : word) w += g > 0 ? 1 : -1;
    return w;
}

std::vector<std::vector<double>> winding_of_word(const std::vector<int>& word, std::size_t strands) {
    std::vector<std::size_t> order(strands);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::vector<double>> w(strands, std::vector<double>(strands, 0.0));
    for (int g : word) {
        const std::size_t p = static_cast<std::size_t>(std::abs(g));
        if (g == 0 || p >= strands) throw std::invalid_argument("winding_of_word: generator out of range");
        const std::size_t a = order[p - 1], b = order[p];
        const double h = g > 0 ? 0.5 : -0.5;
        w[a][b] += h;
        w[b][a] += h;
        std::swap(order[p - 1], order[p]);
    }
    return w;
}

IsotopyComparison isotopy_invariants_equal(const BraidRecord& a, const BraidRecord& b) {
    if (a.strands != b.strands) throw std::invalid_argument("isotopy: strand counts differ");
    IsotopyComparison c;
    c.permutation_differs = a.permutation != b.permutation;
    c.writhe_differs = writhe(a.word) != writhe(b.word);
    for (std::size_t i = 0; i < a.strands; ++i)
        for (std::size_t j = 0; j < a.strands; ++j) {
            if (std::round(a.winding[i][j] - b.winding[i][j]) != 0.0) c.winding_differs = true;
            if (a.periodic_winding[i][j] != b.periodic_winding[i][j]) c.periodic_winding_differs = true;
        }
    c.reduced_words_equal = free_reduce(a.word) == free_reduce(b.word);
    const bool differs =
        c.permutation_differs || c.writhe_differs || c.winding_differs || c.periodic_winding_differs;
    c.verdict = differs ? IsotopyVerdict::distinct : IsotopyVerdict::indistinguishable;
    return c;
}

std::string to_string(IsotopyVerdict v) {
    return v == IsotopyVerdict::distinct ? "distinct" : "indistinguishable";
}

}  // namespace csflow
