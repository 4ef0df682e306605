#include "csflow/control.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace csflow {

namespace {

constexpr double kPi = std::numbers::pi;

double smoothstep(double s) { return s * s * (3.0 - 2.0 * s); }
double smoothstep_rate(double s) { return 6.0 * s * (1.0 - s); }

// Short horizons still need the sin(pi s) envelope resolved in time.
constexpr std::size_t kMinSamples = 32;

std::size_t intervals(double horizon, double max_dt) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(horizon / max_dt - 1e-9)));
}

void check_options(const ControlOptions& opt) {
    opt.grid.validate();
    if (!(opt.solver_dt > 0.0) || !(opt.sample_dt > 0.0))
        throw std::invalid_argument("control: time steps must be positive");
}

// Replay step: solver_dt, reduced so the initial flow runs at CFL <= 0.4.
// The path check in kinematic_transfer allows up to 0.5 with the same step.
double replay_dt(ChannelSolver& solver, const FlowState& start, double horizon,
                 const ControlOptions& opt) {
    const double c = solver.cfl(start, opt.solver_dt);
    const double dt = c > 0.4 ? opt.solver_dt * 0.4 / c : opt.solver_dt;
    return horizon / static_cast<double>(intervals(horizon, dt));
}

// Sine coefficients of g(x2), q = 0 column only.
std::vector<double> sine_coefficients(const Grid& g, const std::function<double(double)>& f) {
    SpectralOps ops(g);
    std::vector<double> phys(g.points());
    for (std::size_t m = 0; m < g.n2; ++m) {
        const double v = f(g.x2(m));
        std::fill(phys.begin() + static_cast<std::ptrdiff_t>(m * g.n1),
                  phys.begin() + static_cast<std::ptrdiff_t>((m + 1) * g.n1), v);
    }
    std::vector<cplx> hat(g.modes());
    ops.physical_to_sine(phys.data(), hat.data());
    std::vector<double> out(g.n2);
    for (std::size_t n = 0; n < g.n2; ++n) out[n] = hat[n * g.half()].real();
    return out;
}

// Piecewise-linear integral of sample norms up to time t.
double partial_cost(const std::vector<double>& times, const std::vector<double>& norms, double t) {
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < times.size(); ++i) {
        const double a = times[i], b = times[i + 1];
        if (t <= a) break;
        if (b <= t) {
            c += 0.5 * (b - a) * (norms[i] + norms[i + 1]);
        } else {
            const double r = (t - a) / (b - a);
            const double nt = norms[i] + r * (norms[i + 1] - norms[i]);
            c += 0.5 * (t - a) * (norms[i] + nt);
            break;
        }
    }
    return c;
}

}  // namespace

ForcingSchedule ForcingSchedule::zero(const Grid& grid, double horizon) {
    if (!(horizon > 0.0)) throw std::invalid_argument("schedule: horizon must be positive");
    ForcingSchedule s;
    s.horizon = horizon;
    s.times = {0.0, horizon};
    s.fields = {ForceField::zero(grid), ForceField::zero(grid)};
    return s;
}

double ForcingSchedule::cost() const {
    double c = 0.0;
    double prev = fields.empty() ? 0.0 : fields.front().norm();
    for (std::size_t i = 1; i < fields.size(); ++i) {
        const double cur = fields[i].norm();
        c += 0.5 * (times[i] - times[i - 1]) * (prev + cur);
        prev = cur;
    }
    return c;
}

void ForcingSchedule::validate() const {
    if (times.size() != fields.size() || times.size() < 2)
        throw std::invalid_argument("schedule: need at least two samples, one field per time");
    if (times.front() != 0.0 || times.back() != horizon || !(horizon > 0.0))
        throw std::invalid_argument("schedule: samples must span [0, horizon]");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] >= times[i - 1])) throw std::invalid_argument("schedule: times must not decrease");
    for (const auto& f : fields)
        if (!(f.grid == fields.front().grid) || f.curl_hat.size() != f.grid.modes())
            throw std::invalid_argument("schedule: fields on different grids");
}

void ForcingSchedule::at(double t, ForceField& out) const {
    if (t < -1e-12 * horizon || t > horizon * (1.0 + 1e-12))
        throw std::out_of_range("schedule: time outside [0, T]");
    // first sample strictly after t; a repeated time resolves to the later one
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.end()) {
        out = fields.back();
        return;
    }
    const std::size_t j = static_cast<std::size_t>(it - times.begin());
    if (j == 0) {
        out = fields.front();
        return;
    }
    const std::size_t i = j - 1;
    const double r = (t - times[i]) / (times[j] - times[i]);
    const ForceField& a = fields[i];
    const ForceField& b = fields[j];
    out.grid = a.grid;
    out.curl_hat.resize(a.curl_hat.size());
    for (std::size_t m = 0; m < a.curl_hat.size(); ++m)
        out.curl_hat[m] = a.curl_hat[m] + r * (b.curl_hat[m] - a.curl_hat[m]);
    out.mean_accel = a.mean_accel + r * (b.mean_accel - a.mean_accel);
}

ForcingSchedule concatenate(const ForcingSchedule& s1, const ForcingSchedule& s2) {
    s1.validate();
    s2.validate();
    if (!(s1.grid() == s2.grid())) throw std::invalid_argument("concatenate: grids differ");
    ForcingSchedule out = s1;
    out.horizon = s1.horizon + s2.horizon;
    for (std::size_t i = 0; i < s2.times.size(); ++i) {
        out.times.push_back(i + 1 == s2.times.size() ? out.horizon : s1.horizon + s2.times[i]);
        out.fields.push_back(s2.fields[i]);
    }
    return out;
}

double mean_profile_distance(const FlowState& s, const StepProfile& p, double mollify_width) {
    const Grid& g = s.grid;
    const FlowState target = from_profile(p, mollify_width, g);
    const std::size_t h = g.half();
    const double d0 = s.bulk - target.bulk;
    double sum = d0 * d0;
    for (std::size_t n = 1; n <= g.n2; ++n) {
        const double d = (s.omega_hat[(n - 1) * h].real() - target.omega_hat[(n - 1) * h].real()) /
                         (kPi * static_cast<double>(n));
        sum += 0.5 * d * d;
    }
    return std::sqrt(sum);
}

ForcingSchedule baseline_ramp(const StepProfile& u, const StepProfile& v, double horizon,
                              const ControlOptions& opt) {
    if (!(horizon > 0.0)) throw std::invalid_argument("baseline_ramp: T must be positive");
    check_options(opt);
    const FlowState a = from_profile(u, opt.mollify_width, opt.grid);
    const FlowState b = from_profile(v, opt.mollify_width, opt.grid);
    ForceField f = ForceField::zero(opt.grid);
    for (std::size_t i = 0; i < f.curl_hat.size(); ++i)
        f.curl_hat[i] = (b.omega_hat[i] - a.omega_hat[i]) / horizon;
    f.mean_accel = (b.bulk - a.bulk) / horizon;
    ForcingSchedule s;
    s.horizon = horizon;
    s.times = {0.0, horizon};
    s.fields = {f, f};
    return s;
}

ForcingSchedule kinematic_transfer(const StepProfile& u, const StepProfile& target, double horizon,
                                   double band_lo, double band_hi, double drift, double amplitude,
                                   const ControlOptions& opt) {
    if (!(horizon > 0.0)) throw std::invalid_argument("kinematic_transfer: T must be positive");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("kinematic_transfer: amplitude must be >= 0");
    check_options(opt);
    const Grid& g = opt.grid;
    const double width = band_hi - band_lo;
    if (!(band_lo >= 0.0 && band_hi <= 1.0 && width > 0.0))
        throw std::invalid_argument("kinematic_transfer: band must lie in [0, 1]");
    if (amplitude > 0.0 && width < 4.0 * g.dx2())
        throw std::invalid_argument("kinematic_transfer: band narrower than 4 grid cells");

    const FlowState a = from_profile(u, opt.mollify_width, g);
    const FlowState b = from_profile(target, opt.mollify_width, g);
    const std::size_t m = g.modes();
    const std::size_t h = g.half();
    std::vector<cplx> delta(m);
    for (std::size_t i = 0; i < m; ++i) delta[i] = b.omega_hat[i] - a.omega_hat[i];

    // cell vorticity profile alpha^2 beta - beta'' with beta = sin^4(theta)
    const double alpha = g.alpha(1);
    const double kb = kPi / width;
    std::vector<double> cell = sine_coefficients(g, [&](double x2) {
        if (x2 <= band_lo || x2 >= band_hi) return 0.0;
        const double th = kb * (x2 - band_lo);
        const double s = std::sin(th), c = std::cos(th);
        const double beta = s * s * s * s;
        const double beta2 = kb * kb * (12.0 * s * s * c * c - 4.0 * s * s * s * s);
        return alpha * alpha * beta - beta2;
    });
    const double scale = amplitude * width * width / horizon;

    ChannelSolver solver(g);
    SpectralOps ops(g);

    const double dt_replay = replay_dt(solver, a, horizon, opt);
    const std::size_t n = std::max<std::size_t>(intervals(horizon, opt.sample_dt), kMinSamples);
    ForcingSchedule sched;
    sched.horizon = horizon;
    FlowState path = FlowState::zero(g);
    std::vector<cplx> dwdt(m), adv;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = i == n ? horizon : horizon * static_cast<double>(i) / static_cast<double>(n);
        const double s = t / horizon;
        const double sig = smoothstep(s);
        const double rate = smoothstep_rate(s) / horizon;
        const double p = scale * std::sin(kPi * s);
        const double dp = scale * kPi / horizon * std::cos(kPi * s);
        // coefficient of sin(alpha (x1 - c t)) at q = 1 is exp(-i alpha c t) / (2i)
        const cplx phase = std::exp(cplx(0.0, -alpha * drift * t)) / cplx(0.0, 2.0);
        for (std::size_t k = 0; k < m; ++k) {
            path.omega_hat[k] = a.omega_hat[k] + sig * delta[k];
            dwdt[k] = rate * delta[k];
        }
        for (std::size_t nn = 1; nn <= g.n2; ++nn) {
            if (!ops.kept(1, nn)) continue;
            const std::size_t k = (nn - 1) * h + 1;
            path.omega_hat[k] += p * cell[nn - 1] * phase;
            dwdt[k] += (dp - cplx(0.0, alpha * drift) * p) * cell[nn - 1] * phase;
        }
        path.bulk = a.bulk + sig * (b.bulk - a.bulk);
        path.t = t;
        const double c = solver.cfl(path, dt_replay);
        if (!(c <= 0.5))
            throw std::invalid_argument("kinematic_transfer: amplitude too large for the grid (CFL " +
                                        std::to_string(c) + ")");
        solver.advection(path.omega_hat, path.bulk, adv);
        ForceField f = ForceField::zero(g);
        for (std::size_t k = 0; k < m; ++k) f.curl_hat[k] = dwdt[k] + adv[k];
        ops.dealias_sine(f.curl_hat.data());
        f.mean_accel = rate * (b.bulk - a.bulk);
        sched.times.push_back(t);
        sched.fields.push_back(std::move(f));
    }
    return sched;
}

namespace {

ForcingSchedule layer_exchange(const StepProfile& p, std::size_t k, double horizon, double amplitude,
                               const Move& move, const ControlOptions& opt) {
    if (k < 1 || k + 1 > p.segment_count())
        throw std::invalid_argument("control: k and k+1 must be segments of the profile");
    if (!(amplitude > 0.0)) throw std::invalid_argument("control: amplitude must be positive");
    if (!(horizon > 0.0)) throw std::invalid_argument("control: T must be positive");
    const auto bp = p.breakpoints();
    const double lo = bp[k - 1];
    const double hi = bp[k + 1];
    const double drift = 0.5 * (p.value(k - 1) + p.value(k));
    return kinematic_transfer(p, apply_move(p, move), horizon, lo, hi, drift, amplitude, opt);
}

}  // namespace

ForcingSchedule transposition_control(const StepProfile& p, std::size_t k, double horizon,
                                      double amplitude, const ControlOptions& opt) {
    return layer_exchange(p, k, horizon, amplitude, Transpose{k}, opt);
}

ForcingSchedule collision_control(const StepProfile& p, std::size_t k, double horizon,
                                  double amplitude, const ControlOptions& opt) {
    return layer_exchange(p, k, horizon, amplitude, Collide{k}, opt);
}

TransferReport verify_transfer(const StepProfile& u, const ForcingSchedule& schedule,
                               const StepProfile& v, const ControlOptions& opt) {
    schedule.validate();
    check_options(opt);
    if (!(schedule.grid() == opt.grid))
        throw std::invalid_argument("verify_transfer: schedule grid differs from the solver grid");
    const Grid& g = opt.grid;
    const double horizon = schedule.horizon;

    std::vector<double> norms;
    norms.reserve(schedule.fields.size());
    for (const auto& f : schedule.fields) norms.push_back(f.norm());

    TransferReport r;
    r.horizon = horizon;
    FlowState state = from_profile(u, opt.mollify_width, g);
    ChannelSolver solver(g);
    const double dt = replay_dt(solver, state, horizon, opt);
    const std::size_t n = intervals(horizon, dt);
    const ForceFunction force = [&schedule, horizon](double t, ForceField& out) {
        schedule.at(std::min(t, horizon), out);
    };
    const std::size_t every = std::max<std::size_t>(1, opt.diagnostics_every);
    auto record = [&] {
        r.diagnostics.push_back(solver.diagnostics(state));
        r.cost_accum.push_back(partial_cost(schedule.times, norms, state.t));
    };
    record();
    for (std::size_t i = 0; i < n; ++i) {
        state.t = horizon * static_cast<double>(i) / static_cast<double>(n);
        solver.step(state, dt, force);
        if ((i + 1) % every == 0 || i + 1 == n) {
            if (i + 1 == n) state.t = horizon;
            record();
        }
    }
    state.t = horizon;
    r.steps = n;
    r.cost = schedule.cost();
    r.endpoint_error = mean_profile_distance(state, v, opt.mollify_width);
    FlowState diff = from_profile(v, opt.mollify_width, g);
    for (std::size_t k = 0; k < diff.omega_hat.size(); ++k)
        diff.omega_hat[k] = state.omega_hat[k] - diff.omega_hat[k];
    diff.bulk = state.bulk - diff.bulk;
    r.field_error = std::sqrt(2.0 * diagnostics(diff).energy / g.length);
    r.final_state = std::move(state);
    return r;
}

namespace {

std::vector<double> hat_weights(std::size_t basis, double s) {
    std::vector<double> w(basis, 0.0);
    if (basis == 1) {
        w[0] = 1.0;
        return w;
    }
    const double x = s * static_cast<double>(basis - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(x), basis - 2);
    const double r = x - static_cast<double>(j);
    w[j] = 1.0 - r;
    w[j + 1] = r;
    return w;
}

ForcingSchedule scaled(const ForcingSchedule& base, const std::vector<double>& mult) {
    ForcingSchedule s = base;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        const auto w = hat_weights(mult.size(), s.times[i] / s.horizon);
        const double f = std::inner_product(w.begin(), w.end(), mult.begin(), 0.0);
        for (auto& c : s.fields[i].curl_hat) c *= f;
        s.fields[i].mean_accel *= f;
    }
    return s;
}

}  // namespace

OptimizeResult optimize_schedule(const StepProfile& u, const StepProfile& v, double horizon,
                                 std::size_t basis_size, double penalty, std::uint64_t seed,
                                 const ControlOptions& opt, const ForcingSchedule* initial,
                                 const OptimizeOptions& oo) {
    if (!(horizon > 0.0)) throw std::invalid_argument("optimize_schedule: T must be positive");
    if (basis_size == 0) throw std::invalid_argument("optimize_schedule: basis_size must be >= 1");
    if (!(penalty >= 0.0)) throw std::invalid_argument("optimize_schedule: penalty must be >= 0");
    const ForcingSchedule base =
        initial ? *initial : kinematic_transfer(u, v, horizon, 0.0, 1.0, 0.0, 0.0, opt);
    if (std::abs(base.horizon - horizon) > 1e-12 * horizon)
        throw std::invalid_argument("optimize_schedule: initial schedule horizon differs from T");

    auto objective = [&](const std::vector<double>& mult) {
        try {
            const auto s = scaled(base, mult);
            const auto rep = verify_transfer(u, s, v, opt);
            return rep.cost + penalty * rep.endpoint_error * rep.endpoint_error;
        } catch (const NumericalError&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    OptimizeResult res;
    std::vector<double> mult(basis_size, 1.0);
    res.initial_objective = objective(mult);
    res.objective = res.initial_objective;
    res.evaluations = 1;

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(basis_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    double delta = oo.initial_step;
    while (delta >= oo.min_step && res.evaluations + 2 <= oo.max_evaluations) {
        std::shuffle(order.begin(), order.end(), rng);
        bool improved = false;
        for (std::size_t j : order) {
            if (res.evaluations + 2 > oo.max_evaluations) break;
            auto up = mult, down = mult;
            up[j] += delta;
            down[j] -= delta;
            auto fu = std::async(std::launch::async, objective, up);
            auto fd = std::async(std::launch::async, objective, down);
            const double ou = fu.get(), od = fd.get();
            res.evaluations += 2;
            const bool take_up = ou <= od;
            const double best = take_up ? ou : od;
            if (best < res.objective) {
                mult = take_up ? up : down;
                res.objective = best;
                res.accepted.push_back(best);
                improved = true;
            }
        }
        if (!improved) delta *= 0.5;
    }
    res.weights = mult;
    res.schedule = scaled(base, mult);
    return res;
}

}  // namespace csflow
