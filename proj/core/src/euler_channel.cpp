#include "csflow/euler_channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace csflow {

namespace {

constexpr double kPi = std::numbers::pi;

double weight(const Grid& g, std::size_t q) {
    return (q == 0 || (g.n1 % 2 == 0 && q == g.n1 / 2)) ? 1.0 : 2.0;
}

double wavenumber2(const Grid& g, std::size_t q, std::size_t n) {
    const double a = g.alpha(q);
    const double b = kPi * static_cast<double>(n);
    return a * a + b * b;
}

bool all_finite(const std::vector<cplx>& v) {
    for (const auto& c : v)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
    return true;
}

// Curl-type sine coefficients (vorticity or force curl) to the two velocity
// components: u1 in the cosine layout, u2 in the sine layout.
void curl_to_components(const Grid& g, const std::vector<cplx>& curl, double mean,
                        std::vector<cplx>& c1, std::vector<cplx>& s2) {
    const std::size_t h = g.half();
    c1.assign(g.modes(), 0.0);
    s2.assign(g.modes(), 0.0);
    c1[0] = mean;
    for (std::size_t n = 1; n <= g.n2; ++n) {
        for (std::size_t q = 0; q < h; ++q) {
            const cplx psi = curl[(n - 1) * h + q] / wavenumber2(g, q, n);
            if (n < g.n2) c1[n * h + q] = kPi * static_cast<double>(n) * psi;
            s2[(n - 1) * h + q] = cplx(0.0, -g.alpha(q)) * psi;
        }
    }
}

}  // namespace

FlowState FlowState::zero(const Grid& grid) {
    grid.validate();
    FlowState s;
    s.grid = grid;
    s.omega_hat.assign(grid.modes(), 0.0);
    return s;
}

ForceField ForceField::zero(const Grid& grid) {
    grid.validate();
    ForceField f;
    f.grid = grid;
    f.curl_hat.assign(grid.modes(), 0.0);
    return f;
}

double ForceField::norm() const {
    const std::size_t h = grid.half();
    double s = 0.0;
    for (std::size_t n = 1; n <= grid.n2; ++n)
        for (std::size_t q = 0; q < h; ++q)
            s += weight(grid, q) * std::norm(curl_hat[(n - 1) * h + q]) / wavenumber2(grid, q, n);
    return std::sqrt(grid.length * (mean_accel * mean_accel + 0.5 * s));
}

double biweight_transform(double z) {
    z = std::abs(z);
    if (z < 1e-2) {
        const double z2 = z * z;
        return 1.0 - z2 / 14.0 + z2 * z2 / 504.0;
    }
    const double z2 = z * z;
    return 15.0 * ((3.0 - z2) * std::sin(z) - 3.0 * z * std::cos(z)) / (z2 * z2 * z);
}

std::vector<double> mollified_cosine_coefficients(const StepProfile& p, double mollify_width,
                                                  std::size_t count) {
    if (!(mollify_width > 0.0)) throw std::invalid_argument("mollify_width must be positive");
    std::vector<double> a(count, 0.0);
    if (count == 0) return a;
    a[0] = momentum(p);
    const auto bp = p.breakpoints();
    for (std::size_t n = 1; n < count; ++n) {
        const double k = kPi * static_cast<double>(n);
        double s = 0.0;
        for (std::size_t j = 0; j < p.segment_count(); ++j)
            s += p.value(j) * (std::sin(k * bp[j + 1]) - std::sin(k * bp[j]));
        a[n] = 2.0 * s / k * biweight_transform(k * mollify_width);
    }
    return a;
}

FlowState from_profile(const StepProfile& p, double mollify_width, const Grid& grid) {
    grid.validate();
    if (!(mollify_width > 0.0)) throw std::invalid_argument("from_profile: mollify_width must be positive");
    if (2.0 * mollify_width * static_cast<double>(grid.n2) < 4.0)
        throw std::invalid_argument("from_profile: grid too coarse for the mollifier width");
    FlowState s = FlowState::zero(grid);
    const auto a = mollified_cosine_coefficients(p, mollify_width, grid.n2 + 1);
    s.bulk = a[0];
    const std::size_t h = grid.half();
    for (std::size_t n = 1; n <= grid.n2; ++n)
        if (3 * n < 2 * grid.n2) s.omega_hat[(n - 1) * h] = kPi * static_cast<double>(n) * a[n];
    return s;
}

ChannelSolver::ChannelSolver(const Grid& grid, StepOptions options)
    : grid_(grid), opt_(options), ops_(grid) {
    const std::size_t m = grid_.modes();
    for (auto* v : {&work_, &k1_, &k2_, &k3_, &k4_, &stage_}) v->assign(m, 0.0);
    for (auto* v : {&u1_, &u2_, &d1w_, &d2w_, &prod_}) v->assign(grid_.points(), 0.0);
}

void ChannelSolver::advection(const std::vector<cplx>& w, double bulk, std::vector<cplx>& out) {
    const Grid& g = grid_;
    const std::size_t h = g.half();
    std::vector<cplx> c1, s2;
    curl_to_components(g, w, bulk, c1, s2);
    ops_.cosine_to_physical(c1.data(), u1_.data());
    ops_.sine_to_physical(s2.data(), u2_.data());

    // d1 omega (sine) and d2 omega (cosine)
    for (std::size_t n = 1; n <= g.n2; ++n)
        for (std::size_t q = 0; q < h; ++q) s2[(n - 1) * h + q] = cplx(0.0, g.alpha(q)) * w[(n - 1) * h + q];
    std::fill(c1.begin(), c1.end(), 0.0);
    for (std::size_t n = 1; n < g.n2; ++n)
        for (std::size_t q = 0; q < h; ++q)
            c1[n * h + q] = kPi * static_cast<double>(n) * w[(n - 1) * h + q];
    ops_.sine_to_physical(s2.data(), d1w_.data());
    ops_.cosine_to_physical(c1.data(), d2w_.data());

    for (std::size_t i = 0; i < g.points(); ++i) prod_[i] = u1_[i] * d1w_[i] + u2_[i] * d2w_[i];
    out.resize(g.modes());
    ops_.physical_to_sine(prod_.data(), out.data());
    ops_.dealias_sine(out.data());
}

void ChannelSolver::step(FlowState& state, double dt, const ForceField& force) {
    step(state, dt, [&force](double, ForceField& out) { out = force; });
}

void ChannelSolver::step(FlowState& state, double dt) {
    step(state, dt, ForceField::zero(grid_));
}

void ChannelSolver::step(FlowState& state, double dt, const ForceFunction& force) {
    if (!(state.grid == grid_)) throw std::invalid_argument("ChannelSolver: state grid mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("ChannelSolver: dt must be positive");
    if (omega_ref_ < 0.0) {
        const auto w = vorticity(state);
        omega_ref_ = 0.0;
        for (double x : w) omega_ref_ = std::max(omega_ref_, std::abs(x));
    }
    const double c = cfl(state, dt);
    if (!(c <= opt_.max_cfl))
        throw NumericalError("CFL number " + std::to_string(c) + " exceeds " +
                             std::to_string(opt_.max_cfl));

    const Grid& g = grid_;
    const std::size_t m = g.modes();
    auto eval = [&](const std::vector<cplx>& w, double bulk, const ForceField& f,
                    std::vector<cplx>& dw, double& db) {
        advection(w, bulk, dw);
        for (std::size_t i = 0; i < m; ++i) dw[i] = f.curl_hat[i] - dw[i];
        ops_.dealias_sine(dw.data());
        db = f.mean_accel;
    };

    force(state.t, f_start_);
    force(state.t + 0.5 * dt, f_mid_);
    force(state.t + dt, f_end_);
    for (const ForceField* f : {&f_start_, &f_mid_, &f_end_})
        if (!(f->grid == g) || f->curl_hat.size() != m)
            throw std::invalid_argument("ChannelSolver: force grid mismatch");

    const auto& w0 = state.omega_hat;
    const double b0 = state.bulk;
    double d1, d2, d3, d4;
    eval(w0, b0, f_start_, k1_, d1);
    for (std::size_t i = 0; i < m; ++i) stage_[i] = w0[i] + 0.5 * dt * k1_[i];
    eval(stage_, b0 + 0.5 * dt * d1, f_mid_, k2_, d2);
    for (std::size_t i = 0; i < m; ++i) stage_[i] = w0[i] + 0.5 * dt * k2_[i];
    eval(stage_, b0 + 0.5 * dt * d2, f_mid_, k3_, d3);
    for (std::size_t i = 0; i < m; ++i) stage_[i] = w0[i] + dt * k3_[i];
    eval(stage_, b0 + dt * d3, f_end_, k4_, d4);

    for (std::size_t i = 0; i < m; ++i)
        state.omega_hat[i] = w0[i] + dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    state.bulk = b0 + dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    state.t += dt;
    check(state);
}

void ChannelSolver::check(const FlowState& state) {
    if (!all_finite(state.omega_hat) || !std::isfinite(state.bulk))
        throw NumericalError("non-finite coefficients after step at t = " + std::to_string(state.t));
    const auto w = vorticity(state);
    double mx = 0.0;
    for (double x : w) mx = std::max(mx, std::abs(x));
    if (mx > opt_.blowup_factor * std::max(omega_ref_, 1.0))
        throw NumericalError("vorticity blow-up guard tripped at t = " + std::to_string(state.t));
}

std::vector<double> ChannelSolver::vorticity(const FlowState& state) {
    std::vector<double> out(grid_.points());
    ops_.sine_to_physical(state.omega_hat.data(), out.data());
    return out;
}

void ChannelSolver::velocity(const FlowState& state, std::vector<double>& u1,
                             std::vector<double>& u2) {
    std::vector<cplx> c1, s2;
    curl_to_components(grid_, state.omega_hat, state.bulk, c1, s2);
    u1.resize(grid_.points());
    u2.resize(grid_.points());
    ops_.cosine_to_physical(c1.data(), u1.data());
    ops_.sine_to_physical(s2.data(), u2.data());
}

void ChannelSolver::force_components(const ForceField& f, std::vector<double>& f1,
                                     std::vector<double>& f2) {
    std::vector<cplx> c1, s2;
    curl_to_components(grid_, f.curl_hat, f.mean_accel, c1, s2);
    f1.resize(grid_.points());
    f2.resize(grid_.points());
    ops_.cosine_to_physical(c1.data(), f1.data());
    ops_.sine_to_physical(s2.data(), f2.data());
}

std::vector<double> ChannelSolver::mean_profile(const FlowState& state) {
    const Grid& g = grid_;
    const std::size_t h = g.half();
    std::vector<cplx> c(g.modes(), 0.0);
    c[0] = state.bulk;
    for (std::size_t n = 1; n < g.n2; ++n)
        c[n * h] = state.omega_hat[(n - 1) * h].real() / (kPi * static_cast<double>(n));
    std::vector<double> phys(g.points());
    ops_.cosine_to_physical(c.data(), phys.data());
    std::vector<double> out(g.n2);
    for (std::size_t m = 0; m < g.n2; ++m) out[m] = phys[m * g.n1];
    return out;
}

double ChannelSolver::cfl(const FlowState& state, double dt) {
    velocity(state, u1_, u2_);
    double umax = 0.0;
    for (std::size_t i = 0; i < grid_.points(); ++i)
        umax = std::max(umax, std::hypot(u1_[i], u2_[i]));
    return umax * dt / std::min(grid_.dx1(), grid_.dx2());
}

Diagnostics ChannelSolver::diagnostics(const FlowState& state) {
    const Grid& g = grid_;
    const std::size_t h = g.half();
    Diagnostics d;
    d.t = state.t;
    double e = 0.0, z = 0.0;
    for (std::size_t n = 1; n <= g.n2; ++n) {
        for (std::size_t q = 0; q < h; ++q) {
            const double a2 = std::norm(state.omega_hat[(n - 1) * h + q]);
            e += weight(g, q) * a2 / wavenumber2(g, q, n);
            z += weight(g, q) * a2;
        }
    }
    d.energy = 0.5 * g.length * (state.bulk * state.bulk + 0.5 * e);
    d.enstrophy = 0.25 * g.length * z;
    d.momentum = g.length * state.bulk;

    // n = 1, 2 exactly from the coefficients; 3, 4 by midpoint sums
    for (std::size_t n = 1; n <= g.n2; n += 2)
        d.moments[0] += 2.0 * g.length * state.omega_hat[(n - 1) * h].real() /
                        (kPi * static_cast<double>(n));
    d.moments[1] = 2.0 * d.enstrophy;
    const auto w = vorticity(state);
    const double cell = g.dx1() * g.dx2();
    for (double x : w) {
        d.moments[2] += x * x * x * cell;
        d.moments[3] += x * x * x * x * cell;
    }
    velocity(state, u1_, u2_);
    for (std::size_t i = 0; i < g.points(); ++i)
        d.linf_u = std::max(d.linf_u, std::hypot(u1_[i], u2_[i]));
    return d;
}

FlowState ChannelSolver::state_from_fields(const std::vector<double>& vorticity,
                                           const std::vector<double>& mean_profile, double t) {
    if (vorticity.size() != grid_.points() || mean_profile.size() != grid_.n2)
        throw std::invalid_argument("state_from_fields: field size does not match the grid");
    FlowState s = FlowState::zero(grid_);
    s.t = t;
    ops_.physical_to_sine(vorticity.data(), s.omega_hat.data());
    ops_.dealias_sine(s.omega_hat.data());
    // midpoint average of cos(n pi x2) vanishes for 0 < n < N2
    double sum = 0.0;
    for (double u : mean_profile) sum += u;
    s.bulk = sum / static_cast<double>(grid_.n2);
    return s;
}

FlowState upsample(const FlowState& state, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("upsample: factor must be >= 1");
    const Grid& g = state.grid;
    Grid fine{g.n1 * factor, g.n2 * factor, g.length};
    FlowState out = FlowState::zero(fine);
    out.t = state.t;
    out.bulk = state.bulk;
    const std::size_t h = g.half();
    const std::size_t hf = fine.half();
    for (std::size_t n = 0; n < g.n2; ++n)
        for (std::size_t q = 0; q < h; ++q) {
            cplx c = state.omega_hat[n * h + q];
            // coarse Nyquist column is counted once; on the fine grid it is a
            // regular mode counted with its conjugate
            if (q + 1 == h && factor > 1) c = 0.5 * c.real();
            out.omega_hat[n * hf + q] = c;
        }
    return out;
}

FlowState step(const FlowState& state, double dt, const ForceField& force) {
    ChannelSolver solver(state.grid);
    FlowState out = state;
    solver.step(out, dt, force);
    return out;
}

Diagnostics diagnostics(const FlowState& state) {
    ChannelSolver solver(state.grid);
    return solver.diagnostics(state);
}

}  // namespace csflow
