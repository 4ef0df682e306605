#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <vector>

#include "csflow/profile.hpp"
#include "csflow/spectral.hpp"

namespace csflow {

/// CFL violation, blow-up or non-finite values during time stepping.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vorticity omega = d1 u2 - d2 u1 in the sine basis plus the bulk velocity.
///
/// The mean (x1-averaged) profile is
///     ubar(x2) = bulk + sum_n omega_hat(0, n) / (n pi) cos(n pi x2),
/// so the q = 0 row of omega_hat carries the mean shear and `bulk` the one
/// constant that vorticity does not determine. The velocity is recovered
/// from psi_hat = omega_hat / (alpha^2 + n^2 pi^2) as u = (d2 psi, -d1 psi),
/// which is divergence-free and tangent to the walls by construction.
struct FlowState {
    Grid grid;
    double t = 0.0;
    std::vector<cplx> omega_hat;  ///< sine layout, see SpectralOps
    double bulk = 0.0;

    static FlowState zero(const Grid& grid);
};

/// Admissible force f = (d2 chi, -d1 chi) + (m0, 0) stored as its curl
/// g = -Laplacian(chi) plus the uniform mean acceleration m0.
struct ForceField {
    Grid grid;
    std::vector<cplx> curl_hat;  ///< sine layout
    double mean_accel = 0.0;

    static ForceField zero(const Grid& grid);

    /// ||f||_{L2} over the channel, exact from the coefficients.
    double norm() const;
    /// d/dt of the momentum integral of u1 produced by this force (L m0).
    double momentum_input() const { return grid.length * mean_accel; }
};

/// Biweight kernel K(s) = 15/(16 w) (1 - (s/w)^2)^2 on |s| < w, as its
/// Fourier transform K^(z) at z = xi w.
double biweight_transform(double z);

/// Parallel flow (U * K)(x2), the profile mollified on its even extension
/// across both walls. Zero non-mean vorticity.
/// Throws std::invalid_argument for width <= 0 or when fewer than 4 grid
/// points fall across the kernel support (2 w N2 < 4).
FlowState from_profile(const StepProfile& p, double mollify_width, const Grid& grid);

/// Cosine coefficients of the mollified profile, n = 0..count-1.
std::vector<double> mollified_cosine_coefficients(const StepProfile& p, double mollify_width,
                                                  std::size_t count);

struct Diagnostics {
    double t = 0.0;
    double energy = 0.0;      ///< 1/2 int |u|^2
    double momentum = 0.0;    ///< int u1
    double enstrophy = 0.0;   ///< 1/2 int omega^2
    std::array<double, 4> moments{};  ///< int omega^n, n = 1..4; 1 and 2 exact, 3 and 4 midpoint sums
    double linf_u = 0.0;
};

using ForceFunction = std::function<void(double t, ForceField& out)>;

struct StepOptions {
    double max_cfl = 0.5;
    double blowup_factor = 1e3;
};

/// Reusable RK4 stepper with its FFTW plans and work arrays.
///
/// The vorticity equation d_t omega + u . grad omega = curl f is advanced in
/// the sine basis with the product formed on the physical grid and truncated
/// by the 2/3 rule; the bulk velocity follows d_t bulk = m0. A parallel flow
/// has u2 = d1 omega = 0, so it is a fixed point bit for bit.
class ChannelSolver {
public:
    explicit ChannelSolver(const Grid& grid, StepOptions options = {});

    const Grid& grid() const { return grid_; }

    /// One RK4 step under a constant force. Throws NumericalError on CFL
    /// violation, non-finite values or vorticity above blowup_factor times
    /// max(initial max |omega|, 1); the first stepped state sets the reference.
    void step(FlowState& state, double dt, const ForceField& force);
    void step(FlowState& state, double dt, const ForceFunction& force);
    void step(FlowState& state, double dt);

    void reset_blowup_reference() { omega_ref_ = -1.0; }

    Diagnostics diagnostics(const FlowState& state);
    double cfl(const FlowState& state, double dt);

    /// Physical fields, row-major with x2 as the row index.
    std::vector<double> vorticity(const FlowState& state);
    void velocity(const FlowState& state, std::vector<double>& u1, std::vector<double>& u2);
    /// Force components on the grid.
    void force_components(const ForceField& f, std::vector<double>& f1, std::vector<double>& f2);
    /// Mean profile ubar at the N2 midpoints.
    std::vector<double> mean_profile(const FlowState& state);

    /// u . grad omega in the sine basis, dealiased. Exposed so that forces
    /// along a prescribed path can be built with the solver's own operator.
    void advection(const std::vector<cplx>& omega_hat, double bulk, std::vector<cplx>& out);

    /// State with the given physical vorticity and mean-profile samples.
    FlowState state_from_fields(const std::vector<double>& vorticity,
                                const std::vector<double>& mean_profile, double t);

private:
    void check(const FlowState& state);

    Grid grid_;
    StepOptions opt_;
    SpectralOps ops_;
    double omega_ref_ = -1.0;
    std::vector<cplx> work_, k1_, k2_, k3_, k4_, stage_;
    std::vector<double> u1_, u2_, d1w_, d2w_, prod_;
    ForceField f_mid_, f_end_, f_start_;
};

/// The same field on a grid `factor` times finer in both directions
/// (coefficients zero-padded, so the represented function is unchanged).
FlowState upsample(const FlowState& state, std::size_t factor);

/// Convenience wrapper: builds a solver and takes one step.
FlowState step(const FlowState& state, double dt, const ForceField& force);

Diagnostics diagnostics(const FlowState& state);

}  // namespace csflow
