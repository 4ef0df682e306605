#include "csflow/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace csflow {

namespace {

// FFTW's planner is not thread safe; execution is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

void Grid::validate() const {
    if (n1 < 4 || n1 % 2 != 0) throw std::invalid_argument("Grid: N1 must be even and >= 4");
    if (n2 < 4) throw std::invalid_argument("Grid: N2 must be >= 4");
    if (!(length > 0.0) || !std::isfinite(length))
        throw std::invalid_argument("Grid: L must be positive");
}

double Grid::alpha(std::size_t q) const {
    return 2.0 * std::numbers::pi * static_cast<double>(q) / length;
}

struct SpectralOps::Plans {
    std::size_t n1, n2, h;
    double* real_buf = nullptr;      // n2 x n1
    fftw_complex* spec = nullptr;    // n2 x h
    fftw_plan r2c = nullptr, c2r = nullptr;
    fftw_plan dst2 = nullptr, dst3 = nullptr, dct3 = nullptr;

    Plans(std::size_t a, std::size_t b) : n1(a), n2(b), h(a / 2 + 1) {
        std::lock_guard lock(planner_mutex());
        real_buf = fftw_alloc_real(n1 * n2);
        spec = fftw_alloc_complex(n2 * h);
        const int n[] = {static_cast<int>(n1)};
        const int rows = static_cast<int>(n2);
        const int hh = static_cast<int>(h);
        r2c = fftw_plan_many_dft_r2c(1, n, rows, real_buf, nullptr, 1, static_cast<int>(n1), spec,
                                     nullptr, 1, hh, FFTW_ESTIMATE);
        c2r = fftw_plan_many_dft_c2r(1, n, rows, spec, nullptr, 1, hh, real_buf, nullptr, 1,
                                     static_cast<int>(n1), FFTW_ESTIMATE);
        // Along x2 the interleaved complex rows are 2h independent real columns.
        const int m[] = {rows};
        auto* s = reinterpret_cast<double*>(spec);
        const fftw_r2r_kind k2 = FFTW_RODFT10, k3 = FFTW_RODFT01, c3 = FFTW_REDFT01;
        dst2 = fftw_plan_many_r2r(1, m, 2 * hh, s, nullptr, 2 * hh, 1, s, nullptr, 2 * hh, 1, &k2,
                                  FFTW_ESTIMATE);
        dst3 = fftw_plan_many_r2r(1, m, 2 * hh, s, nullptr, 2 * hh, 1, s, nullptr, 2 * hh, 1, &k3,
                                  FFTW_ESTIMATE);
        dct3 = fftw_plan_many_r2r(1, m, 2 * hh, s, nullptr, 2 * hh, 1, s, nullptr, 2 * hh, 1, &c3,
                                  FFTW_ESTIMATE);
        if (!r2c || !c2r || !dst2 || !dst3 || !dct3)
            throw std::runtime_error("SpectralOps: FFTW planning failed");
    }

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        for (fftw_plan p : {r2c, c2r, dst2, dst3, dct3})
            if (p) fftw_destroy_plan(p);
        fftw_free(real_buf);
        fftw_free(spec);
    }

    cplx* spec_c() { return reinterpret_cast<cplx*>(spec); }
};

SpectralOps::SpectralOps(const Grid& grid) : grid_(grid) {
    grid_.validate();
    plans_ = std::make_unique<Plans>(grid_.n1, grid_.n2);
}

SpectralOps::~SpectralOps() = default;

void SpectralOps::sine_to_physical(const cplx* hat, double* phys) {
    Plans& p = *plans_;
    cplx* s = p.spec_c();
    const std::size_t h = p.h;
    // DST-III weights: interior modes enter doubled, the top mode once.
    for (std::size_t n = 0; n + 1 < p.n2; ++n)
        for (std::size_t q = 0; q < h; ++q) s[n * h + q] = 0.5 * hat[n * h + q];
    for (std::size_t q = 0; q < h; ++q) s[(p.n2 - 1) * h + q] = hat[(p.n2 - 1) * h + q];
    fftw_execute(p.dst3);
    fftw_execute(p.c2r);
    std::copy(p.real_buf, p.real_buf + p.n1 * p.n2, phys);
}

void SpectralOps::cosine_to_physical(const cplx* hat, double* phys) {
    Plans& p = *plans_;
    cplx* s = p.spec_c();
    const std::size_t h = p.h;
    for (std::size_t q = 0; q < h; ++q) s[q] = hat[q];
    for (std::size_t n = 1; n < p.n2; ++n)
        for (std::size_t q = 0; q < h; ++q) s[n * h + q] = 0.5 * hat[n * h + q];
    fftw_execute(p.dct3);
    fftw_execute(p.c2r);
    std::copy(p.real_buf, p.real_buf + p.n1 * p.n2, phys);
}

void SpectralOps::physical_to_sine(const double* phys, cplx* hat) {
    Plans& p = *plans_;
    std::copy(phys, phys + p.n1 * p.n2, p.real_buf);
    fftw_execute(p.r2c);
    fftw_execute(p.dst2);
    const cplx* s = p.spec_c();
    const std::size_t h = p.h;
    const double scale = 1.0 / (static_cast<double>(p.n1) * static_cast<double>(p.n2));
    for (std::size_t n = 0; n + 1 < p.n2; ++n)
        for (std::size_t q = 0; q < h; ++q) hat[n * h + q] = scale * s[n * h + q];
    for (std::size_t q = 0; q < h; ++q) hat[(p.n2 - 1) * h + q] = 0.5 * scale * s[(p.n2 - 1) * h + q];
    // q = 0 is real by symmetry; drop round-off
    for (std::size_t n = 0; n < p.n2; ++n) hat[n * h] = hat[n * h].real();
}

void SpectralOps::dealias_sine(cplx* hat) const {
    const std::size_t h = grid_.half();
    for (std::size_t n = 1; n <= grid_.n2; ++n)
        for (std::size_t q = 0; q < h; ++q)
            if (!kept(q, n)) hat[(n - 1) * h + q] = 0.0;
}

}  // namespace csflow
