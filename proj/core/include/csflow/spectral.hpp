#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

namespace csflow {

using cplx = std::complex<double>;

/// Channel [0, L) x [0, 1], periodic in x1, walls at x2 = 0 and 1.
///
/// Physical samples sit at x1_i = i L / N1 and at the midpoints
/// x2_m = (m + 1/2) / N2, stored row-major with x2 as the row index.
struct Grid {
    std::size_t n1 = 64;
    std::size_t n2 = 64;
    double length = 2.0;

    /// Throws std::invalid_argument unless n1 is even and >= 4, n2 >= 4, L > 0.
    void validate() const;

    std::size_t half() const { return n1 / 2 + 1; }        ///< stored x1 wavenumbers
    std::size_t points() const { return n1 * n2; }
    std::size_t modes() const { return n2 * half(); }      ///< coefficient array size
    double dx1() const { return length / static_cast<double>(n1); }
    double dx2() const { return 1.0 / static_cast<double>(n2); }
    double x1(std::size_t i) const { return dx1() * static_cast<double>(i); }
    double x2(std::size_t m) const { return (static_cast<double>(m) + 0.5) * dx2(); }
    double alpha(std::size_t q) const;                    ///< 2 pi q / L

    bool operator==(const Grid&) const = default;
};

/// Spectral coefficient arrays hold N2 rows of half() complex numbers.
/// Sine arrays: row n-1 carries sin(n pi x2), n = 1..N2.
/// Cosine arrays: row n carries cos(n pi x2), n = 0..N2-1.
/// In x1 the field is sum_q c_q e^{i alpha_q x1} with the negative
/// wavenumbers implied by reality, so c_q is the 1/N1-scaled r2c output.
class SpectralOps {
public:
    explicit SpectralOps(const Grid& grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    const Grid& grid() const { return grid_; }

    void sine_to_physical(const cplx* hat, double* phys);
    void cosine_to_physical(const cplx* hat, double* phys);
    /// Sine coefficients of a physical field; does not dealias.
    void physical_to_sine(const double* phys, cplx* hat);

    /// 2/3 rule: keeps 3q < N1 and 3n < 2 N2 (n the sine index).
    bool kept(std::size_t q, std::size_t n) const {
        return 3 * q < grid_.n1 && 3 * n < 2 * grid_.n2;
    }
    void dealias_sine(cplx* hat) const;

private:
    Grid grid_;
    struct Plans;
    std::unique_ptr<Plans> plans_;
};

}  // namespace csflow
