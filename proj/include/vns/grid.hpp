#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace vns {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Uniform periodic grid on [0, 2pi)^d against the normalized Lebesgue
/// measure (total measure 1). Wavenumbers per axis are {-n/2+1, ..., n/2}.
class TorusGrid {
public:
    TorusGrid() = default;

    TorusGrid(int dim, int n) : dim_(dim), n_(n) {
        if (dim != 2 && dim != 3)
            throw std::invalid_argument("TorusGrid: dim must be 2 or 3");
        if (n < 8 || n % 2 != 0)
            throw std::invalid_argument("TorusGrid: n must be even and >= 8");
        size_ = 1;
        for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);
    }

    int dim() const { return dim_; }
    int n() const { return n_; }
    std::size_t size() const { return size_; }
    double spacing() const { return kTwoPi / n_; }
    /// Cell volume against the normalized measure.
    double cell_volume() const { return 1.0 / static_cast<double>(size_); }

    /// Signed wavenumber for FFT bin i; the Nyquist bin maps to +n/2.
    int wavenumber(int i) const { return i <= n_ / 2 ? i : i - n_; }

    /// Wavenumber used for first derivatives: the unpaired Nyquist mode is
    /// dropped so that spectral derivatives of real fields stay real.
    int deriv_wavenumber(int i) const { return i == n_ / 2 ? 0 : wavenumber(i); }

    std::size_t index(const std::array<int, 3>& c) const {
        std::size_t idx = static_cast<std::size_t>(c[dim_ - 1]);
        for (int a = dim_ - 2; a >= 0; --a)
            idx = idx * n_ + static_cast<std::size_t>(c[a]);
        return idx;
    }

    std::array<int, 3> coords(std::size_t idx) const {
        std::array<int, 3> c{0, 0, 0};
        for (int a = 0; a < dim_; ++a) {
            c[a] = static_cast<int>(idx % n_);
            idx /= n_;
        }
        return c;
    }

    double node(int i) const { return spacing() * i; }

    bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
    bool operator!=(const TorusGrid& o) const { return !(*this == o); }

private:
    int dim_ = 2;
    int n_ = 8;
    std::size_t size_ = 64;
};

/// Wrap a coordinate into [0, 2pi).
inline double wrap_coord(double x) {
    x = std::fmod(x, kTwoPi);
    return x < 0 ? x + kTwoPi : x;
}

} // namespace vns
