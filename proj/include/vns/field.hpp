#pragma once

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "vns/errors.hpp"
#include "vns/grid.hpp"

namespace vns {

namespace detail {

/// Process-wide FFTW plan registry. Plans are created once per (dim, n,
/// direction) with FFTW_ESTIMATE, which is deterministic, and executed on
/// caller buffers via the new-array interface (FFTW_UNALIGNED keeps that
/// legal for std::vector storage).
class FftPlans {
public:
    static FftPlans& instance() {
        static FftPlans p;
        return p;
    }

    void execute(const TorusGrid& grid, int sign, std::complex<double>* in,
                 std::complex<double>* out) {
        fftw_plan plan = acquire(grid, sign);
        fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in),
                         reinterpret_cast<fftw_complex*>(out));
    }

private:
    FftPlans() = default;
    ~FftPlans() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan acquire(const TorusGrid& grid, int sign) {
        std::scoped_lock lock(mutex_);
        auto key = std::make_tuple(grid.dim(), grid.n(), sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<std::complex<double>> scratch_in(grid.size()),
            scratch_out(grid.size());
        std::vector<int> dims(grid.dim(), grid.n());
        fftw_plan plan = fftw_plan_dft(
            grid.dim(), dims.data(),
            reinterpret_cast<fftw_complex*>(scratch_in.data()),
            reinterpret_cast<fftw_complex*>(scratch_out.data()), sign,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("FFTW plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

} // namespace detail

/// Real scalar (components == 1) or vector (components == dim) field on a
/// TorusGrid, with an on-demand spectral cache. The Fourier convention is
/// chosen so that Parseval holds against the normalized Lebesgue measure:
/// coeff(k) = (1/n^d) sum_x v(x) e^{-ik.x} and
/// |v|_{L2}^2 = sum_k |coeff(k)|^2.
class TorusField {
public:
    TorusField() = default;

    TorusField(const TorusGrid& grid, int components)
        : grid_(grid), components_(components),
          values_(grid.size() * components, 0.0) {
        if (components != 1 && components != grid.dim())
            throw std::invalid_argument("TorusField: components must be 1 or dim");
    }

    static TorusField scalar(const TorusGrid& grid) { return TorusField(grid, 1); }
    static TorusField vector(const TorusGrid& grid) {
        return TorusField(grid, grid.dim());
    }

    const TorusGrid& grid() const { return grid_; }
    int components() const { return components_; }
    std::size_t nodes() const { return grid_.size(); }

    double value(int c, std::size_t idx) const {
        return values_[static_cast<std::size_t>(c) * grid_.size() + idx];
    }
    const double* component(int c) const {
        return values_.data() + static_cast<std::size_t>(c) * grid_.size();
    }
    double* mutable_component(int c) {
        invalidate();
        return values_.data() + static_cast<std::size_t>(c) * grid_.size();
    }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() {
        invalidate();
        return values_;
    }

    /// Spectral coefficients, same layout as values (component-major).
    const std::vector<std::complex<double>>& spectrum() const {
        if (!spectrum_) {
            std::vector<std::complex<double>> spec(values_.size());
            std::vector<std::complex<double>> buf(grid_.size());
            const double inv = 1.0 / static_cast<double>(grid_.size());
            for (int c = 0; c < components_; ++c) {
                const double* src = component(c);
                for (std::size_t i = 0; i < grid_.size(); ++i) buf[i] = src[i];
                detail::FftPlans::instance().execute(grid_, FFTW_FORWARD, buf.data(),
                                                     buf.data());
                for (std::size_t i = 0; i < grid_.size(); ++i)
                    spec[static_cast<std::size_t>(c) * grid_.size() + i] = buf[i] * inv;
            }
            spectrum_ = std::move(spec);
        }
        return *spectrum_;
    }

    /// Replace the field contents from spectral coefficients (component-major,
    /// conjugate-symmetric so the inverse transform is real).
    void set_spectrum(std::vector<std::complex<double>> spec) {
        if (spec.size() != values_.size())
            throw std::invalid_argument("set_spectrum: size mismatch");
        std::vector<std::complex<double>> buf(grid_.size());
        for (int c = 0; c < components_; ++c) {
            for (std::size_t i = 0; i < grid_.size(); ++i)
                buf[i] = spec[static_cast<std::size_t>(c) * grid_.size() + i];
            detail::FftPlans::instance().execute(grid_, FFTW_BACKWARD, buf.data(),
                                                 buf.data());
            double* dst = values_.data() + static_cast<std::size_t>(c) * grid_.size();
            for (std::size_t i = 0; i < grid_.size(); ++i) dst[i] = buf[i].real();
        }
        spectrum_ = std::move(spec);
        divergence_free_ = false;
    }

    bool divergence_free() const { return divergence_free_; }
    void set_divergence_free(bool flag) { divergence_free_ = flag; }

    double mean(int c = 0) const {
        const double* src = component(c);
        double s = 0.0;
        for (std::size_t i = 0; i < grid_.size(); ++i) s += src[i];
        return s / static_cast<double>(grid_.size());
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    bool finite() const {
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    void require_finite(const char* who) const {
        if (!finite())
            throw std::invalid_argument(std::string(who) + ": non-finite field values");
    }

    /// L2 norm against the normalized measure, evaluated from samples.
    double l2_norm() const {
        double s = 0.0;
        for (double v : values_) s += v * v;
        return std::sqrt(s / static_cast<double>(grid_.size()));
    }

private:
    void invalidate() {
        spectrum_.reset();
        divergence_free_ = false;
    }

    TorusGrid grid_{};
    int components_ = 1;
    std::vector<double> values_;
    mutable std::optional<std::vector<std::complex<double>>> spectrum_;
    bool divergence_free_ = false;
};

} // namespace vns
