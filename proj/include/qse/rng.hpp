// rng.hpp — seeded random stream with a fixed draw discipline.
//
// std::normal_distribution is implementation-defined, so Gaussian draws are
// generated here by Box–Muller on top of mt19937_64 (whose output sequence
// the standard pins down). One RandomStream is owned by one caller at a time;
// parallel work derives independent streams with derive_seed.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include "qse/tensor.hpp"

namespace qse {

class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    // Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    // Standard real normal, one Box–Muller pair per two calls.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    // Circularly symmetric standard complex normal: E[z conj(z)] = 1,
    // so the real and imaginary parts each carry variance 1/2.
    Complex complex_gaussian() {
        const double re = gaussian();
        const double im = gaussian();
        return Complex(re, im) / std::sqrt(2.0);
    }

    CVector complex_gaussian_vector(Eigen::Index n) {
        CVector v(n);
        for (Eigen::Index k = 0; k < n; ++k) v(k) = complex_gaussian();
        return v;
    }

    CMatrix complex_gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
        CMatrix m(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = complex_gaussian();
        return m;
    }

    std::uint64_t raw() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Documented seed-derivation rule for parallel runs: run k uses base + k.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t run_index) {
    return base + run_index;
}

}  // namespace qse
