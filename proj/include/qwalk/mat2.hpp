#pragma once

#include "qwalk/grid_state.hpp"

#include <algorithm>
#include <cmath>

namespace qwalk {

/// 2x2 complex matrix, row-major.
struct Mat2 {
    Complex m00{}, m01{}, m10{}, m11{};

    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 zero() { return {}; }
    static Mat2 diag(Complex d0, Complex d1) { return {d0, 0.0, 0.0, d1}; }
    /// R(theta) = (cos -sin; sin cos).
    static Mat2 rotation(double theta) {
        const double c = std::cos(theta), s = std::sin(theta);
        return {c, -s, s, c};
    }

    Complex operator()(int i, int j) const {
        return i == 0 ? (j == 0 ? m00 : m01) : (j == 0 ? m10 : m11);
    }

    Mat2 adjoint() const { return {std::conj(m00), std::conj(m10), std::conj(m01), std::conj(m11)}; }
    Complex det() const { return m00 * m11 - m01 * m10; }
    Complex trace() const { return m00 + m11; }

    Spinor apply(const Spinor& v) const { return {m00 * v.c1 + m01 * v.c2, m10 * v.c1 + m11 * v.c2}; }

    friend Mat2 operator*(const Mat2& a, const Mat2& b) {
        return {a.m00 * b.m00 + a.m01 * b.m10, a.m00 * b.m01 + a.m01 * b.m11,
                a.m10 * b.m00 + a.m11 * b.m10, a.m10 * b.m01 + a.m11 * b.m11};
    }
    friend Mat2 operator*(Complex s, const Mat2& a) { return {s * a.m00, s * a.m01, s * a.m10, s * a.m11}; }
    friend Mat2 operator+(const Mat2& a, const Mat2& b) {
        return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
    }
    friend Mat2 operator-(const Mat2& a, const Mat2& b) {
        return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
    }
    friend bool operator==(const Mat2&, const Mat2&) = default;
};

/// e^{i phi}. Small phases, the common case for dispersed states, use a
/// Taylor polynomial accurate to ~1e-19 instead of sin/cos.
inline Complex cis(double phi) {
    if (std::abs(phi) < 1e-2) {
        const double q = phi * phi;
        const double re = 1.0 - q / 2.0 * (1.0 - q / 12.0 * (1.0 - q / 30.0 * (1.0 - q / 56.0)));
        const double im = phi * (1.0 - q / 6.0 * (1.0 - q / 20.0 * (1.0 - q / 42.0 * (1.0 - q / 72.0))));
        return {re, im};
    }
    return {std::cos(phi), std::sin(phi)};
}

/// e^{i phi} - 1 without cancellation.
inline Complex cis_minus_one(double phi) {
    if (std::abs(phi) < 1e-2) {
        const double q = phi * phi;
        const double re = -q / 2.0 * (1.0 - q / 12.0 * (1.0 - q / 30.0 * (1.0 - q / 56.0)));
        const double im = phi * (1.0 - q / 6.0 * (1.0 - q / 20.0 * (1.0 - q / 42.0 * (1.0 - q / 72.0))));
        return {re, im};
    }
    const double h = std::sin(0.5 * phi);
    return {-2.0 * h * h, std::sin(phi)};
}

/// Largest singular value, closed form for 2x2: sigma_max^2 is the top
/// eigenvalue of A*A.
inline double operator_norm(const Mat2& a) {
    const double fro = std::norm(a.m00) + std::norm(a.m01) + std::norm(a.m10) + std::norm(a.m11);
    const double d = std::abs(a.det());
    const double disc = std::max(0.0, fro * fro - 4.0 * d * d);
    return std::sqrt(std::max(0.0, 0.5 * (fro + std::sqrt(disc))));
}

inline double max_abs_entry(const Mat2& a) {
    return std::max({std::abs(a.m00), std::abs(a.m01), std::abs(a.m10), std::abs(a.m11)});
}

/// ||M M* - I|| in operator norm.
inline double unitarity_defect(const Mat2& m) { return operator_norm(m * m.adjoint() - Mat2::identity()); }

} // namespace qwalk
