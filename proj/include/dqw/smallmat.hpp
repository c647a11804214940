#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>

namespace dqw {

using cd = std::complex<double>;

// Max amplitude deviation after rotating b by the phase that makes <a|b>
// real nonnegative.
inline double aligned_max_deviation(std::span<const cd> a, std::span<const cd> b) {
    if (a.size() != b.size()) throw std::invalid_argument("aligned_max_deviation: size mismatch");
    cd ov = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) ov += std::conj(b[i]) * a[i];
    const cd phase = std::abs(ov) > 1e-300 ? ov / std::abs(ov) : cd(1.0);
    double dev = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) dev = std::max(dev, std::abs(a[i] - phase * b[i]));
    return dev;
}

// Fixed-size row-major complex matrices for spinor-space algebra.
template <std::size_t N>
struct SmallMat {
    std::array<cd, N * N> a{};

    cd& operator()(std::size_t r, std::size_t c) { return a[r * N + c]; }
    const cd& operator()(std::size_t r, std::size_t c) const { return a[r * N + c]; }

    static SmallMat identity() {
        SmallMat m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    SmallMat adjoint() const {
        SmallMat m;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) m(c, r) = std::conj((*this)(r, c));
        return m;
    }

    friend SmallMat operator*(const SmallMat& x, const SmallMat& y) {
        SmallMat m;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t k = 0; k < N; ++k) {
                const cd v = x(r, k);
                if (v == cd(0.0)) continue;
                for (std::size_t c = 0; c < N; ++c) m(r, c) += v * y(k, c);
            }
        return m;
    }

    friend SmallMat operator*(cd s, const SmallMat& x) {
        SmallMat m = x;
        for (auto& v : m.a) v *= s;
        return m;
    }

    friend SmallMat operator+(const SmallMat& x, const SmallMat& y) {
        SmallMat m = x;
        for (std::size_t i = 0; i < N * N; ++i) m.a[i] += y.a[i];
        return m;
    }

    friend SmallMat operator-(const SmallMat& x, const SmallMat& y) {
        SmallMat m = x;
        for (std::size_t i = 0; i < N * N; ++i) m.a[i] -= y.a[i];
        return m;
    }

    std::array<cd, N> apply(const std::array<cd, N>& v) const {
        std::array<cd, N> out{};
        for (std::size_t r = 0; r < N; ++r) {
            cd s = 0.0;
            for (std::size_t c = 0; c < N; ++c) s += (*this)(r, c) * v[c];
            out[r] = s;
        }
        return out;
    }

    double max_abs_diff(const SmallMat& o) const {
        double m = 0.0;
        for (std::size_t i = 0; i < N * N; ++i) m = std::max(m, std::abs(a[i] - o.a[i]));
        return m;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (const auto& v : a) s += std::norm(v);
        return std::sqrt(s);
    }
};

using Mat2 = SmallMat<2>;
using Mat4 = SmallMat<4>;

inline Mat2 mat2(cd a, cd b, cd c, cd d) {
    Mat2 m;
    m.a = {a, b, c, d};
    return m;
}

inline Mat2 pauli_x() { return mat2(0, 1, 1, 0); }
inline Mat2 pauli_y() { return mat2(0, cd(0, -1), cd(0, 1), 0); }
inline Mat2 pauli_z() { return mat2(1, 0, 0, -1); }
inline Mat2 hadamard_mat() {
    const double s = 1.0 / std::sqrt(2.0);
    return mat2(s, s, s, -s);
}

// exp(-i theta/2 sigma_a) rotations and the diagonal phase gate.
inline Mat2 rx_mat(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return mat2(c, cd(0, -s), cd(0, -s), c);
}
inline Mat2 ry_mat(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return mat2(c, -s, s, c);
}
inline Mat2 rz_mat(double theta) {
    return mat2(std::polar(1.0, -theta / 2), 0, 0, std::polar(1.0, theta / 2));
}
inline Mat2 phase_mat(double theta) { return mat2(1, 0, 0, std::polar(1.0, theta)); }

// exp(-i sigma . w) in closed form: cos|w| I - i sin|w| (sigma . w)/|w|.
inline Mat2 su2_exp(double wx, double wy, double wz) {
    const double n = std::sqrt(wx * wx + wy * wy + wz * wz);
    if (n == 0.0) return Mat2::identity();
    const double c = std::cos(n), s = std::sin(n) / n;
    Mat2 m;
    m(0, 0) = cd(c, -s * wz);
    m(0, 1) = cd(-s * wy, -s * wx);
    m(1, 0) = cd(s * wy, -s * wx);
    m(1, 1) = cd(c, s * wz);
    return m;
}

// ZYZ factorization u = e^{i phase} Rz(delta) Ry(theta) Rz(xi).
struct ZyzAngles {
    double delta;
    double theta;
    double xi;
    double phase;
};

inline ZyzAngles zyz_decompose(const Mat2& u) {
    const cd det = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
    const double phase = 0.5 * std::arg(det);
    const cd scale = std::polar(1.0, -phase);
    const cd a = u(0, 0) * scale; // e^{-i(delta+xi)/2} cos(theta/2)
    const cd c = u(1, 0) * scale; // e^{+i(delta-xi)/2} sin(theta/2)
    ZyzAngles z{};
    z.phase = phase;
    z.theta = 2.0 * std::atan2(std::abs(c), std::abs(a));
    const double sum = (std::abs(a) > 1e-300) ? -std::arg(a) : 0.0;
    const double diff = (std::abs(c) > 1e-300) ? std::arg(c) : 0.0;
    z.delta = sum + diff;
    z.xi = sum - diff;
    return z;
}

inline Mat2 zyz_compose(const ZyzAngles& z) {
    return std::polar(1.0, z.phase) * (rz_mat(z.delta) * ry_mat(z.theta) * rz_mat(z.xi));
}

} // namespace dqw
