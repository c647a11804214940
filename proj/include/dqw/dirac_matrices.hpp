#pragma once

#include <stdexcept>

#include "lattice.hpp"
#include "smallmat.hpp"

namespace dqw {

// Dirac representation: alpha_a = offdiag(sigma_a, sigma_a), beta = diag(I, -I).
inline Mat4 alpha_mat(Axis a) {
    const Mat2 s = (a == Axis::X) ? pauli_x() : (a == Axis::Y) ? pauli_y() : pauli_z();
    Mat4 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            m(r, c + 2) = s(r, c);
            m(r + 2, c) = s(r, c);
        }
    return m;
}

inline Mat4 beta_mat() {
    Mat4 m;
    m(0, 0) = m(1, 1) = 1.0;
    m(2, 2) = m(3, 3) = -1.0;
    return m;
}

// S_a = (beta + alpha_a)/sqrt(2); Hermitian, involutory, S_a alpha_a S_a = beta.
inline Mat4 spin_rotation_mat(Axis a) {
    return cd(1.0 / std::sqrt(2.0)) * (beta_mat() + alpha_mat(a));
}

// Weyl (chiral) representation: alpha~_a = diag(sigma_a, -sigma_a).
inline Mat4 weyl_alpha_mat(Axis a) {
    const Mat2 s = (a == Axis::X) ? pauli_x() : (a == Axis::Y) ? pauli_y() : pauli_z();
    Mat4 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            m(r, c) = s(r, c);
            m(r + 2, c + 2) = -s(r, c);
        }
    return m;
}

inline Mat4 hadamard_on_s1() {
    const double s = 1.0 / std::sqrt(2.0);
    Mat4 m;
    for (int i = 0; i < 2; ++i) {
        m(i, i) = s;
        m(i, i + 2) = s;
        m(i + 2, i) = s;
        m(i + 2, i + 2) = -s;
    }
    return m;
}

// Structural identities of the representation; cheap enough to run at startup.
inline void verify_representation() {
    const Mat4 id = Mat4::identity();
    for (Axis a : {Axis::X, Axis::Y, Axis::Z}) {
        const Mat4 S = spin_rotation_mat(a);
        if ((S * S).max_abs_diff(id) > 1e-14)
            throw std::logic_error("dirac matrices: S_a not involutory");
        if ((S.adjoint() * alpha_mat(a) * S).max_abs_diff(beta_mat()) > 1e-14)
            throw std::logic_error("dirac matrices: S_a does not diagonalize alpha_a");
        const Mat4 H = hadamard_on_s1();
        if ((H * weyl_alpha_mat(a) * H).max_abs_diff(alpha_mat(a)) > 1e-14)
            throw std::logic_error("dirac matrices: Weyl conjugation identity failed");
    }
}

} // namespace dqw
