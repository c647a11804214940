#pragma once

#include <cmath>
#include <stdexcept>

#include "dirac_matrices.hpp"
#include "lattice.hpp"
#include "splitting.hpp"

namespace dqw {

// Exact lattice translation: phi components move down by `sites` along the
// axis, chi components up, with periodic wrap. Pure index remapping, no
// arithmetic on the amplitudes.
inline SpinorField stream(const SpinorField& f, Axis axis, std::int64_t sites) {
    const LatticeSpec& spec = f.spec;
    const std::int64_t n[3] = {spec.points(Axis::X), spec.points(Axis::Y), spec.points(Axis::Z)};
    const int ax = static_cast<int>(axis);
    const std::int64_t na = n[ax];
    SpinorField out(spec);
    for (int s = 0; s < 4; ++s) {
        // new[idx] = old[idx + d] along the axis; phi reads ahead, chi behind
        const std::int64_t d = ((s < 2 ? sites : -sites) % na + na) % na;
        for (std::int64_t i = 0; i < n[0]; ++i)
            for (std::int64_t j = 0; j < n[1]; ++j)
                for (std::int64_t k = 0; k < n[2]; ++k) {
                    std::int64_t src[3] = {i, j, k};
                    src[ax] = (src[ax] + d) % na;
                    out.at(s, i, j, k) = f.at(s, src[0], src[1], src[2]);
                }
    }
    return out;
}

enum class RotationSense { Forward, Inverse };

inline SpinorField apply_spinor_matrix(const SpinorField& f, const Mat4& m) {
    SpinorField out(f.spec);
    const std::size_t npts = static_cast<std::size_t>(f.spec.total_points());
    for (std::size_t p = 0; p < npts; ++p) {
        for (int r = 0; r < 4; ++r) {
            cd acc = 0.0;
            for (int c = 0; c < 4; ++c) {
                const cd v = m(r, c);
                if (v != cd(0.0)) acc += v * f.amps[c * npts + p];
            }
            out.amps[r * npts + p] = acc;
        }
    }
    return out;
}

inline SpinorField spin_rotate(const SpinorField& f, Axis axis,
                               RotationSense sense = RotationSense::Forward) {
    const Mat4 s = spin_rotation_mat(axis);
    return apply_spinor_matrix(f, sense == RotationSense::Forward ? s : s.adjoint());
}

// Q_m: phi components pick up e^{-i m c^2 dt_eff}, chi the conjugate phase.
inline SpinorField apply_mass(const SpinorField& f, double mass, double c, double dt_eff) {
    if (mass == 0.0 || dt_eff == 0.0) return f;
    SpinorField out = f;
    const cd phi_phase = std::polar(1.0, -mass * c * c * dt_eff);
    const cd chi_phase = std::conj(phi_phase);
    const std::size_t npts = static_cast<std::size_t>(f.spec.total_points());
    for (std::size_t p = 0; p < npts; ++p) {
        out.amps[0 * npts + p] *= phi_phase;
        out.amps[1 * npts + p] *= phi_phase;
        out.amps[2 * npts + p] *= chi_phase;
        out.amps[3 * npts + p] *= chi_phase;
    }
    return out;
}

// Q_V: site-local phase e^{-i e V(x, t) dt_eff} on all four components.
inline SpinorField apply_scalar_potential(const SpinorField& f, const Potentials& pot, double t,
                                          double dt_eff) {
    if (pot.scalar_kind == ScalarKind::Zero || dt_eff == 0.0) return f;
    const LatticeSpec& spec = f.spec;
    SpinorField out = f;
    const std::size_t npts = static_cast<std::size_t>(spec.total_points());
    const std::int64_t ny = spec.points(Axis::Y), nz = spec.points(Axis::Z);
    for (std::size_t p = 0; p < npts; ++p) {
        const std::int64_t k = static_cast<std::int64_t>(p) % nz;
        const std::int64_t j = (static_cast<std::int64_t>(p) / nz) % ny;
        const std::int64_t i = static_cast<std::int64_t>(p) / (ny * nz);
        const double v = pot.scalar_at(spec, i, j, k, t);
        if (!std::isfinite(v)) throw std::domain_error("scalar potential returned a non-finite value");
        const cd phase = std::polar(1.0, -pot.charge * v * dt_eff);
        for (int s = 0; s < 4; ++s) out.amps[s * npts + p] *= phase;
    }
    return out;
}

// Q_A = exp(+i e dt_eff alpha.A), evaluated exactly per 2x2 Weyl block:
// (H (x) I) diag(Q^dag, Q) (H (x) I) with Q = exp(-i sigma.(e dt_eff A)).
inline Mat4 vector_potential_mat(const Vec3& a, double charge, double dt_eff) {
    const double wx = charge * dt_eff * a[0];
    const double wy = charge * dt_eff * a[1];
    const double wz = charge * dt_eff * a[2];
    const Mat2 q = su2_exp(wx, wy, wz);
    const Mat2 qd = q.adjoint();
    Mat4 weyl;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) {
            weyl(r, c) = qd(r, c);
            weyl(r + 2, c + 2) = q(r, c);
        }
    const Mat4 h = hadamard_on_s1();
    return h * weyl * h;
}

inline SpinorField apply_vector_potential(const SpinorField& f, const Potentials& pot, double t,
                                          double dt_eff) {
    if (!pot.has_vector() || dt_eff == 0.0) return f;
    if (!pot.magnetic_mode)
        return apply_spinor_matrix(f, vector_potential_mat(pot.vector_at(t), pot.charge, dt_eff));

    const LatticeSpec& spec = f.spec;
    SpinorField out(spec);
    const std::size_t npts = static_cast<std::size_t>(spec.total_points());
    const std::int64_t ny = spec.points(Axis::Y), nz = spec.points(Axis::Z);
    for (std::size_t p = 0; p < npts; ++p) {
        const std::int64_t k = static_cast<std::int64_t>(p) % nz;
        const std::int64_t j = (static_cast<std::int64_t>(p) / nz) % ny;
        const std::int64_t i = static_cast<std::int64_t>(p) / (ny * nz);
        const Mat4 m = vector_potential_mat(pot.vector_at(centroid(spec, i, j, k), t), pot.charge,
                                            dt_eff);
        for (int r = 0; r < 4; ++r) {
            cd acc = 0.0;
            for (int c = 0; c < 4; ++c) acc += m(r, c) * f.amps[c * npts + p];
            out.amps[r * npts + p] = acc;
        }
    }
    return out;
}

struct EulerAngles {
    double delta = 0.0;
    double theta = 0.0;
    double xi = 0.0;
    cd phase = 1.0; // Q = phase * Rz(delta) Ry(theta) Rz(xi)
};

// ZYZ angles of Q = exp(-i e dt_eff sigma.A) via the closed-form relations,
// with a direct factorization fallback near the degenerate cosine.
inline EulerAngles euler_angles(const Vec3& a, double dt_eff, double charge) {
    const double wx = charge * dt_eff * a[0];
    const double wy = charge * dt_eff * a[1];
    const double wz = charge * dt_eff * a[2];
    const double w = std::sqrt(wx * wx + wy * wy + wz * wz);
    EulerAngles e;
    if (w == 0.0) return e;

    const Mat2 q = su2_exp(wx, wy, wz);
    const double avg = std::atan((wz / w) * std::tan(w)); // (delta+xi)/2
    bool ok = std::abs(std::cos(avg)) >= 1e-14 && std::isfinite(avg);
    if (ok) {
        const double diff = (wx == 0.0 && wy == 0.0) ? 0.0 : std::atan2(wx, wy);
        double carg = std::cos(w) / std::cos(avg);
        carg = std::clamp(carg, -1.0, 1.0);
        e.theta = 2.0 * std::acos(carg);
        e.delta = avg - diff;
        e.xi = avg + diff;
        const Mat2 m = rz_mat(e.delta) * ry_mat(e.theta) * rz_mat(e.xi);
        // largest entry fixes the residual global sign
        std::size_t best = 0;
        for (std::size_t i = 1; i < 4; ++i)
            if (std::abs(m.a[i]) > std::abs(m.a[best])) best = i;
        const cd ph = q.a[best] / m.a[best];
        if (std::abs(std::abs(ph) - 1.0) < 1e-9) {
            e.phase = ph / std::abs(ph);
            Mat2 aligned = e.phase * m;
            ok = aligned.max_abs_diff(q) <= 1e-12;
        } else {
            ok = false;
        }
    }
    if (!ok) {
        const ZyzAngles z = zyz_decompose(q);
        e.delta = z.delta;
        e.theta = z.theta;
        e.xi = z.xi;
        e.phase = std::polar(1.0, z.phase);
    }
    return e;
}

// Integer site shift for one streaming step, or throw if the lattice cannot
// represent it exactly.
inline std::int64_t streaming_sites(const LatticeSpec& spec, const Rational& coeff) {
    const Rational sites = coeff * Rational(spec.twice_n_star, 2);
    if (!sites.is_integer())
        throw std::invalid_argument(
            "step: streaming coefficient not representable as integer sites on this lattice "
            "(coefficient " + coeff.str() + ", N* = " + Rational(spec.twice_n_star, 2).str() +
            "); use a refined lattice");
    return sites.num();
}

// One full split-operator step of the scheme at time t.
inline SpinorField step(const SpinorField& f, const SplittingScheme& scheme, const Potentials& pot,
                        double t) {
    const LatticeSpec& spec = f.spec;
    SpinorField cur = f;
    for (const SplitStep& st : scheme.steps) {
        switch (st.tag) {
            case OpTag::X:
            case OpTag::Y:
            case OpTag::Z: {
                const Axis a = st.tag == OpTag::X ? Axis::X : st.tag == OpTag::Y ? Axis::Y : Axis::Z;
                if (spec.qubits(a) == 0) break; // absent axis: exact identity
                const std::int64_t sites = streaming_sites(spec, st.coeff);
                if (sites % spec.points(a) == 0) break; // whole-lattice shift: exact identity
                cur = spin_rotate(cur, a, RotationSense::Inverse);
                cur = stream(cur, a, sites);
                cur = spin_rotate(cur, a, RotationSense::Forward);
                break;
            }
            case OpTag::M:
                cur = apply_mass(cur, pot.mass, spec.c, st.coeff.value() * spec.dt);
                break;
            case OpTag::V:
                cur = apply_scalar_potential(cur, pot, t + st.time_offset.value() * spec.dt,
                                             st.coeff.value() * spec.dt);
                break;
            case OpTag::A:
                cur = apply_vector_potential(cur, pot, t + st.time_offset.value() * spec.dt,
                                             st.coeff.value() * spec.dt);
                break;
            case OpTag::TimeShift:
                break; // evaluation times are carried by the per-step offsets
        }
    }
    return cur;
}

inline SpinorField evolve(const SpinorField& f, const SplittingScheme& scheme, const Potentials& pot,
                          double t0, int n_steps) {
    SpinorField cur = f;
    for (int k = 0; k < n_steps; ++k) cur = step(cur, scheme, pot, t0 + k * f.spec.dt);
    return cur;
}

} // namespace dqw
