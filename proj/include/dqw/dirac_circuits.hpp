#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "classical_solver.hpp"
#include "qcore.hpp"
#include "splitting.hpp"

namespace dqw {

namespace detail {

inline GateKind controlled_sigma_kind(Axis a) {
    return a == Axis::X ? GateKind::X : a == Axis::Y ? GateKind::Y : GateKind::Z;
}

// Reduced 1-D spinor rotation: (sigma_z + sigma_red)/sqrt(2), where sigma_red
// is sigma_x for the x/z sectors and sigma_y for y.
inline Mat2 reduced_spin_rotation(Axis a) {
    const Mat2 s = (a == Axis::Y) ? pauli_y() : pauli_x();
    return cd(1.0 / std::sqrt(2.0)) * (pauli_z() + s);
}

inline void position_pattern_controls(const RegisterLayout& lay, std::int64_t i, std::int64_t j,
                                       std::int64_t k, std::vector<Control>& out) {
    const std::int64_t idx[3] = {i, j, k};
    for (int a = 0; a < 3; ++a) {
        if (lay.reduced && a != static_cast<int>(lay.reduced_axis)) continue;
        const int nb = lay.spec.n[a];
        for (int b = 0; b < nb; ++b) {
            const bool bit = (idx[a] >> (nb - 1 - b)) & 1;
            out.push_back({lay.axis_wire(static_cast<Axis>(a), b), bit});
        }
    }
}

} // namespace detail

// S_a on the spinor wires: C(sigma_a), H on s1, C(sigma_a). One Hadamard in
// reduced mode (the surviving 2x2 block of S_a).
inline Circuit build_spin_rotation(const RegisterLayout& lay, Axis a) {
    Circuit c(lay.n_total, std::string("spin-rotation-") + "xyz"[static_cast<int>(a)]);
    if (lay.reduced) {
        if (a != lay.reduced_axis)
            throw std::invalid_argument("build_spin_rotation: axis absent in reduced mode");
        if (a == Axis::Y)
            c.add(make_u2_gate(detail::reduced_spin_rotation(a), lay.s1(), {}, GroupTag::SpinRotation));
        else
            c.add(make_gate(GateKind::H, lay.s1(), {}, 0.0, GroupTag::SpinRotation));
        return c;
    }
    const GateKind sigma = detail::controlled_sigma_kind(a);
    c.add(make_gate(sigma, lay.s2(), {{lay.s1(), true}}, 0.0, GroupTag::SpinRotation));
    c.add(make_gate(GateKind::H, lay.s1(), {}, 0.0, GroupTag::SpinRotation));
    c.add(make_gate(sigma, lay.s2(), {{lay.s1(), true}}, 0.0, GroupTag::SpinRotation));
    return c;
}

enum class ShiftDirection { Increment, Decrement };

namespace detail {

// Unit +-1 modular counter on one axis block: a cascade of multi-controlled X
// gates, most-controlled first for increment, mirrored for decrement. Extra
// controls (the spinor condition) are appended to every gate.
inline void emit_unit_shift(Circuit& c, const RegisterLayout& lay, Axis axis, ShiftDirection dir,
                            const std::vector<Control>& extra_controls) {
    const int nb = lay.spec.n[static_cast<int>(axis)];
    std::vector<Gate> gates;
    for (int target_bit = 0; target_bit < nb; ++target_bit) {
        // flip bit iff all less-significant bits are 1
        std::vector<Control> ctl = extra_controls;
        for (int b = target_bit + 1; b < nb; ++b) ctl.push_back({lay.axis_wire(axis, b), true});
        gates.push_back(make_gate(GateKind::X, lay.axis_wire(axis, target_bit), std::move(ctl), 0.0,
                                  GroupTag::Walk));
    }
    if (dir == ShiftDirection::Decrement) std::reverse(gates.begin(), gates.end());
    for (auto& g : gates) c.add(std::move(g));
}

inline int mcx_ancillas_needed(const RegisterLayout& lay, Axis axis, bool conditioned) {
    const int nb = lay.spec.n[static_cast<int>(axis)];
    const int max_controls = std::max(0, nb - 1) + (conditioned ? 1 : 0);
    return std::max(0, max_controls - 2);
}

} // namespace detail

// |v> -> |v +- l mod N_a> on the axis block; l > 1 is l unit shifts.
inline Circuit build_shift(const RegisterLayout& lay, Axis axis, std::int64_t l,
                           ShiftDirection dir) {
    if (l < 1) throw std::invalid_argument("build_shift: l must be >= 1");
    if (lay.spec.n[static_cast<int>(axis)] == 0)
        throw std::invalid_argument("build_shift: axis has no wires");
    if (lay.n_anc < detail::mcx_ancillas_needed(lay, axis, false))
        throw std::invalid_argument("build_shift: insufficient ancillas for lowering");
    Circuit c(lay.n_total, std::string("shift-") + "xyz"[static_cast<int>(axis)]);
    const std::int64_t reps = l % lay.spec.points(axis);
    for (std::int64_t r = 0; r < reps; ++r) detail::emit_unit_shift(c, lay, axis, dir, {});
    return c;
}

// The conditional walk T_a: phi (s1=0) decremented by l, chi (s1=1)
// incremented. Negative l swaps the roles.
inline Circuit build_conditional_walk(const RegisterLayout& lay, Axis axis, std::int64_t l) {
    if (lay.spec.n[static_cast<int>(axis)] == 0)
        throw std::invalid_argument("build_conditional_walk: axis has no wires");
    if (lay.n_anc < detail::mcx_ancillas_needed(lay, axis, true))
        throw std::invalid_argument("build_conditional_walk: insufficient ancillas for lowering");
    Circuit c(lay.n_total, std::string("walk-") + "xyz"[static_cast<int>(axis)]);
    const std::int64_t n = lay.spec.points(axis);
    const std::int64_t reps = ((l % n) + n) % n;
    if (reps == 0) return c;
    const auto phi_dir = l >= 0 ? ShiftDirection::Decrement : ShiftDirection::Increment;
    const auto chi_dir = l >= 0 ? ShiftDirection::Increment : ShiftDirection::Decrement;
    const std::int64_t eff = l >= 0 ? reps : n - reps;
    for (std::int64_t r = 0; r < eff; ++r)
        detail::emit_unit_shift(c, lay, axis, phi_dir, {{lay.s1(), false}});
    for (std::int64_t r = 0; r < eff; ++r)
        detail::emit_unit_shift(c, lay, axis, chi_dir, {{lay.s1(), true}});
    return c;
}

// Q_m = Rz(2 m c^2 dt_eff) on s1, uniform over positions.
inline Circuit build_mass_gate(const RegisterLayout& lay, double mass, double c_light,
                               double dt_eff) {
    Circuit c(lay.n_total, "mass");
    if (mass == 0.0 || dt_eff == 0.0) return c;
    c.add(make_gate(GateKind::Rz, lay.s1(), {}, 2.0 * mass * c_light * c_light * dt_eff,
                    GroupTag::Mass));
    return c;
}

namespace detail {

// Controlled Euler triple realizing Q (or its adjoint) on the target wire.
// The shared +-gamma pair across the two spinor blocks is a plain Rz on s1,
// so no global phase is dropped.
inline void emit_controlled_su2(Circuit& c, int target, const EulerAngles& e,
                                std::vector<Control> controls, bool dagger, GroupTag tag) {
    const double sgn = dagger ? -1.0 : 1.0;
    const double first = dagger ? -e.delta : e.xi;
    const double last = dagger ? -e.xi : e.delta;
    if (first != 0.0) c.add(make_gate(GateKind::Rz, target, controls, first, tag));
    if (e.theta != 0.0) c.add(make_gate(GateKind::Ry, target, controls, sgn * e.theta, tag));
    if (last != 0.0) c.add(make_gate(GateKind::Rz, target, std::move(controls), last, tag));
}

} // namespace detail

// Q_A for homogeneous A(t): Hadamard basis change on s1, the controlled
// Q / Q^dag Euler triples on s2, and an Rz on s1 carrying the block phases.
inline Circuit build_field_gate(const RegisterLayout& lay, const Potentials& pot, double t,
                                double dt_eff) {
    if (pot.magnetic_mode)
        throw std::invalid_argument("build_field_gate: use build_magnetic_field_gate in magnetic mode");
    Circuit c(lay.n_total, "field-A");
    if (!pot.has_vector() || dt_eff == 0.0) return c;
    const Vec3 a = pot.vector_at(t);
    if (a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0) return c;

    if (lay.reduced) {
        const int ax = static_cast<int>(lay.reduced_axis);
        for (int other = 0; other < 3; ++other)
            if (other != ax && a[other] != 0.0)
                throw std::invalid_argument(
                    "build_field_gate: reduced register supports A along its axis only");
        // exp(+i e dt A_a sigma_red) on the spinor wire
        const double phi = pot.charge * dt_eff * a[ax];
        const GateKind k = (lay.reduced_axis == Axis::Y) ? GateKind::Ry : GateKind::Rx;
        c.add(make_gate(k, lay.s1(), {}, -2.0 * phi, GroupTag::VectorField));
        return c;
    }

    const EulerAngles e = euler_angles(a, dt_eff, pot.charge);
    c.add(make_gate(GateKind::H, lay.s1(), {}, 0.0, GroupTag::VectorField));
    detail::emit_controlled_su2(c, lay.s2(), e, {{lay.s1(), false}}, true, GroupTag::VectorField);
    detail::emit_controlled_su2(c, lay.s2(), e, {{lay.s1(), true}}, false, GroupTag::VectorField);
    const double gamma = std::arg(e.phase);
    if (gamma != 0.0) c.add(make_gate(GateKind::Rz, lay.s1(), {}, 2.0 * gamma, GroupTag::VectorField));
    c.add(make_gate(GateKind::H, lay.s1(), {}, 0.0, GroupTag::VectorField));
    return c;
}

// Appendix-style space-dependent A(x, t): the Euler triples become uniformly
// controlled on the position wires, one block per lattice site. Gate count is
// O(N_x N_y N_z); this path is inherently inefficient.
inline Circuit build_magnetic_field_gate(const RegisterLayout& lay, const Potentials& pot, double t,
                                         double dt_eff) {
    if (lay.reduced)
        throw std::invalid_argument("build_magnetic_field_gate: full register required");
    Circuit c(lay.n_total, "field-A-magnetic");
    if (!pot.has_vector() || dt_eff == 0.0) return c;

    c.add(make_gate(GateKind::H, lay.s1(), {}, 0.0, GroupTag::VectorField));
    const std::int64_t nx = lay.spec.points(Axis::X), ny = lay.spec.points(Axis::Y),
                       nz = lay.spec.points(Axis::Z);
    for (std::int64_t i = 0; i < nx; ++i)
        for (std::int64_t j = 0; j < ny; ++j)
            for (std::int64_t k = 0; k < nz; ++k) {
                const Vec3 a = pot.vector_at(centroid(lay.spec, i, j, k), t);
                const EulerAngles e = euler_angles(a, dt_eff, pot.charge);
                std::vector<Control> pattern;
                detail::position_pattern_controls(lay, i, j, k, pattern);

                std::vector<Control> ctl_phi = pattern;
                ctl_phi.push_back({lay.s1(), false});
                detail::emit_controlled_su2(c, lay.s2(), e, std::move(ctl_phi), true,
                                            GroupTag::VectorField);
                std::vector<Control> ctl_chi = pattern;
                ctl_chi.push_back({lay.s1(), true});
                detail::emit_controlled_su2(c, lay.s2(), e, std::move(ctl_chi), false,
                                            GroupTag::VectorField);
                const double gamma = std::arg(e.phase);
                if (gamma != 0.0)
                    c.add(make_gate(GateKind::Rz, lay.s1(), pattern, 2.0 * gamma,
                                    GroupTag::VectorField));
            }
    c.add(make_gate(GateKind::H, lay.s1(), {}, 0.0, GroupTag::VectorField));
    return c;
}

// Q_V as a diagonal circuit on the position wires. Constant potentials become
// a tracked global phase; the linear form -x.E costs one Phase gate per
// position wire; tabulated potentials expand into a uniformly controlled
// diagonal with exponentially many blocks.
inline Circuit build_scalar_potential_gate(const RegisterLayout& lay, const Potentials& pot,
                                           double t, double dt_eff) {
    Circuit c(lay.n_total, "scalar-V");
    if (dt_eff == 0.0) return c;
    const LatticeSpec& spec = lay.spec;
    switch (pot.scalar_kind) {
        case ScalarKind::Zero:
            return c;
        case ScalarKind::Constant:
            c.add_phase(-pot.charge * pot.scalar_const * dt_eff);
            return c;
        case ScalarKind::LinearE: {
            // phase(x) = e * dt * x.E, site-separable and binary-weighted per bit
            double const_part = 0.0;
            for (int ax = 0; ax < 3; ++ax) {
                const double ea = pot.electric_field[ax];
                if (ea == 0.0) continue;
                const int nb = lay.reduced
                                   ? (ax == static_cast<int>(lay.reduced_axis) ? spec.n[ax] : 0)
                                   : spec.n[ax];
                if (!lay.reduced && spec.n[ax] > 0 && nb == 0) continue;
                if (lay.reduced && ax != static_cast<int>(lay.reduced_axis) && spec.n[ax] > 0)
                    throw std::invalid_argument(
                        "build_scalar_potential_gate: field along an absent axis");
                const_part += ea * (spec.origin[ax] + 0.5 * spec.ell);
                for (int b = 0; b < nb; ++b) {
                    const double weight = static_cast<double>(std::int64_t(1) << (nb - 1 - b));
                    const double angle = pot.charge * dt_eff * ea * spec.ell * weight;
                    c.add(make_gate(GateKind::Phase, lay.axis_wire(static_cast<Axis>(ax), b), {},
                                    angle, GroupTag::ScalarField));
                }
            }
            c.add_phase(pot.charge * dt_eff * const_part);
            return c;
        }
        case ScalarKind::Tabulated: {
            if (lay.position_wires() == 0) {
                c.add_phase(-pot.charge * pot.scalar_at(spec, 0, 0, 0, t) * dt_eff);
                return c;
            }
            // uniformly controlled diagonal: one 2x2 diagonal block per pattern
            // of all position wires but the least significant one
            const std::int64_t npts = spec.total_points();
            for (std::int64_t p = 0; p < npts; p += 2) {
                const std::int64_t k0 = p % spec.points(Axis::Z);
                const std::int64_t j0 = (p / spec.points(Axis::Z)) % spec.points(Axis::Y);
                const std::int64_t i0 = p / (spec.points(Axis::Y) * spec.points(Axis::Z));
                const std::int64_t q = p + 1;
                const std::int64_t k1 = q % spec.points(Axis::Z);
                const std::int64_t j1 = (q / spec.points(Axis::Z)) % spec.points(Axis::Y);
                const std::int64_t i1 = q / (spec.points(Axis::Y) * spec.points(Axis::Z));
                const double v0 = pot.scalar_at(spec, i0, j0, k0, t);
                const double v1 = pot.scalar_at(spec, i1, j1, k1, t);
                if (!std::isfinite(v0) || !std::isfinite(v1))
                    throw std::domain_error("scalar potential: non-finite table value");
                const Mat2 block = mat2(std::polar(1.0, -pot.charge * v0 * dt_eff), 0, 0,
                                        std::polar(1.0, -pot.charge * v1 * dt_eff));
                std::vector<Control> pattern;
                detail::position_pattern_controls(lay, i0, j0, k0, pattern);
                const int target = pattern.back().wire;
                pattern.pop_back();
                c.add(make_u2_gate(block, target, std::move(pattern), GroupTag::ScalarField));
            }
            return c;
        }
    }
    return c;
}

// One full time step of the scheme as a circuit (Fig.-4 style): for each
// streaming factor the rotation/walk/rotation sandwich, then the local phase
// gates, in the scheme's application order.
inline Circuit build_time_step(const RegisterLayout& lay, const SplittingScheme& scheme,
                               const Potentials& pot, double t) {
    Circuit c(lay.n_total, "time-step");
    const LatticeSpec& spec = lay.spec;
    for (const SplitStep& st : scheme.steps) {
        switch (st.tag) {
            case OpTag::X:
            case OpTag::Y:
            case OpTag::Z: {
                const Axis a = st.tag == OpTag::X ? Axis::X : st.tag == OpTag::Y ? Axis::Y : Axis::Z;
                if (spec.qubits(a) == 0) break;
                if (lay.reduced && a != lay.reduced_axis) break;
                const std::int64_t sites = streaming_sites(spec, st.coeff);
                if (sites % spec.points(a) == 0) break;
                c.append(build_spin_rotation(lay, a));
                c.append(build_conditional_walk(lay, a, sites));
                c.append(build_spin_rotation(lay, a));
                break;
            }
            case OpTag::M:
                c.append(build_mass_gate(lay, pot.mass, spec.c, st.coeff.value() * spec.dt));
                break;
            case OpTag::V:
                c.append(build_scalar_potential_gate(lay, pot, t + st.time_offset.value() * spec.dt,
                                                     st.coeff.value() * spec.dt));
                break;
            case OpTag::A:
                if (pot.magnetic_mode)
                    c.append(build_magnetic_field_gate(lay, pot, t + st.time_offset.value() * spec.dt,
                                                       st.coeff.value() * spec.dt));
                else
                    c.append(build_field_gate(lay, pot, t + st.time_offset.value() * spec.dt,
                                              st.coeff.value() * spec.dt));
                break;
            case OpTag::TimeShift:
                break;
        }
    }
    return c;
}

} // namespace dqw
