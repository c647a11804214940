#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lattice.hpp"
#include "smallmat.hpp"

namespace dqw {

// Wire map for a register holding a spinor field: [s1, s2, x-block, y-block,
// z-block, walk ancillas, extra ancillas]. Wire 0 is the most significant bit
// of the state index; within an axis block the first wire is the most
// significant index bit. In reduced 1-D mode a single spinor wire s1
// distinguishes the two surviving components.
struct RegisterLayout {
    LatticeSpec spec;
    bool reduced = false;
    Axis reduced_axis = Axis::Z;
    int n_spinor = 2;
    int n_anc = 0;   // walk ancillas
    int n_extra = 0; // trailing ancillas for protocols (autocorrelation, filtering)
    int n_total = 0;

    int s1() const { return 0; }
    int s2() const {
        if (reduced) throw std::logic_error("layout: no s2 wire in reduced mode");
        return 1;
    }

    int axis_block_start(Axis a) const {
        if (reduced) {
            if (a != reduced_axis) throw std::logic_error("layout: axis absent in reduced mode");
            return n_spinor;
        }
        int w = n_spinor;
        for (int ax = 0; ax < static_cast<int>(a); ++ax) w += spec.n[ax];
        return w;
    }
    int axis_wire(Axis a, int bit) const { return axis_block_start(a) + bit; } // bit 0 = MSB
    int ancilla(int i) const {
        if (i < 0 || i >= n_anc) throw std::out_of_range("layout: ancilla index");
        return n_spinor + position_wires() + i;
    }
    int extra(int i) const {
        if (i < 0 || i >= n_extra) throw std::out_of_range("layout: extra wire index");
        return n_spinor + position_wires() + n_anc + i;
    }
    int position_wires() const {
        if (reduced) return spec.n[static_cast<int>(reduced_axis)];
        return spec.n[0] + spec.n[1] + spec.n[2];
    }

    // The two spinor components kept in reduced mode, as full-field indices.
    std::array<int, 2> reduced_components() const {
        return reduced_axis == Axis::Z ? std::array<int, 2>{0, 2} : std::array<int, 2>{0, 3};
    }
};

inline RegisterLayout make_layout(const LatticeSpec& spec, bool reduced = false,
                                  Axis reduced_axis = Axis::Z, int n_extra = 0,
                                  int n_anc_override = -1) {
    RegisterLayout lay;
    lay.spec = spec;
    lay.reduced = reduced;
    lay.reduced_axis = reduced_axis;
    lay.n_spinor = reduced ? 1 : 2;
    if (reduced && spec.n[static_cast<int>(reduced_axis)] == 0)
        throw std::invalid_argument("make_layout: reduced axis has no wires");
    if (reduced)
        for (int a = 0; a < 3; ++a)
            if (a != static_cast<int>(reduced_axis) && spec.n[a] != 0)
                throw std::invalid_argument("make_layout: reduced mode requires a 1-D lattice");
    if (n_anc_override >= 0) {
        lay.n_anc = n_anc_override;
    } else if (reduced) {
        lay.n_anc = std::max(0, spec.n[static_cast<int>(reduced_axis)] - 2);
    } else {
        lay.n_anc = std::max({spec.n[0], spec.n[1], spec.n[2]});
    }
    lay.n_extra = n_extra;
    lay.n_total = lay.n_spinor + lay.position_wires() + lay.n_anc + lay.n_extra;
    return lay;
}

enum class GateKind { H, S, T, Sdg, Tdg, X, Y, Z, Rx, Ry, Rz, Phase, U2, U4 };

inline const char* gate_kind_name(GateKind k) {
    switch (k) {
        case GateKind::H: return "H";
        case GateKind::S: return "S";
        case GateKind::T: return "T";
        case GateKind::Sdg: return "SDG";
        case GateKind::Tdg: return "TDG";
        case GateKind::X: return "X";
        case GateKind::Y: return "Y";
        case GateKind::Z: return "Z";
        case GateKind::Rx: return "RX";
        case GateKind::Ry: return "RY";
        case GateKind::Rz: return "RZ";
        case GateKind::Phase: return "PHASE";
        case GateKind::U2: return "U2";
        case GateKind::U4: return "U4";
    }
    return "?";
}

inline bool gate_kind_has_param(GateKind k) {
    return k == GateKind::Rx || k == GateKind::Ry || k == GateKind::Rz || k == GateKind::Phase;
}

// Subcircuit attribution for resource breakdowns.
enum class GroupTag { Walk, SpinRotation, Mass, VectorField, ScalarField, Prep, Filter, Other };

inline const char* group_tag_name(GroupTag g) {
    switch (g) {
        case GroupTag::Walk: return "walk";
        case GroupTag::SpinRotation: return "spin-rotation";
        case GroupTag::Mass: return "mass";
        case GroupTag::VectorField: return "vector-field";
        case GroupTag::ScalarField: return "scalar-field";
        case GroupTag::Prep: return "prep";
        case GroupTag::Filter: return "filter";
        case GroupTag::Other: return "other";
    }
    return "?";
}

struct Control {
    int wire;
    bool value; // required bit value

    bool operator==(const Control& o) const { return wire == o.wire && value == o.value; }
};

struct Gate {
    GateKind kind = GateKind::X;
    double param = 0.0;
    int t0 = -1;
    int t1 = -1; // second target for U4 (t0 is the high bit of the 4x4 index)
    std::vector<Control> controls;
    std::vector<cd> mat; // 4 entries for U2, 16 for U4
    GroupTag group = GroupTag::Other;

    int n_targets() const { return t1 >= 0 ? 2 : 1; }
};

inline Mat2 gate_matrix_1q(const Gate& g) {
    switch (g.kind) {
        case GateKind::H: return hadamard_mat();
        case GateKind::S: return phase_mat(M_PI / 2);
        case GateKind::T: return phase_mat(M_PI / 4);
        case GateKind::Sdg: return phase_mat(-M_PI / 2);
        case GateKind::Tdg: return phase_mat(-M_PI / 4);
        case GateKind::X: return pauli_x();
        case GateKind::Y: return pauli_y();
        case GateKind::Z: return pauli_z();
        case GateKind::Rx: return rx_mat(g.param);
        case GateKind::Ry: return ry_mat(g.param);
        case GateKind::Rz: return rz_mat(g.param);
        case GateKind::Phase: return phase_mat(g.param);
        case GateKind::U2: {
            if (g.mat.size() != 4) throw std::invalid_argument("gate: U2 needs a 2x2 matrix");
            Mat2 m;
            std::copy(g.mat.begin(), g.mat.end(), m.a.begin());
            return m;
        }
        case GateKind::U4: break;
    }
    throw std::invalid_argument("gate: not a one-target gate");
}

inline Mat4 gate_matrix_2q(const Gate& g) {
    if (g.kind != GateKind::U4 || g.mat.size() != 16)
        throw std::invalid_argument("gate: U4 needs a 4x4 matrix");
    Mat4 m;
    std::copy(g.mat.begin(), g.mat.end(), m.a.begin());
    return m;
}

template <std::size_t N>
inline void require_unitary(const SmallMat<N>& m, const char* what) {
    if ((m.adjoint() * m).max_abs_diff(SmallMat<N>::identity()) > 1e-12)
        throw std::invalid_argument(std::string(what) + ": matrix is not unitary");
}

inline Gate make_gate(GateKind k, int target, std::vector<Control> controls = {},
                      double param = 0.0, GroupTag group = GroupTag::Other) {
    Gate g;
    g.kind = k;
    g.param = param;
    g.t0 = target;
    g.controls = std::move(controls);
    g.group = group;
    return g;
}

inline Gate make_u2_gate(const Mat2& m, int target, std::vector<Control> controls = {},
                         GroupTag group = GroupTag::Other) {
    require_unitary(m, "U2");
    Gate g;
    g.kind = GateKind::U2;
    g.t0 = target;
    g.controls = std::move(controls);
    g.mat.assign(m.a.begin(), m.a.end());
    g.group = group;
    return g;
}

inline Gate make_u4_gate(const Mat4& m, int t_high, int t_low, std::vector<Control> controls = {},
                         GroupTag group = GroupTag::Other) {
    require_unitary(m, "U4");
    Gate g;
    g.kind = GateKind::U4;
    g.t0 = t_high;
    g.t1 = t_low;
    g.controls = std::move(controls);
    g.mat.assign(m.a.begin(), m.a.end());
    g.group = group;
    return g;
}

// Ordered gate list with a tracked scalar phase: the represented operator is
// e^{i global_phase} times the gate product.
struct Circuit {
    int n_wires = 0;
    std::vector<Gate> gates;
    double global_phase = 0.0;
    std::string label;

    explicit Circuit(int wires = 0, std::string lbl = {}) : n_wires(wires), label(std::move(lbl)) {}

    void add(Gate g) { gates.push_back(std::move(g)); }
    void add_phase(double phi) { global_phase += phi; }

    void append(const Circuit& other) {
        if (other.n_wires > n_wires) n_wires = other.n_wires;
        gates.insert(gates.end(), other.gates.begin(), other.gates.end());
        global_phase += other.global_phase;
    }

    // Same operator conditioned on a wire value; the tracked phase becomes a
    // physical (controlled) phase gate.
    Circuit controlled_on(int wire, bool value) const {
        Circuit out(n_wires, label);
        for (Gate g : gates) {
            g.controls.push_back({wire, value});
            out.gates.push_back(std::move(g));
        }
        if (global_phase != 0.0) {
            if (value) {
                out.add(make_gate(GateKind::Phase, wire, {}, global_phase));
            } else {
                out.add(make_gate(GateKind::Phase, wire, {}, -global_phase));
                out.global_phase = global_phase;
            }
        }
        return out;
    }

    std::string text_dump() const {
        std::ostringstream os;
        os.precision(17);
        os << "# circuit " << (label.empty() ? "(unnamed)" : label) << "\n";
        os << "# wires " << n_wires << "\n";
        os << "# global_phase " << global_phase << "\n";
        for (const Gate& g : gates) {
            os << gate_kind_name(g.kind);
            if (gate_kind_has_param(g.kind)) os << "(" << g.param << ")";
            if (!g.mat.empty()) {
                os << "(";
                for (std::size_t i = 0; i < g.mat.size(); ++i) {
                    if (i) os << ",";
                    os << g.mat[i].real() << "," << g.mat[i].imag();
                }
                os << ")";
            }
            os << " " << g.t0;
            if (g.t1 >= 0) os << "," << g.t1;
            if (!g.controls.empty()) {
                os << " [";
                for (std::size_t i = 0; i < g.controls.size(); ++i) {
                    if (i) os << " ";
                    os << g.controls[i].wire << (g.controls[i].value ? "+" : "-");
                }
                os << "]";
            }
            os << "\n";
        }
        return os.str();
    }
};

class QuantumState {
public:
    explicit QuantumState(RegisterLayout layout)
        : layout_(std::move(layout)), amps_(std::size_t(1) << layout_.n_total, cd(0.0)) {
        amps_[0] = 1.0;
    }

    const RegisterLayout& layout() const { return layout_; }
    int n_total() const { return layout_.n_total; }
    std::size_t dim() const { return amps_.size(); }
    std::vector<cd>& amps() { return amps_; }
    const std::vector<cd>& amps() const { return amps_; }

    bool bit(std::size_t idx, int wire) const {
        return (idx >> (layout_.n_total - 1 - wire)) & 1u;
    }
    std::size_t wire_mask(int wire) const {
        return std::size_t(1) << (layout_.n_total - 1 - wire);
    }

    double norm_sq() const {
        double s = 0.0;
        for (const cd& a : amps_) s += std::norm(a);
        return s;
    }

    void renormalize() {
        const double n = std::sqrt(norm_sq());
        if (!(n > 0.0)) throw std::runtime_error("state: zero norm");
        for (cd& a : amps_) a /= n;
    }

    void scale(cd z) {
        for (cd& a : amps_) a *= z;
    }

private:
    RegisterLayout layout_;
    std::vector<cd> amps_;
};

namespace detail {

inline void control_masks(const QuantumState& st, std::span<const Control> controls,
                          std::size_t& cmask, std::size_t& cval) {
    cmask = 0;
    cval = 0;
    for (const Control& c : controls) {
        const std::size_t m = st.wire_mask(c.wire);
        if (cmask & m) throw std::invalid_argument("gate: duplicate control wire");
        cmask |= m;
        if (c.value) cval |= m;
    }
}

} // namespace detail

inline void apply(QuantumState& st, const Gate& g) {
    const int n = st.n_total();
    if (g.t0 < 0 || g.t0 >= n || (g.t1 >= 0 && g.t1 >= n))
        throw std::invalid_argument("gate: target out of range");
    for (const Control& c : g.controls) {
        if (c.wire < 0 || c.wire >= n) throw std::invalid_argument("gate: control out of range");
        if (c.wire == g.t0 || (g.t1 >= 0 && c.wire == g.t1))
            throw std::invalid_argument("gate: control overlaps target");
    }
    std::size_t cmask, cval;
    detail::control_masks(st, g.controls, cmask, cval);
    auto& amps = st.amps();
    const std::size_t dim = amps.size();

    if (g.n_targets() == 1) {
        const Mat2 m = gate_matrix_1q(g);
        const std::size_t tmask = st.wire_mask(g.t0);
        if (cmask & tmask) throw std::invalid_argument("gate: control overlaps target");
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & tmask) continue;
            if ((i & cmask) != cval) continue;
            const std::size_t j = i | tmask;
            const cd a0 = amps[i], a1 = amps[j];
            amps[i] = m(0, 0) * a0 + m(0, 1) * a1;
            amps[j] = m(1, 0) * a0 + m(1, 1) * a1;
        }
    } else {
        if (g.t0 == g.t1) throw std::invalid_argument("gate: duplicate target wires");
        const Mat4 m = gate_matrix_2q(g);
        const std::size_t m0 = st.wire_mask(g.t0); // high bit of the matrix index
        const std::size_t m1 = st.wire_mask(g.t1);
        for (std::size_t i = 0; i < dim; ++i) {
            if (i & (m0 | m1)) continue;
            if ((i & cmask) != cval) continue;
            const std::size_t i00 = i, i01 = i | m1, i10 = i | m0, i11 = i | m0 | m1;
            const cd a00 = amps[i00], a01 = amps[i01], a10 = amps[i10], a11 = amps[i11];
            amps[i00] = m(0, 0) * a00 + m(0, 1) * a01 + m(0, 2) * a10 + m(0, 3) * a11;
            amps[i01] = m(1, 0) * a00 + m(1, 1) * a01 + m(1, 2) * a10 + m(1, 3) * a11;
            amps[i10] = m(2, 0) * a00 + m(2, 1) * a01 + m(2, 2) * a10 + m(2, 3) * a11;
            amps[i11] = m(3, 0) * a00 + m(3, 1) * a01 + m(3, 2) * a10 + m(3, 3) * a11;
        }
    }
}

inline void apply(QuantumState& st, const Circuit& c) {
    if (c.n_wires > st.n_total())
        throw std::invalid_argument("apply: circuit needs more wires than the register has");
    for (const Gate& g : c.gates) apply(st, g);
    if (c.global_phase != 0.0) st.scale(std::polar(1.0, c.global_phase));
}

// V-chain decomposition of a multi-controlled X into Toffoli-level gates.
// Needs max(0, k-2) ancillas prepared in |0>; they are returned to |0>.
inline std::vector<Gate> expand_mcx(const std::vector<Control>& controls, int target,
                                    std::span<const int> ancillas,
                                    GroupTag group = GroupTag::Other) {
    std::vector<Gate> out;
    const int k = static_cast<int>(controls.size());
    if (k <= 2) {
        out.push_back(make_gate(GateKind::X, target, controls, 0.0, group));
        return out;
    }
    if (static_cast<int>(ancillas.size()) < k - 2)
        throw std::invalid_argument("expand_mcx: insufficient ancillas");
    std::vector<Gate> compute;
    compute.push_back(make_gate(GateKind::X, ancillas[0], {controls[0], controls[1]}, 0.0, group));
    for (int i = 2; i < k - 1; ++i)
        compute.push_back(make_gate(GateKind::X, ancillas[i - 1],
                                    {controls[i], Control{ancillas[i - 2], true}}, 0.0, group));
    out = compute;
    out.push_back(make_gate(GateKind::X, target,
                            {controls[k - 1], Control{ancillas[k - 3], true}}, 0.0, group));
    for (auto it = compute.rbegin(); it != compute.rend(); ++it) out.push_back(*it);
    return out;
}

inline std::vector<Gate> apply_multi_controlled_x(QuantumState& st,
                                                  const std::vector<Control>& controls, int target,
                                                  std::span<const int> ancilla_pool) {
    const auto gates = expand_mcx(controls, target, ancilla_pool);
    for (const Gate& g : gates) apply(st, g);
    return gates;
}

// --- field <-> register mapping ---------------------------------------------

inline void check_normalized_field(const SpinorField& f) {
    if (std::abs(f.discrete_norm_sq() - 1.0) > 1e-8)
        throw std::invalid_argument("encode: field is not normalized");
}

inline QuantumState encode_field(const SpinorField& f, const RegisterLayout& layout) {
    check_normalized_field(f);
    for (int a = 0; a < 3; ++a)
        if (f.spec.n[a] != layout.spec.n[a])
            throw std::invalid_argument("encode: layout does not match the field lattice");
    QuantumState st(layout);
    auto& amps = st.amps();
    std::fill(amps.begin(), amps.end(), cd(0.0));
    const double scale = std::pow(f.spec.ell, 1.5);
    const int shift = layout.n_anc + layout.n_extra;

    if (!layout.reduced) {
        for (std::size_t fld = 0; fld < f.amps.size(); ++fld)
            amps[fld << shift] = scale * f.amps[fld];
        return st;
    }

    const auto comps = layout.reduced_components();
    const std::size_t npts = static_cast<std::size_t>(f.spec.total_points());
    double dropped = 0.0;
    for (int s = 0; s < 4; ++s) {
        if (s == comps[0] || s == comps[1]) continue;
        for (std::size_t p = 0; p < npts; ++p) dropped += std::norm(f.amps[s * npts + p]);
    }
    if (dropped > 1e-20)
        throw std::invalid_argument("encode: field has weight outside the reduced spinor sector");
    for (int b = 0; b < 2; ++b)
        for (std::size_t p = 0; p < npts; ++p)
            amps[((std::size_t(b) * npts) + p) << shift] = scale * f.amps[comps[b] * npts + p];
    return st;
}

inline SpinorField decode_field(const QuantumState& st) {
    const RegisterLayout& lay = st.layout();
    const int shift = lay.n_anc + lay.n_extra;
    const std::size_t anc_mask = (std::size_t(1) << shift) - 1;
    double leaked = 0.0;
    for (std::size_t i = 0; i < st.dim(); ++i)
        if (i & anc_mask) leaked += std::norm(st.amps()[i]);
    if (leaked > 1e-18)
        throw std::runtime_error("decode: ancilla wires are not in |0>");

    SpinorField f(lay.spec);
    // divide by the identical scale used in encode so spikes round-trip exactly
    const double scale = std::pow(lay.spec.ell, 1.5);
    const std::size_t npts = static_cast<std::size_t>(lay.spec.total_points());
    if (!lay.reduced) {
        for (std::size_t fld = 0; fld < f.amps.size(); ++fld)
            f.amps[fld] = st.amps()[fld << shift] / scale;
    } else {
        const auto comps = lay.reduced_components();
        for (int b = 0; b < 2; ++b)
            for (std::size_t p = 0; p < npts; ++p)
                f.amps[comps[b] * npts + p] = st.amps()[((std::size_t(b) * npts) + p) << shift] / scale;
    }
    return f;
}

// --- exact measurement statistics -------------------------------------------

enum class PauliProbe { SigmaX, SigmaY, SigmaXPlusISigmaY };

inline cd expectation(const QuantumState& st, PauliProbe op, int wire) {
    if (wire < 0 || wire >= st.n_total()) throw std::invalid_argument("expectation: bad wire");
    const std::size_t m = st.wire_mask(wire);
    cd acc = 0.0; // sum conj(a_{w=0}) * a_{w=1}
    for (std::size_t i = 0; i < st.dim(); ++i) {
        if (i & m) continue;
        acc += std::conj(st.amps()[i]) * st.amps()[i | m];
    }
    switch (op) {
        case PauliProbe::SigmaX: return 2.0 * acc.real();
        case PauliProbe::SigmaY: return 2.0 * acc.imag();
        case PauliProbe::SigmaXPlusISigmaY: return 2.0 * acc;
    }
    throw std::invalid_argument("expectation: unknown operator");
}

// Deterministic projective measurement: project, return the outcome
// probability, renormalize.
inline double project_wire(QuantumState& st, int wire, bool outcome) {
    const std::size_t m = st.wire_mask(wire);
    double p = 0.0;
    for (std::size_t i = 0; i < st.dim(); ++i)
        if (((i & m) != 0) == outcome) p += std::norm(st.amps()[i]);
    if (!(p > 0.0)) throw std::runtime_error("project: zero-probability outcome");
    const double inv = 1.0 / std::sqrt(p);
    for (std::size_t i = 0; i < st.dim(); ++i) {
        if (((i & m) != 0) == outcome)
            st.amps()[i] *= inv;
        else
            st.amps()[i] = 0.0;
    }
    return p;
}

} // namespace dqw
