#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qcore.hpp"

namespace dqw {

// A different single-qubit unitary per bit pattern of the control wires.
struct UniformlyControlledGate {
    std::vector<int> controls; // pattern bit order matches this list, wire 0 = MSB of the index
    int target = -1;
    std::vector<Mat2> table; // size 2^k

    void validate() const {
        if (table.size() != (std::size_t(1) << controls.size()))
            throw std::invalid_argument("ucg: table size must be 2^k");
        for (const Mat2& u : table) require_unitary(u, "ucg block");
    }
};

inline void apply_uniformly_controlled(QuantumState& st, const UniformlyControlledGate& g) {
    g.validate();
    const std::size_t tmask = st.wire_mask(g.target);
    auto& amps = st.amps();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if (i & tmask) continue;
        std::size_t pattern = 0;
        for (int w : g.controls) pattern = (pattern << 1) | (st.bit(i, w) ? 1 : 0);
        const Mat2& m = g.table[pattern];
        const std::size_t j = i | tmask;
        const cd a0 = amps[i], a1 = amps[j];
        amps[i] = m(0, 0) * a0 + m(0, 1) * a1;
        amps[j] = m(1, 0) * a0 + m(1, 1) * a1;
    }
}

// Expansion into one multi-controlled 2x2 gate per pattern. Identity blocks
// are skipped.
inline std::vector<Gate> expand_ucg(const UniformlyControlledGate& g,
                                    GroupTag tag = GroupTag::Prep) {
    g.validate();
    std::vector<Gate> out;
    const std::size_t k = g.controls.size();
    for (std::size_t pattern = 0; pattern < g.table.size(); ++pattern) {
        const Mat2& u = g.table[pattern];
        if (u.max_abs_diff(Mat2::identity()) < 1e-15) continue;
        std::vector<Control> ctl;
        ctl.reserve(k);
        for (std::size_t b = 0; b < k; ++b)
            ctl.push_back({g.controls[b], ((pattern >> (k - 1 - b)) & 1) != 0});
        out.push_back(make_u2_gate(u, g.target, std::move(ctl), tag));
    }
    return out;
}

namespace detail {

// Subtree norms of the target vector: norms[d][p] is the l2 norm of the block
// with d leading index bits equal to p.
inline std::vector<std::vector<double>> subtree_norms(const std::vector<cd>& v, int n_wires) {
    std::vector<std::vector<double>> norms(n_wires + 1);
    norms[n_wires].resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) norms[n_wires][i] = std::abs(v[i]);
    for (int d = n_wires - 1; d >= 0; --d) {
        norms[d].resize(std::size_t(1) << d);
        for (std::size_t p = 0; p < norms[d].size(); ++p)
            norms[d][p] = std::hypot(norms[d + 1][2 * p], norms[d + 1][2 * p + 1]);
    }
    return norms;
}

} // namespace detail

// Circuit mapping |0...0> to the encoded target field: a tree of uniformly
// controlled Ry rotations fixing the magnitudes, then a uniformly controlled
// diagonal fixing every phase. Gate count is O(2^n); basis spikes and uniform
// real targets short-circuit to X / Hadamard layers.
inline Circuit prepare_state(const SpinorField& target, const RegisterLayout& lay) {
    check_normalized_field(target);
    const QuantumState encoded = encode_field(target, lay);
    const int shift = lay.n_anc + lay.n_extra;
    const int n_f = lay.n_total - shift; // field wires
    std::vector<cd> v(std::size_t(1) << n_f);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = encoded.amps()[i << shift];

    Circuit c(lay.n_total, "prepare");

    // basis spike: X gates on the 1-bits plus a tracked phase
    {
        std::size_t nonzero = 0, idx = 0;
        for (std::size_t i = 0; i < v.size(); ++i)
            if (std::abs(v[i]) > 1e-12) {
                ++nonzero;
                idx = i;
            }
        if (nonzero == 1) {
            for (int w = 0; w < n_f; ++w)
                if ((idx >> (n_f - 1 - w)) & 1)
                    c.add(make_gate(GateKind::X, w, {}, 0.0, GroupTag::Prep));
            c.add_phase(std::arg(v[idx]));
            return c;
        }
    }

    // uniform real-positive superposition: plain Hadamard layer
    {
        bool uniform = true;
        const double ref = 1.0 / std::sqrt(static_cast<double>(v.size()));
        for (const cd& x : v)
            if (std::abs(x - ref) > 1e-12) {
                uniform = false;
                break;
            }
        if (uniform) {
            for (int w = 0; w < n_f; ++w) c.add(make_gate(GateKind::H, w, {}, 0.0, GroupTag::Prep));
            return c;
        }
    }

    const auto norms = detail::subtree_norms(v, n_f);
    for (int d = 0; d < n_f; ++d) {
        UniformlyControlledGate ucg;
        for (int w = 0; w < d; ++w) ucg.controls.push_back(w);
        ucg.target = d;
        ucg.table.resize(std::size_t(1) << d);
        for (std::size_t p = 0; p < ucg.table.size(); ++p) {
            const double parent = norms[d][p];
            const double theta =
                parent > 0.0 ? 2.0 * std::atan2(norms[d + 1][2 * p + 1], norms[d + 1][2 * p]) : 0.0;
            ucg.table[p] = ry_mat(theta);
        }
        for (Gate& g : expand_ucg(ucg)) c.add(std::move(g));
    }

    // phase layer: diagonal blocks on the last wire, one per prefix
    {
        UniformlyControlledGate ucg;
        for (int w = 0; w + 1 < n_f; ++w) ucg.controls.push_back(w);
        ucg.target = n_f - 1;
        ucg.table.resize(v.size() / 2);
        for (std::size_t p = 0; p < ucg.table.size(); ++p) {
            const double p0 = std::abs(v[2 * p]) > 1e-300 ? std::arg(v[2 * p]) : 0.0;
            const double p1 = std::abs(v[2 * p + 1]) > 1e-300 ? std::arg(v[2 * p + 1]) : 0.0;
            ucg.table[p] = mat2(std::polar(1.0, p0), 0, 0, std::polar(1.0, p1));
        }
        for (Gate& g : expand_ucg(ucg)) c.add(std::move(g));
    }
    return c;
}

} // namespace dqw
