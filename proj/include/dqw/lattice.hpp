#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "smallmat.hpp"

namespace dqw {

enum class Axis : int { X = 0, Y = 1, Z = 2 };

using Vec3 = std::array<double, 3>;

// Cubic periodic lattice with the time step locked to the cell size,
// c*dt = n_star*ell. n_star is a positive half-integer, stored as 2*n_star
// so the lock holds exactly in floating point.
struct LatticeSpec {
    std::array<int, 3> n{};      // qubits per axis; 0 = axis absent (N=1)
    double ell = 1.0;            // cell edge length
    double dt = 1.0;             // time step, always n_star*ell/c
    int twice_n_star = 2;        // 2*N*, positive integer
    Vec3 origin{0.0, 0.0, 0.0};
    double c = 1.0;              // light velocity (natural units default)

    int qubits(Axis a) const { return n[static_cast<int>(a)]; }
    std::int64_t points(Axis a) const { return std::int64_t(1) << n[static_cast<int>(a)]; }
    std::int64_t total_points() const { return points(Axis::X) * points(Axis::Y) * points(Axis::Z); }
    double n_star() const { return 0.5 * twice_n_star; }
    double cell_volume() const { return ell * ell * ell; }

    // Same geometry at cell ell/2^k; n_star doubles per level so dt is unchanged.
    LatticeSpec refined(int levels = 1) const {
        LatticeSpec s = *this;
        for (int l = 0; l < levels; ++l) {
            for (int a = 0; a < 3; ++a)
                if (s.n[a] > 0) ++s.n[a];
            s.ell *= 0.5;
            s.twice_n_star *= 2;
        }
        return s;
    }
};

inline LatticeSpec make_lattice(int n_x, int n_y, int n_z, double ell, double n_star,
                                Vec3 origin = {0.0, 0.0, 0.0}, double c = 1.0) {
    if (n_x < 0 || n_y < 0 || n_z < 0 || (n_x == 0 && n_y == 0 && n_z == 0))
        throw std::invalid_argument("make_lattice: need at least one axis with n >= 1");
    if (n_x > 25 || n_y > 25 || n_z > 25)
        throw std::invalid_argument("make_lattice: axis qubit count too large");
    if (!(ell > 0.0)) throw std::invalid_argument("make_lattice: ell must be positive");
    if (!(c > 0.0)) throw std::invalid_argument("make_lattice: c must be positive");
    const double twice = 2.0 * n_star;
    const double twice_round = std::round(twice);
    if (!(n_star > 0.0) || std::abs(twice - twice_round) > 1e-12 || twice_round < 1.0)
        throw std::invalid_argument("make_lattice: n_star must be a positive half-integer");
    LatticeSpec s;
    s.n = {n_x, n_y, n_z};
    s.ell = ell;
    s.twice_n_star = static_cast<int>(twice_round);
    s.origin = origin;
    s.c = c;
    // Lock c*dt to n_star*ell within one ulp of the product (exact when c=1).
    const double prod = (0.5 * s.twice_n_star) * ell;
    double dt = prod / c;
    const double ulp = std::abs(std::nextafter(prod, INFINITY) - prod);
    for (int iter = 0; iter < 4 && std::abs(c * dt - prod) > ulp; ++iter)
        dt = std::nextafter(dt, c * dt > prod ? 0.0 : INFINITY);
    if (std::abs(c * dt - prod) > ulp)
        throw std::invalid_argument("make_lattice: cannot satisfy the CFL lock for these values");
    s.dt = dt;
    return s;
}

inline double centroid_1d(const LatticeSpec& spec, Axis a, std::int64_t i) {
    if (i < 0 || i >= spec.points(a))
        throw std::out_of_range("centroid: index out of range");
    return spec.origin[static_cast<int>(a)] + (static_cast<double>(i) + 0.5) * spec.ell;
}

inline Vec3 centroid(const LatticeSpec& spec, std::int64_t i, std::int64_t j, std::int64_t k) {
    return {centroid_1d(spec, Axis::X, i), centroid_1d(spec, Axis::Y, j),
            centroid_1d(spec, Axis::Z, k)};
}

// Four-component spinor amplitudes on the lattice, component-major:
// amps[((s*Nx + i)*Ny + j)*Nz + k], components ordered (phi1, phi2, chi1, chi2).
struct SpinorField {
    LatticeSpec spec;
    std::vector<cd> amps;

    SpinorField() = default;
    explicit SpinorField(const LatticeSpec& s) : spec(s), amps(4 * s.total_points(), cd(0.0)) {}

    std::int64_t site_index(std::int64_t i, std::int64_t j, std::int64_t k) const {
        return (i * spec.points(Axis::Y) + j) * spec.points(Axis::Z) + k;
    }
    cd& at(int s, std::int64_t i, std::int64_t j, std::int64_t k) {
        return amps[s * spec.total_points() + site_index(i, j, k)];
    }
    const cd& at(int s, std::int64_t i, std::int64_t j, std::int64_t k) const {
        return amps[s * spec.total_points() + site_index(i, j, k)];
    }

    // Discrete norm ell^3 sum psi^dag psi, fixed summation order.
    double discrete_norm_sq() const {
        double acc = 0.0;
        for (const cd& v : amps) acc += std::norm(v);
        return spec.cell_volume() * acc;
    }

    double max_abs() const {
        double m = 0.0;
        for (const cd& v : amps) m = std::max(m, std::abs(v));
        return m;
    }
};

inline SpinorField normalize(const SpinorField& f) {
    const double n2 = f.discrete_norm_sq();
    if (!(n2 > 0.0)) throw std::invalid_argument("normalize: zero-norm field");
    SpinorField out = f;
    const double scale = 1.0 / std::sqrt(n2);
    for (cd& v : out.amps) v *= scale;
    return out;
}

// Position expectation value along one axis, ell^3 sum x_i psi^dag psi.
inline double position_mean(const SpinorField& f, Axis a) {
    const auto nx = f.spec.points(Axis::X), ny = f.spec.points(Axis::Y), nz = f.spec.points(Axis::Z);
    double acc = 0.0;
    for (int s = 0; s < 4; ++s)
        for (std::int64_t i = 0; i < nx; ++i)
            for (std::int64_t j = 0; j < ny; ++j)
                for (std::int64_t k = 0; k < nz; ++k) {
                    const double w = std::norm(f.at(s, i, j, k));
                    if (w == 0.0) continue;
                    const std::int64_t idx = (a == Axis::X) ? i : (a == Axis::Y) ? j : k;
                    acc += w * centroid_1d(f.spec, a, idx);
                }
    return f.spec.cell_volume() * acc;
}

enum class ScalarKind { Zero, Constant, LinearE, Tabulated };

// External electromagnetic potential plus particle parameters. The vector
// potential is homogeneous A(t) unless magnetic_mode turns on the
// space-dependent form A(x, t).
struct Potentials {
    double mass = 0.0;
    double charge = -1.0; // electron convention e = -|e|

    ScalarKind scalar_kind = ScalarKind::Zero;
    double scalar_const = 0.0;
    Vec3 electric_field{0.0, 0.0, 0.0};       // LinearE: V(x,t) = -x.E
    std::vector<double> scalar_table;         // Tabulated: site-major i,j,k

    std::function<Vec3(double)> vector_potential;        // A(t)
    bool magnetic_mode = false;
    std::function<Vec3(const Vec3&, double)> vector_potential_x; // A(x,t)

    static Potentials free_particle(double m) {
        Potentials p;
        p.mass = m;
        return p;
    }

    Vec3 vector_at(double t) const {
        if (magnetic_mode)
            throw std::logic_error("Potentials: homogeneous A requested in magnetic mode");
        if (!vector_potential) return {0.0, 0.0, 0.0};
        return vector_potential(t);
    }

    Vec3 vector_at(const Vec3& x, double t) const {
        if (magnetic_mode) {
            if (!vector_potential_x) return {0.0, 0.0, 0.0};
            return vector_potential_x(x, t);
        }
        return vector_at(t);
    }

    double scalar_at(const LatticeSpec& spec, std::int64_t i, std::int64_t j, std::int64_t k,
                     double t) const {
        (void)t;
        switch (scalar_kind) {
            case ScalarKind::Zero:
                return 0.0;
            case ScalarKind::Constant:
                return scalar_const;
            case ScalarKind::LinearE: {
                const Vec3 x = centroid(spec, i, j, k);
                return -(x[0] * electric_field[0] + x[1] * electric_field[1] +
                         x[2] * electric_field[2]);
            }
            case ScalarKind::Tabulated: {
                const std::size_t idx = static_cast<std::size_t>(
                    (i * spec.points(Axis::Y) + j) * spec.points(Axis::Z) + k);
                if (idx >= scalar_table.size())
                    throw std::out_of_range("Potentials: scalar table too small");
                return scalar_table[idx];
            }
        }
        return 0.0;
    }

    bool has_vector() const { return magnetic_mode ? bool(vector_potential_x) : bool(vector_potential); }
};

} // namespace dqw
