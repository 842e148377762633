// shared helpers for the unit suites
#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pulsekam/harness.hpp"

namespace testutil {

using namespace pulsekam;

inline PulseSystem make_sys(double area, double eps) {
    return PulseSystem::two_level(PulseShape::sin_squared(area), eps);
}

inline double dist(const Operator& a, const Operator& b) { return spectral_norm(a - b); }

inline Operator herm_from(double c0, double c1, double c2, double c3) {
    return pauli_compose({c0, c1, c2, c3});
}

inline Operator random_hermitian(std::mt19937& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return herm_from(u(gen), u(gen), u(gen), u(gen));
}

inline Operator random_matrix(std::mt19937& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Operator m(2, 2);
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = Complex(u(gen), u(gen));
    return m;
}

// midpoint-rule prefix sums of an operator curve on [t0, t]: the double and
// triple Riemann-sum references for the nested commutator integrals
struct MidpointPrefix {
    std::vector<Operator> h;  // curve at cell midpoints
    std::vector<Operator> p;  // prefix integral at cell midpoints (full cells)
    double dt = 0;
};

inline MidpointPrefix midpoint_prefix(const std::function<Operator(double)>& f,
                                      double t0, double t, int n) {
    MidpointPrefix out;
    out.dt = (t - t0) / n;
    out.h.reserve(n);
    out.p.reserve(n);
    Operator run = Operator::Zero(2, 2);
    for (int j = 0; j < n; ++j) {
        out.p.push_back(run);
        const Operator hj = f(t0 + (j + 0.5) * out.dt);
        out.h.push_back(hj);
        run += out.dt * hj;
    }
    return out;
}

// (i/2) int [P, h] as a double Riemann sum
inline Operator brute_level2(const MidpointPrefix& m) {
    Operator acc = Operator::Zero(2, 2);
    for (std::size_t j = 0; j < m.h.size(); ++j)
        acc += m.dt * commutator(m.p[j], m.h[j]);
    return Complex(0, 0.5) * acc;
}

// -(1/4) int [Q, h] - (1/12) int [P, [P, h]] as triple Riemann sums; the
// inner prefixes need their half-cell corrections here because the nested
// commutators no longer cancel them (only the outermost [., h_j] does)
inline Operator brute_level3(const MidpointPrefix& m) {
    Operator q = Operator::Zero(2, 2);
    Operator acc1 = Operator::Zero(2, 2);
    Operator acc2 = Operator::Zero(2, 2);
    for (std::size_t j = 0; j < m.h.size(); ++j) {
        const Operator p_mid = m.p[j] + 0.5 * m.dt * m.h[j];
        const Operator dq = commutator(p_mid, m.h[j]);
        const Operator q_mid = q + 0.5 * m.dt * dq;
        acc1 += m.dt * commutator(q_mid, m.h[j]);
        acc2 += m.dt * commutator(p_mid, commutator(p_mid, m.h[j]));
        q += m.dt * dq;
    }
    return -0.25 * acc1 - (1.0 / 12.0) * acc2;
}

}  // namespace testutil
