#include "pulsekam/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace pulsekam {

namespace {
const Complex kI{0.0, 1.0};

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                 b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;

struct RunResult {
    Operator U;
    long steps;
};

RunResult integrate(const PulseSystem& system, double t0, double t1, double rel_tol,
                    double abs_tol, double max_step) {
    auto rhs = [&](double t, const Operator& U) {
        return Operator(-kI * ((system.pulse.omega(t) * system.X + system.epsilon * system.Y) * U));
    };

    const int dim = system.dim;
    Operator U = identity(dim);
    if (t1 == t0) return {U, 0};

    double t = t0;
    double h = std::min((t1 - t0) / 100.0, max_step);
    const double h_min = 1e-14 * (t1 - t0);
    long steps = 0;
    Operator k1 = rhs(t, U);
    while (t < t1) {
        h = std::min(h, t1 - t);
        const Operator k2 = rhs(t + c2 * h, U + h * (a21 * k1));
        const Operator k3 = rhs(t + c3 * h, U + h * (a31 * k1 + a32 * k2));
        const Operator k4 = rhs(t + c4 * h, U + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Operator k5 = rhs(t + c5 * h, U + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Operator k6 =
            rhs(t + h, U + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Operator U5 = U + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Operator k7 = rhs(t + h, U5);  // FSAL
        const Operator err_mat = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        // Hairer-style mixed error norm over matrix entries
        double err = 0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) {
                const double sc =
                    abs_tol + rel_tol * std::max(std::abs(U(i, j)), std::abs(U5(i, j)));
                const double q = std::abs(err_mat(i, j)) / sc;
                err += q * q;
            }
        err = std::sqrt(err / (dim * dim));

        if (err <= 1.0) {
            t += h;
            U = U5;
            k1 = k7;
            ++steps;
        }
        const double factor = std::clamp(0.9 * std::pow(std::max(err, 1e-300), -0.2), 0.2, 5.0);
        h = std::min(h * factor, max_step);
        if (h < h_min)
            throw StiffnessError("reference integrator step size underflow");
    }
    return {U, steps};
}
}  // namespace

ReferenceResult reference_propagator(const PulseSystem& system, double t0, double t,
                                     const SolverSpec& spec) {
    if (t < t0) throw ConfigError("reference_propagator: requires t0 <= t");
    const double max_step = spec.max_step > 0 ? spec.max_step : std::max((t - t0) / 50.0, 1e-6);
    RunResult main = integrate(system, t0, t, spec.rel_tol, spec.abs_tol, max_step);
    // self-consistency check: halve the allowed step and tighten tolerances
    RunResult check =
        integrate(system, t0, t, 0.1 * spec.rel_tol, 0.1 * spec.abs_tol, 0.5 * max_step);

    ReferenceResult r;
    r.U = main.U;
    r.unitarity_defect = unitarity_defect(main.U);
    r.step_count = main.steps;
    r.error_estimate = spectral_norm(main.U - check.U);
    return r;
}

double transition_probability(const Operator& U) {
    require_dim(U, 2);
    return std::norm(U(0, 1));
}

}  // namespace pulsekam
