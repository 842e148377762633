#pragma once

#include "pulsekam/system.hpp"

namespace pulsekam {

// embedded explicit Runge-Kutta 5(4) reference solver settings
struct SolverSpec {
    double rel_tol = 1e-12;
    double abs_tol = 1e-13;
    double max_step = 0;  // 0 = auto: (t - t0)/50
};

struct ReferenceResult {
    Operator U;               // raw propagator, never reunitarized
    double unitarity_defect;  // ||U^dag U - I||
    long step_count;          // accepted steps
    double error_estimate;    // vs. a half-step, tighter-tolerance rerun
};

// integrates i dU/dt = [Omega(t) X + epsilon Y] U from U(t0) = I
ReferenceResult reference_propagator(const PulseSystem& system, double t0, double t,
                                     const SolverSpec& spec);

// |<+|U|->|^2 with |+> = (1,0)^T, |-> = (0,1)^T in the sigma3 eigenbasis
double transition_probability(const Operator& U);

}  // namespace pulsekam
