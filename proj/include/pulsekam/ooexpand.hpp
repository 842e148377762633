#pragma once

#include "pulsekam/oracle.hpp"
#include "pulsekam/quad.hpp"
#include "pulsekam/system.hpp"

namespace pulsekam {

// Magnus integrands at (t; t0); each term is Hermitian and epsilon-free
struct MagnusTerms {
    Operator M1, M2, M3;
};

// M1 = int U0(t,u) V1(u) U0(u,t) du, with M2 and M3 the second- and
// third-order nested time-ordered commutator integrals of the same
// interaction-frame generator (M_k(t0; t0) = 0)
MagnusTerms magnus_terms(const PulseSystem& system, double t, double t0,
                         const QuadratureSpec& spec);

// exp(-i sum_{k<=n} eps^k M_k) U0(t, t0), n in 1..3
Operator magnus_propagator(const PulseSystem& system, int n, double t, double t0,
                           const QuadratureSpec& spec);

// iterated-integral expansion in the interaction frame anchored at t0,
// mapped back; truncation order n in 1..2; not unitary and never reunitarized
Operator dyson_propagator(const PulseSystem& system, int n, double t, double t0,
                          const QuadratureSpec& spec);

// free parameters of the order-by-order schemes with a D-operator choice:
// the nonzero choice D_v(t; t_v) may be made at most once (index v)
struct OOConfig {
    enum class Scheme { PVZ, VanVleck };
    enum class DChoice { Zero, VAtTv };

    Scheme scheme = Scheme::PVZ;
    int order = 1;  // 1..2
    DChoice d_choice = DChoice::Zero;
    int v = 1;                     // index of the nonzero D choice
    double t_v = 0;                // anchor time of the nonzero D choice
    std::vector<double> t_primes;  // integration bases t_1'..t_n' (default t0)
};

// T_n(t) U0(t,t0) exp(-i (t-t0) eps^v D_v(t0;t_v)) T_n^dag(t0) with
// T_n = exp(-i sum_k eps^k W_k); reduces to the Magnus expansion for
// D = 0 and all t_k' = t0
Operator pvz_propagator(const PulseSystem& system, const OOConfig& config, double t,
                        double t0, const QuadratureSpec& spec);

// product form T_1(t)...T_n(t) U0 exp(...) T_n^dag(t0)...T_1^dag(t0) with
// T_k = exp(-i eps^k W_k); order 1 coincides with pvz_propagator
Operator vanvleck_propagator(const PulseSystem& system, const OOConfig& config, double t,
                             double t0, const QuadratureSpec& spec);

}  // namespace pulsekam
