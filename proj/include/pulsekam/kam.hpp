#pragma once

#include <functional>

#include "pulsekam/quad.hpp"
#include "pulsekam/system.hpp"

namespace pulsekam {

// the three ways of choosing the solvable part D_k of each iteration:
//   A: D_k = 0; B: D_k anchored to the perturbation at a free time t_k;
//   C: re-identify the unperturbed problem as H0 + eps*D1 before iterating
enum class KamKind { A, B, C };

// evaluation convention for the resummed two-level coefficients; Corrected
// uses the closed forms consistent with the commutator series (argument
// 2*eps*lambda, d = (sin y - y)/y^3), AsPrinted reproduces the published
// expressions verbatim (argument eps*lambda, d = c + i b); the two are
// adjudicated against a finite-difference cohomology check in the tests
enum class ResumConvention { Corrected, AsPrinted };

struct KamTruncation {
    bool resummed = true;
    int commutators = 2;  // partial-sum length K >= 1 when resummed == false
};

struct KamConfig {
    KamKind kind = KamKind::B;
    int iterations = 1;  // 1..2
    double t1 = 0;       // D anchors t_k (unused for type A)
    double t2 = 0;
    double t1p = 0;      // integration bases t_k' with W_k(t_k') = 0
    double t2p = 0;
    double t1pp = 0;     // frame split point; diagnostics only, never enters U
    KamTruncation truncation{};
    double small_x = 1e-4;  // series-fallback threshold for the coefficients
    ResumConvention convention = ResumConvention::Corrected;
};

// a solvable-frame/perturbation pair the iteration acts on: frame(t,s) is a
// unitary two-time propagator obeying the group law, v the Hermitian
// perturbation curve, eps its coupling
struct EffectiveProblem {
    std::function<Operator(double, double)> frame;
    OperatorCurve v;
    double eps = 0;
    int dim = 2;
};

// artifacts of one iteration k: the generator W_k, the chosen D_k seen from
// any time, the transformation T_k = exp(-i eps_k W_k), and the evaluator of
// the next perturbation V_{k+1}
struct KamIterate {
    std::function<Operator(double)> w;
    std::function<Operator(double)> d_at;
    std::function<Operator(double)> transform;
    std::function<Operator(double)> next_v;
    double eps_k = 0;
};

// norm diagnostic of the first neglected perturbation after n iterations
struct GDiagnostic {
    Operator G;     // Hermitian accumulated operator
    double g = 0;   // eps^{2^n} * spectral_norm(G)
    int iterations = 1;
    KamConfig config;
};

struct ResumCoefficients {
    Complex a, b, c, d;
};

// closed-form coefficients of V_{k+1} = [W, aV + bD] + eps [W, [W, cV + dD]]
// for a traceless two-level W with lambda = sqrt(-det W); Taylor fallback
// below the small_x threshold avoids cancellation
ResumCoefficients resum_coefficients(double lambda, double eps, double small_x,
                                     ResumConvention convention);

// D_k(t; t_k) in the frame effective after k-1 iterations; zero for type A
// and for the first iteration of type C (its re-identified perturbation
// vanishes at its own anchor)
Operator d_operator(const PulseSystem& system, int k, double t, const KamConfig& config,
                    const QuadratureSpec& spec = {});

// W_k(t) = int_{t_k'}^t C_{k-1}(t,u) [V_k(u) - D_k(u;t_k)] C_{k-1}(u,t) du,
// Hermitian, vanishing at t_k'
Operator w_operator(const PulseSystem& system, int k, double t, const KamConfig& config,
                    const QuadratureSpec& spec);

// propagator of the solvable part after n iterations:
// U0(t,t0) exp(-i(t-t0) eps D_1(t0;t1)) exp(-i(t-t0) eps^2 D_2(t0;t2)) ...,
// truncated at n factors; n = 0 gives U0
Operator effective_propagator(const PulseSystem& system, int n, double t, double t0,
                              const KamConfig& config, const QuadratureSpec& spec = {});

// the perturbation V_{n+1} produced by iteration n (n = 1 only), evaluated at
// t; resummed mode returns the raw closed-form expression without symmetrizing
Operator next_perturbation(const PulseSystem& system, int n, double t,
                           const KamConfig& config, const QuadratureSpec& spec);

// U^(n) = T_1(t)...T_n(t) C_n(t,t0) T_n^dag(t0)...T_1^dag(t0) with
// T_k = exp(-i eps^{2^{k-1}} W_k(t))
Operator kam_propagator(const PulseSystem& system, const KamConfig& config, double t,
                        double t0, const QuadratureSpec& spec);

// type C re-identification: frame of H0 + eps D_1(.;t1) and perturbation
// V_1 - D_1(.;t1), which vanishes at t1; the algorithm then runs unchanged
EffectiveProblem type_c_system(const PulseSystem& system, double t1);

// stage-k artifacts for the configured problem (anchored at the pulse start)
KamIterate build_iterate(const PulseSystem& system, int k, const KamConfig& config,
                         const QuadratureSpec& spec);

// G = int_{t_i}^{t_f} C_n(t_i,u) V_{n+1}(u) C_n(u,t_i) du and
// g = eps^{2^n} * spectral_norm(G), an a-priori estimate of the error of the
// n-iteration expansion usable to tune the free times
GDiagnostic g_operator(const PulseSystem& system, int n, const KamConfig& config,
                       const QuadratureSpec& spec);

// runs the identical algorithm on the pair (H0^i = 0, V1^i(u;s) =
// U0(s,u) V1(u) U0(u,s)) with trivial frame, then maps back via
// U0(t,s) . U0(s,t0); coincides exactly with kam_propagator for every s
Operator interaction_rep_kam(const PulseSystem& system, const KamConfig& config,
                             double s, double t, double t0, const QuadratureSpec& spec);

}  // namespace pulsekam
