#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "pulsekam/linalg.hpp"

namespace pulsekam {

struct QuadratureSpec {
    int nodes_per_panel = 8;   // composite Gauss-Legendre order
    int initial_panels = 16;
    double tolerance = 1e-10;  // spectral-norm convergence threshold
    int max_levels = 12;       // panel-doubling limit
    int cache_nodes = 512;     // uniform grid size for cumulative caches
    int cache_degree = 6;      // local interpolation degree on cached grids
};

// Gauss-Legendre nodes/weights on [-1, 1]
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_rule(int n);

// time -> Operator with a declared support; evaluations outside the support
// return either the zero operator (integrands of localized pulses) or the
// clamped endpoint value (cumulative integrals, frozen outside the support)
class OperatorCurve {
public:
    enum class Outside { Zero, Clamp };

    OperatorCurve() = default;
    OperatorCurve(std::function<Operator(double)> fn, double lo, double hi,
                  int dim = 2, bool hermitian = false, Outside outside = Outside::Zero);

    Operator operator()(double t) const;

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    int dim() const { return dim_; }
    bool hermitian() const { return hermitian_; }
    Outside outside() const { return outside_; }

private:
    std::function<Operator(double)> fn_;
    double lo_ = 0, hi_ = 0;
    int dim_ = 2;
    bool hermitian_ = false;
    Outside outside_ = Outside::Zero;
};

// composite Gauss-Legendre with panel doubling until successive estimates
// agree to spec.tolerance in spectral norm; panel boundaries are aligned with
// the curve support so the integrand is smooth on every panel
Operator integrate_op(const OperatorCurve& f, double t_lo, double t_hi,
                      const QuadratureSpec& spec);

// scalar counterpart used for pulse areas
double integrate_scalar(const std::function<double(double)>& f, double t_lo,
                        double t_hi, const QuadratureSpec& spec);

// cached cumulative integral F(t) = int_anchor^t f(u) du, materialized on a
// uniform grid of spec.cache_nodes panels over the curve support and
// interpolated locally at degree spec.cache_degree; clamped outside
OperatorCurve cumulative_integral(const OperatorCurve& f, double anchor,
                                  const QuadratureSpec& spec);

// time-ordered nested commutator integrals of the single-exponential series
// for the generator h: level 2 returns
//   (i/2) int_t0^t du [ int_t0^u dv h(v), h(u) ]
// and level 3 returns
//   -(1/4) int_t0^t du [ int_t0^u dv [ int_t0^v dw h(w), h(v) ], h(u) ]
//   -(1/12) int_t0^t du [ int_t0^u dv h(v), [ int_t0^u dw h(w), h(u) ] ],
// i.e. the second- and third-order terms of exp(-i(M1 + M2 + M3 + ...));
// inner cumulative integrals are cached on a dense grid and the whole result
// is re-evaluated under grid doubling until it is stable to spec.tolerance
Operator nested_integral(int level, const OperatorCurve& h, double t0, double t,
                         const QuadratureSpec& spec);

}  // namespace pulsekam
