#include "pulsekam/ooexpand.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pulsekam/errors.hpp"

namespace pulsekam {
namespace {

// generator of the interaction frame anchored at t0:
//   h(u) = U0(t0, u) V1(u) U0(u, t0),
// constant outside the pulse support, so clamped evaluation is exact there;
// the support hull also covers t0 and the target time t
OperatorCurve frame_generator(const PulseSystem& system, double t0, double t) {
    const double lo = std::min({t0, t, system.pulse.t_i()});
    const double hi = std::max({t0, t, system.pulse.t_f()});
    PulseSystem sys = system;
    auto fn = [sys, t0](double u) { return conjugate_frame(sys, sys.Y, u, t0); };
    return OperatorCurve(fn, lo, hi, system.dim, /*hermitian=*/true,
                         OperatorCurve::Outside::Clamp);
}

MagnusTerms magnus_terms_upto(const PulseSystem& system, int n, double t, double t0,
                              const QuadratureSpec& spec) {
    const int dim = system.dim;
    MagnusTerms terms{Operator::Zero(dim, dim), Operator::Zero(dim, dim),
                      Operator::Zero(dim, dim)};
    const OperatorCurve h = frame_generator(system, t0, t);
    const Operator uc = u_h0(system, t, t0);
    const auto back = [&uc](const Operator& mu) {
        return hermitize(Operator(uc * mu * uc.adjoint()));
    };
    terms.M1 = back(integrate_op(h, t0, t, spec));
    if (n >= 2) terms.M2 = back(nested_integral(2, h, t0, t, spec));
    if (n >= 3) terms.M3 = back(nested_integral(3, h, t0, t, spec));
    return terms;
}

void require_order(int n, int max, const char* scheme) {
    if (n < 1 || n > max)
        throw ConfigError(std::string(scheme) + " order must be in 1.." +
                          std::to_string(max) + ", got " + std::to_string(n));
}

// shared body of the order-by-order schemes; the two differ only in whether
// the transformation is a single exponential of the summed generator or an
// ordered product of per-order exponentials
Operator oo_propagator(const PulseSystem& system, const OOConfig& config, double t,
                       double t0, const QuadratureSpec& spec, bool product_form) {
    require_order(config.order, 2, product_form ? "vanvleck" : "pvz");

    const OperatorCurve h = frame_generator(system, t0, t);
    const bool has_d = config.d_choice == OOConfig::DChoice::VAtTv;
    if (has_d) {
        if (config.v < 1 || config.v > config.order)
            throw ConfigError("D-choice index v must be in 1..order, got " +
                              std::to_string(config.v));
        if (config.t_v < h.lo() || config.t_v > h.hi())
            throw ConfigError("D-choice anchor t_v outside the working interval");
    }
    if (static_cast<int>(config.t_primes.size()) > config.order)
        throw ConfigError("more integration bases t_k' than expansion orders");
    const double tp1 = !config.t_primes.empty() ? config.t_primes[0] : t0;
    const double tp2 = config.t_primes.size() >= 2 ? config.t_primes[1] : t0;
    for (double tp : {tp1, tp2})
        if (tp < h.lo() || tp > h.hi())
            throw ConfigError("integration base t_k' outside the working interval");

    const int dim = system.dim;
    const double e = system.epsilon;

    // everything below lives in the frame anchored at t0, where the covariant
    // D operators are constant in time
    const OperatorCurve mu1 = cumulative_integral(h, t0, spec);
    const Operator d1 =
        (has_d && config.v == 1) ? Operator(h(config.t_v)) : Operator::Zero(dim, dim);
    const Operator mu1_tp1 = mu1(tp1);
    const auto w1 = [&mu1, &mu1_tp1, &d1, tp1](double tau) {
        return hermitize(Operator(mu1(tau) - mu1_tp1 - (tau - tp1) * d1));
    };

    Operator w1_t = w1(t), w1_t0 = w1(t0);
    Operator w2_t = Operator::Zero(dim, dim), w2_t0 = Operator::Zero(dim, dim);
    Operator d2 = Operator::Zero(dim, dim);
    if (config.order >= 2) {
        // second-order generator density (i/2) [W1(u), V1(u) + D1]
        const Operator d1c = d1;
        OperatorCurve v2(
            [mu1, mu1_tp1, d1c, tp1, h](double u) {
                const Operator w1u = mu1(u) - mu1_tp1 - (u - tp1) * d1c;
                return Operator(Complex(0, 0.5) *
                                commutator(w1u, Operator(h(u) + d1c)));
            },
            h.lo(), h.hi(), dim, /*hermitian=*/true, OperatorCurve::Outside::Clamp);
        const OperatorCurve j2 = cumulative_integral(v2, t0, spec);
        if (has_d && config.v == 2) d2 = v2(config.t_v);
        const Operator j2_tp2 = j2(tp2);
        const auto w2 = [&j2, &j2_tp2, &d2, tp2](double tau) {
            return hermitize(Operator(j2(tau) - j2_tp2 - (tau - tp2) * d2));
        };
        w2_t = w2(t);
        w2_t0 = w2(t0);
    }

    Operator trans_t, trans_t0;
    if (product_form) {
        trans_t = unitary_exp(Operator(e * w1_t));
        trans_t0 = unitary_exp(Operator(e * w1_t0));
        if (config.order >= 2) {
            trans_t = trans_t * unitary_exp(Operator(e * e * w2_t));
            trans_t0 = trans_t0 * unitary_exp(Operator(e * e * w2_t0));
        }
    } else {
        Operator g_t = e * w1_t, g_t0 = e * w1_t0;
        if (config.order >= 2) {
            g_t += e * e * w2_t;
            g_t0 += e * e * w2_t0;
        }
        trans_t = unitary_exp(g_t);
        trans_t0 = unitary_exp(g_t0);
    }

    Operator core = trans_t;
    if (has_d) {
        const Operator& d_sel = (config.v == 1) ? d1 : d2;
        const double e_pow = (config.v == 1) ? e : e * e;
        core = core * unitary_exp(Operator(((t - t0) * e_pow) * d_sel));
    }
    return u_h0(system, t, t0) * core * trans_t0.adjoint();
}

}  // namespace

MagnusTerms magnus_terms(const PulseSystem& system, double t, double t0,
                         const QuadratureSpec& spec) {
    return magnus_terms_upto(system, 3, t, t0, spec);
}

Operator magnus_propagator(const PulseSystem& system, int n, double t, double t0,
                           const QuadratureSpec& spec) {
    require_order(n, 3, "magnus");
    const MagnusTerms terms = magnus_terms_upto(system, n, t, t0, spec);
    const double e = system.epsilon;
    Operator gen = e * terms.M1;
    if (n >= 2) gen += (e * e) * terms.M2;
    if (n >= 3) gen += (e * e * e) * terms.M3;
    return unitary_exp(gen) * u_h0(system, t, t0);
}

Operator dyson_propagator(const PulseSystem& system, int n, double t, double t0,
                          const QuadratureSpec& spec) {
    require_order(n, 2, "dyson");
    const int dim = system.dim;
    const OperatorCurve h = frame_generator(system, t0, t);
    const double e = system.epsilon;
    const Complex im(0, 1);
    Operator series = Operator::Identity(dim, dim);
    if (n == 1) {
        series -= im * e * integrate_op(h, t0, t, spec);
    } else {
        const OperatorCurve mu1 = cumulative_integral(h, t0, spec);
        series -= im * e * mu1(t);
        // ordered second iterate: the integrand h(u) mu1(u) is not Hermitian
        // and the truncated series is deliberately left non-unitary
        OperatorCurve second(
            [h, mu1](double u) { return Operator(h(u) * mu1(u)); }, h.lo(), h.hi(),
            dim, /*hermitian=*/false, OperatorCurve::Outside::Clamp);
        series -= (e * e) * integrate_op(second, t0, t, spec);
    }
    return u_h0(system, t, t0) * series;
}

Operator pvz_propagator(const PulseSystem& system, const OOConfig& config, double t,
                        double t0, const QuadratureSpec& spec) {
    return oo_propagator(system, config, t, t0, spec, /*product_form=*/false);
}

Operator vanvleck_propagator(const PulseSystem& system, const OOConfig& config,
                             double t, double t0, const QuadratureSpec& spec) {
    return oo_propagator(system, config, t, t0, spec, /*product_form=*/true);
}

}  // namespace pulsekam
