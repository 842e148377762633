#include "pulsekam/quad.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

namespace pulsekam {

namespace {
const Complex kI{0.0, 1.0};

GaussRule make_gauss_rule(int n) {
    // Newton iteration on the Legendre polynomial P_n
    GaussRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    return r;
}
}  // namespace

const GaussRule& gauss_rule(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, make_gauss_rule(n)).first;
    return it->second;
}

OperatorCurve::OperatorCurve(std::function<Operator(double)> fn, double lo, double hi,
                             int dim, bool hermitian, Outside outside)
    : fn_(std::move(fn)), lo_(lo), hi_(hi), dim_(dim), hermitian_(hermitian), outside_(outside) {}

Operator OperatorCurve::operator()(double t) const {
    if (t < lo_ || t > hi_) {
        if (outside_ == Outside::Zero) return Operator::Zero(dim_, dim_);
        t = std::clamp(t, lo_, hi_);
    }
    return fn_(t);
}

namespace {

Operator panels_sum(const OperatorCurve& f, double a, double b, int panels, const GaussRule& g) {
    Operator acc = Operator::Zero(f.dim(), f.dim());
    const double h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (size_t k = 0; k < g.nodes.size(); ++k)
            acc += (0.5 * h * g.weights[k]) * f(mid + 0.5 * h * g.nodes[k]);
    }
    return acc;
}

Operator integrate_segment(const OperatorCurve& f, double a, double b, int panels0,
                           double tol, const QuadratureSpec& spec) {
    const GaussRule& g = gauss_rule(spec.nodes_per_panel);
    int panels = std::max(1, panels0);
    Operator prev = panels_sum(f, a, b, panels, g);
    for (int level = 0; level < spec.max_levels; ++level) {
        panels *= 2;
        Operator cur = panels_sum(f, a, b, panels, g);
        if (spectral_norm(cur - prev) <= tol) return cur;
        prev = cur;
    }
    Operator last = panels_sum(f, a, b, 2 * panels, g);
    std::ostringstream msg;
    msg << "quadrature failed to converge on [" << a << ", " << b << "] after "
        << spec.max_levels << " refinement levels";
    throw QuadratureError(msg.str(), spectral_norm(prev), spectral_norm(last));
}

}  // namespace

Operator integrate_op(const OperatorCurve& f, double t_lo, double t_hi,
                      const QuadratureSpec& spec) {
    if (t_lo > t_hi) throw ConfigError("integrate_op: reversed interval");
    Operator acc = Operator::Zero(f.dim(), f.dim());
    if (t_lo == t_hi) return acc;

    // split at the support boundaries so every panel sees a smooth integrand
    std::vector<double> cuts{t_lo};
    for (double c : {f.lo(), f.hi()})
        if (c > t_lo && c < t_hi) cuts.push_back(c);
    cuts.push_back(t_hi);
    std::sort(cuts.begin(), cuts.end());

    std::vector<std::pair<double, double>> segments;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i], b = cuts[i + 1];
        if (b - a <= 0) continue;
        if (f.outside() == OperatorCurve::Outside::Zero && (b <= f.lo() || a >= f.hi()))
            continue;  // identically zero segment
        segments.emplace_back(a, b);
    }
    if (segments.empty()) return acc;

    const double span = t_hi - t_lo;
    const double tol = spec.tolerance / segments.size();
    for (auto [a, b] : segments) {
        const int p0 = std::max(1, static_cast<int>(std::lround(spec.initial_panels * (b - a) / span)));
        acc += integrate_segment(f, a, b, p0, tol, spec);
    }
    if (f.hermitian()) acc = hermitize(acc);
    return acc;
}

double integrate_scalar(const std::function<double(double)>& f, double t_lo,
                        double t_hi, const QuadratureSpec& spec) {
    if (t_lo > t_hi) throw ConfigError("integrate_scalar: reversed interval");
    if (t_lo == t_hi) return 0.0;
    const GaussRule& g = gauss_rule(spec.nodes_per_panel);
    auto sum = [&](int panels) {
        double acc = 0;
        const double h = (t_hi - t_lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = t_lo + (p + 0.5) * h;
            for (size_t k = 0; k < g.nodes.size(); ++k)
                acc += 0.5 * h * g.weights[k] * f(mid + 0.5 * h * g.nodes[k]);
        }
        return acc;
    };
    int panels = spec.initial_panels;
    double prev = sum(panels);
    for (int level = 0; level < spec.max_levels; ++level) {
        panels *= 2;
        const double cur = sum(panels);
        if (std::abs(cur - prev) <= spec.tolerance) return cur;
        prev = cur;
    }
    throw QuadratureError("scalar quadrature failed to converge", prev, sum(2 * panels));
}

namespace {

// uniform-grid samples with local Lagrange interpolation of fixed degree
struct GridData {
    std::vector<Operator> values;
    double lo, hi, step;
    int degree;
};

Operator grid_eval(const std::shared_ptr<GridData>& gd, double t) {
    const int n = static_cast<int>(gd->values.size());
    const int d = std::min(gd->degree, n - 1);
    int i0 = static_cast<int>(std::floor((t - gd->lo) / gd->step)) - d / 2;
    i0 = std::clamp(i0, 0, n - 1 - d);
    Operator acc = Operator::Zero(gd->values[0].rows(), gd->values[0].cols());
    for (int k = 0; k <= d; ++k) {
        const double xk = gd->lo + (i0 + k) * gd->step;
        double L = 1.0;
        for (int j = 0; j <= d; ++j) {
            if (j == k) continue;
            const double xj = gd->lo + (i0 + j) * gd->step;
            L *= (t - xj) / (xk - xj);
        }
        acc += L * gd->values[i0 + k];
    }
    return acc;
}

}  // namespace

OperatorCurve cumulative_integral(const OperatorCurve& f, double anchor,
                                  const QuadratureSpec& spec) {
    const double lo = f.lo(), hi = f.hi();
    if (!(hi > lo)) throw ConfigError("cumulative_integral: degenerate support");
    const int n = std::max(spec.cache_nodes, spec.cache_degree + 1);
    const GaussRule& g = gauss_rule(spec.nodes_per_panel);

    auto gd = std::make_shared<GridData>();
    gd->lo = lo;
    gd->hi = hi;
    gd->step = (hi - lo) / n;
    gd->degree = spec.cache_degree;
    gd->values.reserve(n + 1);
    Operator acc = Operator::Zero(f.dim(), f.dim());
    gd->values.push_back(acc);
    for (int p = 0; p < n; ++p) {
        const double a = lo + p * gd->step;
        const double mid = a + 0.5 * gd->step;
        for (size_t k = 0; k < g.nodes.size(); ++k)
            acc += (0.5 * gd->step * g.weights[k]) * f(mid + 0.5 * gd->step * g.nodes[k]);
        gd->values.push_back(f.hermitian() ? hermitize(acc) : acc);
    }

    Operator at_anchor = grid_eval(gd, std::clamp(anchor, lo, hi));
    auto fn = [gd, at_anchor](double t) { return Operator(grid_eval(gd, t) - at_anchor); };
    return OperatorCurve(fn, lo, hi, f.dim(), f.hermitian(), OperatorCurve::Outside::Clamp);
}

namespace {

Operator nested_at_resolution(int level, const OperatorCurve& h, double t0, double t,
                              const QuadratureSpec& spec) {
    const OperatorCurve P = cumulative_integral(h, t0, spec);
    const bool herm = h.hermitian();
    const double lo = std::min(t0, h.lo()), hi = std::max(t, h.hi());
    if (level == 2) {
        auto g2 = [&, P](double u) { return Operator((0.5 * kI) * commutator(P(u), h(u))); };
        return integrate_op(OperatorCurve(g2, lo, hi, h.dim(), herm, OperatorCurve::Outside::Clamp),
                            t0, t, spec);
    }
    // level 3: cache Q(u) = int_t0^u [P(v), h(v)] dv as well
    auto qi = [&, P](double v) { return commutator(P(v), h(v)); };
    const OperatorCurve Q = cumulative_integral(
        OperatorCurve(qi, lo, hi, h.dim(), false, OperatorCurve::Outside::Clamp), t0, spec);
    auto g3 = [&, P, Q](double u) {
        const Operator hu = h(u), pu = P(u);
        return Operator(-0.25 * commutator(Q(u), hu) -
                        (1.0 / 12.0) * commutator(pu, commutator(pu, hu)));
    };
    return integrate_op(OperatorCurve(g3, lo, hi, h.dim(), herm, OperatorCurve::Outside::Clamp),
                        t0, t, spec);
}

}  // namespace

Operator nested_integral(int level, const OperatorCurve& h, double t0, double t,
                         const QuadratureSpec& spec) {
    if (level != 2 && level != 3)
        throw ConfigError("nested_integral: level must be 2 or 3");
    if (t < t0) throw ConfigError("nested_integral: reversed interval");
    if (t == t0) return Operator::Zero(h.dim(), h.dim());

    QuadratureSpec s = spec;
    Operator prev = nested_at_resolution(level, h, t0, t, s);
    for (int refine = 0; refine < 4; ++refine) {
        s.cache_nodes *= 2;
        Operator cur = nested_at_resolution(level, h, t0, t, s);
        if (spectral_norm(cur - prev) <= spec.tolerance)
            return h.hermitian() ? hermitize(cur) : cur;
        prev = cur;
    }
    throw QuadratureError("nested_integral failed to converge under grid doubling",
                          spectral_norm(prev), spectral_norm(prev));
}

}  // namespace pulsekam
