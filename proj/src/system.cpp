#include "pulsekam/system.hpp"

#include <algorithm>
#include <cmath>

namespace pulsekam {

namespace {
constexpr double kSqrtPi = 1.7724538509055160273;

// 4-point Gauss-Legendre: exact for the cubic pieces of the tabulated form
double gl4(const std::function<double(double)>& f, double a, double b) {
    const GaussRule& g = gauss_rule(4);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double acc = 0;
    for (size_t k = 0; k < g.nodes.size(); ++k)
        acc += half * g.weights[k] * f(mid + half * g.nodes[k]);
    return acc;
}
}  // namespace

PulseShape PulseShape::sin_squared(double area, double t_i, double t_f) {
    if (!(t_f > t_i)) throw ConfigError("pulse support must have t_f > t_i");
    PulseShape p;
    p.form_ = PulseForm::SinSquared;
    p.area_ = area;
    p.t_i_ = t_i;
    p.t_f_ = t_f;
    p.validate_area();
    return p;
}

PulseShape PulseShape::gaussian_truncated(double area, double t_i, double t_f, double sigma) {
    if (!(t_f > t_i)) throw ConfigError("pulse support must have t_f > t_i");
    PulseShape p;
    p.form_ = PulseForm::GaussianTruncated;
    p.area_ = area;
    p.t_i_ = t_i;
    p.t_f_ = t_f;
    p.sigma_ = sigma > 0 ? sigma : (t_f - t_i) / 6.0;
    const double tc = 0.5 * (t_i + t_f);
    const double span = 0.5 * kSqrtPi * p.sigma_ *
                        (std::erf((t_f - tc) / p.sigma_) - std::erf((t_i - tc) / p.sigma_));
    p.gauss_height_ = area / span;
    p.validate_area();
    return p;
}

PulseShape PulseShape::tabulated(double area, double t_i, double t_f,
                                 std::vector<double> samples) {
    if (!(t_f > t_i)) throw ConfigError("pulse support must have t_f > t_i");
    if (samples.size() < 4) throw ConfigError("tabulated pulse needs at least 4 samples");
    PulseShape p;
    p.form_ = PulseForm::Tabulated;
    p.area_ = area;
    p.t_i_ = t_i;
    p.t_f_ = t_f;
    p.samples_ = std::move(samples);

    // renormalize so the quadrature area matches the declared area exactly
    QuadratureSpec spec;
    spec.tolerance = 1e-13;
    const double raw = integrate_scalar([&p](double t) { return p.omega(t); }, t_i, t_f, spec);
    if (std::abs(raw) < 1e-300 && area != 0.0)
        throw ConfigError("tabulated pulse has zero raw area but nonzero declared area");
    if (area != 0.0)
        for (double& s : p.samples_) s *= area / raw;
    else
        for (double& s : p.samples_) s = 0.0;

    // cumulative integral at the sample nodes (the interpolant is piecewise
    // cubic, so 4-point panels are exact)
    const size_t n = p.samples_.size() - 1;
    const double h = (t_f - t_i) / n;
    p.cum_.assign(n + 1, 0.0);
    for (size_t k = 0; k < n; ++k)
        p.cum_[k + 1] = p.cum_[k] + gl4([&p](double t) { return p.omega(t); },
                                        t_i + k * h, t_i + (k + 1) * h);
    p.validate_area();
    return p;
}

void PulseShape::validate_area() const {
    QuadratureSpec spec;
    spec.tolerance = 1e-13;
    const double got = integrate_scalar([this](double t) { return omega(t); }, t_i_, t_f_, spec);
    if (std::abs(got - area_) > 1e-12)
        throw ConfigError("pulse area does not integrate to the declared value");
}

double PulseShape::omega(double t) const {
    if (t < t_i_ || t > t_f_) return 0.0;
    const double L = t_f_ - t_i_;
    switch (form_) {
        case PulseForm::SinSquared: {
            const double s = std::sin(M_PI * (t - t_i_) / L);
            return 2.0 * area_ / L * s * s;
        }
        case PulseForm::GaussianTruncated: {
            const double tc = 0.5 * (t_i_ + t_f_);
            const double u = (t - tc) / sigma_;
            return gauss_height_ * std::exp(-u * u);
        }
        case PulseForm::Tabulated: {
            // Catmull-Rom cubic through uniform samples, one-sided at the ends
            const size_t n = samples_.size() - 1;
            const double h = L / n;
            double x = (t - t_i_) / h;
            size_t k = std::min(static_cast<size_t>(x), n - 1);
            const double u = x - k;
            const double y1 = samples_[k], y2 = samples_[k + 1];
            const double y0 = k > 0 ? samples_[k - 1] : 2 * y1 - y2;
            const double y3 = k + 2 <= n ? samples_[k + 2] : 2 * y2 - y1;
            const double a0 = -0.5 * y0 + 1.5 * y1 - 1.5 * y2 + 0.5 * y3;
            const double a1 = y0 - 2.5 * y1 + 2.0 * y2 - 0.5 * y3;
            const double a2 = -0.5 * y0 + 0.5 * y2;
            return ((a0 * u + a1) * u + a2) * u + y1;
        }
    }
    return 0.0;
}

double PulseShape::area_to(double t) const {
    const double L = t_f_ - t_i_;
    t = std::clamp(t, t_i_, t_f_);
    switch (form_) {
        case PulseForm::SinSquared: {
            const double s = (t - t_i_) / L;
            return area_ * (s - std::sin(2.0 * M_PI * s) / (2.0 * M_PI));
        }
        case PulseForm::GaussianTruncated: {
            const double tc = 0.5 * (t_i_ + t_f_);
            return gauss_height_ * 0.5 * kSqrtPi * sigma_ *
                   (std::erf((t - tc) / sigma_) - std::erf((t_i_ - tc) / sigma_));
        }
        case PulseForm::Tabulated: {
            const size_t n = samples_.size() - 1;
            const double h = L / n;
            const double x = (t - t_i_) / h;
            const size_t k = std::min(static_cast<size_t>(x), n - 1);
            return cum_[k] + gl4([this](double u) { return omega(u); }, t_i_ + k * h, t);
        }
    }
    return 0.0;
}

PulseSystem PulseSystem::two_level(const PulseShape& pulse, double epsilon) {
    PulseSystem s;
    s.pulse = pulse;
    s.epsilon = epsilon;
    s.X = sigma1();
    s.Y = sigma3();
    s.dim = 2;
    return s;
}

PulseSystem reduce_units(double omega, double tau, const Operator& raw_H,
                         const PulseShape& raw_V_shape) {
    if (!(tau > 0)) throw ConfigError("reduce_units: tau must be positive");
    if (omega < 0) throw ConfigError("reduce_units: omega must be nonnegative");
    require_hermitian(raw_H, 1e-12);
    PulseSystem s;
    s.pulse = raw_V_shape;
    s.epsilon = omega * tau;
    s.X = sigma1();
    s.Y = raw_H;
    s.dim = static_cast<int>(raw_H.rows());
    return s;
}

double area(const PulseSystem& system, double t) { return system.pulse.area_to(t); }

Operator u_h0(const PulseSystem& system, double t, double t0) {
    const double theta = system.pulse.area_to(t) - system.pulse.area_to(t0);
    return unitary_exp(theta * system.X);
}

Operator conjugate_frame(const PulseSystem& system, const Operator& X, double t, double s) {
    if (X.rows() != system.dim || X.cols() != system.dim)
        throw DimensionError("conjugate_frame: operator dimension mismatch");
    const Operator U = u_h0(system, s, t);  // U0(s, t)
    return U * X * U.adjoint();
}

}  // namespace pulsekam
