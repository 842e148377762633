#pragma once

#include <string>
#include <vector>

#include "pulsekam/quad.hpp"

namespace pulsekam {

enum class PulseForm { SinSquared, GaussianTruncated, Tabulated };

// dimensionless pulse envelope Omega(t), zero outside [t_i, t_f], with
// int Omega = area guaranteed at construction
class PulseShape {
public:
    PulseShape() = default;  // zero-area sin-squared pulse on [0, 1]

    // sin-squared: Omega(t) = (2 area / L) sin^2(pi (t - t_i)/L), L = t_f - t_i
    static PulseShape sin_squared(double area, double t_i = 0.0, double t_f = 1.0);
    // truncated Gaussian centered mid-support; sigma defaults to L/6
    static PulseShape gaussian_truncated(double area, double t_i = 0.0, double t_f = 1.0,
                                         double sigma = 0.0);
    // uniform samples over [t_i, t_f], cubic interpolation, renormalized so the
    // quadrature area equals the declared area exactly
    static PulseShape tabulated(double area, double t_i, double t_f,
                                std::vector<double> samples);

    PulseForm form() const { return form_; }
    double area() const { return area_; }
    double t_i() const { return t_i_; }
    double t_f() const { return t_f_; }
    double sigma() const { return sigma_; }  // Gaussian width; 0 otherwise

    double omega(double t) const;    // envelope; 0 outside support
    double area_to(double t) const;  // int_{t_i}^{t} Omega, clamped to support

private:
    void validate_area() const;

    PulseForm form_ = PulseForm::SinSquared;
    double area_ = 0, t_i_ = 0, t_f_ = 1;
    double sigma_ = 0;                 // Gaussian width
    double gauss_height_ = 0;          // Gaussian normalization
    std::vector<double> samples_;      // tabulated values (renormalized)
    std::vector<double> cum_;          // tabulated cumulative at sample nodes
};

// dimensionless pulse-driven problem: H(t) = Omega(t) X + epsilon Y, with the
// identification H0(t) = Omega(t) X and V1 = Y
struct PulseSystem {
    PulseShape pulse;
    double epsilon = 0;
    Operator X;  // coupling direction, default sigma1
    Operator Y;  // static perturbation direction, default sigma3
    int dim = 2;

    static PulseSystem two_level(const PulseShape& pulse, double epsilon);
};

// dimensionless reduction: epsilon = omega * tau, time in units of tau,
// operators in units of hbar*omega
PulseSystem reduce_units(double omega, double tau, const Operator& raw_H,
                         const PulseShape& raw_V_shape);

// cumulative pulse area A(t)
double area(const PulseSystem& system, double t);

// U0(t, t0) = exp(-i (A(t) - A(t0)) X)
Operator u_h0(const PulseSystem& system, double t, double t0);

// U0(s, t) X U0(t, s)
Operator conjugate_frame(const PulseSystem& system, const Operator& X, double t, double s);

}  // namespace pulsekam
