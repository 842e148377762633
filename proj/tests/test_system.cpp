#include <cmath>
#include <vector>

#include "common.hpp"
#include "doctest.h"

using namespace pulsekam;
using testutil::dist;
using testutil::make_sys;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_SUITE("system") {

TEST_CASE("sin-squared pulse envelope and cumulative area") {
    const PulseShape p = PulseShape::sin_squared(3.0);
    CHECK(p.omega(0.0) == doctest::Approx(0.0));
    CHECK(p.omega(0.25) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(p.omega(0.5) == doctest::Approx(6.0).epsilon(1e-14));
    CHECK(p.omega(-0.2) == 0.0);
    CHECK(p.omega(1.3) == 0.0);

    CHECK(p.area_to(0.0) == doctest::Approx(0.0));
    CHECK(p.area_to(0.5) == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(p.area_to(1.0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(p.area_to(2.0) == doctest::Approx(3.0).epsilon(1e-14));  // clamped
    CHECK(p.area_to(-1.0) == doctest::Approx(0.0));

    // shifted support scales the envelope to preserve the area
    const PulseShape q = PulseShape::sin_squared(2.0, 1.0, 3.0);
    CHECK(q.omega(2.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(q.area_to(3.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(q.area_to(2.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gaussian pulse integrates to its declared area") {
    const PulseShape g = PulseShape::gaussian_truncated(1.7);
    QuadratureSpec spec;
    const double a =
        integrate_scalar([&](double t) { return g.omega(t); }, 0, 1, spec);
    CHECK(a == doctest::Approx(1.7).epsilon(1e-9));
    CHECK(g.area_to(1.0) == doctest::Approx(1.7).epsilon(1e-9));
    for (double x : {0.1, 0.2, 0.35})
        CHECK(g.omega(0.5 - x) == doctest::Approx(g.omega(0.5 + x)).epsilon(1e-12));
    CHECK(g.omega(0.5) > g.omega(0.1));
}

TEST_CASE("tabulated pulse reproduces its source samples") {
    std::vector<double> samples;
    for (int i = 0; i <= 100; ++i) {
        const double t = i / 100.0;
        samples.push_back(2.0 * std::sin(kPi * t) * std::sin(kPi * t));
    }
    const PulseShape t = PulseShape::tabulated(1.0, 0.0, 1.0, samples);
    const PulseShape ref = PulseShape::sin_squared(1.0);
    for (double x : {0.13, 0.4, 0.77})
        CHECK(t.omega(x) == doctest::Approx(ref.omega(x)).epsilon(1e-3));
    CHECK(t.area_to(1.0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("unit reduction forms the dimensionless coupling") {
    const PulseShape p = PulseShape::sin_squared(1.0);
    CHECK(reduce_units(2.0, 0.25, sigma3(), p).epsilon == doctest::Approx(0.5));
    CHECK(reduce_units(0.0, 0.7, sigma3(), p).epsilon == doctest::Approx(0.0));
    CHECK(reduce_units(1.0, 1.0, sigma3(), p).epsilon == doctest::Approx(1.0));
    CHECK_THROWS_AS(reduce_units(1.0, 0.0, sigma3(), p), ConfigError);
    CHECK_THROWS_AS(reduce_units(-1.0, 1.0, sigma3(), p), ConfigError);
}

TEST_CASE("pulse-frame propagator closed forms") {
    const PulseSystem full = make_sys(kPi, 0.3);
    CHECK(dist(u_h0(full, 0.4, 0.4), identity(2)) == 0.0);
    CHECK(dist(u_h0(full, 1.0, 0.0), Operator(-identity(2))) <= 1e-13);

    const PulseSystem half = make_sys(kPi / 2, 0.3);
    CHECK(dist(u_h0(half, 1.0, 0.0), Operator(Complex(0, -1) * sigma1())) <= 1e-13);

    const PulseSystem s = make_sys(1.0, 0.3);
    const Operator a = u_h0(s, 0.8, 0.5);
    const Operator b = u_h0(s, 0.5, 0.2);
    CHECK(dist(Operator(a * b), u_h0(s, 0.8, 0.2)) <= 1e-14);
    CHECK(unitarity_defect(a) <= 1e-14);

    // explicit SU(2) form: exp(-i theta sigma1)
    const double theta = area(s, 0.8) - area(s, 0.5);
    const Operator want = std::cos(theta) * identity(2) -
                          Complex(0, 1) * std::sin(theta) * sigma1();
    CHECK(dist(a, want) <= 1e-14);
}

TEST_CASE("frame conjugation") {
    const PulseSystem s = make_sys(1.0, 0.3);
    CHECK(dist(conjugate_frame(s, sigma1(), 0.7, 0.2), sigma1()) <= 1e-14);
    CHECK(dist(conjugate_frame(s, sigma3(), 0.4, 0.4), sigma3()) == 0.0);

    const double theta = area(s, 0.7) - area(s, 0.2);
    const Operator want = std::cos(2 * theta) * sigma3() + std::sin(2 * theta) * sigma2();
    CHECK(dist(conjugate_frame(s, sigma3(), 0.7, 0.2), want) <= 1e-13);

    const Operator h = conjugate_frame(s, sigma3(), 0.9, 0.1);
    CHECK(hermiticity_defect(h) <= 1e-14);
    CHECK(std::abs(h.trace()) <= 1e-14);
}

TEST_CASE("area helper follows the pulse") {
    const PulseSystem s = make_sys(2.0, 0.1);
    CHECK(area(s, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(area(s, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(area(s, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("construction validates the operators") {
    const PulseShape p = PulseShape::sin_squared(1.0);
    PulseSystem s = PulseSystem::two_level(p, 0.5);
    CHECK(s.dim == 2);
    CHECK(dist(s.X, sigma1()) == 0.0);
    CHECK(dist(s.Y, sigma3()) == 0.0);
    CHECK(s.epsilon == 0.5);
}

}  // TEST_SUITE
