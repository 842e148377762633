#include <cmath>

#include "common.hpp"
#include "doctest.h"

using namespace pulsekam;
using testutil::dist;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_SUITE("quad") {

TEST_CASE("gauss rule integrates polynomials to degree 2n-1") {
    const GaussRule& r = gauss_rule(8);
    REQUIRE(r.nodes.size() == 8);
    double wsum = 0, x14 = 0, x15 = 0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        wsum += r.weights[i];
        x14 += r.weights[i] * std::pow(r.nodes[i], 14);
        x15 += r.weights[i] * std::pow(r.nodes[i], 15);
    }
    CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
    CHECK(std::abs(x15) <= 1e-14);

    const GaussRule& r2 = gauss_rule(2);
    CHECK(std::abs(std::abs(r2.nodes[0]) - 1.0 / std::sqrt(3.0)) <= 1e-14);
}

TEST_CASE("operator integration closed forms") {
    QuadratureSpec spec;
    const OperatorCurve c3([](double) { return Operator(sigma3()); }, 0, 1);
    CHECK(dist(integrate_op(c3, 0, 1, spec), sigma3()) <= 1e-12);

    const OperatorCurve pulse(
        [](double t) {
            const double s = std::sin(kPi * t);
            return Operator(2.0 * s * s * sigma1());
        },
        0, 1);
    CHECK(dist(integrate_op(pulse, 0, 1, spec), sigma1()) <= 1e-12);

    const OperatorCurve zero([](double) { return Operator(Operator::Zero(2, 2)); }, 0, 1);
    CHECK(spectral_norm(integrate_op(zero, 0, 1, spec)) == 0.0);
}

TEST_CASE("scalar integration") {
    QuadratureSpec spec;
    CHECK(integrate_scalar([](double t) { return std::sin(t); }, 0, kPi, spec) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("unreachable tolerance raises a quadrature error") {
    QuadratureSpec spec;
    spec.nodes_per_panel = 2;
    spec.initial_panels = 1;
    spec.max_levels = 1;
    spec.tolerance = 1e-16;
    const OperatorCurve osc(
        [](double t) { return Operator(std::sin(50.0 * t) * sigma1()); }, 0, 1);
    try {
        integrate_op(osc, 0, 1, spec);
        FAIL("expected a QuadratureError");
    } catch (const QuadratureError& e) {
        CHECK(std::isfinite(e.prev_estimate));
        CHECK(std::isfinite(e.last_estimate));
    }
}

TEST_CASE("cumulative integral matches the antiderivative and clamps") {
    QuadratureSpec spec;
    const OperatorCurve f([](double t) { return Operator(std::cos(t) * sigma1()); }, 0, 2,
                          2, true);
    const OperatorCurve F = cumulative_integral(f, 0.3, spec);
    for (double t : {0.0, 0.4, 1.1, 1.7, 2.0}) {
        const Operator want = (std::sin(t) - std::sin(0.3)) * sigma1();
        CHECK(dist(F(t), want) <= 1e-9);
    }
    CHECK(spectral_norm(F(0.3)) <= 1e-10);
    CHECK(dist(F(2.5), F(2.0)) == 0.0);   // frozen outside the support
    CHECK(dist(F(-1.0), F(0.0)) == 0.0);
}

TEST_CASE("nested integrals vanish for commuting families") {
    QuadratureSpec spec;
    const OperatorCurve com([](double t) { return Operator((1.0 + t) * sigma1()); }, 0, 1);
    CHECK(spectral_norm(nested_integral(2, com, 0, 1, spec)) <= 1e-13);
    const OperatorCurve scal([](double t) { return Operator(t * identity(2)); }, 0, 1);
    CHECK(spectral_norm(nested_integral(2, scal, 0, 1, spec)) <= 1e-13);
}

TEST_CASE("nested integrals match brute-force Riemann sums") {
    QuadratureSpec spec;
    auto fn = [](double t) {
        return Operator(std::cos(t) * sigma1() + std::sin(t) * sigma3());
    };
    const OperatorCurve h(fn, 0, 1);
    const auto mp2 = testutil::midpoint_prefix(fn, 0, 1, 5000);
    CHECK(dist(nested_integral(2, h, 0, 1, spec), testutil::brute_level2(mp2)) <= 1e-7);
    const auto mp3 = testutil::midpoint_prefix(fn, 0, 1, 2500);
    CHECK(dist(nested_integral(3, h, 0, 1, spec), testutil::brute_level3(mp3)) <= 1e-6);
}

}  // TEST_SUITE
