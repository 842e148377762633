#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "doctest.h"
#include "json.hpp"

using namespace pulsekam;
using testutil::dist;
using testutil::make_sys;

namespace {

const double kPi = std::acos(-1.0);

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

ExperimentSpec tiny_spec() {
    ExperimentSpec spec;
    spec.schemes = {parse_scheme("magnus1"), parse_scheme("kamB1")};
    spec.eps_values = {0.1, 0.5};
    spec.area_values = {1.0};
    return spec;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("scheme ids round trip") {
    for (const char* id :
         {"magnus1", "magnus2", "magnus3", "dyson1", "dyson2", "pvz1", "pvz2",
          "vanvleck1", "vanvleck2", "kamA1", "kamB1", "kamC1", "kamA2", "kamB2",
          "kamC2", "kamB2k2", "kamB2k4", "kamB1k3", "oracle"}) {
        const SchemeSpec s = parse_scheme(id);
        CHECK(scheme_id(s) == id);
        CHECK(s.id == id);
    }
    CHECK(parse_scheme("kamb1").kind == KamKind::B);  // case-insensitive type letter
    CHECK(parse_scheme("kamc2").kind == KamKind::C);
    CHECK(parse_scheme("kamB2k4").kam.truncation.resummed == false);
    CHECK(parse_scheme("kamB2k4").kam.truncation.commutators == 4);
    CHECK(parse_scheme("kamB1").kam.truncation.resummed == true);

    // the family prefix itself is fixed-case per the grammar
    for (const char* bad : {"", "magnus4", "magnus0", "dyson3", "pvz3", "vanvleck0",
                            "kamD1", "kamB3", "kamB", "kamB1k0", "kamB1k", "oracle2",
                            "foo", "kam1", "KAMC2", "Magnus1"})
        CHECK_THROWS_AS(parse_scheme(bad), ConfigError);
}

TEST_CASE("scheme dispatch matches the underlying expansions") {
    QuadratureSpec spec;
    const PulseSystem s = make_sys(1.0, 0.5);
    CHECK(dist(scheme_propagator(s, parse_scheme("magnus2"), 1, 0, spec),
               magnus_propagator(s, 2, 1, 0, spec)) == 0.0);
    CHECK(dist(scheme_propagator(s, parse_scheme("dyson1"), 1, 0, spec),
               dyson_propagator(s, 1, 1, 0, spec)) == 0.0);

    SchemeSpec kam = parse_scheme("kamB1");
    kam.kam.t1 = 0.5;
    kam.kam.t1p = 0.22;
    KamConfig cfg = kam.kam;
    cfg.kind = KamKind::B;
    cfg.iterations = 1;
    CHECK(dist(scheme_propagator(s, kam, 1, 0, spec),
               kam_propagator(s, cfg, 1, 0, spec)) == 0.0);

    // the D choice of the split-generator families comes from the kam slot
    SchemeSpec pvz = parse_scheme("pvz1");
    pvz.kind = KamKind::B;
    pvz.kam.t1 = 0.4;
    pvz.kam.t1p = 0.3;
    OOConfig oo;
    oo.order = 1;
    oo.d_choice = OOConfig::DChoice::VAtTv;
    oo.t_v = 0.4;
    oo.t_primes = {0.3};
    CHECK(dist(scheme_propagator(s, pvz, 1, 0, spec),
               pvz_propagator(s, oo, 1, 0, spec)) == 0.0);

    SchemeSpec pvzc = parse_scheme("pvz1");
    pvzc.kind = KamKind::C;
    CHECK_THROWS_AS(scheme_propagator(s, pvzc, 1, 0, spec), ConfigError);

    SolverSpec osp;
    CHECK(dist(scheme_propagator(s, parse_scheme("oracle"), 1, 0, spec, osp),
               reference_propagator(s, 0, 1, osp).U) == 0.0);
}

TEST_CASE("memoized reference lookups are consistent") {
    OracleCache cache;
    const PulseSystem s = make_sys(1.0, 0.7);
    SolverSpec osp;
    const Operator a = cache.propagator(s, 1.0, 0.0, osp);
    const Operator b = cache.propagator(s, 1.0, 0.0, osp);
    CHECK(dist(a, b) == 0.0);
    CHECK(dist(a, reference_propagator(s, 0.0, 1.0, osp).U) <= 1e-12);

    const PulseSystem other = make_sys(1.0, 0.9);
    CHECK(dist(cache.propagator(other, 1.0, 0.0, osp), a) > 1e-3);
}

TEST_CASE("error metrics: self-comparison and an independent first-order value") {
    QuadratureSpec spec;
    SolverSpec osp;
    const PulseSystem s = make_sys(1.0, 0.5);
    const ErrorReport self = compute_errors(s, parse_scheme("oracle"), spec, osp);
    CHECK(self.delta <= 1e-10);
    CHECK(std::abs(self.delta_prob) <= 1e-10);

    // duplicate first-order implementation: composite Simpson for the frame
    // integral at 10x tighter oracle tolerances
    const int n = 4000;
    const double h = 1.0 / n;
    Operator mu1 = Operator::Zero(2, 2);
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        mu1 += (w * h / 3.0) * conjugate_frame(s, s.Y, i * h, 0.0);
    }
    const Operator u_ind = u_h0(s, 1, 0) * unitary_exp(Operator(0.5 * mu1));
    SolverSpec tight;
    tight.rel_tol = 1e-13;
    tight.abs_tol = 1e-14;
    const double delta_ind = dist(reference_propagator(s, 0, 1, tight).U, u_ind);

    const ErrorReport rep = compute_errors(s, parse_scheme("magnus1"), spec, osp);
    CHECK(std::abs(rep.delta - delta_ind) <= 1e-8);
    CHECK(std::isnan(rep.g));
    CHECK(rep.wall_seconds >= 0.0);

    SchemeSpec kam = parse_scheme("kamB1");
    kam.kam.t1 = 0.5;
    kam.kam.t1p = 0.22;
    const ErrorReport withg = compute_errors(s, kam, spec, osp, nullptr, true);
    CHECK(withg.g > 0.0);
    CHECK(std::isfinite(withg.g));
}

TEST_CASE("mu1 conjugation needs the endpoint frame") {
    // guard for the anchor convention of the independent value above: the
    // first-order exponent conjugated to the endpoint must close the loop
    QuadratureSpec spec;
    const PulseSystem s = make_sys(1.0, 0.5);
    const Operator m1 = magnus_terms(s, 1.0, 0.0, spec).M1;
    const Operator mu1 = u_h0(s, 0.0, 1.0) * m1 * u_h0(s, 1.0, 0.0);
    CHECK(dist(unitary_exp(Operator(0.5 * m1)) * u_h0(s, 1, 0),
               u_h0(s, 1, 0) * unitary_exp(Operator(0.5 * mu1))) <= 1e-12);
}

TEST_CASE("sweeps are ordered, deterministic, and carry the free times") {
    ExperimentSpec spec = tiny_spec();
    const ExperimentResult r1 = run_experiment(spec);
    REQUIRE(r1.rows.size() == 4);
    CHECK(r1.rows[0].scheme == "magnus1");
    CHECK(r1.rows[0].eps == 0.1);
    CHECK(r1.rows[1].eps == 0.5);
    CHECK(r1.rows[2].scheme == "kamB1");
    for (const ExperimentRow& row : r1.rows) {
        CHECK(row.error.empty());
        CHECK(std::isfinite(row.delta));
        CHECK(row.delta > 0.0);
        CHECK(row.log10_delta == doctest::Approx(std::log10(row.delta)));
    }

    const std::string header = r1.csv.substr(0, r1.csv.find('\n'));
    CHECK(header ==
          "scheme,eps,area,t1,t1p,t2,t2p,delta_n,delta_prob,unitarity_defect,g,"
          "log10_delta,error");
    CHECK(count_lines(r1.csv) == 5);

    const ExperimentResult r2 = run_experiment(spec);
    CHECK(r1.csv == r2.csv);
    CHECK(r1.json == r2.json);
    ExperimentSpec threaded = spec;
    threaded.jobs = 2;
    CHECK(run_experiment(threaded).csv == r1.csv);
}

TEST_CASE("row failures are recorded without aborting the sweep") {
    ExperimentSpec spec = tiny_spec();
    SchemeSpec bad = parse_scheme("kamB1");
    bad.kam.t1 = 5.0;  // outside the pulse support
    spec.schemes = {parse_scheme("magnus1"), bad};
    const ExperimentResult r = run_experiment(spec);
    REQUIRE(r.rows.size() == 4);
    CHECK(r.rows[0].error.empty());
    CHECK_FALSE(r.rows[2].error.empty());
    CHECK(std::isnan(r.rows[2].delta));
    CHECK(r.rows[2].error.find(',') == std::string::npos);
    CHECK(r.rows[2].error.find('\n') == std::string::npos);
    CHECK(count_lines(r.csv) == 5);
    CHECK(r.csv.find("nan") != std::string::npos);
}

TEST_CASE("machine-readable output carries metadata and null for nan") {
    ExperimentSpec spec = tiny_spec();
    spec.format = OutputFormat::Json;
    const ExperimentResult r = run_experiment(spec);
    const nlohmann::json j = nlohmann::json::parse(r.json);
    CHECK(j.at("metadata").at("figure") == 0);
    CHECK(j.at("metadata").at("schemes").size() == 2);
    CHECK(j.at("metadata").at("support")[1] == 1.0);
    REQUIRE(j.at("rows").size() == 4);
    CHECK(j.at("rows")[0].at("scheme") == "magnus1");
    CHECK(j.at("rows")[0].at("g").is_null());  // not requested
    CHECK(j.at("rows")[0].at("delta_n").is_number());
}

TEST_CASE("presets encode the published sweeps") {
    const ExperimentSpec f1 = figure_preset(1, 1.0, 0.5);
    CHECK(f1.area_values.size() == 256);
    CHECK(f1.area_values.front() == doctest::Approx(0.25));
    CHECK(f1.area_values.back() == doctest::Approx(13.0));
    CHECK(f1.eps_values == std::vector<double>{0.5});
    REQUIRE(f1.schemes.size() == 3);
    CHECK(f1.schemes[0].id == "magnus1");
    CHECK(f1.schemes[1].id == "kamB1");
    CHECK(f1.schemes[2].id == "kamC1");

    const ExperimentSpec f2 = figure_preset(2, 1.0, 0.5);
    CHECK(f2.eps_values.size() == 40);
    CHECK(f2.eps_values.front() == doctest::Approx(0.05));
    CHECK(f2.eps_values.back() == doctest::Approx(2.0));
    REQUIRE(f2.schemes.size() == 4);
    CHECK(f2.schemes[3].kam.t1 == 0.5);
    CHECK(f2.schemes[3].kam.t1p == 0.22);

    const ExperimentSpec f3 = figure_preset(3, 1.0, 0.5);
    REQUIRE(f3.g_grid.axes.size() == 2);
    CHECK(f3.g_grid.axes[0].nodes == 101);
    CHECK(f3.g_grid.axes[1].nodes == 101);

    const ExperimentSpec f4 = figure_preset(4, 1.0, 0.5);
    CHECK(f4.t1p_values.size() == 101);
    CHECK(f4.include_g);
    REQUIRE(f4.schemes.size() == 3);
    CHECK(f4.schemes[0].id == "kamA1");
    CHECK(f4.schemes[1].kam.t1 == 0.5);
    CHECK(f4.schemes[2].kam.t1 == 0.7);

    const ExperimentSpec f5 = figure_preset(5, 1.0, 0.5);
    REQUIRE(f5.schemes.size() == 6);
    CHECK(f5.schemes[3].id == "kamB2k2");
    CHECK(f5.schemes[4].id == "kamB2k4");
    CHECK(f5.schemes[5].kam.t2 == 0.66);

    CHECK_THROWS_AS(figure_preset(7, 1.0, 0.5), ConfigError);
}

TEST_CASE("surface sweep emits the documented column layout") {
    ExperimentSpec spec = figure_preset(3, 1.0, 0.5);
    spec.g_grid.axes[0].nodes = 5;
    spec.g_grid.axes[1].nodes = 5;
    const ExperimentResult r = run_experiment(spec);
    CHECK(r.rows.empty());
    REQUIRE(r.surface.size() == 25);
    CHECK(r.csv.substr(0, 9) == "t1,t1p,g\n");
    CHECK(count_lines(r.csv) == 26);
    const nlohmann::json j = nlohmann::json::parse(r.json);
    CHECK(j.at("rows").size() == 25);
}

TEST_CASE("degenerate sweeps are rejected before any output") {
    ExperimentSpec spec = tiny_spec();
    spec.schemes.clear();
    spec.out_path = "should_not_exist.csv";
    CHECK_THROWS_AS(run_experiment(spec), ConfigError);
    CHECK_FALSE(std::filesystem::exists("should_not_exist.csv"));

    ExperimentSpec empty = tiny_spec();
    empty.eps_values.clear();
    CHECK_THROWS_AS(run_experiment(empty), ConfigError);
}

TEST_CASE("float formatting is stable") {
    CHECK(format_sig(0.5) == "0.5");
    CHECK(format_sig(std::nan("")) == "nan");
    CHECK(format_sig(1e-12) == "1e-12");
    CHECK(format_sig(0.0) == "0");
}

TEST_CASE("area sweep reproduces the pseudo-period of the first-order error") {
    ExperimentSpec spec = figure_preset(1, 1.0, 0.5);
    const ExperimentResult r = run_experiment(spec);
    REQUIRE(r.rows.size() == 256 * 3);

    std::vector<double> areas, deltas;
    for (const ExperimentRow& row : r.rows) {
        if (row.scheme != "magnus1") continue;
        REQUIRE(row.error.empty());
        areas.push_back(row.area);
        deltas.push_back(row.delta);
    }
    REQUIRE(areas.size() == 256);
    std::vector<double> minima;
    for (std::size_t i = 1; i + 1 < deltas.size(); ++i)
        if (deltas[i] < deltas[i - 1] && deltas[i] < deltas[i + 1] && areas[i] >= 1.0)
            minima.push_back(areas[i]);
    REQUIRE(minima.size() >= 3);
    for (std::size_t i = 1; i < minima.size(); ++i) {
        const double spacing = minima[i] - minima[i - 1];
        CHECK(spacing >= kPi - 0.2);
        CHECK(spacing <= kPi + 0.2);
    }
}

}  // TEST_SUITE
