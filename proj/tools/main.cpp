// command-line front end: propagate / errors / scan / optimize / figure
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pulsekam/errors.hpp"
#include "pulsekam/harness.hpp"

namespace {

using namespace pulsekam;

struct CliState {
    PulseForm form = PulseForm::SinSquared;
    double area = 1.0;
    double eps = 0.5;
    double t_i = 0.0, t_f = 1.0;
    SchemeSpec scheme = parse_scheme("magnus1");
    QuadratureSpec quadrature;
    SolverSpec oracle;
    std::string out_path;
    std::string format = "csv";
    int jobs = 0;
    int nodes = 101;
    int figure_id = 0;
};

PulseForm parse_form(const std::string& name) {
    if (name == "sin_squared" || name == "sin2") return PulseForm::SinSquared;
    if (name == "gaussian_truncated" || name == "gaussian")
        return PulseForm::GaussianTruncated;
    if (name == "tabulated")
        throw ConfigError("tabulated pulses are not configurable from files");
    throw ConfigError("unknown pulse form: " + name);
}

void require_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                  const char* where) {
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || item.key() == k;
        if (!ok)
            throw ConfigError(std::string("unknown key \"") + item.key() + "\" in " +
                              where + " config");
    }
}

double number_field(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    return j[key].get<double>();
}

void apply_config_file(const std::string& path, CliState& st) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& ex) {
        throw ConfigError("config parse error: " + std::string(ex.what()));
    }
    require_keys(j, {"system", "scheme", "oracle", "quadrature"}, "top-level");

    if (j.contains("system")) {
        const auto& s = j["system"];
        require_keys(s, {"form", "area", "support", "epsilon"}, "system");
        if (s.contains("form")) st.form = parse_form(s["form"].get<std::string>());
        st.area = number_field(s, "area", st.area);
        st.eps = number_field(s, "epsilon", st.eps);
        if (s.contains("support")) {
            const auto& sup = s["support"];
            if (!sup.is_array() || sup.size() != 2)
                throw ConfigError("support must be [t_i, t_f]");
            st.t_i = sup[0].get<double>();
            st.t_f = sup[1].get<double>();
        }
    }
    if (j.contains("scheme")) {
        const auto& s = j["scheme"];
        require_keys(s, {"kind", "order", "type", "t1", "t1p", "t2", "t2p", "truncation"},
                     "scheme");
        SchemeSpec spec = st.scheme;
        if (s.contains("kind")) {
            const std::string kind = s["kind"].get<std::string>();
            const int order =
                s.contains("order") ? s["order"].get<int>() : 1;
            std::string id = kind + std::to_string(order);
            if (kind == "oracle") id = "oracle";
            if (kind == "kam") {
                std::string type = s.contains("type") ? s["type"].get<std::string>() : "B";
                if (type.size() != 1) throw ConfigError("type must be A, B or C");
                id = "kam" + type + std::to_string(order);
            }
            spec = parse_scheme(id);
        } else if (s.contains("order") || s.contains("type")) {
            throw ConfigError("scheme order/type need an explicit kind");
        }
        if (s.contains("type") && spec.family != SchemeFamily::Kam) {
            const std::string type = s["type"].get<std::string>();
            if (type == "B")
                spec.kind = KamKind::B;
            else if (type == "A")
                spec.kind = KamKind::A;
            else
                throw ConfigError("type " + type + " is not available for " +
                                  scheme_id(spec));
        }
        spec.kam.t1 = number_field(s, "t1", spec.kam.t1);
        spec.kam.t1p = number_field(s, "t1p", spec.kam.t1p);
        spec.kam.t2 = number_field(s, "t2", spec.kam.t2);
        spec.kam.t2p = number_field(s, "t2p", spec.kam.t2p);
        if (s.contains("truncation")) {
            const auto& tr = s["truncation"];
            if (tr.is_string() && tr.get<std::string>() == "resummed") {
                spec.kam.truncation.resummed = true;
            } else if (tr.is_number_integer()) {
                spec.kam.truncation.resummed = false;
                spec.kam.truncation.commutators = tr.get<int>();
            } else {
                throw ConfigError("truncation must be \"resummed\" or a commutator count");
            }
        }
        spec.id = scheme_id(spec);
        st.scheme = spec;
    }
    if (j.contains("oracle")) {
        const auto& s = j["oracle"];
        require_keys(s, {"rel_tol", "abs_tol"}, "oracle");
        st.oracle.rel_tol = number_field(s, "rel_tol", st.oracle.rel_tol);
        st.oracle.abs_tol = number_field(s, "abs_tol", st.oracle.abs_tol);
    }
    if (j.contains("quadrature")) {
        const auto& s = j["quadrature"];
        require_keys(s, {"tolerance", "panels"}, "quadrature");
        st.quadrature.tolerance = number_field(s, "tolerance", st.quadrature.tolerance);
        if (s.contains("panels")) st.quadrature.initial_panels = s["panels"].get<int>();
    }
}

PulseSystem build_system(const CliState& st, double area, double eps) {
    PulseShape pulse;
    switch (st.form) {
        case PulseForm::SinSquared:
            pulse = PulseShape::sin_squared(area, st.t_i, st.t_f);
            break;
        case PulseForm::GaussianTruncated:
            pulse = PulseShape::gaussian_truncated(area, st.t_i, st.t_f);
            break;
        case PulseForm::Tabulated:
            throw ConfigError("tabulated pulses are not configurable from the CLI");
    }
    return PulseSystem::two_level(pulse, eps);
}

OutputFormat parse_format(const std::string& f) {
    if (f == "csv") return OutputFormat::Csv;
    if (f == "json") return OutputFormat::Json;
    throw ConfigError("format must be csv or json, got " + f);
}

void emit(const std::string& content, const std::string& out_path) {
    if (!out_path.empty()) {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw Error("cannot open output file: " + out_path);
        out << content;
        if (!out) throw Error("failed writing output file: " + out_path);
    } else {
        std::cout << content;
    }
}

KamConfig kam_config_of(const SchemeSpec& scheme) {
    if (scheme.family != SchemeFamily::Kam)
        throw ConfigError("the g diagnostic applies to kam schemes, got " +
                          (scheme.id.empty() ? scheme_id(scheme) : scheme.id));
    KamConfig cfg = scheme.kam;
    cfg.kind = scheme.kind;
    cfg.iterations = scheme.order;
    return cfg;
}

int cmd_propagate(const CliState& st) {
    PulseSystem system = build_system(st, st.area, st.eps);
    const Operator U = scheme_propagator(system, st.scheme, system.pulse.t_f(),
                                         system.pulse.t_i(), st.quadrature, st.oracle);
    std::ostringstream out;
    out << "scheme " << (st.scheme.id.empty() ? scheme_id(st.scheme) : st.scheme.id)
        << "  eps " << format_sig(st.eps) << "  area " << format_sig(st.area) << "\n";
    out << "U(t_f, t_i) =\n";
    for (int r = 0; r < U.rows(); ++r) {
        out << " ";
        for (int c = 0; c < U.cols(); ++c)
            out << " (" << format_sig(U(r, c).real()) << "," << format_sig(U(r, c).imag())
                << ")";
        out << "\n";
    }
    out << "unitarity_defect = " << format_sig(unitarity_defect(U)) << "\n";
    out << "transition_probability = " << format_sig(transition_probability(U)) << "\n";
    emit(out.str(), st.out_path);
    return 0;
}

int cmd_errors(const CliState& st) {
    ExperimentSpec spec;
    spec.schemes = {st.scheme};
    spec.eps_values = {st.eps};
    spec.area_values = {st.area};
    spec.form = st.form;
    spec.t_i = st.t_i;
    spec.t_f = st.t_f;
    spec.include_g = st.scheme.family == SchemeFamily::Kam;
    spec.quadrature = st.quadrature;
    spec.oracle = st.oracle;
    spec.jobs = st.jobs;
    spec.format = parse_format(st.format);
    const ExperimentResult result = run_experiment(spec);
    for (const ExperimentRow& row : result.rows)
        if (!row.error.empty()) throw Error("computation failed: " + row.error);
    emit(spec.format == OutputFormat::Csv ? result.csv : result.json, st.out_path);
    return 0;
}

int cmd_scan(const CliState& st) {
    PulseSystem system = build_system(st, st.area, st.eps);
    const KamConfig cfg = kam_config_of(st.scheme);
    ScanGrid grid;
    grid.axes = default_axes(system, cfg);
    for (Axis& a : grid.axes) a.nodes = st.nodes;
    const std::vector<ScanSample> surface =
        scan_g(system, cfg, grid, st.quadrature, st.jobs);

    const OutputFormat fmt = parse_format(st.format);
    std::ostringstream out;
    if (fmt == OutputFormat::Csv) {
        for (std::size_t k = 0; k < grid.axes.size(); ++k)
            out << (k ? "," : "") << param_name(grid.axes[k].param);
        out << ",g\n";
        for (const ScanSample& s : surface) {
            for (double p : s.params) out << format_sig(p) << ',';
            out << format_sig(s.ok ? s.g : std::nan("")) << "\n";
        }
    } else {
        nlohmann::json rows = nlohmann::json::array();
        for (const ScanSample& s : surface) {
            nlohmann::json o;
            for (std::size_t k = 0; k < grid.axes.size(); ++k)
                o[param_name(grid.axes[k].param)] = s.params[k];
            if (s.ok)
                o["g"] = s.g;
            else
                o["g"] = nullptr;
            if (!s.error.empty()) o["error"] = s.error;
            rows.push_back(std::move(o));
        }
        nlohmann::json j;
        j["scheme"] = st.scheme.id.empty() ? scheme_id(st.scheme) : st.scheme.id;
        j["eps"] = st.eps;
        j["area"] = st.area;
        j["rows"] = std::move(rows);
        out << j.dump(2) << "\n";
    }
    emit(out.str(), st.out_path);
    return 0;
}

int cmd_optimize(const CliState& st) {
    PulseSystem system = build_system(st, st.area, st.eps);
    const KamConfig cfg = kam_config_of(st.scheme);
    const OptimizeResult res = minimize_g(system, cfg, {}, st.quadrature, st.jobs);
    nlohmann::json j;
    j["scheme"] = st.scheme.id.empty() ? scheme_id(st.scheme) : st.scheme.id;
    j["eps"] = st.eps;
    j["area"] = st.area;
    nlohmann::json names = nlohmann::json::array();
    nlohmann::json argmin;
    for (std::size_t k = 0; k < res.params.size(); ++k) {
        names.push_back(param_name(res.params[k]));
        argmin[param_name(res.params[k])] = res.argmin[k];
    }
    j["params"] = std::move(names);
    j["argmin"] = std::move(argmin);
    j["g_min"] = res.g_min;
    j["stationary"] = res.stationary;
    emit(j.dump(2) + "\n", st.out_path);
    return 0;
}

int cmd_figure(const CliState& st) {
    ExperimentSpec spec = figure_preset(st.figure_id, st.area, st.eps);
    spec.quadrature = st.quadrature;
    spec.oracle = st.oracle;
    spec.jobs = st.jobs;
    spec.format = parse_format(st.format);
    spec.out_path = st.out_path.empty()
                        ? "fig" + std::to_string(st.figure_id) +
                              (spec.format == OutputFormat::Csv ? ".csv" : ".json")
                        : st.out_path;
    const ExperimentResult result = run_experiment(spec);
    const std::size_t n = result.rows.empty() ? result.surface.size()
                                              : result.rows.size();
    std::cout << "wrote " << spec.out_path << " (" << n << " rows)\n";
    return 0;
}

int run(int argc, char** argv) {
    CliState st;

    // the config file is applied before the regular parse so that explicit
    // flags override its values
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) {
            apply_config_file(argv[i + 1], st);
        } else if (arg.rfind("--config=", 0) == 0) {
            apply_config_file(arg.substr(9), st);
        }
    }

    CLI::App app{"unitary perturbation expansions for pulse-driven two-level systems"};
    app.require_subcommand(0, 1);

    std::string config_path, scheme_flag;
    double t1 = 0, t1p = 0, t2 = 0, t2p = 0, tol = 0;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", st.out_path, "output file path");
    app.add_option("--format", st.format, "output format: csv | json");
    auto* tol_opt = app.add_option("--tol", tol, "quadrature tolerance override");
    app.add_option("--jobs", st.jobs, "worker threads (0 = hardware)");
    auto* scheme_opt = app.add_option("--scheme", scheme_flag,
                                      "scheme id, e.g. magnus2, dyson1, kamB1, kamB2k4");
    app.add_option("--eps", st.eps, "coupling epsilon");
    app.add_option("--area", st.area, "pulse area");
    auto* t1_opt = app.add_option("--t1", t1, "free time t1");
    auto* t1p_opt = app.add_option("--t1p", t1p, "free time t1'");
    auto* t2_opt = app.add_option("--t2", t2, "free time t2");
    auto* t2p_opt = app.add_option("--t2p", t2p, "free time t2'");

    CLI::App* c_prop = app.add_subcommand("propagate", "print U(t_f, t_i) of one scheme");
    CLI::App* c_err = app.add_subcommand("errors", "error metrics against the reference");
    CLI::App* c_scan = app.add_subcommand("scan", "g surface over the free times");
    c_scan->add_option("--nodes", st.nodes, "grid nodes per axis (default 101)");
    CLI::App* c_opt = app.add_subcommand("optimize", "minimize g over the free times");
    CLI::App* c_fig = app.add_subcommand("figure", "run a preset sweep");
    c_fig->add_option("--id", st.figure_id, "figure id (1-5)")->required();
    for (CLI::App* sub : {c_prop, c_err, c_scan, c_opt, c_fig}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            (void)app.exit(e);  // --help / --version
            return 0;
        }
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    if (scheme_opt->count()) st.scheme = parse_scheme(scheme_flag);
    if (t1_opt->count()) st.scheme.kam.t1 = t1;
    if (t1p_opt->count()) st.scheme.kam.t1p = t1p;
    if (t2_opt->count()) st.scheme.kam.t2 = t2;
    if (t2p_opt->count()) st.scheme.kam.t2p = t2p;
    if (tol_opt->count()) {
        if (tol <= 0) throw ConfigError("--tol must be positive");
        st.quadrature.tolerance = tol;
    }
    if (st.t_f <= st.t_i) throw ConfigError("support must satisfy t_i < t_f");
    (void)parse_format(st.format);

    if (app.got_subcommand(c_prop)) return cmd_propagate(st);
    if (app.got_subcommand(c_err)) return cmd_errors(st);
    if (app.got_subcommand(c_scan)) return cmd_scan(st);
    if (app.got_subcommand(c_opt)) return cmd_optimize(st);
    if (app.got_subcommand(c_fig)) return cmd_figure(st);
    std::cerr << app.help();
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const pulsekam::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
