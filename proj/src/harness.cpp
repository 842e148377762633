#include "pulsekam/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "pulsekam/errors.hpp"
#include "pulsekam/parallel.hpp"

namespace pulsekam {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int parse_small_int(const std::string& text, int lo, int hi, const std::string& id) {
    if (text.size() != 1 || text[0] < '0' + lo || text[0] > '0' + hi)
        throw ConfigError("unknown scheme id: " + id);
    return text[0] - '0';
}

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    return v;
}

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> v = linspace(std::log(lo), std::log(hi), n);
    for (double& x : v) x = std::exp(x);
    return v;
}

PulseShape make_pulse(PulseForm form, double area, double t_i, double t_f) {
    switch (form) {
        case PulseForm::SinSquared: return PulseShape::sin_squared(area, t_i, t_f);
        case PulseForm::GaussianTruncated:
            return PulseShape::gaussian_truncated(area, t_i, t_f);
        case PulseForm::Tabulated:
            throw ConfigError("tabulated pulses need explicit samples");
    }
    throw ConfigError("unknown pulse form");
}

std::string sanitize_message(std::string msg) {
    for (char& c : msg) {
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    }
    return msg;
}

}  // namespace

std::string format_sig(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

SchemeSpec parse_scheme(const std::string& id) {
    SchemeSpec s;
    s.id = id;
    if (id == "oracle") {
        s.family = SchemeFamily::Oracle;
        s.order = 0;
        return s;
    }
    const auto starts = [&id](const char* p) { return id.rfind(p, 0) == 0; };
    if (starts("magnus")) {
        s.family = SchemeFamily::Magnus;
        s.kind = KamKind::A;
        s.order = parse_small_int(id.substr(6), 1, 3, id);
        return s;
    }
    if (starts("dyson")) {
        s.family = SchemeFamily::Dyson;
        s.kind = KamKind::A;
        s.order = parse_small_int(id.substr(5), 1, 2, id);
        return s;
    }
    if (starts("vanvleck")) {
        s.family = SchemeFamily::VanVleck;
        s.kind = KamKind::A;
        s.order = parse_small_int(id.substr(8), 1, 2, id);
        return s;
    }
    if (starts("pvz")) {
        s.family = SchemeFamily::PVZ;
        s.kind = KamKind::A;
        s.order = parse_small_int(id.substr(3), 1, 2, id);
        return s;
    }
    if (starts("kam") && id.size() >= 5) {
        s.family = SchemeFamily::Kam;
        const char kind = id[3];
        if (kind == 'A' || kind == 'a')
            s.kind = KamKind::A;
        else if (kind == 'B' || kind == 'b')
            s.kind = KamKind::B;
        else if (kind == 'C' || kind == 'c')
            s.kind = KamKind::C;
        else
            throw ConfigError("unknown scheme id: " + id);
        s.order = parse_small_int(id.substr(4, 1), 1, 2, id);
        const std::string rest = id.substr(5);
        if (!rest.empty()) {
            if (rest[0] != 'k' || rest.size() < 2)
                throw ConfigError("unknown scheme id: " + id);
            int k = 0;
            for (std::size_t i = 1; i < rest.size(); ++i) {
                if (rest[i] < '0' || rest[i] > '9')
                    throw ConfigError("unknown scheme id: " + id);
                k = 10 * k + (rest[i] - '0');
            }
            if (k < 1) throw ConfigError("unknown scheme id: " + id);
            s.kam.truncation.resummed = false;
            s.kam.truncation.commutators = k;
        }
        s.kam.kind = s.kind;
        s.kam.iterations = s.order;
        return s;
    }
    throw ConfigError("unknown scheme id: " + id);
}

std::string scheme_id(const SchemeSpec& scheme) {
    switch (scheme.family) {
        case SchemeFamily::Oracle: return "oracle";
        case SchemeFamily::Magnus: return "magnus" + std::to_string(scheme.order);
        case SchemeFamily::Dyson: return "dyson" + std::to_string(scheme.order);
        case SchemeFamily::PVZ: return "pvz" + std::to_string(scheme.order);
        case SchemeFamily::VanVleck: return "vanvleck" + std::to_string(scheme.order);
        case SchemeFamily::Kam: break;
    }
    std::string id = "kam";
    id += scheme.kind == KamKind::A ? 'A' : scheme.kind == KamKind::B ? 'B' : 'C';
    id += std::to_string(scheme.order);
    if (!scheme.kam.truncation.resummed)
        id += "k" + std::to_string(scheme.kam.truncation.commutators);
    return id;
}

Operator scheme_propagator(const PulseSystem& system, const SchemeSpec& scheme,
                           double t, double t0, const QuadratureSpec& spec,
                           const SolverSpec& oracle_spec) {
    switch (scheme.family) {
        case SchemeFamily::Magnus:
            return magnus_propagator(system, scheme.order, t, t0, spec);
        case SchemeFamily::Dyson:
            return dyson_propagator(system, scheme.order, t, t0, spec);
        case SchemeFamily::PVZ:
        case SchemeFamily::VanVleck: {
            OOConfig oo;
            oo.scheme = scheme.family == SchemeFamily::PVZ ? OOConfig::Scheme::PVZ
                                                           : OOConfig::Scheme::VanVleck;
            oo.order = scheme.order;
            if (scheme.kind == KamKind::C)
                throw ConfigError("re-identification applies to the kam schemes only");
            if (scheme.kind == KamKind::B) {
                oo.d_choice = OOConfig::DChoice::VAtTv;
                oo.v = 1;
                oo.t_v = scheme.kam.t1;
            }
            oo.t_primes = {scheme.kam.t1p};
            if (scheme.order >= 2) oo.t_primes.push_back(scheme.kam.t2p);
            return scheme.family == SchemeFamily::PVZ
                       ? pvz_propagator(system, oo, t, t0, spec)
                       : vanvleck_propagator(system, oo, t, t0, spec);
        }
        case SchemeFamily::Kam: {
            KamConfig cfg = scheme.kam;
            cfg.kind = scheme.kind;
            cfg.iterations = scheme.order;
            return kam_propagator(system, cfg, t, t0, spec);
        }
        case SchemeFamily::Oracle: return reference_propagator(system, t0, t, oracle_spec).U;
    }
    throw ConfigError("unknown scheme family");
}

Operator OracleCache::propagator(const PulseSystem& system, double t, double t0,
                                 const SolverSpec& spec) {
    if (system.pulse.form() == PulseForm::Tabulated)  // samples are not keyed
        return reference_propagator(system, t0, t, spec).U;
    char key[320];
    std::snprintf(key, sizeof key,
                  "%d|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%.17g|%d",
                  static_cast<int>(system.pulse.form()), system.pulse.area(),
                  system.pulse.t_i(), system.pulse.t_f(), system.pulse.sigma(),
                  system.epsilon, t, t0, spec.rel_tol, spec.abs_tol,
                  static_cast<int>(spec.max_step * 1e6));
    {
        std::lock_guard<std::mutex> lock(mutex_);
        const auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
    }
    Operator U = reference_propagator(system, t0, t, spec).U;
    std::lock_guard<std::mutex> lock(mutex_);
    return cache_.emplace(key, std::move(U)).first->second;
}

ErrorReport compute_errors(const PulseSystem& system, const SchemeSpec& scheme,
                           const QuadratureSpec& spec, const SolverSpec& oracle_spec,
                           OracleCache* cache, bool include_g) {
    const double t0 = system.pulse.t_i(), t = system.pulse.t_f();
    const Operator reference =
        cache ? cache->propagator(system, t, t0, oracle_spec)
              : reference_propagator(system, t0, t, oracle_spec).U;
    const auto start = std::chrono::steady_clock::now();
    const Operator approx = scheme_propagator(system, scheme, t, t0, spec, oracle_spec);
    const auto stop = std::chrono::steady_clock::now();

    ErrorReport report;
    report.scheme = scheme.id.empty() ? scheme_id(scheme) : scheme.id;
    report.epsilon = system.epsilon;
    report.area = system.pulse.area();
    report.delta = spectral_norm(Operator(reference - approx));
    report.delta_prob =
        transition_probability(approx) - transition_probability(reference);
    report.unitarity_defect = unitarity_defect(approx);
    report.g = kNaN;
    if (include_g && scheme.family == SchemeFamily::Kam) {
        KamConfig cfg = scheme.kam;
        cfg.kind = scheme.kind;
        cfg.iterations = scheme.order;
        report.g = g_operator(system, cfg.iterations, cfg, spec).g;
    }
    report.wall_seconds =
        std::chrono::duration_cast<std::chrono::duration<double>>(stop - start).count();
    return report;
}

ExperimentSpec figure_preset(int id, double area, double eps) {
    ExperimentSpec spec;
    spec.figure = id;
    switch (id) {
        case 1: {
            spec.eps_values = {eps};
            spec.area_values = linspace(0.25, 13.0, 256);
            SchemeSpec b = parse_scheme("kamB1");
            SchemeSpec c = parse_scheme("kamC1");
            spec.schemes = {parse_scheme("magnus1"), b, c};
            break;
        }
        case 2: {
            spec.eps_values = logspace(0.05, 2.0, 40);
            spec.area_values = {area};
            SchemeSpec opt = parse_scheme("kamB1");
            opt.kam.t1 = 0.5;
            opt.kam.t1p = 0.22;
            spec.schemes = {parse_scheme("magnus1"), parse_scheme("dyson1"),
                            parse_scheme("kamB1"), opt};
            break;
        }
        case 3: {
            spec.g_eps = eps;
            spec.g_area = area;
            spec.schemes = {parse_scheme("kamB1")};
            spec.g_grid.axes = {{ParamId::T1, 0.0, 1.0, 101},
                                {ParamId::T1p, 0.0, 1.0, 101}};
            break;
        }
        case 4: {
            spec.eps_values = {eps};
            spec.area_values = {area};
            spec.t1p_values = linspace(0.0, 1.0, 101);
            SchemeSpec b = parse_scheme("kamB1");
            b.kam.t1 = 0.5;
            SchemeSpec c = parse_scheme("kamC1");
            c.kam.t1 = 0.7;
            spec.schemes = {parse_scheme("kamA1"), b, c};
            spec.include_g = true;
            break;
        }
        case 5: {
            spec.eps_values = logspace(0.05, 2.0, 40);
            spec.area_values = {area};
            SchemeSpec opt = parse_scheme("kamB2");
            opt.kam.t1 = 0.5;
            opt.kam.t1p = 0.22;
            opt.kam.t2 = 0.66;
            opt.kam.t2p = 0.8;
            spec.schemes = {parse_scheme("magnus2"), parse_scheme("dyson2"),
                            parse_scheme("kamB2"),  parse_scheme("kamB2k2"),
                            parse_scheme("kamB2k4"), opt};
            break;
        }
        default: throw ConfigError("figure id must be 1..5, got " + std::to_string(id));
    }
    return spec;
}

namespace {

const char* kColumns =
    "scheme,eps,area,t1,t1p,t2,t2p,delta_n,delta_prob,unitarity_defect,g,"
    "log10_delta,error";

std::string render_rows_csv(const std::vector<ExperimentRow>& rows) {
    std::ostringstream out;
    out << kColumns << "\n";
    for (const ExperimentRow& r : rows) {
        out << r.scheme << ',' << format_sig(r.eps) << ',' << format_sig(r.area) << ','
            << format_sig(r.t1) << ',' << format_sig(r.t1p) << ',' << format_sig(r.t2)
            << ',' << format_sig(r.t2p) << ',' << format_sig(r.delta) << ','
            << format_sig(r.delta_prob) << ',' << format_sig(r.unitarity) << ','
            << format_sig(r.g) << ',' << format_sig(r.log10_delta) << ',' << r.error
            << "\n";
    }
    return out.str();
}

std::string render_surface_csv(const std::vector<ScanSample>& surface) {
    std::ostringstream out;
    out << "t1,t1p,g\n";
    for (const ScanSample& s : surface) {
        out << format_sig(s.params.size() > 0 ? s.params[0] : kNaN) << ','
            << format_sig(s.params.size() > 1 ? s.params[1] : kNaN) << ','
            << format_sig(s.ok ? s.g : kNaN) << "\n";
    }
    return out.str();
}

nlohmann::json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    return v;
}

nlohmann::json metadata_json(const ExperimentSpec& spec) {
    nlohmann::json meta;
    meta["figure"] = spec.figure;
    meta["eps_values"] = spec.eps_values;
    meta["area_values"] = spec.area_values;
    if (!spec.t1p_values.empty()) meta["t1p_values"] = spec.t1p_values;
    std::vector<std::string> ids;
    for (const SchemeSpec& s : spec.schemes)
        ids.push_back(s.id.empty() ? scheme_id(s) : s.id);
    meta["schemes"] = ids;
    meta["support"] = {spec.t_i, spec.t_f};
    return meta;
}

std::string render_rows_json(const ExperimentSpec& spec,
                             const std::vector<ExperimentRow>& rows) {
    nlohmann::json j;
    j["metadata"] = metadata_json(spec);
    nlohmann::json arr = nlohmann::json::array();
    for (const ExperimentRow& r : rows) {
        nlohmann::json o;
        o["scheme"] = r.scheme;
        o["eps"] = json_number(r.eps);
        o["area"] = json_number(r.area);
        o["t1"] = json_number(r.t1);
        o["t1p"] = json_number(r.t1p);
        o["t2"] = json_number(r.t2);
        o["t2p"] = json_number(r.t2p);
        o["delta_n"] = json_number(r.delta);
        o["delta_prob"] = json_number(r.delta_prob);
        o["unitarity_defect"] = json_number(r.unitarity);
        o["g"] = json_number(r.g);
        o["log10_delta"] = json_number(r.log10_delta);
        if (!r.error.empty()) o["error"] = r.error;
        arr.push_back(std::move(o));
    }
    j["rows"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string render_surface_json(const ExperimentSpec& spec,
                                const std::vector<ScanSample>& surface) {
    nlohmann::json j;
    j["metadata"] = metadata_json(spec);
    nlohmann::json arr = nlohmann::json::array();
    for (const ScanSample& s : surface) {
        nlohmann::json o;
        o["t1"] = s.params.size() > 0 ? json_number(s.params[0]) : nullptr;
        o["t1p"] = s.params.size() > 1 ? json_number(s.params[1]) : nullptr;
        o["g"] = s.ok ? json_number(s.g) : nullptr;
        if (!s.error.empty()) o["error"] = s.error;
        arr.push_back(std::move(o));
    }
    j["rows"] = std::move(arr);
    return j.dump(2) + "\n";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << content;
    if (!out) throw Error("failed writing output file: " + path);
}

struct Task {
    std::size_t scheme_index = 0;
    double eps = 0, area = 0, t1p = 0;
    bool sweep_t1p = false;
};

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    if (spec.schemes.empty()) throw ConfigError("experiment needs at least one scheme");
    ExperimentResult result;

    if (spec.figure == 3 || !spec.g_grid.axes.empty()) {
        PulseSystem system = PulseSystem::two_level(
            make_pulse(spec.form, spec.g_area, spec.t_i, spec.t_f), spec.g_eps);
        const SchemeSpec& scheme = spec.schemes.front();
        KamConfig cfg = scheme.kam;
        cfg.kind = scheme.kind;
        cfg.iterations = scheme.order;
        result.surface = scan_g(system, cfg, spec.g_grid, spec.quadrature, spec.jobs);
        result.csv = render_surface_csv(result.surface);
        result.json = render_surface_json(spec, result.surface);
    } else {
        if (spec.eps_values.empty() || spec.area_values.empty())
            throw ConfigError("experiment needs non-empty eps and area grids");
        std::vector<Task> tasks;
        const std::vector<double> sweeps =
            spec.t1p_values.empty() ? std::vector<double>{0.0} : spec.t1p_values;
        for (std::size_t si = 0; si < spec.schemes.size(); ++si)
            for (double a : spec.area_values)
                for (double e : spec.eps_values)
                    for (double tp : sweeps)
                        tasks.push_back(
                            {si, e, a, tp, !spec.t1p_values.empty()});

        std::vector<ExperimentRow> rows(tasks.size());
        OracleCache cache;
        parallel_for_indexed(tasks.size(), spec.jobs, [&](std::size_t i) {
            const Task& task = tasks[i];
            SchemeSpec scheme = spec.schemes[task.scheme_index];
            if (task.sweep_t1p) scheme.kam.t1p = task.t1p;
            ExperimentRow& row = rows[i];
            row.scheme = scheme.id.empty() ? scheme_id(scheme) : scheme.id;
            row.eps = task.eps;
            row.area = task.area;
            row.t1 = scheme.kam.t1;
            row.t1p = scheme.kam.t1p;
            row.t2 = scheme.kam.t2;
            row.t2p = scheme.kam.t2p;
            row.delta = row.delta_prob = row.unitarity = row.g = row.log10_delta = kNaN;
            try {
                PulseSystem system = PulseSystem::two_level(
                    make_pulse(spec.form, task.area, spec.t_i, spec.t_f), task.eps);
                const ErrorReport rep =
                    compute_errors(system, scheme, spec.quadrature, spec.oracle, &cache,
                                   spec.include_g);
                row.delta = rep.delta;
                row.delta_prob = rep.delta_prob;
                row.unitarity = rep.unitarity_defect;
                row.g = rep.g;
                row.log10_delta = std::log10(rep.delta);
            } catch (const std::exception& ex) {
                row.error = sanitize_message(ex.what());
            }
        });
        result.rows = std::move(rows);
        result.csv = render_rows_csv(result.rows);
        result.json = render_rows_json(spec, result.rows);
    }

    if (!spec.out_path.empty())
        write_file(spec.out_path,
                   spec.format == OutputFormat::Csv ? result.csv : result.json);
    return result;
}

}  // namespace pulsekam
