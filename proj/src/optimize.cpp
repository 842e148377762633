#include "pulsekam/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pulsekam/errors.hpp"
#include "pulsekam/parallel.hpp"

namespace pulsekam {
namespace {

double clamp01(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

std::vector<std::size_t> grid_shape(const ScanGrid& grid) {
    std::vector<std::size_t> shape;
    shape.reserve(grid.axes.size());
    for (const Axis& a : grid.axes) shape.push_back(static_cast<std::size_t>(a.nodes));
    return shape;
}

// row-major decomposition: the last axis varies fastest
std::vector<double> node_values(const ScanGrid& grid, std::size_t flat) {
    std::vector<double> vals(grid.axes.size());
    for (std::size_t k = grid.axes.size(); k-- > 0;) {
        const Axis& a = grid.axes[k];
        const std::size_t n = static_cast<std::size_t>(a.nodes);
        const std::size_t j = flat % n;
        flat /= n;
        vals[k] = a.lo + (a.hi - a.lo) * static_cast<double>(j) /
                             static_cast<double>(n - 1);
    }
    return vals;
}

void validate_grid(const PulseSystem& system, const ScanGrid& grid) {
    if (grid.axes.empty()) throw ConfigError("scan grid has no axes");
    const double lo = system.pulse.t_i(), hi = system.pulse.t_f();
    for (const Axis& a : grid.axes) {
        if (a.nodes < 2) throw ConfigError("scan axis needs at least 2 nodes");
        if (a.lo > a.hi) throw ConfigError("scan axis range is reversed");
        if (a.lo < lo || a.hi > hi)
            throw ConfigError("scan axis range outside the pulse support");
    }
}

double eval_g(const PulseSystem& system, KamConfig config,
              const std::vector<ParamId>& params, const std::vector<double>& point,
              const QuadratureSpec& spec) {
    for (std::size_t i = 0; i < params.size(); ++i)
        set_param(config, params[i], point[i]);
    return g_operator(system, config.iterations, config, spec).g;
}

}  // namespace

const char* param_name(ParamId p) {
    switch (p) {
        case ParamId::T1: return "t1";
        case ParamId::T1p: return "t1p";
        case ParamId::T2: return "t2";
        case ParamId::T2p: return "t2p";
    }
    return "?";
}

void set_param(KamConfig& config, ParamId p, double value) {
    switch (p) {
        case ParamId::T1: config.t1 = value; break;
        case ParamId::T1p: config.t1p = value; break;
        case ParamId::T2: config.t2 = value; break;
        case ParamId::T2p: config.t2p = value; break;
    }
}

double get_param(const KamConfig& config, ParamId p) {
    switch (p) {
        case ParamId::T1: return config.t1;
        case ParamId::T1p: return config.t1p;
        case ParamId::T2: return config.t2;
        case ParamId::T2p: return config.t2p;
    }
    return 0;
}

std::vector<Axis> default_axes(const PulseSystem& system, const KamConfig& config) {
    const double lo = system.pulse.t_i(), hi = system.pulse.t_f();
    const bool anchored = config.kind != KamKind::A;
    std::vector<Axis> axes;
    if (config.iterations <= 1) {
        if (anchored) axes.push_back({ParamId::T1, lo, hi, 101});
        axes.push_back({ParamId::T1p, lo, hi, 101});
    } else {
        if (anchored) axes.push_back({ParamId::T2, lo, hi, 101});
        axes.push_back({ParamId::T2p, lo, hi, 101});
    }
    return axes;
}

std::vector<ScanSample> scan_g(const PulseSystem& system, const KamConfig& config,
                               const ScanGrid& grid, const QuadratureSpec& spec,
                               int jobs) {
    validate_grid(system, grid);
    const auto shape = grid_shape(grid);
    const std::size_t total = std::accumulate(shape.begin(), shape.end(),
                                              std::size_t{1}, std::multiplies<>());
    std::vector<ParamId> params;
    for (const Axis& a : grid.axes) params.push_back(a.param);
    std::vector<ScanSample> out(total);
    parallel_for_indexed(total, jobs, [&](std::size_t i) {
        ScanSample& s = out[i];
        s.params = node_values(grid, i);
        try {
            s.g = eval_g(system, config, params, s.params, spec);
            s.ok = true;
        } catch (const std::exception& ex) {
            s.ok = false;
            s.error = ex.what();
        }
    });
    return out;
}

std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& init, const NelderMeadOptions& options) {
    const std::size_t dim = init.size();
    if (dim == 0) throw ConfigError("empty initial point");
    const bool bounded = !options.lower.empty();
    if (bounded && (options.lower.size() != dim || options.upper.size() != dim))
        throw ConfigError("bound sizes do not match the dimension");
    const auto clamp = [&](std::vector<double> x) {
        if (bounded)
            for (std::size_t i = 0; i < dim; ++i)
                x[i] = clamp01(x[i], options.lower[i], options.upper[i]);
        return x;
    };

    std::vector<std::vector<double>> xs;
    xs.push_back(clamp(init));
    for (std::size_t i = 0; i < dim; ++i) {
        std::vector<double> v = xs[0];
        v[i] += options.initial_step;
        v = clamp(v);
        if (v == xs[0]) {  // stuck at a bound: step inward instead
            v[i] = xs[0][i] - options.initial_step;
            v = clamp(v);
        }
        xs.push_back(v);
    }
    std::vector<double> fs(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) fs[i] = f(xs[i]);

    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    for (int iter = 0; iter < options.max_iter; ++iter) {
        std::vector<std::size_t> order(xs.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
        const std::size_t ib = order.front(), iw = order.back();
        const std::size_t isw = order[order.size() - 2];  // second worst

        double spread = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t k = 0; k < dim; ++k)
                spread = std::max(spread, std::abs(xs[i][k] - xs[ib][k]));
        if (spread < options.x_tol && fs[iw] - fs[ib] < options.f_tol) break;

        std::vector<double> centroid(dim, 0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i == iw) continue;
            for (std::size_t k = 0; k < dim; ++k) centroid[k] += xs[i][k];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        const auto blend = [&](double coeff) {
            std::vector<double> x(dim);
            for (std::size_t k = 0; k < dim; ++k)
                x[k] = centroid[k] + coeff * (centroid[k] - xs[iw][k]);
            return clamp(std::move(x));
        };

        const std::vector<double> xr = blend(alpha);
        const double fr = f(xr);
        if (fr < fs[ib]) {
            const std::vector<double> xe = blend(gamma);
            const double fe = f(xe);
            if (fe < fr) {
                xs[iw] = xe;
                fs[iw] = fe;
            } else {
                xs[iw] = xr;
                fs[iw] = fr;
            }
            continue;
        }
        if (fr < fs[isw]) {
            xs[iw] = xr;
            fs[iw] = fr;
            continue;
        }
        const std::vector<double> xc = fr < fs[iw] ? blend(rho) : blend(-rho);
        const double fc = f(xc);
        if (fc < std::min(fr, fs[iw])) {
            xs[iw] = xc;
            fs[iw] = fc;
            continue;
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {  // shrink toward the best
            if (i == ib) continue;
            for (std::size_t k = 0; k < dim; ++k)
                xs[i][k] = xs[ib][k] + sigma * (xs[i][k] - xs[ib][k]);
            xs[i] = clamp(std::move(xs[i]));
            fs[i] = f(xs[i]);
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (fs[i] < fs[best]) best = i;
    return {xs[best], fs[best]};
}

OptimizeResult minimize_g(const PulseSystem& system, const KamConfig& config,
                          const std::vector<double>& init, const QuadratureSpec& spec,
                          int jobs) {
    const double lo = system.pulse.t_i(), hi = system.pulse.t_f();
    std::vector<Axis> axes = default_axes(system, config);
    for (Axis& a : axes) a.nodes = 21;
    ScanGrid grid{axes};
    std::vector<ScanSample> surface = scan_g(system, config, grid, spec, jobs);

    // a later node must beat the incumbent by a relative margin, so exactly
    // degenerate minima (mirror-symmetric surfaces) resolve to the earliest
    // grid node instead of whichever twin accumulated less roundoff
    const ScanSample* best = nullptr;
    for (const ScanSample& s : surface)
        if (s.ok && (!best || s.g < best->g - 1e-9 * std::abs(best->g))) best = &s;
    if (!best) {
        std::string why = surface.empty() ? "empty grid" : surface.front().error;
        throw OptimizationError("every grid node failed: " + why);
    }

    std::vector<ParamId> params;
    for (const Axis& a : axes) params.push_back(a.param);

    std::vector<double> seed = best->params;
    double seed_g = best->g;
    if (!init.empty()) {
        if (init.size() != params.size())
            throw ConfigError("initial point size does not match the parameter count");
        std::vector<double> p = init;
        for (double& v : p) v = clamp01(v, lo, hi);
        try {
            const double gi = eval_g(system, config, params, p, spec);
            if (gi < seed_g) {
                seed = p;
                seed_g = gi;
            }
        } catch (const std::exception&) {
            // keep the grid seed
        }
    }

    const auto objective = [&](const std::vector<double>& x) {
        try {
            return eval_g(system, config, params, x, spec);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    NelderMeadOptions opts;
    opts.initial_step = (hi - lo) / 20.0;
    opts.lower.assign(params.size(), lo);
    opts.upper.assign(params.size(), hi);
    auto [xmin, fmin] = nelder_mead(objective, seed, opts);
    if (!(fmin <= seed_g)) {  // the refinement must never lose to the grid
        xmin = seed;
        fmin = seed_g;
    }

    OptimizeResult out;
    out.params = params;
    out.argmin = xmin;
    out.g_min = fmin;
    out.surface = std::move(surface);
    const double h = (hi - lo) / 20.0;
    out.stationary = classify_stationary(system, config, params, xmin, h, spec);
    return out;
}

std::string classify_stationary(const PulseSystem& system, const KamConfig& config,
                                const std::vector<ParamId>& params,
                                const std::vector<double>& point, double h,
                                const QuadratureSpec& spec) {
    if (params.size() != point.size() || params.empty() || params.size() > 2)
        throw ConfigError("classification supports 1 or 2 parameters");
    if (h <= 0) throw ConfigError("classification step must be positive");
    const double lo = system.pulse.t_i(), hi = system.pulse.t_f();
    const auto g_at = [&](const std::vector<double>& p) {
        return eval_g(system, config, params, p, spec);
    };
    bool interior = true;
    for (double v : point) interior = interior && (v - h >= lo) && (v + h <= hi);

    if (!interior) {
        // judged against every in-domain neighbor at distance h
        const double g0 = g_at(point);
        const double tol = 1e-12 * std::abs(g0) + 1e-15;
        bool any_up = false, any_down = false;
        const int dim = static_cast<int>(params.size());
        const int combos = dim == 1 ? 3 : 9;
        for (int c = 0; c < combos; ++c) {
            const int d0 = c % 3 - 1;
            const int d1 = dim == 2 ? c / 3 - 1 : 0;
            if (d0 == 0 && d1 == 0) continue;
            std::vector<double> p = point;
            p[0] += d0 * h;
            if (dim == 2) p[1] += d1 * h;
            bool in = true;
            for (std::size_t k = 0; k < p.size(); ++k)
                in = in && p[k] >= lo && p[k] <= hi;
            if (!in) continue;
            const double gv = g_at(p);
            if (gv > g0 + tol) any_up = true;
            if (gv < g0 - tol) any_down = true;
        }
        if (any_down && !any_up) return "maximum";
        if (any_up && !any_down) return "minimum";
        if (any_up && any_down) return "saddle";
        return "degenerate";
    }

    if (params.size() == 1) {
        std::vector<double> pm = point, pp = point;
        pm[0] -= h;
        pp[0] += h;
        const double second = (g_at(pp) - 2 * g_at(point) + g_at(pm)) / (h * h);
        if (second > 0) return "minimum";
        if (second < 0) return "maximum";
        return "degenerate";
    }

    const auto shifted = [&](double d0, double d1) {
        std::vector<double> p = point;
        p[0] += d0;
        p[1] += d1;
        return g_at(p);
    };
    const double g0 = shifted(0, 0);
    const double h11 = (shifted(h, 0) - 2 * g0 + shifted(-h, 0)) / (h * h);
    const double h22 = (shifted(0, h) - 2 * g0 + shifted(0, -h)) / (h * h);
    const double h12 =
        (shifted(h, h) - shifted(h, -h) - shifted(-h, h) + shifted(-h, -h)) /
        (4 * h * h);
    const double det = h11 * h22 - h12 * h12;
    const double scale = std::max({std::abs(h11), std::abs(h22), std::abs(h12), 1e-300});
    if (std::abs(det) < 1e-10 * scale * scale) return "degenerate";
    if (det < 0) return "saddle";
    return h11 > 0 ? "minimum" : "maximum";
}

}  // namespace pulsekam
