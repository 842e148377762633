#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "pulsekam/kam.hpp"

namespace pulsekam {

// free times of a KAM configuration that scans and optimization may vary
enum class ParamId { T1, T1p, T2, T2p };

const char* param_name(ParamId p);
void set_param(KamConfig& config, ParamId p, double value);
double get_param(const KamConfig& config, ParamId p);

struct Axis {
    ParamId param = ParamId::T1;
    double lo = 0, hi = 1;
    int nodes = 101;
};

struct ScanGrid {
    std::vector<Axis> axes;  // row-major emission: the last axis varies fastest
};

// the axes the configured scheme actually depends on: the anchored kinds scan
// (t_k, t_k') of the last iteration, type A only t_k'
std::vector<Axis> default_axes(const PulseSystem& system, const KamConfig& config);

struct ScanSample {
    std::vector<double> params;
    double g = 0;
    bool ok = false;
    std::string error;  // per-node failure, recorded instead of aborting the scan
};

// evaluates the g diagnostic of the configured iteration count at every grid
// node; nodes run concurrently and are aggregated by index
std::vector<ScanSample> scan_g(const PulseSystem& system, const KamConfig& config,
                               const ScanGrid& grid, const QuadratureSpec& spec,
                               int jobs = 0);

struct NelderMeadOptions {
    double initial_step = 0.05;
    double x_tol = 1e-4;   // simplex displacement threshold
    double f_tol = 1e-10;  // improvement threshold
    int max_iter = 500;
    std::vector<double> lower, upper;  // box constraints (clamped evaluation)
};

// derivative-free downhill-simplex minimization; deterministic given init
std::pair<std::vector<double>, double> nelder_mead(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<double>& init, const NelderMeadOptions& options);

struct OptimizeResult {
    std::vector<ParamId> params;
    std::vector<double> argmin;
    double g_min = 0;
    std::vector<ScanSample> surface;  // coarse-grid samples
    std::string stationary;           // classification at the argmin
};

// coarse grid pass (21 nodes per axis over the pulse support) followed by
// simplex refinement seeded at the better of the best node and `init` (when
// non-empty); the result never exceeds the best coarse sample
OptimizeResult minimize_g(const PulseSystem& system, const KamConfig& config,
                          const std::vector<double>& init, const QuadratureSpec& spec,
                          int jobs = 0);

// character of the g surface at a point from central second differences at
// resolution h: "minimum", "maximum", "saddle", or "degenerate"; points on
// the support boundary are judged by comparison against in-domain neighbors
std::string classify_stationary(const PulseSystem& system, const KamConfig& config,
                                const std::vector<ParamId>& params,
                                const std::vector<double>& point, double h,
                                const QuadratureSpec& spec);

}  // namespace pulsekam
