#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "pulsekam/kam.hpp"
#include "pulsekam/ooexpand.hpp"
#include "pulsekam/optimize.hpp"
#include "pulsekam/oracle.hpp"

namespace pulsekam {

enum class SchemeFamily { Magnus, Dyson, PVZ, VanVleck, Kam, Oracle };

// one comparable propagation scheme; ids follow the grammar
//   magnus<1-3> | dyson<1-2> | pvz<1-2> | vanvleck<1-2> |
//   kam<A|B|C><1-2>[k<K>] | oracle
// where the optional k<K> suffix selects the K-commutator truncation of the
// superexponential scheme instead of the resummed series
struct SchemeSpec {
    SchemeFamily family = SchemeFamily::Magnus;
    int order = 1;              // expansion order / iteration count
    KamKind kind = KamKind::B;  // kam type; for pvz/vv it selects the D choice
    KamConfig kam;              // free times and truncation settings
    std::string id;
};

SchemeSpec parse_scheme(const std::string& id);
std::string scheme_id(const SchemeSpec& scheme);

// U^(n)(t, t0) of the configured scheme (the oracle id yields the reference)
Operator scheme_propagator(const PulseSystem& system, const SchemeSpec& scheme,
                           double t, double t0, const QuadratureSpec& spec,
                           const SolverSpec& oracle_spec = {});

// memoized reference propagators, keyed by the full system and solver
// parameters; safe for concurrent lookup
class OracleCache {
  public:
    Operator propagator(const PulseSystem& system, double t, double t0,
                        const SolverSpec& spec);

  private:
    std::map<std::string, Operator> cache_;
    std::mutex mutex_;
};

struct ErrorReport {
    std::string scheme;
    double epsilon = 0;
    double area = 0;
    double delta = 0;       // spectral norm of (reference - scheme) at (t_f, t_i)
    double delta_prob = 0;  // signed transition-probability difference
    double unitarity_defect = 0;
    double g = 0;           // NaN unless requested for a kam scheme
    double wall_seconds = 0;
};

ErrorReport compute_errors(const PulseSystem& system, const SchemeSpec& scheme,
                           const QuadratureSpec& spec, const SolverSpec& oracle_spec,
                           OracleCache* cache = nullptr, bool include_g = false);

enum class OutputFormat { Csv, Json };

// a figure-style sweep: every scheme evaluated on the (eps x area) grid, or
// on a t1' sweep when t1p_values is set; figure 3 instead scans the g surface
struct ExperimentSpec {
    int figure = 0;  // 1..5 for presets, 0 for custom sweeps
    std::vector<SchemeSpec> schemes;
    std::vector<double> eps_values;
    std::vector<double> area_values;
    std::vector<double> t1p_values;
    bool include_g = false;
    ScanGrid g_grid;       // figure 3 only
    double g_eps = 0.5;    // figure 3 fixed coupling
    double g_area = 1.0;   // figure 3 fixed area
    PulseForm form = PulseForm::SinSquared;
    double t_i = 0, t_f = 1;
    std::string out_path;
    OutputFormat format = OutputFormat::Csv;
    QuadratureSpec quadrature;
    SolverSpec oracle;
    int jobs = 0;
};

// the preset behind `figure --id N`, with the quoted free times baked in
ExperimentSpec figure_preset(int id, double area, double eps);

struct ExperimentRow {
    std::string scheme;
    double eps = 0, area = 0;
    double t1 = 0, t1p = 0, t2 = 0, t2p = 0;
    double delta = 0, delta_prob = 0, unitarity = 0, g = 0, log10_delta = 0;
    std::string error;  // empty on success; failures keep NaN metrics
};

struct ExperimentResult {
    std::vector<ExperimentRow> rows;   // empty for figure 3
    std::vector<ScanSample> surface;   // figure 3 samples
    std::string csv;
    std::string json;
};

// runs the sweep (grid points in parallel, output ordered by index), renders
// both formats, and writes out_path in the requested one when set
ExperimentResult run_experiment(const ExperimentSpec& spec);

// %.12g with "nan"/"inf" passed through; the only float formatter used in
// emitted files, so identical runs are byte-identical
std::string format_sig(double v);

}  // namespace pulsekam
