#ifndef SPDC_OPTIMIZER_HPP
#define SPDC_OPTIMIZER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spdc/biphoton.hpp"
#include "spdc/metrics.hpp"
#include "spdc/zkernel.hpp"

namespace spdc
{

struct NelderMeadOptions
{
    double initial_step = 0.2;
    // Stop when the simplex characteristic size falls below this.
    double size_tol = 1e-7;
    std::size_t max_iter = 5000;
};

struct NelderMeadResult
{
    std::vector<double> x;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Minimizes f starting from x0 (GSL nmsimplex2). Deterministic.
NelderMeadResult nelder_mead_minimize(const std::function<double(std::span<const double>)>& f,
                                      std::vector<double> x0, const NelderMeadOptions& opts = {});

struct LineMaximum
{
    double x = 0.0;
    double value = 0.0;
    bool converged = false;
};

// Maximizes f on [lo, hi]: `grid` log-spaced samples, then golden-section
// refinement around the best sample until the bracket is narrower than
// rel_tol in log x. Ties go to the smallest x.
LineMaximum maximize_log_bracket(const std::function<double(double)>& f, double lo, double hi,
                                 std::size_t grid = 21, double rel_tol = 1e-4);

struct CrystalOptOptions
{
    // Cosine period parameter sigma = sigma_over_length * L.
    double sigma_over_length = 0.25;
    // Quadrature used during the search and for the final verification.
    ZKernelOptions search{24, 32, 256};
    ZKernelOptions verify{40, 48, 256};
    int max_outer = 20;
    double purity_tol = 1e-4;
    double xi_min = 0.1;
    double xi_max = 10.0;
    std::size_t xi_grid = 21;
    double xi_rel_tol = 1e-4;
    NelderMeadOptions simplex;
    std::uint64_t seed = 0;
};

struct CrystalOptResult
{
    // c_0..c_N, scaled so the largest-magnitude entry is +1.
    std::vector<double> coefficients;
    double sigma_um = 0.0;
    double length_um = 0.0;
    double xi_star = 0.0;
    // Verified with CrystalOptOptions::verify.
    double purity = 0.0;
    // Search-quadrature purity after each outer iteration.
    std::vector<double> purity_trace;
    std::vector<double> xi_trace;
    int outer_iterations = 0;
    bool converged = false;

    Chi2Profile profile() const;
};

// Documented start vectors for the coefficient search.
std::vector<double> unit_start(std::size_t terms);
// Least-squares cosine fit of exp(-z^2 / (L/4)^2) on the crystal.
std::vector<double> gaussian_matched_start(double length_um, std::size_t terms, double sigma_um);
std::vector<double> random_start(std::size_t terms, std::uint64_t seed);

// Alternating maximization of the Gaussian-pump purity over cosine-series
// coefficients (fixed xi) and over xi (fixed coefficients).
CrystalOptResult optimize_crystal(const OpticalConfig& cfg, int order, double xi0,
                                  const CrystalOptOptions& opts = {});

// Pump modes (p, l) with p <= p_max and |l| <= l_max, Gaussian first.
std::vector<std::pair<int, int>> pump_mode_range(int p_max, int l_max);

struct PumpOptOptions
{
    NelderMeadOptions simplex{0.3, 1e-7, 8000};
    // The simplex is restarted from its last point until a restart gains
    // less than restart_gain or `restarts` runs are used up.
    int restarts = 6;
    double restart_gain = 1e-7;
    double min_capture = 0.999;
};

struct PumpOptResult
{
    PumpSpec pump;
    double purity = 0.0;
    double purity_gaussian = 0.0;
    // ||C^H C||_F^2 / N2^2 at the optimum.
    double purity_lower_bound = 0.0;
    double r2_smf = 0.0;
    double heralding = 0.0;
    double signal_singles = 0.0;
    double captured_norm = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

// Objective for pump coefficients a: purity of the normalized truncated C(a),
// without the capture check.
double pump_objective(const ModeTensors& tensors, const Eigen::VectorXcd& a);

// Same value as pump_objective, evaluated only on the (l_s, l_i) blocks of
// C that some pump mode populates. Built once per tensor set.
class PumpObjective
{
public:
    explicit PumpObjective(const ModeTensors& tensors);

    double operator()(const Eigen::VectorXcd& a) const;
    // Populated (signal block, idler block) pairs out of (2U + 1)^2.
    std::size_t active_blocks() const { return cells_.size(); }

private:
    struct Cell
    {
        Eigen::Index row = 0;
        Eigen::Index col = 0;
        std::vector<std::pair<Eigen::Index, Eigen::MatrixXcd>> terms;
    };

    Eigen::Index side_ = 0;
    Eigen::Index blocks_ = 0;
    std::vector<Cell> cells_;
    // For each signal block, indices into cells_.
    std::vector<std::vector<std::size_t>> by_row_;
};

// Gauge-fixed map from 2 (modes - 1) reals to normalized coefficients: the
// Gaussian coefficient is real and positive, the rest are free.
Eigen::VectorXcd pump_coefficients_from_params(std::span<const double> x);

// Maximizes the purity over pump coefficients on tensors.pump_modes, starting
// from the Gaussian pump. tensors must contain the (0, 0) mode first.
PumpOptResult optimize_pump(const ModeTensors& tensors, const PumpOptOptions& opts = {});

struct CollectionResult
{
    double w_s = 0.0;
    double w_i = 0.0;
    double r2_smf = 0.0;
};

// Maximizes the pair-collection probability over the collection waists.
// symmetric: search along xi_s = xi_i only.
CollectionResult optimize_collection(const OpticalConfig& cfg, const PumpSpec& pump,
                                     const Chi2Profile& profile, bool symmetric = true,
                                     const MetricsOptions& opts = {});

// Metric values over a rectangular grid. values[m] holds metric m in
// row-major order over the axes (last axis fastest).
struct ScanTable
{
    std::string kind;
    std::vector<std::string> axis_names;
    std::vector<std::vector<double>> axes;
    std::vector<std::string> metric_names;
    std::vector<std::vector<double>> values;

    std::size_t points() const;
    void validate() const;
};

// Gaussian-pump purity over pump waist (um) and crystal length (um). The
// profile is rescaled to each length.
ScanTable scan_waist_length(const OpticalConfig& cfg, const Chi2Profile& profile,
                            const std::vector<double>& waists_um,
                            const std::vector<double>& lengths_um,
                            const ZKernelOptions& opts = {});

// Gaussian-pump purity along xi_p.
ScanTable scan_xi(const OpticalConfig& cfg, const Chi2Profile& profile,
                  const std::vector<double>& xi_p, const ZKernelOptions& opts = {});

// Pair-collection probability over (xi_p, xi_s = xi_i).
ScanTable scan_collection(const OpticalConfig& cfg, const Chi2Profile& profile,
                          const std::vector<double>& xi_p, const std::vector<double>& xi_s,
                          std::size_t nodes = 256);

// Optimized cosine crystals of order 0..max_order: xi_star, purity, and the
// pair-collection probability at symmetric optimal collection.
ScanTable scan_series_order(const OpticalConfig& cfg, int max_order, double xi0,
                            const CrystalOptOptions& opts = {});

// CSV with '#' comment lines carrying metadata, then one row per grid point.
void write_scan_csv(const ScanTable& table, std::ostream& out,
                    const std::vector<std::pair<std::string, std::string>>& meta = {});
ScanTable read_scan_csv(std::istream& in);

nlohmann::json to_json(const CrystalOptResult& r);
CrystalOptResult crystal_result_from_json(const nlohmann::json& j);
nlohmann::json to_json(const PumpOptResult& r);
PumpOptResult pump_result_from_json(const nlohmann::json& j);

}  // namespace spdc

#endif  // SPDC_OPTIMIZER_HPP
