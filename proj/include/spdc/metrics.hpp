#ifndef SPDC_METRICS_HPP
#define SPDC_METRICS_HPP

#include <limits>
#include <string>

#include <json.hpp>

#include "spdc/biphoton.hpp"
#include "spdc/zkernel.hpp"

namespace spdc
{

struct MetricsOptions
{
    ZKernelOptions zkernel;
    DecomposeOptions decompose;
    SubspaceBounds bounds{8, 6};
    double min_capture = 0.999;
    // Force the mode-decomposition path even where closed forms exist.
    bool force_mode_path = false;
};

struct MetricsReport
{
    double purity = 0.0;
    double schmidt = 0.0;
    double r2_smf = 0.0;
    // Conditional heralding efficiency R2 / S.
    double heralding = 0.0;
    // Probability that the signal alone is found in its fundamental mode.
    double signal_singles = 0.0;
    // Total pair rate relative to a constant profile of the same length,
    // both at unit peak nonlinearity.
    double relative_rate = 0.0;
    double w_s = 0.0;
    double w_i = 0.0;
    // "z-kernel" or "mode-decomposition".
    std::string provenance;
    // Mode path only; NaN otherwise.
    double captured_norm = std::numeric_limits<double>::quiet_NaN();
    double achieved_tol = 0.0;
};

// Tr(rho^2) = sum sigma^4 over the singular values of the normalized matrix.
// Throws NumericalError when captured_norm < min_capture.
double purity_from_matrix(const CoincidenceMatrix& m, double min_capture = 0.999);

// sum sigma^4 of the raw truncated matrix divided by the squared full norm.
// Never exceeds the true purity.
double purity_lower_bound(const Eigen::MatrixXcd& raw, double state_norm);

double pair_collection_smf(const OpticalConfig& cfg, const PumpSpec& pump,
                           const Chi2Profile& profile, double w_s, double w_i,
                           const MetricsOptions& opts = {});

// int d^2q_i |int d^2q_s Phi U_s^*|^2 with Phi normalized.
double signal_singles(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile,
                      double w_s, const MetricsOptions& opts = {});

// R2 / S: probability that the idler is collected given that the signal was.
double heralding_efficiency(const OpticalConfig& cfg, const PumpSpec& pump,
                            const Chi2Profile& profile, double w_s, double w_i,
                            const MetricsOptions& opts = {});

// Total pair rate relative to a constant profile of the same length, both
// scaled to unit peak |chi|. Only defined for degenerate configurations
// (ConfigError otherwise).
double total_rate(const OpticalConfig& cfg, const Chi2Profile& profile);
double total_rate(const OpticalConfig& cfg, const Chi2Profile& profile, const PumpSpec& pump);

MetricsReport compute_metrics(const OpticalConfig& cfg, const PumpSpec& pump,
                              const Chi2Profile& profile, CollectionMode signal,
                              CollectionMode idler, const MetricsOptions& opts = {});

// Mode path from precomputed tensors whose basis waists are the collection
// waists.
MetricsReport report_from_tensors(const ModeTensors& tensors, const Eigen::VectorXcd& a,
                                  double min_capture = 0.999);

nlohmann::json to_json(const MetricsReport& r);
MetricsReport metrics_from_json(const nlohmann::json& j);

}  // namespace spdc

#endif  // SPDC_METRICS_HPP
