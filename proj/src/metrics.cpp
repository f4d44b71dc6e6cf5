#include "spdc/metrics.hpp"

#include <cmath>

#include <fmt/format.h>

namespace spdc
{
namespace
{

bool closed_form_applies(const PumpSpec& pump, const Chi2Profile& profile,
                         const MetricsOptions& opts)
{
    return !opts.force_mode_path && pump.is_gaussian() && !profile.is_domain_sequence();
}

// (0,0) x (0,0) tensors: enough for coupling and singles with any pump.
ModeTensors fundamental_tensors(const OpticalConfig& cfg, const PumpSpec& pump,
                                const Chi2Profile& profile, double w_s, double w_i,
                                const MetricsOptions& opts)
{
    std::vector<std::pair<int, int>> modes;
    for (const auto& m : pump.modes)
        modes.emplace_back(m.p, m.l);
    return build_mode_tensors(cfg, pump.waist_um, modes, profile, SubspaceBounds{0, 0}, w_s, w_i,
                              opts.decompose);
}

double schmidt_values4(const Eigen::MatrixXcd& m)
{
    const Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
    return svd.singularValues().array().pow(4).sum();
}

// State norm at unit peak nonlinearity relative to a constant profile under
// a Gaussian pump of the same waist.
double relative_norm(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile)
{
    const double peak = chi2_peak(profile);
    const PumpSpec reference = PumpSpec::gaussian(pump.waist_um);
    return state_norm(cfg, pump, profile) / (peak * peak) /
           state_norm(cfg, reference, Chi2Profile::constant(profile.length_um()));
}

}  // namespace

double purity_from_matrix(const CoincidenceMatrix& m, double min_capture)
{
    if (!(m.captured_norm >= min_capture))
        throw NumericalError(fmt::format("truncated basis captures {:.6f} of the state norm "
                                         "(required {:.6f}); enlarge the subspace bounds",
                                         m.captured_norm, min_capture));
    return schmidt_values4(m.matrix) / std::pow(m.matrix.squaredNorm(), 2);
}

double purity_lower_bound(const Eigen::MatrixXcd& raw, double state_norm)
{
    // Tr((C^H C)^2) = ||C^H C||_F^2; avoids an SVD inside optimization loops.
    const Eigen::MatrixXcd g = raw.adjoint() * raw;
    return g.squaredNorm() / (state_norm * state_norm);
}

double pair_collection_smf(const OpticalConfig& cfg, const PumpSpec& pump,
                           const Chi2Profile& profile, double w_s, double w_i,
                           const MetricsOptions& opts)
{
    if (!(w_s > 0.0) || !(w_i > 0.0))
        throw ConfigError("collection waists must be positive");
    pump.validate();
    if (closed_form_applies(pump, profile, opts)) {
        const double n2 = state_norm_gaussian(cfg, pump.waist_um, profile, opts.zkernel.line);
        return std::norm(collection_amplitude_gaussian(cfg, pump.waist_um, profile, w_s, w_i,
                                                       opts.zkernel.line)) /
               n2;
    }
    const ModeTensors t = fundamental_tensors(cfg, pump, profile, w_s, w_i, opts);
    const Eigen::VectorXcd a = t.coefficients(pump);
    return std::norm(t.raw_matrix(a)(0, 0)) / t.norm(a);
}

double signal_singles(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile,
                      double w_s, const MetricsOptions& opts)
{
    if (!(w_s > 0.0))
        throw ConfigError("collection waist must be positive");
    pump.validate();
    if (closed_form_applies(pump, profile, opts)) {
        const double n2 = state_norm_gaussian(cfg, pump.waist_um, profile, opts.zkernel.line);
        return signal_projection_gaussian(cfg, pump.waist_um, profile, w_s) / n2;
    }
    const ModeTensors t = fundamental_tensors(cfg, pump, profile, w_s, w_s, opts);
    return t.singles_probability(t.coefficients(pump));
}

double heralding_efficiency(const OpticalConfig& cfg, const PumpSpec& pump,
                            const Chi2Profile& profile, double w_s, double w_i,
                            const MetricsOptions& opts)
{
    if (closed_form_applies(pump, profile, opts))
        return pair_collection_smf(cfg, pump, profile, w_s, w_i, opts) /
               signal_singles(cfg, pump, profile, w_s, opts);
    pump.validate();
    const ModeTensors t = fundamental_tensors(cfg, pump, profile, w_s, w_i, opts);
    const Eigen::VectorXcd a = t.coefficients(pump);
    return std::norm(t.raw_matrix(a)(0, 0)) / t.norm(a) / t.singles_probability(a);
}

double total_rate(const OpticalConfig& cfg, const Chi2Profile& profile)
{
    return total_rate(cfg, profile, PumpSpec::gaussian(1.0));
}

double total_rate(const OpticalConfig& cfg, const Chi2Profile& profile, const PumpSpec& pump)
{
    if (!is_degenerate(cfg, 1e-9))
        throw ConfigError("total rate reduction requires k_s = k_i = k_p / 2");
    pump.validate();
    return relative_norm(cfg, pump, profile);
}

MetricsReport report_from_tensors(const ModeTensors& tensors, const Eigen::VectorXcd& a,
                                  double min_capture)
{
    const CoincidenceMatrix cm = coincidence_matrix(tensors, a);
    MetricsReport r;
    r.provenance = "mode-decomposition";
    r.captured_norm = cm.captured_norm;
    r.achieved_tol = cm.achieved_tol;
    r.w_s = tensors.w_s;
    r.w_i = tensors.w_i;
    r.purity = purity_from_matrix(cm, min_capture);
    r.schmidt = 1.0 / r.purity;
    const std::size_t origin = tensors.bounds.index(0, 0);
    r.r2_smf = std::norm(tensors.raw_matrix(a)(static_cast<Eigen::Index>(origin),
                                               static_cast<Eigen::Index>(origin))) /
               tensors.norm(a);
    r.signal_singles = tensors.singles_probability(a);
    r.heralding = r.r2_smf / r.signal_singles;
    return r;
}

MetricsReport compute_metrics(const OpticalConfig& cfg, const PumpSpec& pump,
                              const Chi2Profile& profile, CollectionMode signal,
                              CollectionMode idler, const MetricsOptions& opts)
{
    pump.validate();
    if (!(signal.waist_um > 0.0) || !(idler.waist_um > 0.0))
        throw ConfigError("collection waists must be positive");

    MetricsReport r;
    if (closed_form_applies(pump, profile, opts)) {
        r.provenance = "z-kernel";
        r.w_s = signal.waist_um;
        r.w_i = idler.waist_um;
        r.purity = purity_z_kernel(cfg, pump.waist_um, profile, opts.zkernel);
        r.schmidt = 1.0 / r.purity;
        const double n2 = state_norm_gaussian(cfg, pump.waist_um, profile, opts.zkernel.line);
        r.r2_smf = std::norm(collection_amplitude_gaussian(cfg, pump.waist_um, profile,
                                                           signal.waist_um, idler.waist_um,
                                                           opts.zkernel.line)) /
                   n2;
        r.signal_singles = signal_projection_gaussian(cfg, pump.waist_um, profile, signal.waist_um) / n2;
        r.heralding = r.r2_smf / r.signal_singles;
    } else {
        std::vector<std::pair<int, int>> modes;
        for (const auto& m : pump.modes)
            modes.emplace_back(m.p, m.l);
        const ModeTensors t = build_mode_tensors(cfg, pump.waist_um, modes, profile, opts.bounds,
                                                 signal.waist_um, idler.waist_um, opts.decompose);
        r = report_from_tensors(t, t.coefficients(pump), opts.min_capture);
    }
    r.relative_rate = relative_norm(cfg, pump, profile);
    return r;
}

nlohmann::json to_json(const MetricsReport& r)
{
    nlohmann::json j{{"purity", r.purity},
                     {"schmidt", r.schmidt},
                     {"r2_smf", r.r2_smf},
                     {"heralding", r.heralding},
                     {"signal_singles", r.signal_singles},
                     {"relative_rate", r.relative_rate},
                     {"w_s_um", r.w_s},
                     {"w_i_um", r.w_i},
                     {"provenance", r.provenance},
                     {"achieved_tol", r.achieved_tol}};
    j["captured_norm"] = std::isnan(r.captured_norm) ? nlohmann::json(nullptr)
                                                     : nlohmann::json(r.captured_norm);
    return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j)
{
    MetricsReport r;
    r.purity = j.at("purity").get<double>();
    r.schmidt = j.at("schmidt").get<double>();
    r.r2_smf = j.at("r2_smf").get<double>();
    r.heralding = j.at("heralding").get<double>();
    r.signal_singles = j.at("signal_singles").get<double>();
    r.relative_rate = j.at("relative_rate").get<double>();
    r.w_s = j.at("w_s_um").get<double>();
    r.w_i = j.at("w_i_um").get<double>();
    r.provenance = j.at("provenance").get<std::string>();
    r.achieved_tol = j.at("achieved_tol").get<double>();
    if (!j.at("captured_norm").is_null())
        r.captured_norm = j.at("captured_norm").get<double>();
    return r;
}

}  // namespace spdc
