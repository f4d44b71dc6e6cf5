#include "spdc/optics.hpp"

#include <fmt/format.h>

namespace spdc
{
namespace
{

class UnitIndexModel final : public DispersionModel
{
public:
    std::string_view id() const override { return "unit"; }
    double index(Wave, double) const override { return 1.0; }
    double min_wavelength_um() const override { return 0.0; }
    double max_wavelength_um() const override { return std::numeric_limits<double>::infinity(); }
};

// n^2 = A + B / (lambda^2 - C) + D / (lambda^2 - E), lambda in um.
struct SellmeierTerms
{
    double a, b, c, d, e;

    double index(double lambda_um) const
    {
        const double l2 = lambda_um * lambda_um;
        return std::sqrt(a + b / (l2 - c) + d / (l2 - e));
    }
};

class KtpTypeIIModel final : public DispersionModel
{
public:
    std::string_view id() const override { return "ktp-typeII"; }

    double index(Wave wave, double lambda_um) const override
    {
        return wave == Wave::Idler ? kNz.index(lambda_um) : kNy.index(lambda_um);
    }

    double min_wavelength_um() const override { return 0.43; }
    double max_wavelength_um() const override { return 3.54; }

private:
    static constexpr SellmeierTerms kNy{3.45018, 0.04341, 0.04597, 16.98825, 39.43799};
    static constexpr SellmeierTerms kNz{4.59423, 0.06206, 0.04763, 110.80672, 86.12171};
};

void require_positive(double value, const char* name)
{
    if (!(value > 0.0) || !std::isfinite(value))
        throw ConfigError(fmt::format("{} must be positive and finite (got {})", name, value));
}

double wave_number(double n, double lambda_nm) { return kTwoPi * n / (lambda_nm * 1e-3); }

}  // namespace

std::shared_ptr<const DispersionModel> dispersion_model(std::string_view id)
{
    if (id == "unit")
        return std::make_shared<UnitIndexModel>();
    if (id == "ktp-typeII")
        return std::make_shared<KtpTypeIIModel>();
    throw ConfigError(fmt::format("unknown dispersion model '{}'", id));
}

OpticalConfig make_config(double lambda_p_nm, double lambda_s_nm, double length_mm,
                          std::string_view dispersion)
{
    return make_config(lambda_p_nm, lambda_s_nm, length_mm, *dispersion_model(dispersion));
}

OpticalConfig make_config(double lambda_p_nm, double lambda_s_nm, double length_mm,
                          const DispersionModel& model)
{
    require_positive(lambda_p_nm, "lambda_p_nm");
    require_positive(lambda_s_nm, "lambda_s_nm");
    require_positive(length_mm, "crystal_length_mm");
    if (!(lambda_s_nm > lambda_p_nm))
        throw ConfigError("signal wavelength must exceed the pump wavelength");

    OpticalConfig cfg;
    cfg.lambda_p_nm = lambda_p_nm;
    cfg.lambda_s_nm = lambda_s_nm;
    cfg.lambda_i_nm = 1.0 / (1.0 / lambda_p_nm - 1.0 / lambda_s_nm);
    cfg.length_um = length_mm * 1e3;
    cfg.dispersion = std::string(model.id());

    const auto in_range = [&](double lambda_nm) {
        const double um = lambda_nm * 1e-3;
        return um >= model.min_wavelength_um() && um <= model.max_wavelength_um();
    };
    for (double l : {cfg.lambda_p_nm, cfg.lambda_s_nm, cfg.lambda_i_nm}) {
        if (!in_range(l))
            throw ConfigError(fmt::format("wavelength {:.3f} nm outside the validity range of "
                                          "dispersion model '{}'",
                                          l, model.id()));
    }

    cfg.n_p = model.index(Wave::Pump, cfg.lambda_p_nm * 1e-3);
    cfg.n_s = model.index(Wave::Signal, cfg.lambda_s_nm * 1e-3);
    cfg.n_i = model.index(Wave::Idler, cfg.lambda_i_nm * 1e-3);
    cfg.k_p = wave_number(cfg.n_p, cfg.lambda_p_nm);
    cfg.k_s = wave_number(cfg.n_s, cfg.lambda_s_nm);
    cfg.k_i = wave_number(cfg.n_i, cfg.lambda_i_nm);
    return cfg;
}

OpticalConfig with_length(const OpticalConfig& cfg, double length_um)
{
    require_positive(length_um, "length_um");
    OpticalConfig out = cfg;
    out.length_um = length_um;
    return out;
}

bool is_degenerate(const OpticalConfig& cfg, double rel_tol)
{
    const double half = 0.5 * cfg.k_p;
    return std::abs(cfg.k_s - half) <= rel_tol * half && std::abs(cfg.k_i - half) <= rel_tol * half;
}

TransverseMomentum TransverseMomentum::polar(double rho, double phi)
{
    if (rho < 0.0) {
        rho = -rho;
        phi += kPi;
    }
    double wrapped = std::fmod(phi, kTwoPi);
    if (wrapped < 0.0)
        wrapped += kTwoPi;
    if (wrapped >= kTwoPi)
        wrapped = 0.0;
    return {rho, wrapped};
}

TransverseMomentum TransverseMomentum::cartesian(double qx, double qy)
{
    return polar(std::hypot(qx, qy), std::atan2(qy, qx));
}

TransverseMomentum operator+(const TransverseMomentum& a, const TransverseMomentum& b)
{
    return TransverseMomentum::cartesian(a.qx() + b.qx(), a.qy() + b.qy());
}

TransverseMomentum operator-(const TransverseMomentum& a, const TransverseMomentum& b)
{
    return TransverseMomentum::cartesian(a.qx() - b.qx(), a.qy() - b.qy());
}

MismatchCoefficients mismatch_coefficients(const OpticalConfig& cfg)
{
    return {(cfg.k_p - cfg.k_s) / (2.0 * cfg.k_p * cfg.k_s),
            (cfg.k_p - cfg.k_i) / (2.0 * cfg.k_p * cfg.k_i), 1.0 / cfg.k_p};
}

double delta_kz(const OpticalConfig& cfg, const TransverseMomentum& q_s,
                const TransverseMomentum& q_i)
{
    const auto m = mismatch_coefficients(cfg);
    return m.signal * q_s.rho * q_s.rho + m.idler * q_i.rho * q_i.rho -
           m.cross * q_s.rho * q_i.rho * std::cos(q_i.phi - q_s.phi);
}

BeamParameter xi_from_waist(const OpticalConfig& cfg, double waist_um, double k)
{
    require_positive(waist_um, "waist");
    require_positive(k, "wave number");
    return {cfg.length_um / (k * waist_um * waist_um)};
}

double waist_from_xi(const OpticalConfig& cfg, BeamParameter xi, double k)
{
    require_positive(xi.xi, "beam parameter");
    require_positive(k, "wave number");
    return std::sqrt(cfg.length_um / (k * xi.xi));
}

OpticalConfig config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw ConfigError("optical config must be a JSON object");
    try {
        return make_config(j.at("lambda_p_nm").get<double>(), j.at("lambda_s_nm").get<double>(),
                           j.at("crystal_length_mm").get<double>(),
                           j.value("dispersion", std::string("ktp-typeII")));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("optical config: {}", e.what()));
    }
}

nlohmann::json to_json(const OpticalConfig& cfg)
{
    return {{"lambda_p_nm", cfg.lambda_p_nm},
            {"lambda_s_nm", cfg.lambda_s_nm},
            {"crystal_length_mm", cfg.length_mm()},
            {"dispersion", cfg.dispersion}};
}

}  // namespace spdc
