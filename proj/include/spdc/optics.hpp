#ifndef SPDC_OPTICS_HPP
#define SPDC_OPTICS_HPP

#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace spdc
{
inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Invalid input: malformed configs, out-of-range parameters, unsupported paths.
class ConfigError : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed to reach its tolerance (truncation, quadrature).
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class Wave
{
    Pump,
    Signal,
    Idler
};

// Refractive index model. Wavelengths are vacuum wavelengths in micrometres.
class DispersionModel
{
public:
    virtual ~DispersionModel() = default;

    virtual std::string_view id() const = 0;
    virtual double index(Wave wave, double lambda_um) const = 0;
    virtual double min_wavelength_um() const = 0;
    virtual double max_wavelength_um() const = 0;
};

// Built-in models: "unit" (n = 1 everywhere) and "ktp-typeII" (pump and
// signal polarised along y, idler along z; Kato & Takaoka, Appl. Opt. 41,
// 5040 (2002), room temperature). Throws ConfigError for unknown ids.
std::shared_ptr<const DispersionModel> dispersion_model(std::string_view id);

// Immutable description of the three interacting fields and the crystal.
// Lengths are stored in micrometres, wave numbers in rad/um.
struct OpticalConfig
{
    double lambda_p_nm = 0.0;
    double lambda_s_nm = 0.0;
    double lambda_i_nm = 0.0;
    double n_p = 1.0;
    double n_s = 1.0;
    double n_i = 1.0;
    double length_um = 0.0;
    double k_p = 0.0;
    double k_s = 0.0;
    double k_i = 0.0;
    std::string dispersion;

    double length_mm() const { return length_um * 1e-3; }
};

OpticalConfig make_config(double lambda_p_nm, double lambda_s_nm, double length_mm,
                          std::string_view dispersion);
OpticalConfig make_config(double lambda_p_nm, double lambda_s_nm, double length_mm,
                          const DispersionModel& model);

// Same wavelengths and indices, different crystal length.
OpticalConfig with_length(const OpticalConfig& cfg, double length_um);

bool is_degenerate(const OpticalConfig& cfg, double rel_tol = 1e-12);

// q = (rho, phi) in cylindrical coordinates; phi is kept in [0, 2pi).
struct TransverseMomentum
{
    double rho = 0.0;
    double phi = 0.0;

    static TransverseMomentum polar(double rho, double phi);
    static TransverseMomentum cartesian(double qx, double qy);

    double qx() const { return rho * std::cos(phi); }
    double qy() const { return rho * std::sin(phi); }
};

TransverseMomentum operator+(const TransverseMomentum& a, const TransverseMomentum& b);
TransverseMomentum operator-(const TransverseMomentum& a, const TransverseMomentum& b);

// dkz = signal * rho_s^2 + idler * rho_i^2 - cross * rho_s * rho_i * cos(phi_i - phi_s)
struct MismatchCoefficients
{
    double signal = 0.0;
    double idler = 0.0;
    double cross = 0.0;
};

MismatchCoefficients mismatch_coefficients(const OpticalConfig& cfg);

// Longitudinal phase mismatch in the paraxial quasi-collinear regime (rad/um).
double delta_kz(const OpticalConfig& cfg, const TransverseMomentum& q_s,
                const TransverseMomentum& q_i);

// Focusing parameter xi = L / (k w^2).
struct BeamParameter
{
    double xi = 0.0;
};

BeamParameter xi_from_waist(const OpticalConfig& cfg, double waist_um, double k);
double waist_from_xi(const OpticalConfig& cfg, BeamParameter xi, double k);

// { "lambda_p_nm", "lambda_s_nm", "crystal_length_mm", "dispersion" }
OpticalConfig config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OpticalConfig& cfg);

}  // namespace spdc

#endif  // SPDC_OPTICS_HPP
