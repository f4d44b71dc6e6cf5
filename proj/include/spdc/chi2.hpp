#ifndef SPDC_CHI2_HPP
#define SPDC_CHI2_HPP

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "spdc/quadrature.hpp"

namespace spdc
{

// sinc(x) = sin(x) / x, sinc(0) = 1.
double sinc(double x);

struct ConstantChi2
{
};

// exp(-z^2 / sigma^2), truncated to the crystal.
struct GaussianChi2
{
    double sigma_um = 0.0;
};

// sum_n c_n cos(n z / sigma)
struct CosineChi2
{
    std::vector<double> coeffs;
    double sigma_um = 0.0;
};

// Domain m covers [z_m - l_c/2, z_m + l_c/2] with z_m = (m - 1/2) l_c - L/2.
struct DomainChi2
{
    std::vector<int> signs;
    double domain_um = 0.0;
};

inline constexpr std::size_t kMaxCosineTerms = 33;

// Longitudinal nonlinearity over z in [-L/2, L/2].
class Chi2Profile
{
public:
    using Variant = std::variant<ConstantChi2, GaussianChi2, CosineChi2, DomainChi2>;

    static Chi2Profile constant(double length_um);
    static Chi2Profile gaussian(double length_um, double sigma_um);
    static Chi2Profile cosine(double length_um, std::vector<double> coeffs, double sigma_um);
    // Cosine series with sigma = L/4.
    static Chi2Profile cosine(double length_um, std::vector<double> coeffs);
    // Throws ConfigError unless signs.size() * domain_um matches length_um.
    static Chi2Profile domains(std::vector<int> signs, double domain_um, double length_um);

    double length_um() const { return length_um_; }
    const Variant& variant() const { return variant_; }
    std::string kind() const;

    bool is_domain_sequence() const { return std::holds_alternative<DomainChi2>(variant_); }
    // pi / l_c for domain sequences, 0 otherwise.
    double qpm_detuning() const;

    // Same shape on a crystal of a different length (sigma scales with L).
    Chi2Profile rescaled(double length_um) const;

private:
    Chi2Profile(double length_um, Variant v) : length_um_(length_um), variant_(std::move(v)) {}

    double length_um_ = 0.0;
    Variant variant_;
};

// Pointwise value; throws ConfigError when |z| > L/2.
double evaluate_chi2(const Chi2Profile& profile, double z);
// Analytic continuation to complex z. Not defined for domain sequences.
cplx evaluate_chi2(const Chi2Profile& profile, cplx z);

bool is_even(const Chi2Profile& profile);

// int chi(z) exp(i dkz z) dz over the crystal (um).
cplx phase_matching(const Chi2Profile& profile, double dkz);

// Phase matching as a function of the residual mismatch. For domain
// sequences the physical sum is evaluated at dkz + pi/l_c (first-order
// quasi-phase-matching); other profiles are unchanged.
cplx effective_phase_matching(const Chi2Profile& profile, double dkz);

// max |chi(z)| over the crystal.
double chi2_peak(const Chi2Profile& profile);

// int chi^2 dz and int |chi| dz over the crystal.
double chi2_square_integral(const Chi2Profile& profile);
double chi2_abs_integral(const Chi2Profile& profile);

struct DetuningGrid
{
    double min = 0.0;
    double max = 0.0;
    std::size_t points = 0;

    std::vector<double> values() const;
};

struct PhaseMatchCurve
{
    std::vector<double> dkz;
    std::vector<cplx> amplitude;
};

PhaseMatchCurve phase_matching_curve(const Chi2Profile& profile, const DetuningGrid& grid,
                                     bool normalize = false);
PhaseMatchCurve phase_matching_curve(const Chi2Profile& profile, const std::vector<double>& dkz,
                                     bool normalize = false);

// CSV columns: dkz, re, im, abs
void write_curve_csv(const PhaseMatchCurve& curve, std::ostream& out);

// { "kind": "constant" | "gaussian" | "cosine" | "domains", ... }
// Gaussian and cosine accept "sigma_um" or "sigma_over_length".
nlohmann::json to_json(const Chi2Profile& profile);
Chi2Profile profile_from_json(const nlohmann::json& j, double length_um);

}  // namespace spdc

#endif  // SPDC_CHI2_HPP
