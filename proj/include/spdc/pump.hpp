#ifndef SPDC_PUMP_HPP
#define SPDC_PUMP_HPP

#include <utility>
#include <vector>

#include <json.hpp>

#include "spdc/optics.hpp"
#include "spdc/quadrature.hpp"

namespace spdc
{

struct PumpMode
{
    int p = 0;
    int l = 0;
    cplx a{1.0, 0.0};
};

// Transverse pump amplitude sum_m a_m LG_{p_m, l_m}(q; w).
struct PumpSpec
{
    double waist_um = 0.0;
    std::vector<PumpMode> modes;

    static PumpSpec gaussian(double waist_um);

    bool is_gaussian() const;
    double norm_squared() const;
    PumpSpec normalized() const;
    // Throws ConfigError on a nonpositive waist, negative p, repeated
    // (p, l) pairs or sum |a|^2 != 1 (tolerance 1e-10).
    void validate() const;
};

struct CollectionMode
{
    double waist_um = 0.0;
};

// (w / sqrt(2 pi)) exp(-w^2 |q|^2 / 4), unit L2 norm over the plane.
double gaussian_amplitude(double w, const TransverseMomentum& q);

// Momentum-space Laguerre-Gauss mode LG_{p,l}(q) = R_{p,l}(rho) exp(i l phi) / sqrt(2 pi),
//   R_{p,l}(rho) = w sqrt(p! / (p+|l|)!) u^{|l|/2} L_p^{|l|}(u) exp(-u / 2),  u = w^2 rho^2 / 2.
// (0, 0) coincides with gaussian_amplitude.
double lg_radial(int p, int l, double w, double rho);
cplx lg_amplitude(int p, int l, double w, const TransverseMomentum& q);

cplx pump_amplitude(const PumpSpec& spec, const TransverseMomentum& q);

// Overlaps <LG_{p,l} | V> by polar quadrature.
std::vector<cplx> project_pump(const PumpSpec& spec, const std::vector<std::pair<int, int>>& modes);

// Radius beyond which every LG mode with 2p + |l| <= order is negligible.
double lg_extent(int order, double w);

// { "waist_um", "modes": [{"p", "l", "re", "im"}] }; a missing mode list
// means a Gaussian pump.
nlohmann::json to_json(const PumpSpec& spec);
PumpSpec pump_from_json(const nlohmann::json& j);

}  // namespace spdc

#endif  // SPDC_PUMP_HPP
