#include "spdc/pump.hpp"

#include <cmath>
#include <set>

#include <fmt/format.h>

namespace spdc
{

PumpSpec PumpSpec::gaussian(double waist_um) { return {waist_um, {PumpMode{0, 0, 1.0}}}; }

bool PumpSpec::is_gaussian() const
{
    std::size_t live = 0;
    bool fundamental = false;
    for (const auto& m : modes) {
        if (m.a == cplx{})
            continue;
        ++live;
        fundamental = m.p == 0 && m.l == 0;
    }
    return live == 1 && fundamental;
}

double PumpSpec::norm_squared() const
{
    double s = 0.0;
    for (const auto& m : modes)
        s += std::norm(m.a);
    return s;
}

PumpSpec PumpSpec::normalized() const
{
    const double n = std::sqrt(norm_squared());
    if (!(n > 0.0))
        throw ConfigError("pump has no nonzero mode coefficients");
    PumpSpec out = *this;
    for (auto& m : out.modes)
        m.a /= n;
    return out;
}

void PumpSpec::validate() const
{
    if (!(waist_um > 0.0) || !std::isfinite(waist_um))
        throw ConfigError("pump waist must be positive");
    if (modes.empty())
        throw ConfigError("pump needs at least one mode");
    std::set<std::pair<int, int>> seen;
    for (const auto& m : modes) {
        if (m.p < 0)
            throw ConfigError("radial index p must be nonnegative");
        if (!seen.emplace(m.p, m.l).second)
            throw ConfigError(fmt::format("pump mode ({}, {}) listed twice", m.p, m.l));
    }
    if (std::abs(norm_squared() - 1.0) > 1e-10)
        throw ConfigError(fmt::format("pump coefficients not normalized (sum |a|^2 = {})",
                                      norm_squared()));
}

double gaussian_amplitude(double w, const TransverseMomentum& q)
{
    return w / std::sqrt(kTwoPi) * std::exp(-0.25 * w * w * q.rho * q.rho);
}

double lg_radial(int p, int l, double w, double rho)
{
    const unsigned al = static_cast<unsigned>(std::abs(l));
    const unsigned up = static_cast<unsigned>(p);
    const double u = 0.5 * w * w * rho * rho;
    const double norm =
        std::exp(0.5 * (std::lgamma(p + 1.0) - std::lgamma(static_cast<double>(p + al) + 1.0)));
    const double power = al == 0 ? 1.0 : std::pow(u, 0.5 * al);
    return w * norm * power * std::assoc_laguerre(up, al, u) * std::exp(-0.5 * u);
}

cplx lg_amplitude(int p, int l, double w, const TransverseMomentum& q)
{
    return lg_radial(p, l, w, q.rho) * std::polar(1.0, l * q.phi) / std::sqrt(kTwoPi);
}

cplx pump_amplitude(const PumpSpec& spec, const TransverseMomentum& q)
{
    cplx s{};
    for (const auto& m : spec.modes)
        s += m.a * lg_amplitude(m.p, m.l, spec.waist_um, q);
    return s;
}

double lg_extent(int order, double w)
{
    return std::sqrt(2.0) / w * (std::sqrt(2.0 * order + 1.0) + 9.0);
}

std::vector<cplx> project_pump(const PumpSpec& spec, const std::vector<std::pair<int, int>>& modes)
{
    int order = 0;
    int max_l = 0;
    for (const auto& m : spec.modes) {
        order = std::max(order, 2 * m.p + std::abs(m.l));
        max_l = std::max(max_l, std::abs(m.l));
    }
    for (const auto& [p, l] : modes) {
        order = std::max(order, 2 * p + std::abs(l));
        max_l = std::max(max_l, std::abs(l));
    }
    const GaussRule radial = gauss_legendre(96 + 4 * static_cast<std::size_t>(order), 0.0,
                                            lg_extent(order, spec.waist_um));
    const std::size_t nphi = 4 * static_cast<std::size_t>(max_l) + 16;

    std::vector<cplx> out(modes.size());
    for (std::size_t k = 0; k < modes.size(); ++k) {
        const auto [p, l] = modes[k];
        CompensatedSum<cplx> acc;
        for (std::size_t r = 0; r < radial.size(); ++r) {
            const double rho = radial.nodes[r];
            for (std::size_t j = 0; j < nphi; ++j) {
                const double phi = kTwoPi * static_cast<double>(j) / static_cast<double>(nphi);
                const auto q = TransverseMomentum::polar(rho, phi);
                acc.add(std::conj(lg_amplitude(p, l, spec.waist_um, q)) * pump_amplitude(spec, q) *
                        (rho * radial.weights[r] * kTwoPi / static_cast<double>(nphi)));
            }
        }
        out[k] = acc.value();
    }
    return out;
}

nlohmann::json to_json(const PumpSpec& spec)
{
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : spec.modes)
        modes.push_back({{"p", m.p}, {"l", m.l}, {"re", m.a.real()}, {"im", m.a.imag()}});
    return {{"waist_um", spec.waist_um}, {"modes", modes}};
}

PumpSpec pump_from_json(const nlohmann::json& j)
{
    try {
        PumpSpec spec;
        spec.waist_um = j.at("waist_um").get<double>();
        if (!j.contains("modes")) {
            spec.modes = {PumpMode{}};
        } else {
            for (const auto& m : j.at("modes"))
                spec.modes.push_back({m.at("p").get<int>(), m.at("l").get<int>(),
                                      {m.value("re", 0.0), m.value("im", 0.0)}});
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("pump: {}", e.what()));
    }
}

}  // namespace spdc
