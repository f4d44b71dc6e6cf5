#include "spdc/chi2.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>

#include <fmt/format.h>

#include "spdc/optics.hpp"
#include "spdc/parallel.hpp"

namespace spdc
{
namespace
{

constexpr double kQuadTol = 1e-12;

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_quarter_sigma(double sigma, double length)
{
    return std::abs(sigma - 0.25 * length) <= 1e-12 * length;
}

// int over [-a, a] of cos(p z) cos(q z)
double cos_product_integral(double p, double q, double a)
{
    return a * (sinc((p - q) * a) + sinc((p + q) * a));
}

double cosine_value(const CosineChi2& c, double z)
{
    double s = 0.0;
    for (std::size_t n = 0; n < c.coeffs.size(); ++n)
        s += c.coeffs[n] * std::cos(static_cast<double>(n) * z / c.sigma_um);
    return s;
}

cplx domain_sum(const DomainChi2& d, double length, double delta)
{
    // Anchored every kBlock terms to bound the error of the recurrence.
    constexpr std::size_t kBlock = 64;
    const std::size_t m = d.signs.size();
    const double lc = d.domain_um;
    const cplx step = std::polar(1.0, delta * lc);
    CompensatedSum<cplx> acc;
    cplx phase{};
    for (std::size_t k = 0; k < m; ++k) {
        if (k % kBlock == 0) {
            const double z = (static_cast<double>(k) + 0.5) * lc - 0.5 * length;
            phase = std::polar(1.0, delta * z);
        } else {
            phase *= step;
        }
        acc.add(static_cast<double>(d.signs[k]) * phase);
    }
    return lc * sinc(0.5 * delta * lc) * acc.value();
}

double even_transform(const std::function<double(double)>& chi, double dkz, double half)
{
    auto f = [&](double z) { return chi(z) * std::cos(dkz * z); };
    return 2.0 * integrate(f, 0.0, half, kQuadTol).value;
}

}  // namespace

double sinc(double x)
{
    if (std::abs(x) < 1e-4) {
        const double x2 = x * x;
        return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
    }
    return std::sin(x) / x;
}

Chi2Profile Chi2Profile::constant(double length_um)
{
    if (!(length_um > 0.0))
        throw ConfigError("crystal length must be positive");
    return {length_um, ConstantChi2{}};
}

Chi2Profile Chi2Profile::gaussian(double length_um, double sigma_um)
{
    if (!(length_um > 0.0) || !(sigma_um > 0.0))
        throw ConfigError("gaussian profile needs positive length and sigma");
    return {length_um, GaussianChi2{sigma_um}};
}

Chi2Profile Chi2Profile::cosine(double length_um, std::vector<double> coeffs, double sigma_um)
{
    if (!(length_um > 0.0) || !(sigma_um > 0.0))
        throw ConfigError("cosine profile needs positive length and sigma");
    if (coeffs.empty() || coeffs.size() > kMaxCosineTerms)
        throw ConfigError(fmt::format("cosine series needs 1..{} coefficients", kMaxCosineTerms));
    for (double c : coeffs)
        if (!std::isfinite(c))
            throw ConfigError("cosine coefficients must be finite");
    return {length_um, CosineChi2{std::move(coeffs), sigma_um}};
}

Chi2Profile Chi2Profile::cosine(double length_um, std::vector<double> coeffs)
{
    return cosine(length_um, std::move(coeffs), 0.25 * length_um);
}

Chi2Profile Chi2Profile::domains(std::vector<int> signs, double domain_um, double length_um)
{
    if (signs.size() < 1 || !(domain_um > 0.0))
        throw ConfigError("domain sequence needs at least one domain of positive length");
    for (int s : signs)
        if (s != 1 && s != -1)
            throw ConfigError("domain signs must be +1 or -1");
    const double total = static_cast<double>(signs.size()) * domain_um;
    if (std::abs(total - length_um) > 1e-9 * length_um)
        throw ConfigError(fmt::format("{} domains of {} um do not span {} um", signs.size(),
                                      domain_um, length_um));
    return {length_um, DomainChi2{std::move(signs), domain_um}};
}

std::string Chi2Profile::kind() const
{
    return std::visit(Overloaded{[](const ConstantChi2&) { return "constant"; },
                                 [](const GaussianChi2&) { return "gaussian"; },
                                 [](const CosineChi2&) { return "cosine"; },
                                 [](const DomainChi2&) { return "domains"; }},
                      variant_);
}

double Chi2Profile::qpm_detuning() const
{
    if (const auto* d = std::get_if<DomainChi2>(&variant_))
        return kPi / d->domain_um;
    return 0.0;
}

Chi2Profile Chi2Profile::rescaled(double length_um) const
{
    const double r = length_um / length_um_;
    return std::visit(
        Overloaded{[&](const ConstantChi2&) { return constant(length_um); },
                   [&](const GaussianChi2& g) { return gaussian(length_um, g.sigma_um * r); },
                   [&](const CosineChi2& c) { return cosine(length_um, c.coeffs, c.sigma_um * r); },
                   [&](const DomainChi2&) -> Chi2Profile {
                       throw ConfigError("domain sequences cannot be rescaled");
                   }},
        variant_);
}

double evaluate_chi2(const Chi2Profile& profile, double z)
{
    const double half = 0.5 * profile.length_um();
    if (!(std::abs(z) <= half * (1.0 + 1e-12)))
        throw ConfigError(fmt::format("z = {} um lies outside the crystal", z));
    return std::visit(
        Overloaded{[](const ConstantChi2&) { return 1.0; },
                   [&](const GaussianChi2& g) { return std::exp(-z * z / (g.sigma_um * g.sigma_um)); },
                   [&](const CosineChi2& c) { return cosine_value(c, z); },
                   [&](const DomainChi2& d) {
                       const auto m = static_cast<long>(std::floor((z + half) / d.domain_um));
                       const long last = static_cast<long>(d.signs.size()) - 1;
                       return static_cast<double>(d.signs[std::clamp(m, 0L, last)]);
                   }},
        profile.variant());
}

cplx evaluate_chi2(const Chi2Profile& profile, cplx z)
{
    return std::visit(
        Overloaded{[](const ConstantChi2&) { return cplx(1.0); },
                   [&](const GaussianChi2& g) { return std::exp(-z * z / (g.sigma_um * g.sigma_um)); },
                   [&](const CosineChi2& c) {
                       cplx s{};
                       for (std::size_t n = 0; n < c.coeffs.size(); ++n)
                           s += c.coeffs[n] * std::cos(static_cast<double>(n) * z / c.sigma_um);
                       return s;
                   },
                   [](const DomainChi2&) -> cplx {
                       throw ConfigError("domain sequences have no analytic continuation");
                   }},
        profile.variant());
}

bool is_even(const Chi2Profile& profile)
{
    if (const auto* d = std::get_if<DomainChi2>(&profile.variant()))
        return std::equal(d->signs.begin(), d->signs.end(), d->signs.rbegin());
    return true;
}

cplx phase_matching(const Chi2Profile& profile, double dkz)
{
    const double length = profile.length_um();
    const double half = 0.5 * length;
    return std::visit(
        Overloaded{[&](const ConstantChi2&) { return cplx(length * sinc(half * dkz)); },
                   [&](const GaussianChi2& g) {
                       const double s2 = g.sigma_um * g.sigma_um;
                       return cplx(even_transform([&](double z) { return std::exp(-z * z / s2); },
                                                  dkz, half));
                   },
                   [&](const CosineChi2& c) {
                       if (!is_quarter_sigma(c.sigma_um, length))
                           return cplx(even_transform([&](double z) { return cosine_value(c, z); },
                                                      dkz, half));
                       const double x = half * dkz;
                       double s = 0.0;
                       for (std::size_t n = 0; n < c.coeffs.size(); ++n) {
                           const double two_n = 2.0 * static_cast<double>(n);
                           s += c.coeffs[n] * (sinc(two_n - x) + sinc(two_n + x));
                       }
                       return cplx(half * s);
                   },
                   [&](const DomainChi2& d) { return domain_sum(d, length, dkz); }},
        profile.variant());
}

cplx effective_phase_matching(const Chi2Profile& profile, double dkz)
{
    return phase_matching(profile, dkz + profile.qpm_detuning());
}

double chi2_peak(const Chi2Profile& profile)
{
    const auto* c = std::get_if<CosineChi2>(&profile.variant());
    if (c == nullptr)
        return 1.0;
    // Dense sampling, then a Brent polish around the best sample.
    const double half = 0.5 * profile.length_um();
    const std::size_t n = 8192;
    const double step = profile.length_um() / static_cast<double>(n);
    const auto neg_abs = [&](double z) { return -std::abs(evaluate_chi2(profile, z)); };
    std::size_t best = 0;
    double best_value = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
        const double v = neg_abs(-half + step * static_cast<double>(k));
        if (v < best_value) {
            best_value = v;
            best = k;
        }
    }
    const double z = -half + step * static_cast<double>(best);
    const auto r = boost::math::tools::brent_find_minima(neg_abs, std::max(-half, z - step),
                                                         std::min(half, z + step), 52);
    return std::max(-best_value, -r.second);
}

double chi2_square_integral(const Chi2Profile& profile)
{
    const double length = profile.length_um();
    const double half = 0.5 * length;
    return std::visit(
        Overloaded{[&](const ConstantChi2&) { return length; },
                   [&](const GaussianChi2& g) {
                       return g.sigma_um * std::sqrt(0.5 * kPi) *
                              std::erf(std::sqrt(2.0) * half / g.sigma_um);
                   },
                   [&](const CosineChi2& c) {
                       double s = 0.0;
                       for (std::size_t n = 0; n < c.coeffs.size(); ++n)
                           for (std::size_t m = 0; m < c.coeffs.size(); ++m)
                               s += c.coeffs[n] * c.coeffs[m] *
                                    cos_product_integral(static_cast<double>(n) / c.sigma_um,
                                                         static_cast<double>(m) / c.sigma_um, half);
                       return s;
                   },
                   [&](const DomainChi2&) { return length; }},
        profile.variant());
}

double chi2_abs_integral(const Chi2Profile& profile)
{
    const double length = profile.length_um();
    const double half = 0.5 * length;
    return std::visit(
        Overloaded{[&](const ConstantChi2&) { return length; },
                   [&](const GaussianChi2& g) {
                       return g.sigma_um * std::sqrt(kPi) * std::erf(half / g.sigma_um);
                   },
                   [&](const CosineChi2& c) {
                       auto f = [&](double z) { return std::abs(cosine_value(c, z)); };
                       return 2.0 * integrate(f, 0.0, half, 1e-10).value;
                   },
                   [&](const DomainChi2&) { return length; }},
        profile.variant());
}

std::vector<double> DetuningGrid::values() const
{
    if (points == 0)
        throw ConfigError("detuning grid is empty");
    if (points > 1 && !(max > min))
        throw ConfigError("detuning grid must be strictly increasing");
    std::vector<double> v(points);
    for (std::size_t i = 0; i < points; ++i)
        v[i] = points == 1 ? min
                           : min + (max - min) * static_cast<double>(i) / static_cast<double>(points - 1);
    return v;
}

PhaseMatchCurve phase_matching_curve(const Chi2Profile& profile, const DetuningGrid& grid,
                                     bool normalize)
{
    return phase_matching_curve(profile, grid.values(), normalize);
}

PhaseMatchCurve phase_matching_curve(const Chi2Profile& profile, const std::vector<double>& dkz,
                                     bool normalize)
{
    if (dkz.empty())
        throw ConfigError("detuning grid is empty");
    for (std::size_t i = 1; i < dkz.size(); ++i)
        if (!(dkz[i] > dkz[i - 1]))
            throw ConfigError("detuning grid must be strictly increasing");

    PhaseMatchCurve curve{dkz, std::vector<cplx>(dkz.size())};
    parallel_for(dkz.size(), [&](std::size_t i) { curve.amplitude[i] = phase_matching(profile, dkz[i]); });
    if (normalize) {
        double peak = 0.0;
        for (const auto& a : curve.amplitude)
            peak = std::max(peak, std::abs(a));
        if (peak > 0.0)
            for (auto& a : curve.amplitude)
                a /= peak;
    }
    return curve;
}

void write_curve_csv(const PhaseMatchCurve& curve, std::ostream& out)
{
    out << "dkz,re,im,abs\n";
    for (std::size_t i = 0; i < curve.dkz.size(); ++i) {
        const cplx a = curve.amplitude[i];
        out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", curve.dkz[i], a.real(), a.imag(),
                           std::abs(a));
    }
}

nlohmann::json to_json(const Chi2Profile& profile)
{
    nlohmann::json j;
    j["kind"] = profile.kind();
    std::visit(Overloaded{[](const ConstantChi2&) {},
                          [&](const GaussianChi2& g) { j["sigma_um"] = g.sigma_um; },
                          [&](const CosineChi2& c) {
                              j["coeffs"] = c.coeffs;
                              j["sigma_um"] = c.sigma_um;
                          },
                          [&](const DomainChi2& d) {
                              j["domain_um"] = d.domain_um;
                              j["signs"] = d.signs;
                          }},
               profile.variant());
    return j;
}

Chi2Profile profile_from_json(const nlohmann::json& j, double length_um)
{
    try {
        const std::string kind = j.at("kind").get<std::string>();
        auto sigma = [&](std::optional<double> fallback) {
            if (j.contains("sigma_um"))
                return j.at("sigma_um").get<double>();
            if (j.contains("sigma_over_length"))
                return j.at("sigma_over_length").get<double>() * length_um;
            if (fallback)
                return *fallback * length_um;
            throw ConfigError(fmt::format("{} profile needs sigma_um or sigma_over_length", kind));
        };
        if (kind == "constant")
            return Chi2Profile::constant(length_um);
        if (kind == "gaussian")
            return Chi2Profile::gaussian(length_um, sigma(std::nullopt));
        if (kind == "cosine")
            return Chi2Profile::cosine(length_um, j.at("coeffs").get<std::vector<double>>(),
                                       sigma(0.25));
        if (kind == "domains")
            return Chi2Profile::domains(j.at("signs").get<std::vector<int>>(),
                                        j.at("domain_um").get<double>(), length_um);
        throw ConfigError(fmt::format("unknown profile kind '{}'", kind));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(fmt::format("profile: {}", e.what()));
    }
}

}  // namespace spdc
