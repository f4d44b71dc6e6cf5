#include "spdc/poling.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>

#include <fmt/format.h>

#include "spdc/quadrature.hpp"

namespace spdc
{
namespace
{

std::vector<double> normalized_abs(const std::vector<cplx>& v)
{
    double peak = 0.0;
    for (const cplx& x : v)
        peak = std::max(peak, std::abs(x));
    std::vector<double> out(v.size());
    for (std::size_t j = 0; j < v.size(); ++j)
        out[j] = peak > 0.0 ? std::abs(v[j]) / peak : 0.0;
    return out;
}

struct CurveError
{
    double relative = 0.0;
    double max_deviation = 0.0;
};

CurveError compare(const std::vector<double>& target, const std::vector<cplx>& curve)
{
    const std::vector<double> got = normalized_abs(curve);
    double diff = 0.0;
    double ref = 0.0;
    double worst = 0.0;
    for (std::size_t j = 0; j < target.size(); ++j) {
        const double d = got[j] - target[j];
        diff += d * d;
        ref += target[j] * target[j];
        worst = std::max(worst, std::abs(d));
    }
    return {std::sqrt(diff / ref), worst};
}

// Contribution of domain k with s_k = +1 at every grid detuning.
class DomainTable
{
public:
    DomainTable(const std::vector<double>& detuning, std::size_t domains, double domain_um)
        : grid_(detuning.size()), values_(domains * detuning.size())
    {
        const double half = 0.5 * domain_um * static_cast<double>(domains);
        for (std::size_t j = 0; j < grid_; ++j) {
            const double d = detuning[j];
            const cplx cell = domain_um * sinc(0.5 * d * domain_um);
            for (std::size_t k = 0; k < domains; ++k) {
                const double z = -half + (static_cast<double>(k) + 0.5) * domain_um;
                values_[k * grid_ + j] = cell * std::polar(1.0, d * z);
            }
        }
    }

    const cplx* row(std::size_t k) const { return values_.data() + k * grid_; }

private:
    std::size_t grid_;
    std::vector<cplx> values_;
};

}  // namespace

double PolingTarget::qpm_detuning() const { return kPi / domain_um; }

PolingTarget PolingTarget::from_profile(const Chi2Profile& profile, double domain_um,
                                        double half_width, std::size_t points)
{
    if (profile.is_domain_sequence())
        throw ConfigError("poling targets are built from continuous profiles");
    if (!(domain_um > 0.0) || !(half_width > 0.0) || points < 3)
        throw ConfigError("poling target needs l_c > 0, half_width > 0 and >= 3 points");
    PolingTarget t;
    t.profile = profile;
    t.domain_um = domain_um;
    const double q = kPi / domain_um;
    const std::size_t n = points % 2 == 0 ? points + 1 : points;
    t.detuning.resize(n);
    const std::vector<double> residual = DetuningGrid{-half_width, half_width, n}.values();
    for (std::size_t j = 0; j < n; ++j)
        t.detuning[j] = q + residual[j];
    t.amplitude = phase_matching_curve(profile, residual, true).amplitude;
    t.validate();
    return t;
}

void PolingTarget::validate() const
{
    if (!(domain_um > 0.0))
        throw ConfigError("poling target needs a positive domain length");
    if (detuning.size() != amplitude.size() || detuning.size() < 3)
        throw ConfigError("poling target grid and amplitudes differ in size");
    const double q = qpm_detuning();
    const std::size_t n = detuning.size();
    for (std::size_t j = 0; j < n; ++j) {
        const double a = detuning[j] - q;
        const double b = q - detuning[n - 1 - j];
        if (std::abs(a - b) > 1e-9 * q)
            throw ConfigError("poling target grid must be symmetric about pi / l_c");
        if (!std::isfinite(std::abs(amplitude[j])))
            throw ConfigError("poling target amplitudes must be finite");
    }
    if (std::all_of(amplitude.begin(), amplitude.end(), [](cplx a) { return a == cplx{}; }))
        throw ConfigError("poling target vanishes on its grid");
}

Chi2Profile DomainPlan::profile() const
{
    return Chi2Profile::domains(signs, domain_um, length_um());
}

DomainPlan synthesize(const PolingTarget& target, std::size_t domains, double domain_um,
                      const SynthesisOptions& opts)
{
    target.validate();
    if (domains < 2)
        throw ConfigError("synthesis needs at least two domains");
    const double length = domain_um * static_cast<double>(domains);
    if (std::abs(length - target.profile.length_um()) > 1e-9 * target.profile.length_um())
        throw ConfigError(fmt::format("M * l_c = {} um differs from the crystal length {} um",
                                      length, target.profile.length_um()));
    if (std::abs(domain_um - target.domain_um) > 1e-12 * domain_um)
        throw ConfigError("domain length differs from the one the target was built for");

    const std::size_t grid = target.detuning.size();
    const DomainTable table(target.detuning, domains, domain_um);
    const std::vector<double> goal = normalized_abs(target.amplitude);

    // Cell averages of the max-normalized nonlinearity.
    const double half = 0.5 * length;
    std::vector<double> weight(domains);
    double peak = 0.0;
    const GaussRule cell = gauss_legendre(4, 0.0, domain_um);
    for (std::size_t k = 0; k < domains; ++k) {
        const double z0 = -half + static_cast<double>(k) * domain_um;
        double acc = 0.0;
        for (std::size_t n = 0; n < cell.nodes.size(); ++n)
            acc += cell.weights[n] * evaluate_chi2(target.profile, std::min(z0 + cell.nodes[n], half));
        weight[k] = acc / domain_um;
        peak = std::max(peak, std::abs(weight[k]));
    }
    if (!(peak > 0.0))
        throw ConfigError("poling target profile vanishes");
    for (double& w : weight)
        w /= peak;

    // Greedy: s_k = (-1)^k e_k; pick e_k so the running difference between
    // the binary sum and the continuous-weight sum stays smallest.
    DomainPlan plan;
    plan.domain_um = domain_um;
    plan.signs.resize(domains);
    std::vector<cplx> error(grid, 0.0);
    std::vector<cplx> curve(grid, 0.0);
    for (std::size_t k = 0; k < domains; ++k) {
        const double carrier = k % 2 == 0 ? 1.0 : -1.0;
        const cplx* u = table.row(k);
        double cost_plus = 0.0;
        double cost_minus = 0.0;
        for (std::size_t j = 0; j < grid; ++j) {
            cost_plus += std::norm(error[j] + carrier * (1.0 - weight[k]) * u[j]);
            cost_minus += std::norm(error[j] + carrier * (-1.0 - weight[k]) * u[j]);
        }
        const double e = cost_plus <= cost_minus ? 1.0 : -1.0;
        for (std::size_t j = 0; j < grid; ++j) {
            error[j] += carrier * (e - weight[k]) * u[j];
            curve[j] += carrier * e * u[j];
        }
        plan.signs[k] = static_cast<int>(carrier * e);
    }
    const double greedy_error = compare(goal, curve).relative;

    // Annealing over single flips; the best state seen is kept.
    std::vector<int> best_signs = plan.signs;
    double current = greedy_error;
    double best = greedy_error;
    std::vector<cplx> trial(grid);
    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::size_t> pick(0, domains - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t proposals = opts.sweeps * domains;
    const double t0 = opts.t_start * std::max(greedy_error, 1e-12);
    const double t1 = opts.t_end * std::max(greedy_error, 1e-12);
    const double cooling =
        proposals > 1 ? std::pow(t1 / t0, 1.0 / static_cast<double>(proposals - 1)) : 1.0;
    double temperature = t0;

    const auto flipped_error = [&](std::size_t k) {
        const cplx* u = table.row(k);
        const double delta = -2.0 * plan.signs[k];
        for (std::size_t j = 0; j < grid; ++j)
            trial[j] = curve[j] + delta * u[j];
        return compare(goal, trial).relative;
    };

    for (std::size_t step = 0; step < proposals; ++step, temperature *= cooling) {
        const std::size_t k = pick(rng);
        const double candidate = flipped_error(k);
        const double threshold = unit(rng);
        if (candidate <= current || threshold < std::exp((current - candidate) / temperature)) {
            plan.signs[k] = -plan.signs[k];
            curve.swap(trial);
            current = candidate;
            if (current < best) {
                best = current;
                best_signs = plan.signs;
            }
        }
    }

    // Restore the best state, then sweep accepting only improvements.
    if (best < current) {
        plan.signs = best_signs;
        std::fill(curve.begin(), curve.end(), cplx{});
        for (std::size_t k = 0; k < domains; ++k) {
            const cplx* u = table.row(k);
            for (std::size_t j = 0; j < grid; ++j)
                curve[j] += static_cast<double>(plan.signs[k]) * u[j];
        }
        current = best;
    }
    for (bool improved = true; improved;) {
        improved = false;
        for (std::size_t k = 0; k < domains; ++k) {
            const double candidate = flipped_error(k);
            if (candidate < current) {
                plan.signs[k] = -plan.signs[k];
                curve.swap(trial);
                current = candidate;
                improved = true;
            }
        }
    }

    plan.greedy_fidelity = 1.0 - greedy_error;
    const PlanReport report = verify_plan(plan, target);
    plan.fidelity = report.fidelity;
    plan.max_deviation = report.max_deviation;
    return plan;
}

PlanReport verify_plan(const DomainPlan& plan, const PolingTarget& target)
{
    target.validate();
    const Chi2Profile profile = plan.profile();
    const std::size_t grid = target.detuning.size();
    std::vector<cplx> curve(grid);
    for (std::size_t j = 0; j < grid; ++j)
        curve[j] = phase_matching(profile, target.detuning[j]);
    PlanReport r;
    r.detuning = target.detuning;
    r.target_abs = normalized_abs(target.amplitude);
    r.plan_abs = normalized_abs(curve);
    const CurveError e = compare(r.target_abs, curve);
    r.fidelity = 1.0 - e.relative;
    r.max_deviation = e.max_deviation;
    return r;
}

void write_plan_csv(const DomainPlan& plan, std::ostream& out,
                    const std::vector<std::pair<std::string, std::string>>& meta)
{
    for (const auto& [key, value] : meta)
        out << "# " << key << '=' << value << '\n';
    out << "signed_length_um\n";
    for (int s : plan.signs)
        out << fmt::format("{:.17g}\n", s * plan.domain_um);
}

DomainPlan read_plan_csv(std::istream& in)
{
    DomainPlan plan;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line.front() == '#')
            continue;
        if (header) {
            header = false;
            if (line.find_first_not_of("+-0123456789.eE") != std::string::npos)
                continue;
        }
        const double v = std::stod(line);
        if (!(v != 0.0))
            throw ConfigError("plan CSV contains a zero-length domain");
        if (plan.domain_um == 0.0)
            plan.domain_um = std::abs(v);
        else if (std::abs(std::abs(v) - plan.domain_um) > 1e-9 * plan.domain_um)
            throw ConfigError("plan CSV domains differ in length");
        plan.signs.push_back(v > 0.0 ? 1 : -1);
    }
    if (plan.signs.size() < 2)
        throw ConfigError("plan CSV needs at least two domains");
    return plan;
}

void write_report_csv(const PlanReport& report, std::ostream& out)
{
    out << "detuning,target_abs,plan_abs\n";
    for (std::size_t j = 0; j < report.detuning.size(); ++j)
        out << fmt::format("{:.17g},{:.17g},{:.17g}\n", report.detuning[j], report.target_abs[j],
                           report.plan_abs[j]);
}

nlohmann::json to_json(const DomainPlan& plan)
{
    return {{"domains", plan.domains()},
            {"domain_um", plan.domain_um},
            {"length_um", plan.length_um()},
            {"fidelity", plan.fidelity},
            {"greedy_fidelity", plan.greedy_fidelity},
            {"max_deviation", plan.max_deviation}};
}

}  // namespace spdc
