#ifndef SPDC_POLING_HPP
#define SPDC_POLING_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spdc/chi2.hpp"
#include "spdc/optics.hpp"

namespace spdc
{

// Target phase matching on a grid of physical detunings centred on the
// first-order quasi-phase-matching point pi / l_c. `amplitude` is the
// residual transform of `profile`, max-normalized.
struct PolingTarget
{
    Chi2Profile profile = Chi2Profile::constant(1.0);
    double domain_um = 0.0;
    std::vector<double> detuning;
    std::vector<cplx> amplitude;

    double qpm_detuning() const;
    // Grid of `points` detunings spanning qpm +- half_width.
    static PolingTarget from_profile(const Chi2Profile& profile, double domain_um,
                                     double half_width, std::size_t points);
    void validate() const;
};

struct DomainPlan
{
    double domain_um = 0.0;
    std::vector<int> signs;
    // 1 - normalized L2 error of the max-normalized |phi| against the target.
    double fidelity = 0.0;
    double greedy_fidelity = 0.0;
    double max_deviation = 0.0;

    std::size_t domains() const { return signs.size(); }
    double length_um() const { return domain_um * static_cast<double>(signs.size()); }
    Chi2Profile profile() const;
};

struct SynthesisOptions
{
    std::uint64_t seed = 0;
    // Annealing proposals = sweeps * M, temperatures relative to the greedy
    // error, cooled geometrically from t_start to t_end.
    std::size_t sweeps = 200;
    double t_start = 0.1;
    double t_end = 1e-4;
};

// Greedy tracking of the cumulative phase matching followed by simulated
// annealing over single-domain flips. Throws ConfigError if M * l_c differs
// from the target crystal length or the target vanishes.
DomainPlan synthesize(const PolingTarget& target, std::size_t domains, double domain_um,
                      const SynthesisOptions& opts = {});

struct PlanReport
{
    double fidelity = 0.0;
    double max_deviation = 0.0;
    std::vector<double> detuning;
    // Max-normalized magnitudes.
    std::vector<double> target_abs;
    std::vector<double> plan_abs;
};

PlanReport verify_plan(const DomainPlan& plan, const PolingTarget& target);

// One signed domain length per line (+l_c or -l_c, um), after optional
// '#' metadata lines.
void write_plan_csv(const DomainPlan& plan, std::ostream& out,
                    const std::vector<std::pair<std::string, std::string>>& meta = {});
DomainPlan read_plan_csv(std::istream& in);
// Columns: detuning, target_abs, plan_abs
void write_report_csv(const PlanReport& report, std::ostream& out);

nlohmann::json to_json(const DomainPlan& plan);

}  // namespace spdc

#endif  // SPDC_POLING_HPP
