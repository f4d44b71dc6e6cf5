#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "spdc/poling.hpp"

using namespace spdc;

namespace
{

constexpr double kDomain = 23.0;

PolingTarget target_for(const Chi2Profile& profile, std::size_t points = 121)
{
    return PolingTarget::from_profile(profile, kDomain, 24.0 * kPi / profile.length_um(), points);
}

SynthesisOptions quick()
{
    SynthesisOptions o;
    o.sweeps = 40;
    return o;
}

}  // namespace

TEST_SUITE("poling")
{
    TEST_CASE("flat target gives periodic poling")
    {
        const std::size_t m = 200;
        const PolingTarget t = target_for(Chi2Profile::constant(m * kDomain));
        const DomainPlan plan = synthesize(t, m, kDomain, quick());
        REQUIRE(plan.domains() == m);
        int flips = 0;
        for (std::size_t k = 1; k < m; ++k)
            flips += plan.signs[k] != plan.signs[k - 1];
        CHECK(flips == static_cast<int>(m) - 1);
        DomainPlan ideal = plan;
        for (std::size_t k = 0; k < m; ++k)
            ideal.signs[k] = k % 2 == 0 ? plan.signs[0] : -plan.signs[0];
        CHECK(verify_plan(ideal, t).fidelity == doctest::Approx(plan.fidelity).epsilon(1e-12));
        CHECK(plan.fidelity > 0.98);
        CHECK(plan.length_um() == doctest::Approx(m * kDomain));
    }

    TEST_CASE("target construction")
    {
        const double L = 400 * kDomain;
        const PolingTarget t = target_for(Chi2Profile::gaussian(L, 0.25 * L), 81);
        CHECK(t.detuning.size() == 81);
        CHECK(t.detuning[40] == doctest::Approx(kPi / kDomain));
        CHECK(t.qpm_detuning() == doctest::Approx(kPi / kDomain));
        double peak = 0.0;
        for (const cplx& a : t.amplitude)
            peak = std::max(peak, std::abs(a));
        CHECK(peak == doctest::Approx(1.0));
        CHECK_NOTHROW(t.validate());
        // Even counts are rounded up so the grid stays centred.
        CHECK(target_for(Chi2Profile::gaussian(L, 0.25 * L), 80).detuning.size() == 81);
        CHECK_THROWS_AS(target_for(Chi2Profile::gaussian(L, 0.25 * L), 2), ConfigError);
    }

    TEST_CASE("synthesized plan on a Gaussian target")
    {
        const std::size_t m = 400;
        const double L = m * kDomain;
        const PolingTarget t = target_for(Chi2Profile::gaussian(L, 0.25 * L));
        const DomainPlan plan = synthesize(t, m, kDomain, quick());
        CHECK(plan.fidelity >= plan.greedy_fidelity);
        CHECK(plan.fidelity > 0.95);
        CHECK(plan.fidelity <= 1.0);

        const PlanReport rep = verify_plan(plan, t);
        CHECK(std::abs(rep.fidelity - plan.fidelity) <= 1e-12);
        CHECK(std::abs(rep.max_deviation - plan.max_deviation) <= 1e-12);
        CHECK(rep.detuning == t.detuning);

        DomainPlan flipped = plan;
        for (int& s : flipped.signs)
            s = -s;
        CHECK(verify_plan(flipped, t).fidelity == doctest::Approx(plan.fidelity).epsilon(1e-12));

        DomainPlan noisy = plan;
        std::mt19937 rng(11);
        std::uniform_int_distribution<std::size_t> pick(0, m - 1);
        for (std::size_t k = 0; k < m / 20; ++k) {
            int& s = noisy.signs[pick(rng)];
            s = -s;
        }
        CHECK(verify_plan(noisy, t).fidelity < plan.fidelity);

        const DomainPlan again = synthesize(t, m, kDomain, quick());
        CHECK(again.signs == plan.signs);
    }

    TEST_CASE("invalid synthesis requests")
    {
        const double L = 100 * kDomain;
        const PolingTarget t = target_for(Chi2Profile::constant(L));
        CHECK_THROWS_AS(synthesize(t, 99, kDomain), ConfigError);
        PolingTarget zero = t;
        for (cplx& a : zero.amplitude)
            a = 0.0;
        CHECK_THROWS_AS(synthesize(zero, 100, kDomain), ConfigError);
        PolingTarget broken = t;
        broken.amplitude.pop_back();
        CHECK_THROWS_AS(broken.validate(), ConfigError);
    }

    TEST_CASE("plan CSV round trip")
    {
        DomainPlan plan;
        plan.domain_um = kDomain;
        plan.signs = {1, -1, -1, 1, -1, 1, 1};
        std::stringstream s;
        write_plan_csv(plan, s, {{"seed", "0"}});
        CHECK(s.str().find("# seed=0\n") != std::string::npos);
        const DomainPlan back = read_plan_csv(s);
        CHECK(back.signs == plan.signs);
        CHECK(back.domain_um == plan.domain_um);
        CHECK(back.profile().is_domain_sequence());

        std::istringstream bad("signed_length_um\n23\n-22\n");
        CHECK_THROWS_AS(read_plan_csv(bad), ConfigError);
        const nlohmann::json j = to_json(plan);
        CHECK(j.at("domains") == plan.signs.size());
    }
}
