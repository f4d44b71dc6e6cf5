#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "helpers.hpp"
#include "spdc/optimizer.hpp"

using namespace spdc;

namespace
{

const ModeTensors& toy_tensors()
{
    static const ModeTensors t = [] {
        const OpticalConfig cfg = testcfg::unit();
        const double w_p = testcfg::pump_waist(cfg, 1.0);
        const double w_c = 1.4 * w_p;
        return build_mode_tensors(cfg, w_p, pump_mode_range(1, 1),
                                  testcfg::cosine_crystal(cfg.length_um), {4, 3}, w_c, w_c);
    }();
    return t;
}

}  // namespace

TEST_SUITE("optimizer")
{
    TEST_CASE("Nelder-Mead on the Rosenbrock valley")
    {
        const auto rosen = [](std::span<const double> x) {
            return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
        };
        const NelderMeadResult r = nelder_mead_minimize(rosen, {-1.2, 1.0}, {0.5, 1e-10, 20000});
        CHECK(r.converged);
        CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
        CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
        const NelderMeadResult again = nelder_mead_minimize(rosen, {-1.2, 1.0}, {0.5, 1e-10, 20000});
        CHECK(again.x == r.x);

        // Non-finite values are treated as uphill.
        const auto walled = [](std::span<const double> x) {
            return x[0] < 0.0 ? std::nan("") : std::pow(x[0] - 0.5, 2);
        };
        CHECK(nelder_mead_minimize(walled, {0.1}).x[0] == doctest::Approx(0.5).epsilon(1e-3));
    }

    TEST_CASE("log-bracket maximization")
    {
        const auto f = [](double x) { return -std::pow(std::log(x / 2.5), 2); };
        const LineMaximum m = maximize_log_bracket(f, 0.1, 10.0);
        CHECK(m.converged);
        CHECK(m.x == doctest::Approx(2.5).epsilon(2e-4));
        // Maximum on the boundary.
        CHECK(maximize_log_bracket([](double x) { return x; }, 0.1, 10.0).x ==
              doctest::Approx(10.0).epsilon(1e-3));
        CHECK_THROWS_AS(maximize_log_bracket(f, 0.0, 1.0), ConfigError);
    }

    TEST_CASE("collection optimum is symmetric and certified")
    {
        const OpticalConfig cfg = testcfg::unit();
        const double w_p = testcfg::pump_waist(cfg, 1.0);
        const PumpSpec pump = PumpSpec::gaussian(w_p);
        const Chi2Profile profile = testcfg::cosine_crystal(cfg.length_um);
        const CollectionResult sym = optimize_collection(cfg, pump, profile, true);
        const CollectionResult free = optimize_collection(cfg, pump, profile, false);
        CHECK(sym.w_s == sym.w_i);
        CHECK(free.w_s == doctest::Approx(free.w_i).epsilon(1e-3));
        CHECK(free.w_s == doctest::Approx(sym.w_s).epsilon(1e-3));
        CHECK(free.r2_smf >= sym.r2_smf - 1e-9);
        for (double f : {0.95, 1.05}) {
            const double w = f * sym.w_s;
            CHECK(pair_collection_smf(cfg, pump, profile, w, w) < sym.r2_smf);
        }
    }

    TEST_CASE("start vectors")
    {
        CHECK(unit_start(1) == std::vector<double>{1.0});
        CHECK(unit_start(3) == std::vector<double>{0.0, 1.0, 0.0});
        CHECK(random_start(5, 3) == random_start(5, 3));
        CHECK(random_start(5, 3) != random_start(5, 4));
        const double L = 1000.0;
        const std::vector<double> g = gaussian_matched_start(L, 9, 0.25 * L);
        const Chi2Profile fit = Chi2Profile::cosine(L, g, 0.25 * L);
        // Coefficients are max-normalized, so compare the shape.
        const double scale = evaluate_chi2(fit, 0.0);
        for (double z : {-400.0, -100.0, 250.0})
            CHECK(evaluate_chi2(fit, z) / scale ==
                  doctest::Approx(std::exp(-z * z / (L * L / 16))).epsilon(0.02));
    }

    TEST_CASE("order zero optimizes xi only")
    {
        const OpticalConfig cfg = testcfg::unit();
        const CrystalOptResult r = optimize_crystal(cfg, 0, 1.0);
        CHECK(r.coefficients == std::vector<double>{1.0});
        CHECK(r.converged);
        CHECK(r.xi_star > 0.1);
        CHECK(r.xi_star < 10.0);
        const double at_star =
            purity_z_kernel(cfg, testcfg::pump_waist(cfg, r.xi_star), r.profile(), {40, 48, 256});
        CHECK(r.purity == doctest::Approx(at_star).epsilon(1e-10));
        for (double f : {0.9, 1.1})
            CHECK(purity_z_kernel(cfg, testcfg::pump_waist(cfg, f * r.xi_star), r.profile(),
                                  {40, 48, 256}) < r.purity);
    }

    TEST_CASE("alternating search is monotone and deterministic")
    {
        const OpticalConfig cfg = testcfg::unit();
        CrystalOptOptions opts;
        opts.max_outer = 4;
        const CrystalOptResult a = optimize_crystal(cfg, 2, 1.4, opts);
        const CrystalOptResult b = optimize_crystal(cfg, 2, 1.4, opts);
        CHECK(a.coefficients == b.coefficients);
        CHECK(a.xi_star == b.xi_star);
        REQUIRE(!a.purity_trace.empty());
        for (std::size_t k = 1; k < a.purity_trace.size(); ++k)
            CHECK(a.purity_trace[k] >= a.purity_trace[k - 1] - 1e-9);
        CHECK(a.coefficients.size() == 3);
        double largest = 0.0;
        for (double c : a.coefficients)
            largest = std::max(largest, std::abs(c));
        CHECK(largest == 1.0);
        CHECK(a.purity > optimize_crystal(cfg, 0, 1.4).purity);

        const CrystalOptResult back = crystal_result_from_json(to_json(a));
        CHECK(back.coefficients == a.coefficients);
        CHECK(back.purity == a.purity);
        CHECK_THROWS_AS(optimize_crystal(cfg, 17, 1.0), ConfigError);
        CHECK_THROWS_AS(optimize_crystal(cfg, 2, -1.0), ConfigError);
    }

    TEST_CASE("pump mode range and coefficient map")
    {
        const auto modes = pump_mode_range(2, 3);
        CHECK(modes.size() == 21);
        CHECK(modes.front() == std::pair{0, 0});
        CHECK(pump_mode_range(0, 0) == std::vector<std::pair<int, int>>{{0, 0}});

        CHECK(pump_coefficients_from_params({}).size() == 1);
        const std::vector<double> x{0.3, -0.2, 1.5, 0.7};
        const Eigen::VectorXcd a = pump_coefficients_from_params(x);
        CHECK(a.size() == 3);
        CHECK(a.squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(a(0).imag() == 0.0);
        CHECK(a(0).real() > 0.0);
    }

    TEST_CASE("pump objective is gauge invariant")
    {
        const ModeTensors& t = toy_tensors();
        Eigen::VectorXcd a(6);
        a << 0.8, cplx(0.1, 0.2), cplx(-0.3, 0.1), 0.2, cplx(0.0, -0.1), 0.15;
        a.normalize();
        const double p = pump_objective(t, a);
        CHECK(pump_objective(t, a * std::polar(1.0, 0.9)) == doctest::Approx(p).epsilon(1e-12));
        CHECK(pump_objective(t, 3.0 * a) == doctest::Approx(p).epsilon(1e-12));
    }

    TEST_CASE("block-sparse objective equals the dense one")
    {
        const ModeTensors& t = toy_tensors();
        const PumpObjective f(t);
        CHECK(f.active_blocks() < 49);
        for (int k = 0; k < 5; ++k) {
            std::srand(k + 1);
            const Eigen::VectorXcd a = Eigen::VectorXcd::Random(6);
            CHECK(f(a) == doctest::Approx(pump_objective(t, a)).epsilon(1e-12));
        }
    }

    TEST_CASE("pump optimization never loses to the Gaussian pump")
    {
        const ModeTensors& t = toy_tensors();
        PumpOptOptions opts;
        opts.min_capture = 0.99;
        const PumpOptResult r = optimize_pump(t, opts);
        CHECK(r.purity >= r.purity_gaussian - 1e-12);
        CHECK(r.purity_lower_bound <= r.purity + 1e-12);
        CHECK(r.pump.norm_squared() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_NOTHROW(r.pump.validate());
        CHECK(r.heralding >= r.r2_smf - 1e-12);
        const PumpOptResult back = pump_result_from_json(to_json(r));
        CHECK(back.purity == r.purity);
        CHECK(back.pump.modes.size() == r.pump.modes.size());

        // A single-mode range has nothing to optimize.
        const OpticalConfig cfg = testcfg::unit();
        const ModeTensors g =
            build_mode_tensors(cfg, t.w_p, {{0, 0}}, testcfg::cosine_crystal(cfg.length_um), {4, 3},
                               t.w_s, t.w_i);
        const PumpOptResult single = optimize_pump(g, opts);
        CHECK(single.pump.is_gaussian());
        CHECK(single.purity == single.purity_gaussian);
    }

    TEST_CASE("scan CSV round trip")
    {
        const OpticalConfig cfg = testcfg::unit();
        const ScanTable t = scan_xi(cfg, testcfg::cosine_crystal(cfg.length_um), {0.5, 1.0, 2.0},
                                    {24, 32, 256});
        CHECK(t.points() == 3);
        CHECK_NOTHROW(t.validate());
        std::stringstream s;
        write_scan_csv(t, s, {{"config", "unit"}});
        CHECK(s.str().rfind("# kind=", 0) == 0);
        const ScanTable back = read_scan_csv(s);
        CHECK(back.kind == t.kind);
        CHECK(back.axis_names == t.axis_names);
        CHECK(back.axes == t.axes);
        CHECK(back.metric_names == t.metric_names);
        CHECK(back.values == t.values);
    }
}
