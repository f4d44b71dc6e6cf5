#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "spdc/optics.hpp"

using namespace spdc;

TEST_SUITE("optics")
{
    TEST_CASE("KTP degenerate configuration")
    {
        const OpticalConfig cfg = testcfg::ktp();
        CHECK(cfg.lambda_i_nm == doctest::Approx(1550.0).epsilon(1e-12));
        CHECK(1.0 / cfg.lambda_p_nm ==
              doctest::Approx(1.0 / cfg.lambda_s_nm + 1.0 / cfg.lambda_i_nm).epsilon(1e-12));
        CHECK(cfg.length_um == doctest::Approx(29900.0));
    }

    TEST_CASE("unit index model gives k_p = 2 k_s = 2 k_i")
    {
        const OpticalConfig cfg = testcfg::unit();
        CHECK(cfg.k_p == doctest::Approx(2.0 * cfg.k_s).epsilon(1e-12));
        CHECK(cfg.k_p == doctest::Approx(2.0 * cfg.k_i).epsilon(1e-12));
        CHECK(is_degenerate(cfg, 1e-9));
        CHECK(cfg.k_s == doctest::Approx(kTwoPi / 1.55).epsilon(1e-12));
    }

    TEST_CASE("KTP indices match a script evaluation of the Sellmeier polynomial")
    {
        const OpticalConfig cfg = testcfg::ktp();
        CHECK(cfg.n_p == doctest::Approx(1.7581310005).epsilon(1e-9));
        CHECK(cfg.n_s == doctest::Approx(1.7349061194).epsilon(1e-9));
        CHECK(cfg.n_i == doctest::Approx(1.8157731108).epsilon(1e-9));
        CHECK(cfg.k_s == doctest::Approx(kTwoPi * cfg.n_s / 1.55).epsilon(1e-14));
        CHECK_FALSE(is_degenerate(cfg, 1e-6));
    }

    TEST_CASE("invalid configurations")
    {
        CHECK_THROWS_AS(make_config(775, 1550, 10, "bbo"), ConfigError);
        CHECK_THROWS_AS(make_config(1550, 775, 10, "unit"), ConfigError);
        CHECK_THROWS_AS(make_config(775, 1550, -1, "unit"), ConfigError);
        CHECK_THROWS_AS(make_config(300, 1550, 10, "ktp-typeII"), ConfigError);
        CHECK_THROWS_AS(make_config(775, 5000, 10, "ktp-typeII"), ConfigError);
    }

    TEST_CASE("phase mismatch examples")
    {
        const OpticalConfig ktp = testcfg::ktp();
        CHECK(delta_kz(ktp, {}, {}) == 0.0);

        const OpticalConfig cfg = testcfg::unit();
        const double rho = 0.07;
        const double opposite = delta_kz(cfg, TransverseMomentum::polar(rho, 0.3),
                                         TransverseMomentum::polar(rho, 0.3 + kPi));
        CHECK(opposite == doctest::Approx(2.0 * rho * rho / cfg.k_p).epsilon(1e-12));

        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-0.2, 0.2);
        for (int k = 0; k < 50; ++k) {
            const auto qs = TransverseMomentum::cartesian(u(rng), u(rng));
            const auto qi = TransverseMomentum::cartesian(u(rng), u(rng));
            const auto d = qs - qi;
            CHECK(delta_kz(cfg, qs, qi) ==
                  doctest::Approx(d.rho * d.rho / (2.0 * cfg.k_p)).epsilon(1e-10));
        }
    }

    TEST_CASE("polar angles are wrapped into [0, 2pi)")
    {
        CHECK(TransverseMomentum::polar(1.0, -0.5).phi == doctest::Approx(kTwoPi - 0.5));
        CHECK(TransverseMomentum::polar(1.0, 3 * kTwoPi + 0.25).phi == doctest::Approx(0.25));
        const auto flipped = TransverseMomentum::polar(-2.0, 0.0);
        CHECK(flipped.rho == 2.0);
        CHECK(flipped.phi == doctest::Approx(kPi));
        CHECK(TransverseMomentum::polar(1.0, kTwoPi).phi < kTwoPi);
    }

    TEST_CASE("beam parameter and waist are inverse")
    {
        const OpticalConfig cfg = testcfg::ktp();
        for (double w : {5.0, 31.7, 250.0}) {
            const BeamParameter xi = xi_from_waist(cfg, w, cfg.k_p);
            CHECK(waist_from_xi(cfg, xi, cfg.k_p) == doctest::Approx(w).epsilon(1e-12));
        }
        CHECK(xi_from_waist(cfg, 1.0, 1.0).xi == doctest::Approx(cfg.length_um));
        CHECK_THROWS_AS(xi_from_waist(cfg, 0.0, cfg.k_p), ConfigError);
        CHECK_THROWS_AS(waist_from_xi(cfg, {-1.0}, cfg.k_p), ConfigError);
    }

    TEST_CASE("config JSON round trip")
    {
        const OpticalConfig cfg = testcfg::ktp();
        const OpticalConfig back = config_from_json(to_json(cfg));
        CHECK(back.k_p == cfg.k_p);
        CHECK(back.k_i == cfg.k_i);
        CHECK(back.length_um == doctest::Approx(cfg.length_um).epsilon(1e-14));
        CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"lambda_p_nm": 775})")),
                        ConfigError);
    }
}
