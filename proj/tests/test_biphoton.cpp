#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "spdc/biphoton.hpp"
#include "spdc/metrics.hpp"
#include "spdc/zkernel.hpp"

using namespace spdc;

namespace
{

struct Toy
{
    OpticalConfig cfg = testcfg::unit();
    Chi2Profile profile = testcfg::cosine_crystal(cfg.length_um);
    double w_p = testcfg::pump_waist(cfg, 1.0);
    double w_c = w_p * std::sqrt(2.0);
};

// Purity of Phi sampled on a Cartesian midpoint grid of N^2 points per
// photon over [-Q, Q]^2. No mode basis, no closed forms.
double brute_force_purity(const Toy& t, const PumpSpec& pump, int n, double q)
{
    std::vector<double> x(n);
    for (int k = 0; k < n; ++k)
        x[k] = -q + 2.0 * q * (k + 0.5) / n;
    const int d = n * n;
    Eigen::MatrixXcd m(d, d);
    for (int a = 0; a < d; ++a) {
        const auto qs = TransverseMomentum::cartesian(x[a / n], x[a % n]);
        for (int b = 0; b < d; ++b) {
            const auto qi = TransverseMomentum::cartesian(x[b / n], x[b % n]);
            m(a, b) = mode_function_value(t.cfg, pump, t.profile, qs, qi);
        }
    }
    const Eigen::MatrixXcd g = m * m.adjoint();
    const double tr = g.trace().real();
    return g.squaredNorm() / (tr * tr);
}

}  // namespace

TEST_SUITE("biphoton")
{
    TEST_CASE("mode function factorizes into pump and phase matching")
    {
        const Toy t;
        const PumpSpec pump = PumpSpec::gaussian(t.w_p);
        const auto qs = TransverseMomentum::polar(0.05, 0.4);
        const auto qi = TransverseMomentum::polar(0.08, 2.9);
        const cplx expected = pump_amplitude(pump, qs + qi) *
                              effective_phase_matching(t.profile, delta_kz(t.cfg, qs, qi));
        CHECK(std::abs(mode_function_value(t.cfg, pump, t.profile, qs, qi) - expected) < 1e-12);
    }

    TEST_CASE("subspace bounds")
    {
        const SubspaceBounds b{3, 2};
        CHECK(b.dim() == 20);
        CHECK(b.index(0, -2) == 0);
        CHECK(b.index(3, 2) == 19);
        CHECK_THROWS_AS((SubspaceBounds{-1, 2}.validate()), ConfigError);
    }

    TEST_CASE("OAM conservation, normalization and reduced density")
    {
        const Toy t;
        PumpSpec pump{t.w_p, {{0, 0, {std::sqrt(0.7), 0.0}}, {1, 1, {0.0, std::sqrt(0.3)}}}};
        const SubspaceBounds b{4, 3};
        const CoincidenceMatrix cm = decompose(t.cfg, pump, t.profile, b, t.w_c, t.w_c);
        CHECK(cm.matrix.norm() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(cm.captured_norm > 0.9);
        CHECK(cm.captured_norm <= 1.0 + 1e-9);

        double forbidden = 0.0;
        double allowed = 0.0;
        for (int ls = -b.U; ls <= b.U; ++ls)
            for (int li = -b.U; li <= b.U; ++li)
                for (int ps = 0; ps <= b.H; ++ps)
                    for (int pi = 0; pi <= b.H; ++pi) {
                        const double v = std::abs(cm.at(ps, ls, pi, li));
                        if (ls + li == 0 || ls + li == 1)
                            allowed = std::max(allowed, v);
                        else
                            forbidden = std::max(forbidden, v);
                    }
        CHECK(allowed > 0.1);
        CHECK(forbidden < 1e-12);

        const Eigen::MatrixXcd rho = reduced_density(cm);
        CHECK(rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK((rho - rho.adjoint()).norm() < 1e-14);
        CHECK((rho * rho).trace().real() == doctest::Approx(purity_from_matrix(cm, 0.0)).epsilon(1e-10));
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
    }

    TEST_CASE("captured norm grows with the subspace")
    {
        const Toy t;
        const PumpSpec pump = PumpSpec::gaussian(t.w_p);
        double previous = 0.0;
        for (SubspaceBounds b : {SubspaceBounds{1, 1}, SubspaceBounds{3, 2}, SubspaceBounds{6, 4}}) {
            const CoincidenceMatrix cm = decompose(t.cfg, pump, t.profile, b, t.w_c, t.w_c);
            CHECK(cm.captured_norm > previous);
            CHECK(cm.captured_norm <= 1.0 + 1e-9);
            previous = cm.captured_norm;
        }
    }

    TEST_CASE("state norm agrees with the Gaussian closed form")
    {
        const Toy t;
        for (double xi : {0.3, 1.0, 4.0}) {
            const double w = testcfg::pump_waist(t.cfg, xi);
            CHECK(state_norm(t.cfg, PumpSpec::gaussian(w), t.profile) ==
                  doctest::Approx(state_norm_gaussian(t.cfg, w, t.profile)).epsilon(1e-6));
        }
    }

    TEST_CASE("state norm is pump-shape independent")
    {
        // int |V(q)|^2 d^2q = 1 for every normalized pump, and the
        // phase matching depends on q_s - q_i only in the degenerate case.
        const Toy t;
        const double g = state_norm(t.cfg, PumpSpec::gaussian(t.w_p), t.profile);
        const PumpSpec lg{t.w_p, {{2, -1, 1.0}}};
        CHECK(state_norm(t.cfg, lg, t.profile) == doctest::Approx(g).epsilon(1e-6));
    }

    TEST_CASE("three independent purity paths agree on a small cosine crystal")
    {
        const Toy t;
        const PumpSpec pump = PumpSpec::gaussian(t.w_p);
        const double brute = brute_force_purity(t, pump, 20, 7.0 / t.w_p);
        const double zk = purity_z_kernel(t.cfg, t.w_p, t.profile);
        const CoincidenceMatrix cm = decompose(t.cfg, pump, t.profile, {8, 6}, t.w_c, t.w_c);
        const double modes = purity_from_matrix(cm);
        CHECK(zk == doctest::Approx(brute).epsilon(0.01));
        CHECK(modes == doctest::Approx(brute).epsilon(0.01));
        CHECK(std::abs(modes - zk) <= 0.005);
    }

    TEST_CASE("tensors reproduce direct decomposition")
    {
        const Toy t;
        const std::vector<std::pair<int, int>> modes{{0, 0}, {1, 0}, {0, 2}};
        const ModeTensors tens =
            build_mode_tensors(t.cfg, t.w_p, modes, t.profile, {4, 3}, t.w_c, t.w_c);
        const PumpSpec pump =
            PumpSpec{t.w_p, {{0, 0, {0.8, 0.0}}, {1, 0, {0.0, 0.5}}, {0, 2, {0.3, 0.1}}}}.normalized();
        const Eigen::VectorXcd a = tens.coefficients(pump);
        const CoincidenceMatrix from_tensors = coincidence_matrix(tens, a);
        const CoincidenceMatrix direct = decompose(t.cfg, pump, t.profile, {4, 3}, t.w_c, t.w_c);
        CHECK((from_tensors.matrix - direct.matrix).norm() < 1e-6);
        CHECK(from_tensors.captured_norm == doctest::Approx(direct.captured_norm).epsilon(1e-6));
        CHECK(tens.norm(a) == doctest::Approx(state_norm(t.cfg, pump, t.profile)).epsilon(1e-6));
        CHECK_THROWS_AS(tens.coefficients(PumpSpec{t.w_p, {{3, 3, 1.0}}}), ConfigError);
    }
}
