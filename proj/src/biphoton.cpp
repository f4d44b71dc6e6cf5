#include "spdc/biphoton.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include <fmt/format.h>

#include "spdc/parallel.hpp"
#include "spdc/quadrature.hpp"

namespace spdc
{
namespace
{

// Radius containing every LG mode with 2p + |l| <= order (u = w^2 rho^2 / 2
// beyond the outer turning point by 40).
double basis_extent(int order, double w) { return std::sqrt(2.0 * (2.0 * order + 42.0)) / w; }

// R_{p,l}(rho) for a fixed list of modes, using the three-term Laguerre
// recurrence instead of std::assoc_laguerre.
class LgRadial
{
public:
    LgRadial(const std::vector<std::pair<int, int>>& modes, double w) : modes_(modes), w_(w)
    {
        for (const auto& [p, l] : modes) {
            const double al = std::abs(l);
            norms_.push_back(w * std::exp(0.5 * (std::lgamma(p + 1.0) - std::lgamma(p + al + 1.0))));
        }
    }

    void operator()(double rho, std::span<double> out) const
    {
        const double u = 0.5 * w_ * w_ * rho * rho;
        const double gauss = std::exp(-0.5 * u);
        for (std::size_t m = 0; m < modes_.size(); ++m) {
            const auto [p, l] = modes_[m];
            const double a = std::abs(l);
            double lm1 = 1.0, lk = 1.0;
            if (p >= 1)
                lk = 1.0 + a - u;
            for (int k = 1; k < p; ++k) {
                const double next = ((2.0 * k + 1.0 + a - u) * lk - (k + a) * lm1) / (k + 1.0);
                lm1 = lk;
                lk = next;
            }
            const double power = l == 0 ? 1.0 : std::pow(u, 0.5 * a);
            out[m] = norms_[m] * power * lk * gauss;
        }
    }

private:
    std::vector<std::pair<int, int>> modes_;
    double w_;
    std::vector<double> norms_;
};

// Table rho_k w_k R_{p,|l|}(rho_k) indexed [|l|][p][k].
struct WeightedLgTable
{
    int H = 0;
    std::size_t nodes = 0;
    std::vector<double> v;

    double at(int l, int p, std::size_t k) const
    {
        return v[(static_cast<std::size_t>(std::abs(l)) * static_cast<std::size_t>(H + 1) +
                  static_cast<std::size_t>(p)) *
                     nodes +
                 k];
    }
};

WeightedLgTable make_table(const SubspaceBounds& b, double w, const GaussRule& rule)
{
    std::vector<std::pair<int, int>> modes;
    for (int l = 0; l <= b.U; ++l)
        for (int p = 0; p <= b.H; ++p)
            modes.emplace_back(p, l);
    const LgRadial radial(modes, w);
    WeightedLgTable t{b.H, rule.size(), std::vector<double>(modes.size() * rule.size())};
    std::vector<double> buf(modes.size());
    for (std::size_t k = 0; k < rule.size(); ++k) {
        radial(rule.nodes[k], buf);
        for (std::size_t m = 0; m < modes.size(); ++m)
            t.v[m * rule.size() + k] = rule.nodes[k] * rule.weights[k] * buf[m];
    }
    return t;
}

int pump_order(const std::vector<std::pair<int, int>>& modes)
{
    int order = 0;
    for (const auto& [p, l] : modes)
        order = std::max(order, 2 * p + std::abs(l));
    return order;
}

// Pump factor V_m(q+) for each pump mode and the phase matching at the
// azimuthal nodes of one (rho_s, rho_i) pair.
struct AzimuthalSampler
{
    const MismatchCoefficients& mc;
    const Chi2Profile& profile;
    const LgRadial& pump;
    std::size_t modes;
    std::vector<int> pump_l;
    std::vector<double> cos_phi, sin_phi;

    // out[j * modes + m] = V_m(q+) phi(dkz) at node j
    void sample(double rs, double ri, std::vector<cplx>& out, std::vector<double>& rad) const
    {
        const std::size_t nphi = cos_phi.size();
        out.resize(nphi * modes);
        rad.resize(modes);
        const double inv_sqrt = 1.0 / std::sqrt(kTwoPi);
        for (std::size_t j = 0; j < nphi; ++j) {
            const double x = rs + ri * cos_phi[j];
            const double y = ri * sin_phi[j];
            const double qp = std::hypot(x, y);
            const double theta = std::atan2(y, x);
            const double dk = mc.signal * rs * rs + mc.idler * ri * ri - mc.cross * rs * ri * cos_phi[j];
            const cplx ph = effective_phase_matching(profile, dk) * inv_sqrt;
            pump(qp, rad);
            for (std::size_t m = 0; m < modes; ++m)
                out[j * modes + m] = ph * rad[m] * std::polar(1.0, pump_l[m] * theta);
        }
    }
};

struct LevelResult
{
    std::vector<Eigen::MatrixXcd> blocks;
    Eigen::MatrixXcd singles;
};

LevelResult compute_level(const OpticalConfig& cfg, double w_p,
                          const std::vector<std::pair<int, int>>& pump_modes,
                          const Chi2Profile& profile, const SubspaceBounds& b, double w_s,
                          double w_i, std::size_t nr, std::size_t nphi)
{
    const auto mc = mismatch_coefficients(cfg);
    const std::size_t nm = pump_modes.size();
    const std::size_t nl = static_cast<std::size_t>(2 * b.U + 1);
    const std::size_t np = static_cast<std::size_t>(b.H + 1);
    const int order = 2 * b.H + b.U;

    const LgRadial pump(pump_modes, w_p);
    AzimuthalSampler sampler{mc, profile, pump, nm, {}, {}, {}};
    for (const auto& pm : pump_modes)
        sampler.pump_l.push_back(pm.second);
    const double dphi = kTwoPi / static_cast<double>(nphi);
    for (std::size_t j = 0; j < nphi; ++j) {
        sampler.cos_phi.push_back(std::cos(dphi * static_cast<double>(j)));
        sampler.sin_phi.push_back(std::sin(dphi * static_cast<double>(j)));
    }
    // twiddle[li][j] = exp(-i l_i phi_j) dphi
    std::vector<cplx> twiddle(nl * nphi);
    for (std::size_t li = 0; li < nl; ++li)
        for (std::size_t j = 0; j < nphi; ++j) {
            const double l = static_cast<double>(li) - b.U;
            twiddle[li * nphi + j] = dphi * std::polar(1.0, -l * dphi * static_cast<double>(j));
        }

    // Coincidence blocks.
    const GaussRule rs_rule = gauss_legendre(nr, 0.0, basis_extent(order, w_s));
    const GaussRule ri_rule = gauss_legendre(nr, 0.0, basis_extent(order, w_i));
    const WeightedLgTable ts = make_table(b, w_s, rs_rule);
    const WeightedLgTable ti = make_table(b, w_i, ri_rule);

    // x[rs][m][li][pi] = sum_ri ti[li][pi][ri] F^m_li(rs, ri)
    std::vector<cplx> x(nr * nm * nl * np);
    parallel_for(nr, [&](std::size_t r) {
        std::vector<cplx> samples, f(nm * nl);
        std::vector<double> rad;
        cplx* xr = x.data() + r * nm * nl * np;
        std::fill(xr, xr + nm * nl * np, cplx{});
        for (std::size_t k = 0; k < nr; ++k) {
            sampler.sample(rs_rule.nodes[r], ri_rule.nodes[k], samples, rad);
            std::fill(f.begin(), f.end(), cplx{});
            for (std::size_t j = 0; j < nphi; ++j)
                for (std::size_t m = 0; m < nm; ++m) {
                    const cplx s = samples[j * nm + m];
                    for (std::size_t li = 0; li < nl; ++li)
                        f[m * nl + li] += s * twiddle[li * nphi + j];
                }
            for (std::size_t m = 0; m < nm; ++m)
                for (std::size_t li = 0; li < nl; ++li) {
                    const int l = static_cast<int>(li) - b.U;
                    const cplx fv = f[m * nl + li];
                    for (std::size_t p = 0; p < np; ++p)
                        xr[(m * nl + li) * np + p] += ti.at(l, static_cast<int>(p), k) * fv;
                }
        }
    });

    LevelResult out;
    const auto dim = static_cast<Eigen::Index>(b.dim());
    for (std::size_t m = 0; m < nm; ++m) {
        Eigen::MatrixXcd blk = Eigen::MatrixXcd::Zero(dim, dim);
        const int lp = pump_modes[m].second;
        for (int l_i = -b.U; l_i <= b.U; ++l_i) {
            const int l_s = lp - l_i;
            if (l_s < -b.U || l_s > b.U)
                continue;
            const std::size_t li = static_cast<std::size_t>(l_i + b.U);
            for (int p_s = 0; p_s <= b.H; ++p_s)
                for (int p_i = 0; p_i <= b.H; ++p_i) {
                    CompensatedSum<cplx> acc;
                    for (std::size_t r = 0; r < nr; ++r)
                        acc.add(ts.at(l_s, p_s, r) *
                                x[((r * nm + m) * nl + li) * np + static_cast<std::size_t>(p_i)]);
                    blk(static_cast<Eigen::Index>(b.index(p_s, l_s)),
                        static_cast<Eigen::Index>(b.index(p_i, l_i))) = acc.value();
                }
        }
        out.blocks.push_back(std::move(blk));
    }

    // Signal projected on the fundamental mode of waist w_s; idler kept whole.
    const double ext_s = basis_extent(0, w_s);
    const GaussRule ss_rule = gauss_legendre(nr, 0.0, ext_s);
    const GaussRule si_rule =
        gauss_legendre(nr, 0.0, ext_s + basis_extent(pump_order(pump_modes), w_p));
    const LgRadial fundamental({{0, 0}}, w_s);
    // g[ri][m] = sum_rs rho w R_00 F^m_{l_m}(rs, ri)
    std::vector<cplx> g(nr * nm, cplx{});
    parallel_for(nr, [&](std::size_t k) {
        std::vector<cplx> samples;
        std::vector<double> rad, r00(1);
        for (std::size_t r = 0; r < nr; ++r) {
            const double rs = ss_rule.nodes[r];
            fundamental(rs, r00);
            const double wgt = rs * ss_rule.weights[r] * r00[0];
            sampler.sample(rs, si_rule.nodes[k], samples, rad);
            for (std::size_t m = 0; m < nm; ++m) {
                const std::size_t li = static_cast<std::size_t>(pump_modes[m].second + b.U);
                cplx fm{};
                if (li < nl) {
                    for (std::size_t j = 0; j < nphi; ++j)
                        fm += samples[j * nm + m] * twiddle[li * nphi + j];
                } else {
                    const double l = pump_modes[m].second;
                    for (std::size_t j = 0; j < nphi; ++j)
                        fm += samples[j * nm + m] * dphi *
                              std::polar(1.0, -l * dphi * static_cast<double>(j));
                }
                g[k * nm + m] += wgt * fm;
            }
        }
    });
    out.singles = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(nm));
    for (std::size_t m = 0; m < nm; ++m)
        for (std::size_t n = 0; n < nm; ++n) {
            if (pump_modes[m].second != pump_modes[n].second)
                continue;
            CompensatedSum<cplx> acc;
            for (std::size_t k = 0; k < nr; ++k)
                acc.add(si_rule.nodes[k] * si_rule.weights[k] * std::conj(g[k * nm + m]) *
                        g[k * nm + n]);
            out.singles(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) = acc.value();
        }
    return out;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

Eigen::MatrixXcd pump_gram(const OpticalConfig& cfg, double w_p,
                           const std::vector<std::pair<int, int>>& modes, const Chi2Profile& profile,
                           std::size_t nodes)
{
    const auto mc = mismatch_coefficients(cfg);
    const double alpha = mc.signal + mc.idler + mc.cross;
    const double gamma = (mc.signal * mc.idler - 0.25 * mc.cross * mc.cross) / alpha;
    const GaussRule rule = gauss_legendre(nodes, 0.0, lg_extent(pump_order(modes), w_p));
    std::vector<double> x(nodes);
    for (std::size_t k = 0; k < nodes; ++k)
        x[k] = gamma * rule.nodes[k] * rule.nodes[k];
    const std::vector<double> psi = PhaseMatchTail(profile).evaluate(x);
    const LgRadial radial(modes, w_p);
    const std::size_t nm = modes.size();
    std::vector<double> buf(nm);
    std::vector<CompensatedSum<double>> acc(nm * nm);
    for (std::size_t k = 0; k < nodes; ++k) {
        radial(rule.nodes[k], buf);
        const double wk = rule.nodes[k] * rule.weights[k] * psi[k];
        for (std::size_t m = 0; m < nm; ++m)
            for (std::size_t n = 0; n < nm; ++n)
                if (modes[m].second == modes[n].second)
                    acc[m * nm + n].add(wk * buf[m] * buf[n]);
    }
    Eigen::MatrixXcd g(static_cast<Eigen::Index>(nm), static_cast<Eigen::Index>(nm));
    for (std::size_t m = 0; m < nm; ++m)
        for (std::size_t n = 0; n < nm; ++n)
            g(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
                kPi / alpha * acc[m * nm + n].value();
    return g;
}

std::vector<std::pair<int, int>> mode_list(const PumpSpec& pump)
{
    std::vector<std::pair<int, int>> modes;
    for (const auto& m : pump.modes)
        modes.emplace_back(m.p, m.l);
    return modes;
}

// int_a^b |phi_eff(u)|^2 du. The integrand is entire of exponential type L
// in u, so fixed Gauss-Legendre on pieces two oscillations wide is exact to
// rounding.
double abs2_integral(const Chi2Profile& profile, double a, double b)
{
    if (a == b)
        return 0.0;
    const double piece = 4.0 * kPi / profile.length_um();
    const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(b - a) / piece)));
    CompensatedSum<double> acc;
    for (std::size_t k = 0; k < n; ++k) {
        const double x0 = a + (b - a) * static_cast<double>(k) / static_cast<double>(n);
        const double x1 = a + (b - a) * static_cast<double>(k + 1) / static_cast<double>(n);
        const GaussRule rule = gauss_legendre(32, x0, x1);
        for (std::size_t j = 0; j < rule.size(); ++j)
            acc.add(rule.weights[j] * std::norm(effective_phase_matching(profile, rule.nodes[j])));
    }
    return acc.value();
}

}  // namespace

cplx mode_function_value(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile,
                         const TransverseMomentum& q_s, const TransverseMomentum& q_i)
{
    return pump_amplitude(pump, q_s + q_i) * effective_phase_matching(profile, delta_kz(cfg, q_s, q_i));
}

void SubspaceBounds::validate() const
{
    if (H < 0 || U < 0)
        throw ConfigError("subspace bounds must be nonnegative");
    if (dim() * dim() > 4'000'000)
        throw ConfigError("subspace bounds too large");
}

PhaseMatchTail::PhaseMatchTail(const Chi2Profile& profile) : profile_(&profile)
{
    if (profile.is_domain_sequence()) {
        band_ = profile.qpm_detuning();
        total_ = abs2_integral(profile, 0.0, band_);
    } else {
        band_ = std::numeric_limits<double>::infinity();
        total_ = kPi * chi2_square_integral(profile);
    }
}

double PhaseMatchTail::operator()(double x) const
{
    if (x >= band_)
        return 0.0;
    return total_ - abs2_integral(*profile_, 0.0, x);
}

std::vector<double> PhaseMatchTail::evaluate(const std::vector<double>& x) const
{
    std::vector<std::size_t> order(x.size());
    for (std::size_t k = 0; k < x.size(); ++k)
        order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> out(x.size());
    double prev = 0.0, h = 0.0;
    // Walk outward from zero in both directions so pieces stay short.
    std::vector<std::size_t> neg, pos;
    for (auto k : order)
        (x[k] < 0.0 ? neg : pos).push_back(k);
    for (auto k : pos) {
        const double xk = std::min(x[k], band_);
        h += abs2_integral(*profile_, prev, xk);
        prev = xk;
        out[k] = x[k] >= band_ ? 0.0 : total_ - h;
    }
    prev = 0.0;
    h = 0.0;
    for (auto it = neg.rbegin(); it != neg.rend(); ++it) {
        h += abs2_integral(*profile_, prev, x[*it]);
        prev = x[*it];
        out[*it] = total_ - h;
    }
    return out;
}

double state_norm(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile,
                  std::size_t nodes)
{
    const auto modes = mode_list(pump);
    const Eigen::MatrixXcd g = pump_gram(cfg, pump.waist_um, modes, profile, nodes);
    Eigen::VectorXcd a(static_cast<Eigen::Index>(modes.size()));
    for (std::size_t m = 0; m < modes.size(); ++m)
        a(static_cast<Eigen::Index>(m)) = pump.modes[m].a;
    return (a.adjoint() * g * a)(0, 0).real();
}

Eigen::MatrixXcd ModeTensors::raw_matrix(const Eigen::VectorXcd& a) const
{
    if (static_cast<std::size_t>(a.size()) != blocks.size())
        throw ConfigError("coefficient count does not match the pump basis");
    const auto dim = static_cast<Eigen::Index>(bounds.dim());
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t m = 0; m < blocks.size(); ++m)
        if (a(static_cast<Eigen::Index>(m)) != cplx{})
            c += a(static_cast<Eigen::Index>(m)) * blocks[m];
    return c;
}

double ModeTensors::norm(const Eigen::VectorXcd& a) const
{
    return (a.adjoint() * gram * a)(0, 0).real();
}

double ModeTensors::singles_probability(const Eigen::VectorXcd& a) const
{
    return (a.adjoint() * singles * a)(0, 0).real() / norm(a);
}

Eigen::VectorXcd ModeTensors::coefficients(const PumpSpec& pump) const
{
    Eigen::VectorXcd a = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(pump_modes.size()));
    for (const auto& m : pump.modes) {
        const auto it = std::find(pump_modes.begin(), pump_modes.end(), std::make_pair(m.p, m.l));
        if (it == pump_modes.end()) {
            if (m.a == cplx{})
                continue;
            throw ConfigError(fmt::format("pump mode ({}, {}) is not in the precomputed basis", m.p, m.l));
        }
        a(it - pump_modes.begin()) = m.a;
    }
    return a;
}

ModeTensors build_mode_tensors(const OpticalConfig& cfg, double w_p,
                               const std::vector<std::pair<int, int>>& pump_modes,
                               const Chi2Profile& profile, const SubspaceBounds& bounds, double w_s,
                               double w_i, const DecomposeOptions& opts)
{
    bounds.validate();
    if (pump_modes.empty())
        throw ConfigError("empty pump basis");
    if (!(w_p > 0.0) || !(w_s > 0.0) || !(w_i > 0.0))
        throw ConfigError("waists must be positive");

    ModeTensors t;
    t.bounds = bounds;
    t.w_p = w_p;
    t.w_s = w_s;
    t.w_i = w_i;
    t.pump_modes = pump_modes;
    t.gram = pump_gram(cfg, w_p, pump_modes, profile, 160);

    std::size_t nr = opts.radial, nphi = opts.azimuthal;
    LevelResult prev = compute_level(cfg, w_p, pump_modes, profile, bounds, w_s, w_i, nr, nphi);
    double change = std::numeric_limits<double>::infinity();
    for (int level = 0; level < opts.max_refinements; ++level) {
        nr += nr / 2;
        nphi *= 2;
        LevelResult next = compute_level(cfg, w_p, pump_modes, profile, bounds, w_s, w_i, nr, nphi);
        double scale = 0.0, diff = 0.0;
        for (std::size_t m = 0; m < next.blocks.size(); ++m) {
            scale = std::max(scale, max_abs(next.blocks[m]));
            diff = std::max(diff, max_abs(next.blocks[m] - prev.blocks[m]));
        }
        const double sdiff = max_abs(next.singles - prev.singles) / std::max(max_abs(next.singles), 1e-300);
        change = std::max(diff / std::max(scale, 1e-300), sdiff);
        prev = std::move(next);
        if (change <= opts.rel_tol)
            break;
    }
    t.blocks = std::move(prev.blocks);
    t.singles = std::move(prev.singles);
    t.achieved_tol = change;
    t.radial = nr;
    t.azimuthal = nphi;
    if (!(change <= opts.rel_tol))
        throw NumericalError(fmt::format("mode decomposition reached relative change {:.3g} "
                                         "(target {:.3g}) at {} radial x {} azimuthal nodes",
                                         change, opts.rel_tol, nr, nphi));
    return t;
}

CoincidenceMatrix coincidence_matrix(const ModeTensors& tensors, const Eigen::VectorXcd& a)
{
    const Eigen::MatrixXcd raw = tensors.raw_matrix(a);
    const double n2 = tensors.norm(a);
    const double captured = raw.squaredNorm();
    if (!(captured > 0.0) || !(n2 > 0.0))
        throw NumericalError("biphoton state has no weight in the truncated basis");
    CoincidenceMatrix m;
    m.bounds = tensors.bounds;
    m.w_s = tensors.w_s;
    m.w_i = tensors.w_i;
    m.matrix = raw / std::sqrt(captured);
    m.captured_norm = captured / n2;
    m.achieved_tol = tensors.achieved_tol;
    return m;
}

CoincidenceMatrix decompose(const OpticalConfig& cfg, const PumpSpec& pump,
                            const Chi2Profile& profile, const SubspaceBounds& bounds, double w_s,
                            double w_i, const DecomposeOptions& opts)
{
    pump.validate();
    const ModeTensors t =
        build_mode_tensors(cfg, pump.waist_um, mode_list(pump), profile, bounds, w_s, w_i, opts);
    return coincidence_matrix(t, t.coefficients(pump));
}

Eigen::MatrixXcd reduced_density(const CoincidenceMatrix& m)
{
    return m.matrix.transpose() * m.matrix.conjugate();
}

}  // namespace spdc
