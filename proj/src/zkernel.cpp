#include "spdc/zkernel.hpp"

#include <cmath>

#include "spdc/parallel.hpp"
#include "spdc/quadrature.hpp"

namespace spdc
{
namespace
{

constexpr cplx kI{0.0, 1.0};

void reject_domains(const Chi2Profile& profile)
{
    if (profile.is_domain_sequence())
        throw ConfigError("Gaussian-pump reductions do not support domain sequences; "
                          "use the mode decomposition");
}

struct Lin
{
    cplx c0, c1;
};

struct Poly2
{
    cplx c0{}, c1{}, c2{};

    Poly2& operator+=(const Poly2& o)
    {
        c0 += o.c0;
        c1 += o.c1;
        c2 += o.c2;
        return *this;
    }
};

Poly2 operator*(const Lin& a, const Lin& b)
{
    return {a.c0 * b.c0, a.c0 * b.c1 + a.c1 * b.c0, a.c1 * b.c1};
}

Poly2 operator*(const Poly2& p, cplx s) { return {p.c0 * s, p.c1 * s, p.c2 * s}; }
Poly2 operator*(const Lin& a, cplx s) { return {a.c0 * s, a.c1 * s, 0.0}; }

// Coefficients of det M(z4) for the fourth-moment kernel. Variable order
// (s, s', i, i'); M is complex symmetric with the four off-diagonal
// couplings (s,i), (s',i), (s',i'), (s,i').
Poly2 fourth_det(double h, double qd, const MismatchCoefficients& m, double z1, double z2,
                 double z3)
{
    const Lin d0{h - kI * m.signal * z1, kI * m.signal};
    const cplx d1 = h - kI * m.signal * (z3 - z2);
    const cplx d2 = h - kI * m.idler * (z1 - z2);
    const Lin d3{h - kI * m.idler * z3, kI * m.idler};
    const cplx e02 = qd + 0.5 * kI * m.cross * z1;
    const cplx e12 = qd - 0.5 * kI * m.cross * z2;
    const cplx e13 = qd + 0.5 * kI * m.cross * z3;
    const Lin e03{qd, -0.5 * kI * m.cross};
    const Lin x{e02 * e13 - e03.c0 * e12, -e03.c1 * e12};

    Poly2 det = (d0 * d3) * (d1 * d2 - e12 * e12);
    det += (e03 * e03) * (-d1 * d2);
    det += d0 * (-d2 * e13 * e13);
    det += d3 * (-d1 * e02 * e02);
    det += x * x;
    return det;
}

// Per-axis data: nodes, weights and basis values.
struct Axis
{
    GaussRule rule;
    std::vector<cplx> f;  // node-major, size nodes * basis
};

Axis make_axis(std::size_t n, double half, std::size_t size, const GaussianPumpKernel::Basis& basis)
{
    Axis a{gauss_legendre(n, -half, half), std::vector<cplx>(n * size)};
    for (std::size_t j = 0; j < n; ++j)
        basis(a.rule.nodes[j], std::span<cplx>(a.f.data() + j * size, size));
    return a;
}

}  // namespace

GaussianPumpKernel::GaussianPumpKernel(const OpticalConfig& cfg, double w_p, std::size_t basis_size,
                                       Basis basis, const ZKernelOptions& opts)
    : size_(basis_size)
{
    if (basis_size == 0)
        throw ConfigError("kernel basis is empty");
    if (!(w_p > 0.0))
        throw ConfigError("pump waist must be positive");
    const auto m = mismatch_coefficients(cfg);
    const double length = cfg.length_um;
    const double half = 0.5 * length;
    const std::size_t s = size_;

    // Norm: delta part plus a smooth kernel in z1 - z2,
    //   N2 = (pi / alpha) [pi int chi^2 - int int chi chi gamma / (w^2/2 - i gamma (z1 - z2))].
    {
        const Axis ax = make_axis(opts.line, half, s, basis);
        const double alpha = m.signal + m.idler + m.cross;
        const double gamma = (m.signal * m.idler - 0.25 * m.cross * m.cross) / alpha;
        const double h2 = 0.5 * w_p * w_p;
        const std::size_t n = ax.rule.size();
        norm_.assign(s * s, 0.0);
        for (std::size_t a = 0; a < s; ++a) {
            for (std::size_t b = a; b < s; ++b) {
                CompensatedSum<cplx> diag, smooth;
                for (std::size_t j = 0; j < n; ++j) {
                    const cplx fa = ax.f[j * s + a];
                    diag.add(ax.rule.weights[j] * fa * ax.f[j * s + b]);
                    for (std::size_t k = 0; k < n; ++k) {
                        const double dz = ax.rule.nodes[j] - ax.rule.nodes[k];
                        smooth.add(ax.rule.weights[j] * ax.rule.weights[k] * fa * ax.f[k * s + b] *
                                   gamma / (h2 - kI * gamma * dz));
                    }
                }
                const double v = (kPi / alpha * (kPi * diag.value() - smooth.value())).real();
                norm_[a * s + b] = v;
                norm_[b * s + a] = v;
            }
        }
    }

    // Fourth moment: outer tensor rule over (z1, z2, z3), z4 analytically
    // reduced to pole terms plus a regular remainder.
    const std::size_t n1 = opts.outer, n2 = opts.outer + 1, n3 = opts.outer + 3;
    const Axis ax1 = make_axis(n1, half, s, basis);
    const Axis ax2 = make_axis(n2, half, s, basis);
    const Axis ax3 = make_axis(n3, half, s, basis);
    const Axis ax4 = make_axis(opts.inner, half, s, basis);
    const double h = 0.5 * w_p * w_p;
    const double qd = 0.25 * w_p * w_p;

    // y[p1][p2][c][d] = sum_p3 w3 f_c(z3) I_d(z1, z2, z3)
    std::vector<cplx> y(n1 * n2 * s * s);
    parallel_for(n1, [&](std::size_t p1) {
        std::vector<cplx> inner(s), fr(s), acc(s);
        auto pole_term = [&](cplx r, std::span<cplx> out) {
            const bool near = std::abs(r.imag()) < 0.25 * length && r.real() > -half - 0.25 * length &&
                              r.real() < half + 0.25 * length;
            std::fill(out.begin(), out.end(), cplx{});
            if (near) {
                basis(r, fr);
                for (std::size_t j = 0; j < ax4.rule.size(); ++j) {
                    const cplx inv = ax4.rule.weights[j] / (ax4.rule.nodes[j] - r);
                    for (std::size_t d = 0; d < s; ++d)
                        out[d] += (ax4.f[j * s + d] - fr[d]) * inv;
                }
                const cplx lg = std::log(cplx(half) - r) - std::log(cplx(-half) - r);
                for (std::size_t d = 0; d < s; ++d)
                    out[d] += fr[d] * lg;
            } else {
                for (std::size_t j = 0; j < ax4.rule.size(); ++j) {
                    const cplx inv = ax4.rule.weights[j] / (ax4.rule.nodes[j] - r);
                    for (std::size_t d = 0; d < s; ++d)
                        out[d] += ax4.f[j * s + d] * inv;
                }
            }
        };
        std::vector<cplx> near_terms(s), far_terms(s);
        for (std::size_t p2 = 0; p2 < n2; ++p2) {
            cplx* yblock = y.data() + (p1 * n2 + p2) * s * s;
            std::fill(yblock, yblock + s * s, cplx{});
            for (std::size_t p3 = 0; p3 < n3; ++p3) {
                const Poly2 det = fourth_det(h, qd, m, ax1.rule.nodes[p1], ax2.rule.nodes[p2],
                                             ax3.rule.nodes[p3]);
                const cplx a = det.c2, b = det.c1, c = det.c0;
                const cplx sq = std::sqrt(b * b - 4.0 * a * c);
                const double sg = (std::conj(b) * sq).real() >= 0.0 ? 1.0 : -1.0;
                const cplx q = -0.5 * (b + sg * sq);
                const cplx rn = c / q;
                const cplx scale = 1.0 / (a * rn - q);
                pole_term(rn, near_terms);
                const bool has_far = std::abs(a) * length > 1e-14 * std::abs(b);
                if (has_far)
                    pole_term(q / a, far_terms);
                for (std::size_t d = 0; d < s; ++d)
                    inner[d] = scale * (near_terms[d] - (has_far ? far_terms[d] : cplx{}));
                const double w3 = ax3.rule.weights[p3];
                for (std::size_t cc = 0; cc < s; ++cc) {
                    const cplx f3 = w3 * ax3.f[p3 * s + cc];
                    for (std::size_t d = 0; d < s; ++d)
                        yblock[cc * s + d] += f3 * inner[d];
                }
            }
        }
    });

    // Contract the remaining two axes.
    std::vector<cplx> zt(n1 * s * s * s, cplx{});
    for (std::size_t p1 = 0; p1 < n1; ++p1)
        for (std::size_t p2 = 0; p2 < n2; ++p2) {
            const cplx* yblock = y.data() + (p1 * n2 + p2) * s * s;
            for (std::size_t b = 0; b < s; ++b) {
                const cplx f2 = ax2.rule.weights[p2] * ax2.f[p2 * s + b];
                cplx* zb = zt.data() + (p1 * s + b) * s * s;
                for (std::size_t k = 0; k < s * s; ++k)
                    zb[k] += f2 * yblock[k];
            }
        }
    const double pref = std::pow(w_p * w_p / kTwoPi, 2) * std::pow(kPi, 4);
    fourth_.assign(s * s * s * s, cplx{});
    for (std::size_t p1 = 0; p1 < n1; ++p1)
        for (std::size_t a = 0; a < s; ++a) {
            const cplx f1 = pref * ax1.rule.weights[p1] * ax1.f[p1 * s + a];
            const cplx* zb = zt.data() + p1 * s * s * s;
            cplx* tb = fourth_.data() + a * s * s * s;
            for (std::size_t k = 0; k < s * s * s; ++k)
                tb[k] += f1 * zb[k];
        }
}

GaussianPumpKernel GaussianPumpKernel::cosine(const OpticalConfig& cfg, double w_p,
                                              std::size_t terms, double sigma_um,
                                              const ZKernelOptions& opts)
{
    if (terms == 0 || !(sigma_um > 0.0))
        throw ConfigError("cosine kernel needs at least one term and a positive sigma");
    auto basis = [sigma_um](cplx z, std::span<cplx> out) {
        const cplx c1 = std::cos(z / sigma_um);
        out[0] = 1.0;
        if (out.size() > 1)
            out[1] = c1;
        for (std::size_t n = 2; n < out.size(); ++n)
            out[n] = 2.0 * c1 * out[n - 1] - out[n - 2];
    };
    return {cfg, w_p, terms, basis, opts};
}

double GaussianPumpKernel::norm(std::span<const double> c) const
{
    if (c.size() != size_)
        throw ConfigError("coefficient count does not match the kernel basis");
    double s = 0.0;
    for (std::size_t a = 0; a < size_; ++a)
        for (std::size_t b = 0; b < size_; ++b)
            s += c[a] * c[b] * norm_[a * size_ + b];
    return s;
}

double GaussianPumpKernel::fourth_moment(std::span<const double> c) const
{
    if (c.size() != size_)
        throw ConfigError("coefficient count does not match the kernel basis");
    const std::size_t s = size_;
    cplx total{};
    for (std::size_t a = 0; a < s; ++a) {
        cplx ta{};
        for (std::size_t b = 0; b < s; ++b) {
            cplx tb{};
            for (std::size_t cc = 0; cc < s; ++cc) {
                const cplx* row = fourth_.data() + ((a * s + b) * s + cc) * s;
                cplx tc{};
                for (std::size_t d = 0; d < s; ++d)
                    tc += c[d] * row[d];
                tb += c[cc] * tc;
            }
            ta += c[b] * tb;
        }
        total += c[a] * ta;
    }
    return total.real();
}

double GaussianPumpKernel::purity(std::span<const double> c) const
{
    const double n2 = norm(c);
    if (!(n2 > 0.0))
        throw NumericalError("state norm vanished");
    return fourth_moment(c) / (n2 * n2);
}

double state_norm_gaussian(const OpticalConfig& cfg, double w_p, const Chi2Profile& profile,
                           std::size_t nodes)
{
    reject_domains(profile);
    const auto m = mismatch_coefficients(cfg);
    const double half = 0.5 * profile.length_um();
    const GaussRule rule = gauss_legendre(nodes, -half, half);
    std::vector<double> chi(nodes);
    for (std::size_t j = 0; j < nodes; ++j)
        chi[j] = evaluate_chi2(profile, rule.nodes[j]);
    const double alpha = m.signal + m.idler + m.cross;
    const double gamma = (m.signal * m.idler - 0.25 * m.cross * m.cross) / alpha;
    const double h2 = 0.5 * w_p * w_p;
    CompensatedSum<double> diag;
    CompensatedSum<cplx> smooth;
    for (std::size_t j = 0; j < nodes; ++j) {
        diag.add(rule.weights[j] * chi[j] * chi[j]);
        for (std::size_t k = 0; k < nodes; ++k) {
            const double dz = rule.nodes[j] - rule.nodes[k];
            smooth.add(rule.weights[j] * rule.weights[k] * chi[j] * chi[k] * gamma /
                       (h2 - kI * gamma * dz));
        }
    }
    return kPi / alpha * (kPi * diag.value() - smooth.value().real());
}

cplx collection_amplitude_gaussian(const OpticalConfig& cfg, double w_p,
                                   const Chi2Profile& profile, double w_s, double w_i,
                                   std::size_t nodes)
{
    reject_domains(profile);
    const auto m = mismatch_coefficients(cfg);
    const double half = 0.5 * profile.length_um();
    const GaussRule rule = gauss_legendre(nodes, -half, half);
    const double qp = 0.25 * w_p * w_p;
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double z = rule.nodes[j];
        const cplx m11 = qp + 0.25 * w_s * w_s - kI * m.signal * z;
        const cplx m22 = qp + 0.25 * w_i * w_i - kI * m.idler * z;
        const cplx m12 = qp + 0.5 * kI * m.cross * z;
        acc.add(rule.weights[j] * evaluate_chi2(profile, z) / (m11 * m22 - m12 * m12));
    }
    return w_p * w_s * w_i / std::pow(kTwoPi, 1.5) * kPi * kPi * acc.value();
}

double signal_projection_gaussian(const OpticalConfig& cfg, double w_p,
                                  const Chi2Profile& profile, double w_s, std::size_t nodes)
{
    reject_domains(profile);
    const auto m = mismatch_coefficients(cfg);
    const double half = 0.5 * profile.length_um();
    const GaussRule rule = gauss_legendre(nodes, -half, half);
    std::vector<double> chi(nodes);
    for (std::size_t j = 0; j < nodes; ++j)
        chi[j] = rule.weights[j] * evaluate_chi2(profile, rule.nodes[j]);
    const double qp = 0.25 * w_p * w_p;
    const double hs = qp + 0.25 * w_s * w_s;
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < nodes; ++j) {
        const double z1 = rule.nodes[j];
        const cplx m00 = hs - kI * m.signal * z1;
        const cplx m02 = qp + 0.5 * kI * m.cross * z1;
        for (std::size_t k = 0; k < nodes; ++k) {
            const double z2 = rule.nodes[k];
            const cplx m11 = hs + kI * m.signal * z2;
            const cplx m22 = 2.0 * qp - kI * m.idler * (z1 - z2);
            const cplx m12 = qp - 0.5 * kI * m.cross * z2;
            const cplx det = m00 * m11 * m22 - m00 * m12 * m12 - m11 * m02 * m02;
            acc.add(chi[j] * chi[k] / det);
        }
    }
    return (w_p * w_p * w_s * w_s / (4.0 * kPi * kPi) * std::pow(kPi, 3) * acc.value()).real();
}

double purity_z_kernel(const OpticalConfig& cfg, double w_p, const Chi2Profile& profile,
                       const ZKernelOptions& opts)
{
    reject_domains(profile);
    auto basis = [&profile](cplx z, std::span<cplx> out) { out[0] = evaluate_chi2(profile, z); };
    const GaussianPumpKernel kernel(with_length(cfg, profile.length_um()), w_p, 1, basis, opts);
    const double one = 1.0;
    return kernel.purity(std::span<const double>(&one, 1));
}

}  // namespace spdc
