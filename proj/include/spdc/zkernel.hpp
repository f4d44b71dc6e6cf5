#ifndef SPDC_ZKERNEL_HPP
#define SPDC_ZKERNEL_HPP

#include <functional>
#include <span>
#include <vector>

#include "spdc/chi2.hpp"
#include "spdc/optics.hpp"

namespace spdc
{

// Gaussian-pump reductions: all transverse momentum integrals are done in
// closed form, leaving integrals over the longitudinal positions only.

struct ZKernelOptions
{
    // Outer rule orders are (outer, outer + 1, outer + 3) over (z1, z2, z3);
    // the z4 integral uses `inner` nodes after pole subtraction.
    std::size_t outer = 40;
    std::size_t inner = 48;
    // Nodes per axis for the norm, coupling and singles integrals.
    std::size_t line = 256;
};

// int |Phi|^2 d^2q_s d^2q_i for a Gaussian pump (pump amplitude as in
// gaussian_amplitude, unit overall constant).
double state_norm_gaussian(const OpticalConfig& cfg, double w_p, const Chi2Profile& profile,
                           std::size_t nodes = 256);

// int Phi U_s^* U_i^* for Gaussian collection modes of waists w_s, w_i.
cplx collection_amplitude_gaussian(const OpticalConfig& cfg, double w_p,
                                   const Chi2Profile& profile, double w_s, double w_i,
                                   std::size_t nodes = 256);

// int d^2q_i |int d^2q_s Phi U_s^*|^2, not normalized.
double signal_projection_gaussian(const OpticalConfig& cfg, double w_p,
                                  const Chi2Profile& profile, double w_s, std::size_t nodes = 128);

// Purity Tr(rho^2) of the reduced state for a Gaussian pump. Profiles must
// admit an analytic continuation (domain sequences are rejected).
double purity_z_kernel(const OpticalConfig& cfg, double w_p, const Chi2Profile& profile,
                       const ZKernelOptions& opts = {});

// Norm and fourth-order moment as multilinear forms in the coefficients of a
// fixed set of basis profiles chi(z) = sum_a c_a f_a(z). Built once per
// (config, waist); purity for any coefficient vector is then cheap.
class GaussianPumpKernel
{
public:
    // Fills out[a] = f_a(z) for complex z; out.size() is the basis size.
    using Basis = std::function<void(cplx z, std::span<cplx> out)>;

    GaussianPumpKernel(const OpticalConfig& cfg, double w_p, std::size_t basis_size, Basis basis,
                       const ZKernelOptions& opts = {});

    // Basis cos(n z / sigma), n = 0..terms-1, on the crystal of cfg.
    static GaussianPumpKernel cosine(const OpticalConfig& cfg, double w_p, std::size_t terms,
                                     double sigma_um, const ZKernelOptions& opts = {});

    std::size_t basis_size() const { return size_; }
    double norm(std::span<const double> c) const;
    double fourth_moment(std::span<const double> c) const;
    double purity(std::span<const double> c) const;

private:
    std::size_t size_;
    std::vector<double> norm_;    // size^2
    std::vector<cplx> fourth_;    // size^4
};

}  // namespace spdc

#endif  // SPDC_ZKERNEL_HPP
