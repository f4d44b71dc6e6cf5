#ifndef SPDC_BIPHOTON_HPP
#define SPDC_BIPHOTON_HPP

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "spdc/chi2.hpp"
#include "spdc/optics.hpp"
#include "spdc/pump.hpp"

namespace spdc
{

// Phi(q_s, q_i) = V(q_s + q_i) phi(dkz(q_s, q_i)) with unit overall constant.
cplx mode_function_value(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile,
                         const TransverseMomentum& q_s, const TransverseMomentum& q_i);

// Signal and idler LG modes with p <= H and |l| <= U. Flat index
// (l + U) (H + 1) + p.
struct SubspaceBounds
{
    int H = 8;
    int U = 6;

    std::size_t dim() const { return static_cast<std::size_t>((H + 1) * (2 * U + 1)); }
    std::size_t index(int p, int l) const { return static_cast<std::size_t>((l + U) * (H + 1) + p); }
    void validate() const;
};

// Biphoton amplitudes over LG(signal) x LG(idler). Rows index the signal
// mode, columns the idler mode. `matrix` is normalized to unit Frobenius
// norm; captured_norm is the retained fraction of the full state norm.
struct CoincidenceMatrix
{
    SubspaceBounds bounds;
    double w_s = 0.0;
    double w_i = 0.0;
    Eigen::MatrixXcd matrix;
    double captured_norm = 0.0;
    double achieved_tol = 0.0;

    cplx at(int p_s, int l_s, int p_i, int l_i) const
    {
        return matrix(static_cast<Eigen::Index>(bounds.index(p_s, l_s)),
                      static_cast<Eigen::Index>(bounds.index(p_i, l_i)));
    }
};

struct DecomposeOptions
{
    // Relative change of the largest entry between successive grid
    // refinements that counts as converged.
    double rel_tol = 1e-7;
    std::size_t radial = 48;
    std::size_t azimuthal = 64;
    int max_refinements = 5;
};

// |phi|^2 tail integral Psi(x) = int_x^{u_max} |phi(u)|^2 du of the effective
// phase matching. u_max is infinite except for domain sequences, whose
// first-order band ends at u_max = pi / l_c.
class PhaseMatchTail
{
public:
    explicit PhaseMatchTail(const Chi2Profile& profile);
    double operator()(double x) const;
    // Psi at every x; cheaper than repeated calls for sorted input.
    std::vector<double> evaluate(const std::vector<double>& x) const;

private:
    const Chi2Profile* profile_;
    double total_;    // Psi(0)
    double band_;     // u_max
};

// int |Phi|^2 over both transverse momenta.
double state_norm(const OpticalConfig& cfg, const PumpSpec& pump, const Chi2Profile& profile,
                  std::size_t nodes = 160);

// Everything needed to assemble coincidence matrices and their companion
// quantities for any coefficient vector over a fixed list of pump modes:
//   C(a) = sum_m a_m blocks[m],  N2(a) = a^H gram a,  S(a) N2(a) = a^H singles a,
// where S is the probability that the signal is found in the fundamental
// mode of waist w_s.
struct ModeTensors
{
    SubspaceBounds bounds;
    double w_p = 0.0;
    double w_s = 0.0;
    double w_i = 0.0;
    std::vector<std::pair<int, int>> pump_modes;
    std::vector<Eigen::MatrixXcd> blocks;
    Eigen::MatrixXcd gram;
    Eigen::MatrixXcd singles;
    double achieved_tol = 0.0;
    std::size_t radial = 0;
    std::size_t azimuthal = 0;

    Eigen::MatrixXcd raw_matrix(const Eigen::VectorXcd& a) const;
    double norm(const Eigen::VectorXcd& a) const;
    double singles_probability(const Eigen::VectorXcd& a) const;
    // Coefficients of `pump` on pump_modes; throws if a mode is missing.
    Eigen::VectorXcd coefficients(const PumpSpec& pump) const;
};

// Throws NumericalError if the grid refinement does not reach opts.rel_tol.
ModeTensors build_mode_tensors(const OpticalConfig& cfg, double w_p,
                               const std::vector<std::pair<int, int>>& pump_modes,
                               const Chi2Profile& profile, const SubspaceBounds& bounds, double w_s,
                               double w_i, const DecomposeOptions& opts = {});

CoincidenceMatrix coincidence_matrix(const ModeTensors& tensors, const Eigen::VectorXcd& a);

CoincidenceMatrix decompose(const OpticalConfig& cfg, const PumpSpec& pump,
                            const Chi2Profile& profile, const SubspaceBounds& bounds, double w_s,
                            double w_i, const DecomposeOptions& opts = {});

// rho_idler[b, b'] = sum_a C[a, b] conj(C[a, b']).
Eigen::MatrixXcd reduced_density(const CoincidenceMatrix& m);

}  // namespace spdc

#endif  // SPDC_BIPHOTON_HPP
