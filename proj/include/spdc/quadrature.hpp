#ifndef SPDC_QUADRATURE_HPP
#define SPDC_QUADRATURE_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <type_traits>
#include <vector>

namespace spdc
{
using cplx = std::complex<double>;

struct GaussRule
{
    std::vector<double> nodes;
    std::vector<double> weights;

    std::size_t size() const { return nodes.size(); }
};

// n-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(std::size_t n, double a, double b);

struct QuadResult
{
    double value = 0.0;
    double error = 0.0;
};

struct QuadResultC
{
    cplx value{};
    double error = 0.0;
};

// Adaptive 21-point Gauss-Kronrod on [a, b].
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10, unsigned max_depth = 24);
QuadResultC integrate_complex(const std::function<cplx(double)>& f, double a, double b,
                      double rel_tol = 1e-10, unsigned max_depth = 24);

// Neumaier compensated accumulator. Order of add() calls fixes the result.
template <class T>
class CompensatedSum
{
public:
    void add(T x)
    {
        if constexpr (std::is_same_v<T, cplx>) {
            re_.add(x.real());
            im_.add(x.imag());
        } else {
            const T t = sum_ + x;
            if (std::abs(sum_) >= std::abs(x))
                comp_ += (sum_ - t) + x;
            else
                comp_ += (x - t) + sum_;
            sum_ = t;
        }
    }

    T value() const
    {
        if constexpr (std::is_same_v<T, cplx>)
            return {re_.value(), im_.value()};
        else
            return sum_ + comp_;
    }

private:
    struct Empty
    {
    };
    using Part = std::conditional_t<std::is_same_v<T, cplx>, CompensatedSum<double>, Empty>;
    T sum_{};
    T comp_{};
    [[no_unique_address]] Part re_{};
    [[no_unique_address]] Part im_{};
};

}  // namespace spdc

#endif  // SPDC_QUADRATURE_HPP
