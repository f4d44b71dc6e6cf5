#include "spdc/quadrature.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gsl/gsl_integration.h>

namespace spdc
{
namespace
{

// Nodes and weights on [-1, 1], computed once per order.
const GaussRule& reference_rule(std::size_t n)
{
    static std::mutex mutex;
    static std::map<std::size_t, GaussRule> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;

    gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(n);
    if (!table)
        throw std::bad_alloc();
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        gsl_integration_glfixed_point(-1.0, 1.0, i, &rule.nodes[i], &rule.weights[i], table);
    gsl_integration_glfixed_table_free(table);
    return cache.emplace(n, std::move(rule)).first->second;
}

}  // namespace

GaussRule gauss_legendre(std::size_t n, double a, double b)
{
    if (n == 0)
        throw std::invalid_argument("Gauss-Legendre order must be positive");
    const GaussRule& ref = reference_rule(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * ref.nodes[i];
        rule.weights[i] = half * ref.weights[i];
    }
    return rule;
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                     unsigned max_depth)
{
    QuadResult r;
    if (a == b)
        return r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth,
                                                                           rel_tol, &r.error);
    return r;
}

QuadResultC integrate_complex(const std::function<cplx(double)>& f, double a, double b, double rel_tol,
                      unsigned max_depth)
{
    QuadResultC r;
    if (a == b)
        return r;
    r.value = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, max_depth,
                                                                           rel_tol, &r.error);
    return r;
}

}  // namespace spdc
