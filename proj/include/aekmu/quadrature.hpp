#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace aekmu::quad {

// Gauss-Legendre rule on [-1, 1]. Nodes/weights are computed once per order
// by Newton iteration on the Legendre recurrence and cached.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

const GaussRule& gauss_legendre(int n);

// integral of f over [a, b] with a fixed n-point rule
template <typename F>
double gauss(F&& f, double a, double b, int n = 16) {
    const GaussRule& r = gauss_legendre(n);
    const double h = 0.5 * (b - a), m = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
        s += r.weights[i] * f(m + h * r.nodes[i]);
    return h * s;
}

// Adaptive bisection with a two-level Gauss error estimate. Integrand must be
// finite on the open interval; endpoint power singularities are the caller's
// job (substitute them away first).
double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double rel_tol, double abs_tol = 0.0, int max_depth = 48);

// \int_0^c v^{w} g(v) dv for w > -1 with g smooth: substitution v = z^{1/(1+w)}
// turns the weight into dz/(1+w).
double integrate_power_weighted(const std::function<double(double)>& g, double c, double w,
                                double rel_tol);

} // namespace aekmu::quad
