#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace dropshape {

/// Nodes and weights of a Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

/// n-point Gauss-Legendre rule, cached per n. Thread-safe.
const GaussRule& gauss_legendre(int n);

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

/// Fixed 15-point Kronrod estimate on [a, b] with the embedded 7-point Gauss error.
QuadResult gk15(const std::function<double(double)>& f, double a, double b);

/// Adaptive Gauss-Kronrod with global error control.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-12, double abs_tol = 1e-300, int max_intervals = 4000);

/// Integral over [a, inf). The range is split into doubling panels starting at width
/// `scale`; the tail is declared divergent if the panel sums fail to form a Cauchy sequence.
QuadResult integrate_to_infinity(const std::function<double(double)>& f, double a, double scale,
                                 double rel_tol = 1e-12);

/// Integral over (0, b] for integrands with an integrable power singularity at 0.
QuadResult integrate_from_zero(const std::function<double(double)>& f, double b,
                               double rel_tol = 1e-12);


}  // namespace dropshape
