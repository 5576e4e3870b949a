#pragma once
// Adaptive quadrature over finite intervals and the whole real line.
// Tails are integrated after the substitution x = exp(s), which turns the
// power-times-stretched-exponential decay of every integrand we care about
// into at least geometric decay in s.

#include <functional>
#include <vector>

namespace mtb {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    // stop refining once the local error estimate is this small relative to the
    // local piece; without a relative floor, a large integrand makes abs_tol
    // demand sub-epsilon accuracy and refinement chases roundoff to max depth
    double rel_floor = 1e-14;
    int max_depth = 48;
    // hard cap on integrand evaluations per top-level call; a non-finite or
    // wildly oscillatory integrand otherwise turns depth-limited refinement
    // into an effectively unbounded recursion
    long max_evals = 2000000;
};

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        QuadratureOptions opt = {});

// integral of f over [a, +inf); throws std::runtime_error if the tail sum
// fails to settle (divergent or near-divergent integrand)
double integrate_upper_tail(const std::function<double(double)>& f, double a,
                            QuadratureOptions opt = {});

// integral of f over (-inf, +inf), split at the given interior breakpoints
double integrate_line(const std::function<double(double)>& f,
                      std::vector<double> breakpoints, QuadratureOptions opt = {});

} // namespace mtb
