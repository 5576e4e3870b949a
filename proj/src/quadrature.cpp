#include "mtb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mtb {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb, double whole, double tol, double rel_floor,
                   int depth, long& evals) {
    if ((evals -= 2) < 0)
        throw std::runtime_error("adaptive_simpson: evaluation budget exhausted");
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    double bar = std::max(tol, rel_floor * (std::abs(left) + std::abs(right)));
    if (depth <= 0 || std::abs(delta) <= 15.0 * bar)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, rel_floor, depth - 1, evals) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, rel_floor, depth - 1, evals);
}

} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        QuadratureOptions opt) {
    if (!(a < b)) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    long evals = opt.max_evals;
    return simpson_rec(f, a, b, fa, fm, fb, whole, opt.abs_tol, opt.rel_floor, opt.max_depth,
                       evals);
}

double integrate_upper_tail(const std::function<double(double)>& f, double a,
                            QuadratureOptions opt) {
    double total = 0.0;
    double b0 = std::max(a, 1.0);
    if (a < b0) {
        total += adaptive_simpson(f, a, b0, opt);
    }
    // x = exp(s) for s >= ln(b0), unit-width segments in s
    auto g = [&f](double s) {
        double x = std::exp(s);
        return f(x) * x;
    };
    QuadratureOptions seg = opt;
    seg.abs_tol = opt.abs_tol / 64.0;
    double s = std::log(b0);
    int quiet = 0;
    for (int k = 0; k < 220; ++k) {
        double piece = adaptive_simpson(g, s, s + 1.0, seg);
        total += piece;
        s += 1.0;
        quiet = (std::abs(piece) < seg.abs_tol) ? quiet + 1 : 0;
        if (quiet >= 3) return total;
    }
    throw std::runtime_error("integrate_upper_tail: tail did not converge");
}

double integrate_line(const std::function<double(double)>& f,
                      std::vector<double> breakpoints, QuadratureOptions opt) {
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());
    if (breakpoints.empty()) breakpoints.push_back(0.0);

    double total = 0.0;
    double lo = breakpoints.front(), hi = breakpoints.back();
    total += integrate_upper_tail([&f](double x) { return f(-x); }, -lo, opt);
    for (size_t i = 0; i + 1 < breakpoints.size(); ++i)
        total += adaptive_simpson(f, breakpoints[i], breakpoints[i + 1], opt);
    total += integrate_upper_tail(f, hi, opt);
    return total;
}

} // namespace mtb
