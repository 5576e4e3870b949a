#include "mtb/regression.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mtb/rng.hpp"

namespace mtb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

BoundTerm make_term(const char* name, double log_value) {
    return BoundTerm{name, log_value, std::exp(log_value)};
}

BoundResult assemble(Branch branch, std::vector<BoundTerm> terms) {
    double v = 0.0;
    for (const auto& t : terms) v += t.value;
    return BoundResult{v, std::min(v, 1.0), branch, std::move(terms)};
}

} // namespace

void validate(const RegressionConfig& config) {
    if (config.n < 1) throw std::invalid_argument("regression config: n must be at least 1");
    validate(config.phi_law);
    validate(config.noise_law);
    if (!is_symmetric(config.noise_law))
        throw std::invalid_argument("regression config: noise must be symmetric around 0");
}

double least_squares(const std::vector<double>& phi, const std::vector<double>& X) {
    if (phi.size() != X.size() || phi.empty())
        throw std::invalid_argument("least_squares: mismatched or empty inputs");
    double num = 0.0, den = 0.0;
    for (size_t i = 0; i < phi.size(); ++i) {
        num += phi[i] * X[i];
        den += phi[i] * phi[i];
    }
    if (!(den > 0.0))
        throw std::domain_error("least_squares: degenerate design, zero energy");
    return num / den;
}

RegressionSample draw_regression(const RegressionConfig& config, std::uint64_t seed,
                                 std::uint64_t stream) {
    validate(config);
    StepRng rng(seed, stream);
    RegressionSample s;
    s.theta = config.theta;
    s.seed = seed;
    s.stream = stream;
    s.phi.resize(config.n);
    s.eps.resize(config.n);
    s.X.resize(config.n);
    s.design_energy = 0.0;
    for (int i = 0; i < config.n; ++i) {
        s.phi[i] = sample(config.phi_law, rng.block(i, 0));
        s.eps[i] = sample(config.noise_law, rng.block(i, 1));
        s.X[i] = config.theta * s.phi[i] + s.eps[i];
        s.design_energy += s.phi[i] * s.phi[i];
    }
    s.theta_hat = least_squares(s.phi, s.X);
    return s;
}

double normalized_error(const RegressionSample& sample) {
    if (!(sample.design_energy > 0.0))
        throw std::domain_error("normalized_error: degenerate design");
    double root = std::sqrt(sample.design_energy);
    double direct = (sample.theta_hat - sample.theta) * root;
    double martingale = 0.0;
    for (size_t i = 0; i < sample.phi.size(); ++i) martingale += sample.phi[i] * sample.eps[i];
    martingale /= root;
    if (std::abs(direct - martingale) > 1e-10 * std::max(1.0, std::abs(direct)))
        throw std::runtime_error("normalized_error: estimator identity violated");
    return direct;
}

RoughBounds reg_bound_subexp(double x, double d_const, double u, double alpha) {
    require(d_const >= 0.0, "reg_bound_subexp: d_const must be >= 0");
    require(u >= std::max(d_const, 1.0),
            "reg_bound_subexp: u must dominate max(d_const, 1)");
    return subexp_rough_bound(x, SubexpParams{alpha, 0.0, u});
}

BoundResult reg_bound_weibull(double x, long n, double e_const, double f_const,
                              double alpha) {
    require(x > 0.0, "reg_bound_weibull: x must be > 0");
    require(n >= 1, "reg_bound_weibull: n must be >= 1");
    require(e_const >= 0.0, "reg_bound_weibull: e_const must be >= 0");
    require(f_const >= 0.0, "reg_bound_weibull: f_const must be >= 0");
    require(alpha > 0.0 && alpha < 1.0, "reg_bound_weibull: alpha must lie in (0,1)");

    double log_g = -x * x / (2.0 * (e_const + std::pow(x, 2.0 - alpha) / 3.0));
    double log_w = f_const > 0.0
                       ? std::log(double(n)) + std::log(f_const) - std::pow(x, alpha)
                       : kNegInf;
    return assemble(Branch::single,
                    {make_term("exponential", log_g), make_term("weibull_tail", log_w)});
}

BoundResult reg_bound_condmoment(double x, double p, double a_const) {
    require(a_const > 0.0, "reg_bound_condmoment: a_const must be > 0");
    return fuk_nagaev_bound(x, MomentParams{p, std::pow(a_const, 2.0 / p), a_const});
}

BoundResult reg_bound_condmoment_per_step(double x, double p, double a_const, long n) {
    require(a_const > 0.0, "reg_bound_condmoment_per_step: a_const must be > 0");
    require(n >= 1, "reg_bound_condmoment_per_step: n must be >= 1");
    double nr = double(n);
    return fuk_nagaev_bound(x, MomentParams{p, nr * std::pow(a_const, 2.0 / p), nr * a_const});
}

BoundResult reg_bound_moment(double x, double p, double delta, double a_const,
                             double b_const) {
    require(a_const > 0.0, "reg_bound_moment: a_const must be > 0");
    return bernstein_trunc_bound(x, std::sqrt(a_const), p, delta, b_const);
}

BoundResult reg_bound_vonbahr(double x, double p, double a_const) {
    require(x > 0.0, "reg_bound_vonbahr: x must be > 0");
    require(p >= 1.0 && p <= 2.0, "reg_bound_vonbahr: p must lie in [1,2]");
    require(a_const >= 0.0, "reg_bound_vonbahr: a_const must be >= 0");
    double log_v = a_const > 0.0 ? std::log(2.0 * a_const) - p * std::log(x) : kNegInf;
    return assemble(Branch::single, {make_term("polynomial", log_v)});
}

double berry_esseen_envelope(double x, double p, double weight_moment, double c_const) {
    require(p > 2.0, "berry_esseen_envelope: p must be > 2");
    require(weight_moment > 0.0 && weight_moment <= 1.0,
            "berry_esseen_envelope: weight_moment must lie in (0,1]");
    require(c_const > 0.0, "berry_esseen_envelope: c_const must be > 0");
    return c_const * std::pow(weight_moment, 1.0 / (1.0 + p)) /
           (1.0 + std::pow(std::abs(x), p));
}

} // namespace mtb
