#pragma once
// Scalar stochastic linear regression X_k = theta * phi_k + eps_k, the
// least-squares estimator, and the deviation bounds for its normalized error
// (theta_hat - theta) * sqrt(sum phi^2).  The bounds take the conditional
// moment constants of the noise as plain numbers; none of them depends on the
// law of the regressors.

#include <cstdint>
#include <vector>

#include "mtb/bounds.hpp"
#include "mtb/distributions.hpp"

namespace mtb {

struct RegressionConfig {
    double theta = 0.0;
    int n = 0;
    Distribution phi_law = Normal{};  // regressors, independent draws
    Distribution noise_law = Normal{}; // martingale-difference noise
};

void validate(const RegressionConfig& config);

struct RegressionSample {
    std::vector<double> phi;
    std::vector<double> eps;
    std::vector<double> X; // X_k = theta * phi_k + eps_k
    double theta = 0.0;
    double theta_hat = 0.0;
    double design_energy = 0.0; // sum phi^2
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

// sum(phi_k X_k) / sum(phi_k^2); throws on zero design energy
double least_squares(const std::vector<double>& phi, const std::vector<double>& X);

RegressionSample draw_regression(const RegressionConfig& config, std::uint64_t seed,
                                 std::uint64_t stream);

// (theta_hat - theta) * sqrt(design energy); cross-checked against the
// martingale form sum(phi_i eps_i) / sqrt(design energy) to 1e-10
double normalized_error(const RegressionSample& sample);

// conditional subexp noise, E[eps^2 exp{|eps|^alpha} | past] <= d_const:
// the two-regime envelope and its closed unified relaxation, for any
// u >= max(d_const, 1)
RoughBounds reg_bound_subexp(double x, double d_const, double u, double alpha);

// Weibull-type noise, E[eps^2|past] <= e_const and
// E[exp{|eps|^{alpha/(1-alpha)}}] <= f_const
BoundResult reg_bound_weibull(double x, long n, double e_const, double f_const, double alpha);

// conditional p-th moments, E[|eps|^p|past] <= a_const
BoundResult reg_bound_condmoment(double x, double p, double a_const);
// the companion bound obtained from the per-step form; n times weaker constants
BoundResult reg_bound_condmoment_per_step(double x, double p, double a_const, long n);

// bounded conditional variance a_const plus an unconditional p+delta moment b_const
BoundResult reg_bound_moment(double x, double p, double delta, double a_const, double b_const);

// p in [1,2], only E|eps|^p <= a_const: 2 a_const / x^p
BoundResult reg_bound_vonbahr(double x, double p, double a_const);

// nonuniform normal-approximation envelope
// c_const * weight_moment^{1/(1+p)} / (1 + |x|^p), weight_moment in (0,1]
double berry_esseen_envelope(double x, double p, double weight_moment, double c_const);

} // namespace mtb
