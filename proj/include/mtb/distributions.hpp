#pragma once
// Base increment/noise laws. Symmetric laws are sampled as a magnitude draw
// plus an independent sign bit so that conditionally-on-magnitudes martingale
// constructions stay exact. Moments are served analytically where a closed
// form exists and by adaptive quadrature otherwise.

#include <string>
#include <variant>

#include "mtb/rng.hpp"

namespace mtb {

struct Normal {
    double sd = 1.0;
};

struct Laplace {
    double scale = 1.0;
};

// P(|X| > t) = (t/scale)^-index for t >= scale, point mass nowhere
struct SymmetricPareto {
    double index = 3.0;
    double scale = 1.0;
};

struct Rademacher {};

struct Exponential {
    double rate = 1.0;
};

// mean-zero law on three atoms
struct ThreePoint {
    double value[3];
    double prob[3];
};

// Heavy-ish subexponential law prescribed through its two-sided tail:
//   P(|X| >= t) = min(1, c * t^-q * exp(-t^alpha))   for t >= x0,
// uniform on (-x0, x0) with the leftover mass, symmetric about zero.
struct TailSpecLaw {
    double alpha;
    double q;
    double x0;
    double c;
};

using Distribution = std::variant<Normal, Laplace, SymmetricPareto, Rademacher,
                                  Exponential, ThreePoint, TailSpecLaw>;

// convenience constructors with validation
ThreePoint make_three_point(double v0, double v1, double v2, double p0, double p1, double p2);
// tail_at_cutoff is P(|X| >= x0); fixes c = tail_at_cutoff * x0^q * e^{x0^alpha}
TailSpecLaw make_tail_spec(double alpha, double q, double x0, double tail_at_cutoff);

void validate(const Distribution& d);
std::string name_of(const Distribution& d);
bool is_symmetric(const Distribution& d);

// one draw from one RNG block
double sample(const Distribution& d, const RngBlock& blk);

// P(|X| >= t), t >= 0 (defined for the symmetric laws; throws otherwise)
double two_sided_tail(const Distribution& d, double t);
// P(X > t) for any law
double upper_tail(const Distribution& d, double t);

// quantile via closed form, or bracketed bisection on the analytic tail for
// TailSpecLaw (<= 200 iterations, 1e-12 tolerance on the bracket)
double quantile(const Distribution& d, double u);

// ---------- moment functionals ----------

struct Quad {};                                      // E[X^2]
struct SubexpWeighted { double alpha; bool two_sided = false; }; // E[X^2 e^{(X+)^a}], or |X| in the exponent
struct ExpMoment { double alpha; bool two_sided = false; };      // E[e^{(X+)^a}], or |X|
struct AbsPow { double p; };                         // E[|X|^p]
struct TruncPow { double p; double delta; double threshold; };   // E[|X|^{p+delta} 1{X > threshold}]

using MomentFunctional = std::variant<Quad, SubexpWeighted, ExpMoment, AbsPow, TruncPow>;

// throws std::domain_error when the requested moment diverges for the law
double moment_oracle(const Distribution& d, const MomentFunctional& fn);

// standard normal CDF
double normal_cdf(double x);

} // namespace mtb
