#pragma once
// Closed-form tail bounds for martingales with subexponential or
// polynomial-moment increments, plus the classical Fuk / Fuk-Nagaev family.
//
// Every bound is a pure function returning a BoundResult that keeps the
// additive terms separately, each with its log value. Probabilities far below
// double underflow (needed by the large-deviation rate checks) stay usable
// through the log path.

#include <stdexcept>
#include <vector>

namespace mtb {

enum class Branch { sub_gaussian, subexponential, single };

const char* branch_name(Branch b);

struct BoundTerm {
    const char* name;
    double log_value; // may be -inf
    double value;     // exp(log_value), 0 on underflow
};

struct BoundResult {
    double value;   // sum of term values, not clamped
    double clamped; // min(value, 1)
    Branch branch;
    std::vector<BoundTerm> terms;

    // log of the term sum via log-sum-exp; finite even when value underflows
    double log_value() const;
};

// --- parameter packs -------------------------------------------------------

// two-regime subexponential bound parameters: exponent alpha, aggregated
// weighted-quadratic constant c_n, and sup bound u on the weighted quadratic
// characteristic (pre-maxed with 1)
struct SubexpParams {
    double alpha;
    double c_n;
    double u;
};
void validate(const SubexpParams& p);

// Fuk-Nagaev constants; quad_sup and pmom_sup are either the aggregate sup
// constants (fuk_nagaev_bound) or the per-step sup sums (..._per_step_bound)
struct MomentParams {
    double p;
    double quad_sup;
    double pmom_sup;
};
void validate(const MomentParams& p);

// the (2/(p+2), p/(p+2)) split of x used by the Fuk family; "alpha" here is
// unrelated to the subexponential exponent above
struct FukSplit {
    double alpha;
    double beta;
};
FukSplit fuk_split(double p);

// --- bounds ----------------------------------------------------------------

// i.i.d. subexponential sum bound with free truncation level y:
//   exp{-(x/y^{1-a})(1 - n K / (2 x y^{1-a}))} + n e^{-y^a} E[e^{(X+)^a}]
BoundResult iid_subexp_bound(double x, double y, double n, double subexp_moment,
                             double alpha, double exp_moment);

// two-regime martingale bound; regimes switch at x = u^{1/(2-alpha)}
BoundResult subexp_tail_bound(double x, const SubexpParams& p);
// same formulas with the regime forced, used to check junction continuity
BoundResult subexp_tail_bound_in(Branch forced, double x, const SubexpParams& p);

struct RoughBounds {
    BoundResult branchwise; // 2 e^{-x^2/(2u)} below the junction, 2 e^{-x^a/2} above
    BoundResult unified;    // 2 e^{-x^2 / (2(u + x^{2-a}))}
};
RoughBounds subexp_rough_bound(double x, const SubexpParams& p);

// three-term bound with free truncation level y (conditional-variance sup v,
// conditional p-moment sup w, caller-supplied bound on P(max step > y))
BoundResult fuk_general_bound(double x, double y, double v, double w, double p,
                              double tail_max_prob);

// exp{-x^2/(2 V^2)} + C_p / x^p with the aggregate-sup constants
BoundResult fuk_nagaev_bound(double x, const MomentParams& par);
// same display built from per-step sup sums (the historically earlier form)
BoundResult fuk_nagaev_per_step_bound(double x, const MomentParams& par);

// exp{-x^2 / (2(v^2 + x^{(2p+d)/(p+d)}/3))} + trunc_sum / x^p
BoundResult bernstein_trunc_bound(double x, double v, double p, double delta,
                                  double trunc_sum);
// averaged variant: n v^2 in the exponential plus a quadratic-characteristic
// Markov term  quad_char_moment / v^{p+delta}
BoundResult bernstein_trunc_avg_bound(double x, double v, double n, double p,
                                      double delta, double trunc_sum,
                                      double quad_char_moment);

// --- helpers ---------------------------------------------------------------

// union-plus-Markov estimate of P(max step > y) given a bound on the summed
// p-th moments
double markov_max_tail(double y, double p, double pmom_sum);

// normalized large-deviation rate log(bound)/n^alpha
double ldp_rate(double alpha, double n, double log_bound_value);
double ldp_rate_of(double alpha, double n, const BoundResult& b);
// value-domain convenience; throws std::domain_error when bound_value <= 0
double ldp_rate_value(double alpha, double n, double bound_value);

} // namespace mtb
