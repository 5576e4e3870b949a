#include "mtb/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mtb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

BoundTerm make_term(const char* name, double log_value) {
    return BoundTerm{name, log_value, std::exp(log_value)};
}

BoundResult assemble(Branch branch, std::vector<BoundTerm> terms) {
    double v = 0.0;
    for (const auto& t : terms) v += t.value;
    return BoundResult{v, std::min(v, 1.0), branch, std::move(terms)};
}

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

} // namespace

const char* branch_name(Branch b) {
    switch (b) {
        case Branch::sub_gaussian: return "sub_gaussian";
        case Branch::subexponential: return "subexponential";
        default: return "single";
    }
}

double BoundResult::log_value() const {
    double m = kNegInf;
    for (const auto& t : terms) m = std::max(m, t.log_value);
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (const auto& t : terms) s += std::exp(t.log_value - m);
    return m + std::log(s);
}

void validate(const SubexpParams& p) {
    require(p.alpha > 0.0 && p.alpha < 1.0, "subexp params: alpha must lie in (0,1)");
    require(p.c_n >= 0.0, "subexp params: c_n must be >= 0");
    require(p.u >= 1.0, "subexp params: u must be >= 1");
}

void validate(const MomentParams& p) {
    require(p.p >= 2.0, "moment params: p must be >= 2");
    require(p.quad_sup > 0.0, "moment params: quad_sup must be > 0");
    require(p.pmom_sup > 0.0, "moment params: pmom_sup must be > 0");
}

FukSplit fuk_split(double p) {
    require(p > 0.0, "fuk_split: p must be > 0");
    return FukSplit{2.0 / (p + 2.0), p / (p + 2.0)};
}

BoundResult iid_subexp_bound(double x, double y, double n, double subexp_moment,
                             double alpha, double exp_moment) {
    require(x > 0.0, "iid_subexp_bound: x must be > 0");
    require(y > 0.0, "iid_subexp_bound: y must be > 0");
    require(n >= 1.0, "iid_subexp_bound: n must be >= 1");
    require(subexp_moment > 0.0, "iid_subexp_bound: subexp moment must be > 0");
    require(alpha > 0.0 && alpha < 1.0, "iid_subexp_bound: alpha must lie in (0,1)");
    require(exp_moment >= 1.0, "iid_subexp_bound: exp moment must be >= 1");

    double ya = std::pow(y, alpha - 1.0); // y^{a-1}
    double log_main = -x * ya * (1.0 - n * subexp_moment * ya / (2.0 * x));
    double log_trunc = std::log(n) - std::pow(y, alpha) + std::log(exp_moment);
    return assemble(Branch::single,
                    {make_term("dominant", log_main), make_term("truncation", log_trunc)});
}

BoundResult subexp_tail_bound_in(Branch forced, double x, const SubexpParams& p) {
    validate(p);
    require(x >= 0.0, "subexp_tail_bound: x must be >= 0");
    if (forced == Branch::sub_gaussian) {
        double log_t1 = -x * x / (2.0 * p.u);
        double log_t2;
        if (x == 0.0 || p.c_n == 0.0) {
            log_t2 = kNegInf;
        } else {
            log_t2 = std::log(p.c_n) + 2.0 / (1.0 - p.alpha) * std::log(x / p.u) -
                     std::pow(p.u / x, p.alpha / (1.0 - p.alpha));
        }
        return assemble(Branch::sub_gaussian,
                        {make_term("sub_gaussian", log_t1), make_term("residual", log_t2)});
    }
    require(x > 0.0, "subexp_tail_bound: the upper regime needs x > 0");
    double xa = std::pow(x, p.alpha);
    double log_t1 = -xa * (1.0 - p.u / (2.0 * std::pow(x, 2.0 - p.alpha)));
    double log_t2 = (p.c_n == 0.0) ? kNegInf : std::log(p.c_n) - 2.0 * std::log(x) - xa;
    return assemble(Branch::subexponential,
                    {make_term("subexponential", log_t1), make_term("residual", log_t2)});
}

BoundResult subexp_tail_bound(double x, const SubexpParams& p) {
    validate(p);
    require(x >= 0.0, "subexp_tail_bound: x must be >= 0");
    double junction = std::pow(p.u, 1.0 / (2.0 - p.alpha));
    Branch br = x < junction ? Branch::sub_gaussian : Branch::subexponential;
    return subexp_tail_bound_in(br, x, p);
}

RoughBounds subexp_rough_bound(double x, const SubexpParams& p) {
    validate(p);
    require(x >= 0.0, "subexp_rough_bound: x must be >= 0");
    const double log2 = std::log(2.0);

    double junction = std::pow(p.u, 1.0 / (2.0 - p.alpha));
    BoundResult branchwise;
    if (x < junction) {
        branchwise = assemble(Branch::sub_gaussian,
                              {make_term("envelope", log2 - x * x / (2.0 * p.u))});
    } else {
        branchwise = assemble(Branch::subexponential,
                              {make_term("envelope", log2 - 0.5 * std::pow(x, p.alpha))});
    }
    double denom = 2.0 * (p.u + std::pow(x, 2.0 - p.alpha));
    BoundResult unified =
        assemble(Branch::single, {make_term("envelope", log2 - x * x / denom)});
    return RoughBounds{std::move(branchwise), std::move(unified)};
}

BoundResult fuk_general_bound(double x, double y, double v, double w, double p,
                              double tail_max_prob) {
    require(x > 0.0 && y > 0.0, "fuk_general_bound: x and y must be > 0");
    require(v > 0.0 && w > 0.0, "fuk_general_bound: v and w must be > 0");
    require(p >= 2.0, "fuk_general_bound: p must be >= 2");
    require(tail_max_prob >= 0.0 && tail_max_prob <= 1.0,
            "fuk_general_bound: tail_max_prob must lie in [0,1]");

    FukSplit s = fuk_split(p);
    double log_gauss = -s.alpha * s.alpha * x * x / (2.0 * std::exp(p) * v);
    double log_trunc = -(s.beta * x / y) * std::log1p(s.beta * x * std::pow(y, p - 1.0) / w);
    double log_max = tail_max_prob > 0.0 ? std::log(tail_max_prob) : kNegInf;
    return assemble(Branch::single, {make_term("gaussian", log_gauss),
                                     make_term("truncation", log_trunc),
                                     make_term("max_step", log_max)});
}

namespace {

BoundResult fuk_nagaev_core(double x, const MomentParams& par) {
    validate(par);
    require(x > 0.0, "fuk_nagaev_bound: x must be > 0");
    double vsq = 0.25 * (par.p + 2.0) * (par.p + 2.0) * std::exp(par.p) * par.quad_sup;
    double cp = std::pow(1.0 + 2.0 / par.p, par.p) * par.pmom_sup;
    double log_gauss = -x * x / (2.0 * vsq);
    double log_poly = std::log(cp) - par.p * std::log(x);
    return assemble(Branch::single,
                    {make_term("gaussian", log_gauss), make_term("polynomial", log_poly)});
}

} // namespace

BoundResult fuk_nagaev_bound(double x, const MomentParams& par) {
    return fuk_nagaev_core(x, par);
}

BoundResult fuk_nagaev_per_step_bound(double x, const MomentParams& par) {
    return fuk_nagaev_core(x, par);
}

BoundResult bernstein_trunc_bound(double x, double v, double p, double delta,
                                  double trunc_sum) {
    require(x > 0.0 && v > 0.0, "bernstein_trunc_bound: x and v must be > 0");
    require(p >= 2.0, "bernstein_trunc_bound: p must be >= 2");
    require(delta >= 0.0, "bernstein_trunc_bound: delta must be >= 0");
    require(trunc_sum >= 0.0, "bernstein_trunc_bound: trunc_sum must be >= 0");

    double expo = (2.0 * p + delta) / (p + delta);
    double log_e = -x * x / (2.0 * (v * v + std::pow(x, expo) / 3.0));
    double log_t =
        trunc_sum > 0.0 ? std::log(trunc_sum) - p * std::log(x) : kNegInf;
    return assemble(Branch::single, {make_term("exponential", log_e),
                                     make_term("truncated_moment", log_t)});
}

BoundResult bernstein_trunc_avg_bound(double x, double v, double n, double p,
                                      double delta, double trunc_sum,
                                      double quad_char_moment) {
    require(x > 0.0 && v > 0.0, "bernstein_trunc_avg_bound: x and v must be > 0");
    require(n >= 1.0, "bernstein_trunc_avg_bound: n must be >= 1");
    require(p >= 2.0, "bernstein_trunc_avg_bound: p must be >= 2");
    require(delta >= 0.0, "bernstein_trunc_avg_bound: delta must be >= 0");
    require(trunc_sum >= 0.0 && quad_char_moment >= 0.0,
            "bernstein_trunc_avg_bound: moment inputs must be >= 0");

    double expo = (2.0 * p + delta) / (p + delta);
    double log_e = -x * x / (2.0 * (n * v * v + std::pow(x, expo) / 3.0));
    double log_t = trunc_sum > 0.0 ? std::log(trunc_sum) - p * std::log(x) : kNegInf;
    double log_q = quad_char_moment > 0.0
                       ? std::log(quad_char_moment) - (p + delta) * std::log(v)
                       : kNegInf;
    return assemble(Branch::single,
                    {make_term("exponential", log_e), make_term("truncated_moment", log_t),
                     make_term("quad_char", log_q)});
}

double markov_max_tail(double y, double p, double pmom_sum) {
    require(y > 0.0, "markov_max_tail: y must be > 0");
    require(p > 0.0, "markov_max_tail: p must be > 0");
    require(pmom_sum >= 0.0, "markov_max_tail: pmom_sum must be >= 0");
    return std::min(1.0, pmom_sum / std::pow(y, p));
}

double ldp_rate(double alpha, double n, double log_bound_value) {
    require(alpha > 0.0 && alpha < 1.0, "ldp_rate: alpha must lie in (0,1)");
    require(n >= 1.0, "ldp_rate: n must be >= 1");
    return log_bound_value / std::pow(n, alpha);
}

double ldp_rate_of(double alpha, double n, const BoundResult& b) {
    return ldp_rate(alpha, n, b.log_value());
}

double ldp_rate_value(double alpha, double n, double bound_value) {
    require(bound_value > 0.0, "ldp_rate: bound_value must be > 0");
    return ldp_rate(alpha, n, std::log(bound_value));
}

} // namespace mtb
