#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <mpfr.h>

#include "mtb/bounds.hpp"
#include "mtb/distributions.hpp"
#include "mtb/rng.hpp"

using namespace mtb;

TEST_CASE("pinned bound values") {
    // two-regime bound at the classic unit point: e^{-1/2} + e^{-1}
    auto b = subexp_tail_bound(1.0, SubexpParams{0.5, 1.0, 1.0});
    CHECK(b.branch == Branch::subexponential);
    CHECK(b.value == doctest::Approx(std::exp(-0.5) + std::exp(-1.0)).epsilon(1e-12));

    // Fuk-Nagaev with unit constants: V^2 = 4 e^2, C_p = 4
    auto fn = fuk_nagaev_bound(10.0, MomentParams{2.0, 1.0, 1.0});
    double e2 = std::exp(2.0);
    CHECK(fn.value == doctest::Approx(std::exp(-100.0 / (8.0 * e2)) + 0.04).epsilon(1e-12));
    CHECK(fn.terms[0].value == doctest::Approx(std::exp(-100.0 / (8.0 * e2))).epsilon(1e-12));
    CHECK(fn.terms[1].value == doctest::Approx(0.04).epsilon(1e-12));

    // variance + truncation bound with zero remainder: e^{-3/8}
    auto bt = bernstein_trunc_bound(1.0, 1.0, 2.0, 1.0, 0.0);
    CHECK(bt.value == doctest::Approx(std::exp(-3.0 / 8.0)).epsilon(1e-12));

    // i.i.d. subexponential bound by direct substitution: e^{-15/8} + e^{-2}
    auto ls = iid_subexp_bound(4.0, 4.0, 1.0, 1.0, 0.5, 1.0);
    CHECK(ls.value == doctest::Approx(std::exp(-15.0 / 8.0) + std::exp(-2.0)).epsilon(1e-12));

    // rough envelopes at (x=2, u=1, alpha=1/2)
    auto rb = subexp_rough_bound(2.0, SubexpParams{0.5, 1.0, 1.0});
    CHECK(rb.unified.value ==
          doctest::Approx(2.0 * std::exp(-4.0 / (2.0 * (1.0 + std::pow(2.0, 1.5)))))
              .epsilon(1e-12));
    CHECK(rb.branchwise.value ==
          doctest::Approx(2.0 * std::exp(-0.5 * std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("high precision recomputation of the iid bound") {
    // same inputs as the library call, terms recomputed with 256-bit floats
    Distribution normal = Normal{1.0};
    double K = moment_oracle(normal, SubexpWeighted{0.5});
    double E = moment_oracle(normal, ExpMoment{0.5});
    double x = 10.0, y = 10.0, n = 100.0, alpha = 0.5;
    auto lib = iid_subexp_bound(x, y, n, K, alpha, E);

    mpfr_t mx, my, mn, mk, me, t, term1, term2, acc;
    mpfr_inits2(256, mx, my, mn, mk, me, t, term1, term2, acc, (mpfr_ptr)nullptr);
    mpfr_set_d(mx, x, MPFR_RNDN);
    mpfr_set_d(my, y, MPFR_RNDN);
    mpfr_set_d(mn, n, MPFR_RNDN);
    mpfr_set_d(mk, K, MPFR_RNDN);
    mpfr_set_d(me, E, MPFR_RNDN);

    // term1 = exp(-x y^{a-1} + n K y^{2a-2} / 2)
    mpfr_set_d(t, alpha - 1.0, MPFR_RNDN);
    mpfr_pow(term1, my, t, MPFR_RNDN);          // y^{a-1}
    mpfr_mul(term1, term1, mx, MPFR_RNDN);      // x y^{a-1}
    mpfr_neg(term1, term1, MPFR_RNDN);
    mpfr_set_d(t, 2.0 * alpha - 2.0, MPFR_RNDN);
    mpfr_pow(acc, my, t, MPFR_RNDN);             // y^{2a-2}
    mpfr_mul(acc, acc, mn, MPFR_RNDN);
    mpfr_mul(acc, acc, mk, MPFR_RNDN);
    mpfr_div_ui(acc, acc, 2, MPFR_RNDN);
    mpfr_add(term1, term1, acc, MPFR_RNDN);
    mpfr_exp(term1, term1, MPFR_RNDN);

    // term2 = n e^{-y^a} E
    mpfr_set_d(t, alpha, MPFR_RNDN);
    mpfr_pow(term2, my, t, MPFR_RNDN);
    mpfr_neg(term2, term2, MPFR_RNDN);
    mpfr_exp(term2, term2, MPFR_RNDN);
    mpfr_mul(term2, term2, mn, MPFR_RNDN);
    mpfr_mul(term2, term2, me, MPFR_RNDN);

    mpfr_add(acc, term1, term2, MPFR_RNDN);
    double want = mpfr_get_d(acc, MPFR_RNDN);
    double want1 = mpfr_get_d(term1, MPFR_RNDN);
    double want2 = mpfr_get_d(term2, MPFR_RNDN);
    mpfr_clears(mx, my, mn, mk, me, t, term1, term2, acc, (mpfr_ptr)nullptr);

    CHECK(lib.terms[0].value == doctest::Approx(want1).epsilon(1e-13));
    CHECK(lib.terms[1].value == doctest::Approx(want2).epsilon(1e-13));
    CHECK(lib.value == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("regime junction is continuous") {
    StepRng rng(314, 0);
    for (int i = 0; i < 100; ++i) {
        auto blk = rng.block(i);
        double alpha = 0.1 + 0.8 * blk.u01(0);
        double u = 1.0 + 49.0 * blk.u01(1);
        double cn = 10.0 * rng.block(i, 1).u01(0);
        SubexpParams p{alpha, cn, u};
        double xstar = std::pow(u, 1.0 / (2.0 - alpha));
        auto lo = subexp_tail_bound_in(Branch::sub_gaussian, xstar, p);
        auto hi = subexp_tail_bound_in(Branch::subexponential, xstar, p);
        CHECK(lo.terms[0].value == doctest::Approx(hi.terms[0].value).epsilon(1e-12));
        if (cn > 0.0)
            CHECK(lo.terms[1].value == doctest::Approx(hi.terms[1].value).epsilon(1e-12));
        CHECK(lo.value == doctest::Approx(hi.value).epsilon(1e-12));
    }
}

TEST_CASE("degenerate evaluation at x = 0") {
    auto b = subexp_tail_bound(0.0, SubexpParams{0.5, 2.0, 1.5});
    CHECK(b.branch == Branch::sub_gaussian);
    CHECK(b.terms[0].value == 1.0);
    CHECK(b.terms[1].value == 0.0);
    CHECK(b.value == 1.0);
    CHECK(b.clamped == 1.0);
}

TEST_CASE("envelope ordering on a grid") {
    StepRng rng(271, 3);
    for (int i = 0; i < 1000; ++i) {
        auto blk = rng.block(i);
        double alpha = 0.1 + 0.8 * blk.u01(0);
        double u = 1.0 + 30.0 * blk.u01(1);
        double cn = u * rng.block(i, 1).u01(0); // c_n <= u
        double x = 20.0 * rng.block(i, 2).u01(0);
        SubexpParams p{alpha, cn, u};
        auto sharp = subexp_tail_bound(x, p);
        auto rough = subexp_rough_bound(x, p);
        CHECK(sharp.value <= rough.branchwise.value * (1.0 + 1e-12));
        CHECK(rough.branchwise.value <= rough.unified.value * (1.0 + 1e-12));
    }
}

TEST_CASE("general three-term bound reduces to Fuk-Nagaev at y = beta x") {
    for (double p : {2.0, 3.0, 4.5}) {
        for (double x : {5.0, 10.0, 40.0}) {
            double v = 1.3, w = 0.8;
            FukSplit s = fuk_split(p);
            double y = s.beta * x;
            double tail = markov_max_tail(y, p, w);
            auto gen = fuk_general_bound(x, y, v, w, p, tail);
            auto red = fuk_nagaev_bound(x, MomentParams{p, v, w});
            // gaussian terms coincide, the markov term equals the polynomial
            // term, and the middle truncation term is dominated by it
            CHECK(gen.terms[0].value == doctest::Approx(red.terms[0].value).epsilon(1e-12));
            CHECK(gen.terms[2].value == doctest::Approx(red.terms[1].value).epsilon(1e-12));
            CHECK(gen.terms[1].value <= red.terms[1].value * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("per-step constants dominate aggregate constants") {
    double n = 50;
    MomentParams agg{2.0, 1.0, 1.0};
    MomentParams per{2.0, n * 1.0, n * 1.0};
    for (double x : {1.0, 5.0, 20.0, 100.0}) {
        CHECK(fuk_nagaev_per_step_bound(x, per).value >= fuk_nagaev_bound(x, agg).value);
    }
}

TEST_CASE("monotonicity in x") {
    MomentParams mp{3.0, 2.0, 1.5};
    SubexpParams sp{0.4, 1.0, 2.0};
    double prev_fn = 1e300, prev_bt = 1e300, prev_se = 1e300;
    for (double x = 0.5; x < 40.0; x += 0.25) {
        double fn = fuk_nagaev_bound(x, mp).value;
        double bt = bernstein_trunc_bound(x, 1.2, 2.0, 1.0, 0.7).value;
        double se = subexp_tail_bound(x, sp).value;
        CHECK(fn < prev_fn);
        CHECK(bt < prev_bt);
        CHECK(se <= prev_se * (1.0 + 1e-12));
        prev_fn = fn;
        prev_bt = bt;
        prev_se = se;
    }
}

TEST_CASE("log values survive underflow") {
    // far in the tail the value underflows but the log stays finite
    SubexpParams p{0.5, 1e6, 1e6};
    auto b = subexp_tail_bound(1e7, p);
    CHECK(b.value == 0.0);
    CHECK(std::isfinite(b.log_value()));
    CHECK(b.log_value() < -1e3);

    // when the value is representable the two paths agree
    auto c = subexp_tail_bound(3.0, SubexpParams{0.5, 1.0, 1.0});
    CHECK(std::exp(c.log_value()) == doctest::Approx(c.value).epsilon(1e-12));

    // rate normalization identity
    CHECK(ldp_rate_value(0.5, 100.0, 0.25) ==
          doctest::Approx(std::log(0.25) / 10.0).epsilon(1e-14));
    CHECK(ldp_rate(0.5, 100.0, -5000.0) == doctest::Approx(-500.0).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(subexp_tail_bound(1.0, SubexpParams{0.5, 1.0, 0.5}), std::domain_error);
    CHECK_THROWS_AS(subexp_tail_bound(1.0, SubexpParams{1.0, 1.0, 2.0}), std::domain_error);
    CHECK_THROWS_AS(subexp_tail_bound(-1.0, SubexpParams{0.5, 1.0, 2.0}), std::domain_error);
    CHECK_THROWS_AS(fuk_nagaev_bound(1.0, MomentParams{1.5, 1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(fuk_nagaev_bound(0.0, MomentParams{2.0, 1.0, 1.0}), std::domain_error);
    CHECK_THROWS_AS(fuk_general_bound(1.0, 1.0, 1.0, 1.0, 2.0, 1.5), std::domain_error);
    CHECK_THROWS_AS(bernstein_trunc_bound(1.0, 0.0, 2.0, 1.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(ldp_rate_value(0.5, 10.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(iid_subexp_bound(1.0, 1.0, 0.5, 1.0, 0.5, 1.0), std::domain_error);
    CHECK(markov_max_tail(0.5, 2.0, 10.0) == 1.0);
    CHECK(markov_max_tail(10.0, 2.0, 1.0) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("gaussian term grows with u") {
    double prev = 0.0;
    for (double u = 1.0; u < 40.0; u *= 1.7) {
        auto b = subexp_tail_bound_in(Branch::sub_gaussian, 2.0, SubexpParams{0.5, 1.0, u});
        CHECK(b.terms[0].value >= prev);
        prev = b.terms[0].value;
    }
}
