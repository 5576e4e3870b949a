#pragma once
// Monte Carlo tail estimation and the statistical machinery that pits the
// closed-form bounds against empirical truth: exact binomial intervals,
// domination reports, stopped paths for the weak invariance principle, and
// distribution-distance functionals.
//
// Exceedance is always the closed event {statistic >= x}, matching the events
// the bounds control.  Replications fan out over independent RNG streams
// (stream = replication index), so results are deterministic for a fixed
// (seed, reps, grid) no matter how the work is scheduled.

#include <cstdint>
#include <functional>
#include <vector>

#include "mtb/models.hpp"
#include "mtb/regression.hpp"

namespace mtb {

// Path functional whose tail gets estimated.  For a regression sample the
// final sum *is* the normalized estimator error, so `abs_final` is the
// two-sided error statistic; the running-maximum kinds only make sense for
// path models.
enum class Statistic {
    final_sum,       // S_n, or the normalized error T for regression
    abs_final,       // |S_n|, |T|
    max_partial,     // max_{1<=k<=n} S_k  (S_0 excluded)
    max_abs_partial, // max_{1<=k<=n} |S_k|
};

const char* statistic_name(Statistic stat);

struct TailEstimate {
    double x = 0.0;
    long reps = 0;
    long hits = 0;
    double p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 1.0;
};

// Equal-tailed exact binomial (Clopper-Pearson) interval; `level` is the
// two-sided confidence.  hits = 0 pins ci_low to 0, hits = reps pins ci_high
// to 1, and the interval always brackets p_hat.
TailEstimate binomial_tail(long hits, long reps, double x, double level = 0.99);

// Runs `body(rep)` for rep = 0..reps-1 across `threads` workers (0 = one per
// hardware thread).  The body must only touch rep-indexed state; exceptions
// are captured and the first one rethrown after all workers join.
void parallel_for(long reps, const std::function<void(long)>& body, int threads = 0);

// One scalar draw of the statistic per replication; the replication index is
// the RNG stream, so draw(i) is a pure function.
std::function<double(long)> statistic_sampler(const MartingaleModel& model, Statistic stat,
                                              std::uint64_t seed);
std::function<double(long)> statistic_sampler(const RegressionConfig& config, Statistic stat,
                                              std::uint64_t seed);

// One simulation pass shared by the whole threshold grid.
std::vector<TailEstimate> tail_grid(const std::function<double(long)>& draw,
                                    const std::vector<double>& xs, long reps,
                                    double level = 0.99, int threads = 0);
std::vector<TailEstimate> tail_grid(const MartingaleModel& model, const std::vector<double>& xs,
                                    long reps, Statistic stat, std::uint64_t seed,
                                    double level = 0.99, int threads = 0);
std::vector<TailEstimate> tail_grid(const RegressionConfig& config, const std::vector<double>& xs,
                                    long reps, Statistic stat, std::uint64_t seed,
                                    double level = 0.99, int threads = 0);

TailEstimate empirical_tail(const MartingaleModel& model, double x, long reps, Statistic stat,
                            std::uint64_t seed, double level = 0.99, int threads = 0);
TailEstimate empirical_tail(const RegressionConfig& config, double x, long reps, Statistic stat,
                            std::uint64_t seed, double level = 0.99, int threads = 0);

// Exact tail probability P(statistic >= x) for a small i.i.d. model on an
// atomic base law, by enumerating every outcome path.  Replaces sampling in
// the brute-force domination tests.  Throws when the model is not an i.i.d.
// atomic kind or the outcome count exceeds `max_outcomes`.
double exact_tail(const MartingaleModel& model, double x, Statistic stat,
                  long max_outcomes = 2000000);

enum class Verdict { pass, weak_pass, fail };
const char* verdict_name(Verdict v);

struct DominationRow {
    double x = 0.0;
    double bound = 0.0;  // raw bound value, deliberately not clamped to 1
    double p_hat = 0.0;
    double ci_high = 0.0;
    double margin = 0.0; // bound - ci_high
    long hits = 0;
    Verdict verdict = Verdict::fail;
};

struct DominationReport {
    std::vector<DominationRow> rows;
    Verdict overall = Verdict::pass;
};

// A bound survives a cell when its raw value clears the exact-binomial upper
// limit.  With fewer than five hits the estimate cannot distinguish a tight
// bound from a vacuous one, so such cells degrade to weak_pass; any cell
// below its upper limit fails the whole report.
DominationReport domination_check(const std::vector<double>& bound_values,
                                  const std::vector<TailEstimate>& estimates);

// Smallest k >= 1 with sum_{i<=k} step_variance(i) >= level (0 when
// level <= 0).  Walks the variance sequence lazily; exceeding `cap` steps
// means the quadratic characteristic failed to reach the level and throws.
long stopping_time(const std::function<double(long)>& step_variance, double level,
                   long cap = 10000000);

struct InvariancePath {
    std::vector<long> v_of;  // stopping index at each grid level floor(n * t_j)
    std::vector<double> h;   // S_{v_of[j]} / sqrt(n)
    double n = 0.0;          // normalization level
    double m_ratio = 0.0;    // E|xi|^3 / E[xi^2] of the base law
};

// Stopped-and-rescaled paths t -> S_{v(floor(n t))}/sqrt(n) on the uniform
// grid t_j = j/(t_points-1), one path per replication.  Only the i.i.d.
// kinds qualify (stationarity plus lazy extension); a base law without a
// third absolute moment violates the hypothesis and throws.
std::vector<InvariancePath> invariance_paths(const MartingaleModel& model, double n,
                                             int t_points, long reps, std::uint64_t seed,
                                             long cap = 10000000, int threads = 0);

// sup-distance between the sample's empirical CDF and reference_cdf,
// evaluated at the sorted-sample breakpoints
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);

// |F_hat(x) - Phi(x)| * (1 + |x|^p) on the grid, F_hat from the sample
std::vector<double> nonuniform_cdf_gap(std::vector<double> sample, double p,
                                       const std::vector<double>& x_grid);

} // namespace mtb
