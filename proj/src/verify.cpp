#include "mtb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/beta.hpp>

namespace mtb {

namespace {

double eval_statistic(Statistic stat, const std::vector<double>& partials) {
    const std::size_t n = partials.size() - 1;
    switch (stat) {
    case Statistic::final_sum:
        return partials[n];
    case Statistic::abs_final:
        return std::abs(partials[n]);
    case Statistic::max_partial: {
        double m = partials[1];
        for (std::size_t k = 2; k <= n; ++k) m = std::max(m, partials[k]);
        return m;
    }
    case Statistic::max_abs_partial: {
        double m = std::abs(partials[1]);
        for (std::size_t k = 2; k <= n; ++k) m = std::max(m, std::abs(partials[k]));
        return m;
    }
    }
    throw std::logic_error("eval_statistic: unknown statistic");
}

} // namespace

const char* statistic_name(Statistic stat) {
    switch (stat) {
    case Statistic::final_sum: return "final_sum";
    case Statistic::abs_final: return "abs_final";
    case Statistic::max_partial: return "max_partial";
    case Statistic::max_abs_partial: return "max_abs_partial";
    }
    return "unknown";
}

const char* verdict_name(Verdict v) {
    switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::weak_pass: return "WEAK-PASS";
    case Verdict::fail: return "FAIL";
    }
    return "unknown";
}

TailEstimate binomial_tail(long hits, long reps, double x, double level) {
    if (reps < 1) throw std::invalid_argument("binomial_tail: reps must be >= 1");
    if (hits < 0 || hits > reps) throw std::invalid_argument("binomial_tail: hits out of range");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("binomial_tail: level must be in (0,1)");

    TailEstimate est;
    est.x = x;
    est.reps = reps;
    est.hits = hits;
    est.p_hat = static_cast<double>(hits) / static_cast<double>(reps);

    const double tail = 0.5 * (1.0 - level);
    if (hits == 0) {
        est.ci_low = 0.0;
    } else {
        boost::math::beta_distribution<double> lo(static_cast<double>(hits),
                                                  static_cast<double>(reps - hits + 1));
        est.ci_low = boost::math::quantile(lo, tail);
    }
    if (hits == reps) {
        est.ci_high = 1.0;
    } else {
        boost::math::beta_distribution<double> hi(static_cast<double>(hits + 1),
                                                  static_cast<double>(reps - hits));
        est.ci_high = boost::math::quantile(hi, 1.0 - tail);
    }
    return est;
}

void parallel_for(long reps, const std::function<void(long)>& body, int threads) {
    if (reps < 1) throw std::invalid_argument("parallel_for: reps must be >= 1");
    long nt = threads > 0 ? threads : static_cast<long>(std::thread::hardware_concurrency());
    nt = std::clamp<long>(nt, 1, reps);

    if (nt == 1) {
        for (long r = 0; r < reps; ++r) body(r);
        return;
    }

    std::mutex mu;
    std::exception_ptr first_error;
    const long chunk = (reps + nt - 1) / nt;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nt));
    for (long t = 0; t < nt; ++t) {
        const long lo = t * chunk;
        const long hi = std::min(reps, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (long r = lo; r < hi; ++r) body(r);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::function<double(long)> statistic_sampler(const MartingaleModel& model, Statistic stat,
                                              std::uint64_t seed) {
    validate(model);
    return [model, stat, seed](long rep) {
        MartingalePath path = sample_path(model, seed, static_cast<std::uint64_t>(rep));
        return eval_statistic(stat, path.partials);
    };
}

std::function<double(long)> statistic_sampler(const RegressionConfig& config, Statistic stat,
                                              std::uint64_t seed) {
    validate(config);
    if (stat != Statistic::final_sum && stat != Statistic::abs_final)
        throw std::invalid_argument(
            "statistic_sampler: running-maximum statistics need a path model");
    return [config, stat, seed](long rep) {
        RegressionSample s = draw_regression(config, seed, static_cast<std::uint64_t>(rep));
        double t = normalized_error(s);
        return stat == Statistic::abs_final ? std::abs(t) : t;
    };
}

std::vector<TailEstimate> tail_grid(const std::function<double(long)>& draw,
                                    const std::vector<double>& xs, long reps, double level,
                                    int threads) {
    if (xs.empty()) throw std::invalid_argument("tail_grid: empty threshold grid");
    if (reps < 1) throw std::invalid_argument("tail_grid: reps must be >= 1");

    std::vector<double> values(static_cast<std::size_t>(reps));
    parallel_for(reps, [&](long rep) { values[static_cast<std::size_t>(rep)] = draw(rep); },
                 threads);

    std::vector<TailEstimate> out;
    out.reserve(xs.size());
    for (double x : xs) {
        long hits = 0;
        for (double v : values)
            if (v >= x) ++hits;
        out.push_back(binomial_tail(hits, reps, x, level));
    }
    return out;
}

std::vector<TailEstimate> tail_grid(const MartingaleModel& model, const std::vector<double>& xs,
                                    long reps, Statistic stat, std::uint64_t seed, double level,
                                    int threads) {
    return tail_grid(statistic_sampler(model, stat, seed), xs, reps, level, threads);
}

std::vector<TailEstimate> tail_grid(const RegressionConfig& config, const std::vector<double>& xs,
                                    long reps, Statistic stat, std::uint64_t seed, double level,
                                    int threads) {
    return tail_grid(statistic_sampler(config, stat, seed), xs, reps, level, threads);
}

TailEstimate empirical_tail(const MartingaleModel& model, double x, long reps, Statistic stat,
                            std::uint64_t seed, double level, int threads) {
    return tail_grid(model, std::vector<double>{x}, reps, stat, seed, level, threads).front();
}

TailEstimate empirical_tail(const RegressionConfig& config, double x, long reps, Statistic stat,
                            std::uint64_t seed, double level, int threads) {
    return tail_grid(config, std::vector<double>{x}, reps, stat, seed, level, threads).front();
}

double exact_tail(const MartingaleModel& model, double x, Statistic stat, long max_outcomes) {
    validate(model);
    if (model.kind != ModelKind::iid_subexp && model.kind != ModelKind::iid_moment)
        throw std::invalid_argument("exact_tail: only i.i.d. kinds can be enumerated");

    std::vector<std::pair<double, double>> atoms; // (value, probability)
    if (std::holds_alternative<Rademacher>(model.base)) {
        atoms = {{1.0, 0.5}, {-1.0, 0.5}};
    } else if (const auto* tp = std::get_if<ThreePoint>(&model.base)) {
        for (int i = 0; i < 3; ++i)
            if (tp->prob[i] > 0.0) atoms.emplace_back(tp->value[i], tp->prob[i]);
    } else {
        throw std::invalid_argument("exact_tail: base law must be atomic");
    }

    double outcomes = 1.0;
    for (int k = 0; k < model.n; ++k) outcomes *= static_cast<double>(atoms.size());
    if (outcomes > static_cast<double>(max_outcomes))
        throw std::invalid_argument("exact_tail: outcome count exceeds the enumeration budget");

    const double neg_inf = -std::numeric_limits<double>::infinity();
    double acc = 0.0;
    // depth-first over all outcome paths, tracking the running statistics
    std::function<void(int, double, double, double, double)> walk =
        [&](int k, double prob, double s, double run_max, double run_max_abs) {
            if (k == model.n) {
                double value = 0.0;
                switch (stat) {
                case Statistic::final_sum: value = s; break;
                case Statistic::abs_final: value = std::abs(s); break;
                case Statistic::max_partial: value = run_max; break;
                case Statistic::max_abs_partial: value = run_max_abs; break;
                }
                if (value >= x) acc += prob;
                return;
            }
            for (const auto& [v, p] : atoms) {
                const double s2 = s + v;
                walk(k + 1, prob * p, s2, std::max(run_max, s2),
                     std::max(run_max_abs, std::abs(s2)));
            }
        };
    walk(0, 1.0, 0.0, neg_inf, neg_inf);
    return std::min(acc, 1.0);
}

DominationReport domination_check(const std::vector<double>& bound_values,
                                  const std::vector<TailEstimate>& estimates) {
    if (estimates.empty()) throw std::invalid_argument("domination_check: empty grid");
    if (bound_values.size() != estimates.size())
        throw std::invalid_argument("domination_check: bound/estimate grids differ in size");

    DominationReport report;
    report.rows.reserve(estimates.size());
    report.overall = Verdict::pass;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        const TailEstimate& est = estimates[i];
        DominationRow row;
        row.x = est.x;
        row.bound = bound_values[i];
        row.p_hat = est.p_hat;
        row.ci_high = est.ci_high;
        row.margin = row.bound - est.ci_high;
        row.hits = est.hits;
        if (!(row.bound >= est.ci_high)) {
            row.verdict = Verdict::fail;
            report.overall = Verdict::fail;
        } else if (est.hits < 5) {
            row.verdict = Verdict::weak_pass;
            if (report.overall == Verdict::pass) report.overall = Verdict::weak_pass;
        } else {
            row.verdict = Verdict::pass;
        }
        report.rows.push_back(row);
    }
    return report;
}

long stopping_time(const std::function<double(long)>& step_variance, double level, long cap) {
    if (cap < 1) throw std::invalid_argument("stopping_time: cap must be >= 1");
    if (level <= 0.0) return 0;
    double acc = 0.0;
    for (long k = 1; k <= cap; ++k) {
        acc += step_variance(k);
        if (acc >= level) return k;
    }
    throw std::runtime_error(
        "stopping_time: quadratic characteristic failed to reach the level within the step cap");
}

std::vector<InvariancePath> invariance_paths(const MartingaleModel& model, double n, int t_points,
                                             long reps, std::uint64_t seed, long cap,
                                             int threads) {
    validate(model);
    if (model.kind != ModelKind::iid_subexp && model.kind != ModelKind::iid_moment)
        throw std::invalid_argument("invariance_paths: only the i.i.d. kinds are stationary");
    if (!(n > 0.0)) throw std::invalid_argument("invariance_paths: n must be positive");
    if (t_points < 2) throw std::invalid_argument("invariance_paths: grid needs >= 2 points");
    if (reps < 1) throw std::invalid_argument("invariance_paths: reps must be >= 1");

    const double m2 = moment_oracle(model.base, Quad{});
    double m3 = 0.0;
    try {
        m3 = moment_oracle(model.base, AbsPow{3.0});
    } catch (const std::domain_error&) {
        throw std::domain_error(
            "invariance_paths: base law has no third absolute moment, hypothesis violated");
    }
    const double m_ratio = m3 / m2;

    std::vector<double> levels(static_cast<std::size_t>(t_points));
    for (int j = 0; j < t_points; ++j)
        levels[static_cast<std::size_t>(j)] =
            std::floor(n * static_cast<double>(j) / static_cast<double>(t_points - 1));

    const double root_n = std::sqrt(n);
    std::vector<InvariancePath> out(static_cast<std::size_t>(reps));
    parallel_for(
        reps,
        [&](long rep) {
            InvariancePath path;
            path.v_of.resize(static_cast<std::size_t>(t_points));
            path.h.resize(static_cast<std::size_t>(t_points));
            path.n = n;
            path.m_ratio = m_ratio;

            StepRng rng(seed, static_cast<std::uint64_t>(rep));
            int j = 0;
            while (j < t_points && levels[static_cast<std::size_t>(j)] <= 0.0) {
                path.v_of[static_cast<std::size_t>(j)] = 0;
                path.h[static_cast<std::size_t>(j)] = 0.0;
                ++j;
            }
            double s = 0.0;
            double qv = 0.0;
            long k = 0;
            while (j < t_points) {
                if (k >= cap)
                    throw std::runtime_error(
                        "invariance_paths: stopping level not reached within the step cap");
                ++k;
                s += sample(model.base, rng.block(static_cast<std::uint64_t>(k - 1)));
                qv += m2;
                while (j < t_points && qv >= levels[static_cast<std::size_t>(j)]) {
                    path.v_of[static_cast<std::size_t>(j)] = k;
                    path.h[static_cast<std::size_t>(j)] = s / root_n;
                    ++j;
                }
            }
            out[static_cast<std::size_t>(rep)] = std::move(path);
        },
        threads);
    return out;
}

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw std::invalid_argument("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        const double above = static_cast<double>(i + 1) / m - f;
        const double below = f - static_cast<double>(i) / m;
        d = std::max({d, above, below});
    }
    return d;
}

std::vector<double> nonuniform_cdf_gap(std::vector<double> sample, double p,
                                       const std::vector<double>& x_grid) {
    if (sample.empty()) throw std::invalid_argument("nonuniform_cdf_gap: empty sample");
    std::sort(sample.begin(), sample.end());
    const double m = static_cast<double>(sample.size());
    std::vector<double> gaps;
    gaps.reserve(x_grid.size());
    for (double x : x_grid) {
        const auto it = std::upper_bound(sample.begin(), sample.end(), x);
        const double f_hat = static_cast<double>(it - sample.begin()) / m;
        gaps.push_back(std::abs(f_hat - normal_cdf(x)) * (1.0 + std::pow(std::abs(x), p)));
    }
    return gaps;
}

} // namespace mtb
