#pragma once
// Experiment drivers: translate a parsed config into bound evaluations and
// Monte Carlo verification runs, producing a Report ready for emission.
//
// Seven experiment kinds are supported (the `experiment` key):
//   bound_table     closed-form bound values over an x/n grid, no simulation
//   domination      empirical tails vs a bound, verdict per cell
//   ldp_rate        normalized large-deviation rates of a bound along n
//   fuk_comparison  aggregate vs per-step moment bounds side by side
//   regression      least-squares error tails vs the regression bounds
//   berry_esseen    nonuniform CDF gaps of the normalized error vs envelope
//   invariance      stopped-path functionals against the Wiener limit

#include <cstdint>
#include <optional>

#include "mtb/config.hpp"
#include "mtb/report.hpp"

namespace mtb {

// command-line overrides that win over the config file values
struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> reps;
    std::optional<int> threads;
};

Report run_experiment(const Config& cfg, const RunOverrides& overrides = {});

} // namespace mtb
