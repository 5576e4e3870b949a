// mtb: closed-form martingale tail bounds and their Monte Carlo verification.
//
// One experiment config per invocation. The subcommand only gates which
// experiment kinds are accepted; everything else lives in the config file.
//
//   mtb bound      -c table.cfg            closed-form tables, no simulation
//   mtb simulate   -c dom.cfg              empirical tails, bound optional
//   mtb verify     -c dom.cfg -o out/      tails vs bound, PASS/WEAK-PASS/FAIL
//   mtb regression -c reg.cfg              least-squares error experiments
//   mtb invariance -c inv.cfg              stopped paths vs the Wiener limit
//   mtb report     --in out/x.json         re-emit a stored report
//
// Exit codes: 0 success, 1 a cell failed verification, 2 config error,
// 3 runtime error.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mtb/config.hpp"
#include "mtb/experiments.hpp"
#include "mtb/report.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::string format = "both";
    std::optional<std::uint64_t> seed;
    std::optional<long> reps;
    std::optional<int> threads;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("-c,--config", opts.config_path, "experiment config file")
        ->required()
        ->envname("MTB_CONFIG");
    cmd->add_option("--seed", opts.seed, "override run.seed")->envname("MTB_SEED");
    cmd->add_option("--reps", opts.reps, "override run.reps")->envname("MTB_REPS");
    cmd->add_option("--threads", opts.threads, "override run.threads (0 = hardware)")
        ->envname("MTB_THREADS");
    cmd->add_option("-o,--out", opts.out_dir, "directory for csv/json artifacts")
        ->envname("MTB_OUT");
    cmd->add_option("--format", opts.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->envname("MTB_FORMAT");
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw std::runtime_error("short write to " + path.string());
}

// Artifacts go under --out; without --out the report itself goes to stdout
// (csv unless --format json) and the one-line summary moves to stderr so
// piped output stays clean.
void emit_report(const mtb::Report& rep, const CommonOpts& opts) {
    const bool want_csv = opts.format != "json";
    const bool want_json = opts.format != "csv";
    std::ostream& note = opts.out_dir.empty() ? std::cerr : std::cout;

    if (!opts.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(opts.out_dir);
        const fs::path stem = fs::path(opts.out_dir) / rep.experiment;
        if (want_csv) {
            const fs::path p = stem.string() + ".csv";
            write_file(p, mtb::to_csv(rep));
            note << "wrote " << p.string() << "\n";
        }
        if (want_json) {
            const fs::path p = stem.string() + ".json";
            write_file(p, mtb::to_json(rep));
            note << "wrote " << p.string() << "\n";
        }
    } else {
        std::cout << (opts.format == "json" ? mtb::to_json(rep) : mtb::to_csv(rep));
    }
    note << "[" << rep.experiment << "] cells=" << rep.cells.size() << " seed=" << rep.seed
         << " overall=" << rep.overall << "\n";
}

const std::map<std::string, std::vector<std::string>>& allowed_kinds() {
    static const std::map<std::string, std::vector<std::string>> table = {
        {"bound", {"bound_table", "ldp_rate", "fuk_comparison"}},
        {"simulate", {"domination"}},
        {"verify", {"domination"}},
        {"regression", {"regression", "berry_esseen"}},
        {"invariance", {"invariance"}},
    };
    return table;
}

int run_experiment_command(const std::string& sub, const CommonOpts& opts) {
    mtb::Config cfg = mtb::Config::parse_file(opts.config_path);
    std::string kind = cfg.get_string("experiment");
    std::replace(kind.begin(), kind.end(), '-', '_');

    const auto& ok = allowed_kinds().at(sub);
    if (std::find(ok.begin(), ok.end(), kind) == ok.end())
        throw mtb::ConfigError(cfg.origin() + ": experiment '" + kind +
                               "' does not belong to the '" + sub + "' subcommand");
    if (sub == "verify" && !cfg.has("bound.name"))
        throw mtb::ConfigError(cfg.origin() +
                               ": the verify subcommand needs a [bound] section; "
                               "use simulate for estimation without a bound");

    mtb::RunOverrides overrides;
    overrides.seed = opts.seed;
    overrides.reps = opts.reps;
    overrides.threads = opts.threads;

    const mtb::Report rep = mtb::run_experiment(cfg, overrides);
    emit_report(rep, opts);
    std::cerr << "wall_seconds=" << rep.wall_seconds << "\n";
    return rep.overall == "FAIL" ? 1 : 0;
}

int run_report_command(const std::string& in_path, const CommonOpts& opts) {
    std::ifstream in(in_path, std::ios::binary);
    if (!in) throw mtb::ConfigError("cannot open report file " + in_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const mtb::Report rep = mtb::report_from_json(text);
    emit_report(rep, opts);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"closed-form martingale deviation bounds and Monte Carlo checks"};
    app.require_subcommand(1);

    CommonOpts opts;
    CLI::App* bound = app.add_subcommand("bound", "closed-form tables and rates, no simulation");
    CLI::App* simulate = app.add_subcommand("simulate", "empirical tails, bound columns optional");
    CLI::App* verify = app.add_subcommand("verify", "empirical tails with domination verdicts");
    CLI::App* regression =
        app.add_subcommand("regression", "least-squares error tails and cdf envelopes");
    CLI::App* invariance =
        app.add_subcommand("invariance", "stopped-path functionals against the Wiener limit");
    for (CLI::App* cmd : {bound, simulate, verify, regression, invariance})
        add_common(cmd, opts);

    CLI::App* report = app.add_subcommand("report", "re-emit a stored json report");
    std::string in_path;
    report->add_option("--in", in_path, "stored json report")->required()->envname("MTB_IN");
    report->add_option("-o,--out", opts.out_dir, "directory for csv/json artifacts")
        ->envname("MTB_OUT");
    report->add_option("--format", opts.format, "csv, json or both")
        ->check(CLI::IsMember({"csv", "json", "both"}))
        ->envname("MTB_FORMAT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2; // bad flags are config errors; --help is not
    }

    try {
        for (CLI::App* cmd : {bound, simulate, verify, regression, invariance})
            if (cmd->parsed()) return run_experiment_command(cmd->get_name(), opts);
        if (report->parsed()) return run_report_command(in_path, opts);
        return 2;
    } catch (const mtb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
