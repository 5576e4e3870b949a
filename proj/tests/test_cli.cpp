#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include "mtb/config.hpp"
#include "mtb/experiments.hpp"
#include "mtb/report.hpp"

using namespace mtb;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string data_path(const std::string& name) {
    const char* dir = std::getenv("MTB_DATA_DIR");
    REQUIRE(dir != nullptr);
    return (fs::path(dir) / name).string();
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

// run the installed binary through the shell; env_prefix tests MTB_* overrides
CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const char* cli = std::getenv("MTB_CLI_PATH");
    REQUIRE(cli != nullptr);
    static int counter = 0;
    const fs::path base =
        fs::temp_directory_path() /
        ("mtb_cli_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
    const fs::path out_file = base.string() + ".out";
    const fs::path err_file = base.string() + ".err";
    const std::string cmd = env_prefix + "\"" + std::string(cli) + "\" " + args + " > \"" +
                            out_file.string() + "\" 2> \"" + err_file.string() + "\"";
    const int status = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    fs::remove(out_file);
    fs::remove(err_file);
    return r;
}

// unique scratch directory, removed on scope exit
struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("mtb_dir_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const char* kMinimalTable = R"(experiment = bound-table

[bound]
name = two_regime
alpha = 0.5
u = 1
c_n = 1

[grid]
x = 0, 1, 2
)";

} // namespace

// --- config parsing ---------------------------------------------------------

TEST_CASE("config: sections, comments, types and consumption") {
    const std::string text =
        "experiment = domination  # trailing comment\n"
        "\n"
        "; full-line comment\n"
        "[run]\n"
        "seed = 123\n"
        "reps = 5000\n"
        "[model]\n"
        "alpha = 0.25\n"
        "label = two words\n";
    Config cfg = Config::parse_string(text, "mem.cfg");

    CHECK(cfg.origin() == "mem.cfg");
    CHECK(cfg.has("run.seed"));
    CHECK_FALSE(cfg.has("run.missing"));
    CHECK(cfg.get_string("experiment") == "domination");
    CHECK(cfg.get_u64("run.seed", 1) == 123);
    CHECK(cfg.get_long("run.reps") == 5000);
    CHECK(cfg.get_double("model.alpha") == 0.25);
    CHECK(cfg.get_string("model.label") == "two words");
    CHECK(cfg.get_double("model.absent", 2.5) == 2.5);
    CHECK(cfg.get_long("run.absent", -7) == -7);

    // everything above was consumed, so nothing is left to reject
    CHECK_NOTHROW(cfg.reject_unknown_keys());

    const auto items = cfg.items();
    REQUIRE(items.size() == 5);
    CHECK(items[0].first == "experiment");
    CHECK(items[1].first == "run.seed");
    CHECK(items[4].second == "two words");
}

TEST_CASE("config: errors carry the file position") {
    CHECK_THROWS_WITH_AS(Config::parse_string("experiment = a\nnot a key value line\n", "f.cfg"),
                         doctest::Contains("f.cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("[Bad Section]\n", "f.cfg"),
                         doctest::Contains("f.cfg:1"), ConfigError);
    CHECK_THROWS_WITH_AS(Config::parse_string("a = 1\na = 2\n", "f.cfg"),
                         doctest::Contains("duplicate"), ConfigError);

    Config cfg = Config::parse_string("[run]\nreps = 1.5\nseed = twelve\n", "f.cfg");
    CHECK_THROWS_WITH_AS(cfg.get_long("run.reps"), doctest::Contains("f.cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg.get_double("run.seed"), doctest::Contains("f.cfg:3"), ConfigError);
    CHECK_THROWS_WITH_AS(cfg.get_double("run.absent"), doctest::Contains("run.absent"),
                         ConfigError);

    // first unconsumed key is reported with its line
    Config stray = Config::parse_string("a = 1\nb = 2\n", "g.cfg");
    (void)stray.get_long("a");
    CHECK_THROWS_WITH_AS(stray.reject_unknown_keys(), doctest::Contains("g.cfg:2"), ConfigError);
    CHECK_THROWS_WITH_AS(stray.reject_unknown_keys(), doctest::Contains("'b'"), ConfigError);
}

TEST_CASE("config: distribution specs round-trip through their printed form") {
    const std::vector<std::string> specs = {
        "normal(1)",
        "normal(0.25)",
        "laplace(0.5)",
        "pareto(1.8; 1)",
        "rademacher",
        "exponential(2)",
        "three_point(-1.5; 0; 1.5; 0.3; 0.4; 0.3)",
        "tail_spec(0.5; 3; 1; 0.3)",
    };
    for (const auto& s : specs) {
        CAPTURE(s);
        const Distribution d = parse_distribution(s);
        CHECK(distribution_spec(d) == s);
        // and the printed form parses back to the same print
        CHECK(distribution_spec(parse_distribution(distribution_spec(d))) == s);
    }

    // scale parameters may be omitted and default to 1
    CHECK(distribution_spec(parse_distribution("normal()")) == "normal(1)");
    CHECK(distribution_spec(parse_distribution("pareto(3)")) == "pareto(3; 1)");

    CHECK_THROWS_AS(parse_distribution("cauchy(1)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_distribution("rademacher(1)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_distribution("normal(1; 2)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_distribution("three_point(1; 2)"), std::invalid_argument);
    // mean-zero validation happens at parse time
    CHECK_THROWS_AS(parse_distribution("three_point(-1; 0; 2; 0.3; 0.4; 0.3)"),
                    std::invalid_argument);
}

TEST_CASE("config: grids accept lists and linear ranges") {
    CHECK(parse_grid("0.5, 1, 2") == std::vector<double>{0.5, 1.0, 2.0});
    CHECK(parse_grid("2") == std::vector<double>{2.0});
    CHECK(parse_grid("0:1:5") == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(parse_grid("3:3:1") == std::vector<double>{3.0});

    CHECK_THROWS_AS(parse_grid(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("1:2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS(parse_grid("1, x"), std::invalid_argument);

    Config cfg = Config::parse_string("[grid]\nx = 1:4:4\n", "f.cfg");
    CHECK(cfg.get_grid("grid.x") == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(cfg.get_grid("grid.absent", {9.0}) == std::vector<double>{9.0});
}

// --- report serialization ----------------------------------------------------

namespace {

Report sample_report() {
    Report rep;
    rep.experiment = "domination";
    rep.seed = 42;
    rep.config_echo = {{"experiment", "domination"}, {"model.kind", "iid_moment"}};
    ReportCell a;
    a.experiment = "domination";
    a.model = "iid_moment[three_point(-1; 0; 1; 0.25; 0.5; 0.25)]"; // needs no quoting
    a.n = 100;
    a.alpha = 0.5;
    a.x = 1.5;
    a.statistic = "max_partial";
    a.bound_name = "two_regime";
    a.bound_value = 0.1 + 0.2; // deliberately not representable as a short decimal
    a.bound_branch = "sub_gaussian";
    a.p_hat = 0.125;
    a.ci_low = 0.1;
    a.ci_high = 0.15;
    a.verdict = "PASS";
    a.seed = 42;
    ReportCell b;
    b.experiment = "domination";
    b.model = "weird \"label\", with csv metacharacters";
    b.verdict = "N/A";
    b.seed = 42;
    rep.cells = {a, b};
    rep.overall = overall_verdict(rep.cells);
    return rep;
}

} // namespace

TEST_CASE("report: csv has the fixed column set and escapes metacharacters") {
    const Report rep = sample_report();
    const std::string csv = to_csv(rep);

    std::istringstream lines(csv);
    std::string header, row1, row2, extra;
    REQUIRE(std::getline(lines, header));
    REQUIRE(std::getline(lines, row1));
    REQUIRE(std::getline(lines, row2));
    CHECK_FALSE(std::getline(lines, extra));

    CHECK(header ==
          "experiment,model,n,alpha,p,delta,x,statistic,bound_name,bound_value,bound_branch,"
          "p_hat,ci_low,ci_high,verdict,seed");
    CHECK(row1 == "domination,iid_moment[three_point(-1; 0; 1; 0.25; 0.5; 0.25)],100,0.5,,,1.5,"
                  "max_partial,two_regime," +
                      csv_number(0.1 + 0.2) + ",sub_gaussian,0.125," + csv_number(0.1) + "," +
                      csv_number(0.15) + ",PASS,42");
    // RFC 4180 quoting: embedded quotes double, the field gains outer quotes
    CHECK(row2 == "domination,\"weird \"\"label\"\", with csv metacharacters\",,,,,,,,,,,,,N/A,42");
    // 17 significant digits survive the decimal round-trip
    CHECK(std::stod(csv_number(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("report: overall verdict keeps the worst cell") {
    auto with = [](std::vector<std::string> verdicts) {
        std::vector<ReportCell> cells;
        for (auto& v : verdicts) {
            ReportCell c;
            c.verdict = v;
            cells.push_back(c);
        }
        return overall_verdict(cells);
    };
    CHECK(with({}) == "N/A");
    CHECK(with({"N/A", "N/A"}) == "N/A");
    CHECK(with({"N/A", "PASS"}) == "PASS");
    CHECK(with({"PASS", "WEAK-PASS"}) == "WEAK-PASS");
    CHECK(with({"WEAK-PASS", "FAIL", "PASS"}) == "FAIL");
}

TEST_CASE("report: json serialization is a fixpoint of parse and emit") {
    const Report rep = sample_report();
    const std::string once = to_json(rep);
    const Report back = report_from_json(once);
    CHECK(to_json(back) == once);

    CHECK(back.experiment == rep.experiment);
    CHECK(back.seed == rep.seed);
    CHECK(back.overall == rep.overall);
    CHECK(back.config_echo == rep.config_echo);
    REQUIRE(back.cells.size() == 2);
    CHECK(back.cells[0].bound_value == 0.1 + 0.2); // exact through the json layer
    CHECK_FALSE(back.cells[1].bound_value.has_value());
    CHECK_FALSE(back.cells[1].n.has_value());
    CHECK(back.cells[1].model == rep.cells[1].model);

    // and the csv rendering agrees before and after the round-trip
    CHECK(to_csv(back) == to_csv(rep));
}

TEST_CASE("report: the schema version is enforced") {
    std::string text = to_json(sample_report());
    const std::string needle = "\"schema_version\": 1";
    const auto at = text.find(needle);
    REQUIRE(at != std::string::npos);
    text.replace(at, needle.size(), "\"schema_version\": 99");
    CHECK_THROWS_WITH_AS(report_from_json(text), doctest::Contains("schema"),
                         std::invalid_argument);
    CHECK_THROWS_AS(report_from_json("not json at all"), std::exception);
}

// --- run_experiment ----------------------------------------------------------

TEST_CASE("experiments: the minimal table reproduces the closed forms") {
    Config cfg = Config::parse_string(kMinimalTable, "mem.cfg");
    const Report rep = run_experiment(cfg);

    CHECK(rep.experiment == "bound_table");
    CHECK(rep.seed == 1);
    CHECK(rep.overall == "N/A");
    REQUIRE(rep.cells.size() == 3);

    // closed forms of the two regimes at u = C_n = 1, alpha = 1/2
    const double at1 = std::exp(-0.5) + std::exp(-1.0);
    const double at2 = std::exp(0.25 - std::sqrt(2.0)) + 0.25 * std::exp(-std::sqrt(2.0));
    CHECK(rep.cells[0].bound_value == 1.0);
    CHECK(rep.cells[0].bound_branch == "sub_gaussian");
    CHECK(rep.cells[1].bound_value == doctest::Approx(at1).epsilon(1e-15));
    CHECK(rep.cells[2].bound_value == doctest::Approx(at2).epsilon(1e-15));
    CHECK(rep.cells[2].bound_branch == "subexponential");
    for (const auto& cell : rep.cells) {
        CHECK(cell.verdict == "N/A");
        CHECK_FALSE(cell.p_hat.has_value());
        CHECK(cell.alpha == 0.5);
    }
    // the echo preserves the raw file spelling
    REQUIRE_FALSE(rep.config_echo.empty());
    CHECK(rep.config_echo[0] == std::pair<std::string, std::string>{"experiment", "bound-table"});
}

TEST_CASE("experiments: overrides beat the config and reps narrow the interval") {
    const std::string text =
        "experiment = domination\n"
        "[run]\nseed = 5\nreps = 250\n"
        "[model]\nkind = self_normalized\nn = 20\n"
        "[grid]\nx = 1\n";
    Config c1 = Config::parse_string(text);
    const Report r1 = run_experiment(c1);
    CHECK(r1.seed == 5);
    REQUIRE(r1.cells.size() == 1);
    CHECK(r1.cells[0].seed == 5);
    CHECK(r1.cells[0].verdict == "N/A"); // no [bound] section

    RunOverrides ov;
    ov.seed = 99;
    ov.reps = 4000;
    Config c2 = Config::parse_string(text);
    const Report r2 = run_experiment(c2, ov);
    CHECK(r2.seed == 99);
    CHECK(r2.cells[0].seed == 99);
    const double w1 = *r1.cells[0].ci_high - *r1.cells[0].ci_low;
    const double w2 = *r2.cells[0].ci_high - *r2.cells[0].ci_low;
    CHECK(w2 < w1);

    // same config and seed reproduce the estimate exactly
    Config c3 = Config::parse_string(text);
    const Report r3 = run_experiment(c3);
    CHECK(r3.cells[0].p_hat == r1.cells[0].p_hat);
    CHECK(r3.cells[0].ci_high == r1.cells[0].ci_high);
}

TEST_CASE("experiments: config mistakes are position-annotated errors") {
    Config bad = Config::parse_string("experiment = nonsense\n", "m.cfg");
    CHECK_THROWS_WITH_AS(run_experiment(bad), doctest::Contains("nonsense"), ConfigError);

    Config stray = Config::parse_string(std::string(kMinimalTable) + "typo_key = 1\n", "m.cfg");
    CHECK_THROWS_WITH_AS(run_experiment(stray), doctest::Contains("typo_key"), ConfigError);

    Config nokind = Config::parse_string("experiment = domination\n[grid]\nx = 1\n", "m.cfg");
    CHECK_THROWS_WITH_AS(run_experiment(nokind), doctest::Contains("model.kind"), ConfigError);

    Config badbound = Config::parse_string(
        "experiment = bound-table\n[bound]\nname = no_such_bound\nalpha = 0.5\n[grid]\nx = 1\n",
        "m.cfg");
    CHECK_THROWS_WITH_AS(run_experiment(badbound), doctest::Contains("no_such_bound"),
                         ConfigError);

    // a bound whose value depends on n needs to be told n
    Config needn = Config::parse_string(
        "experiment = bound-table\n[bound]\nname = iid_subexp\n[grid]\nx = 1\n", "m.cfg");
    CHECK_THROWS_AS(run_experiment(needn), ConfigError);
}

TEST_CASE("experiments: normalized rates approach the analytic target") {
    const std::string text =
        "experiment = ldp-rate\n"
        "[model]\nkind = iid_subexp\nbase = laplace(0.5)\nalpha = 0.5\nn = 100\n"
        "[bound]\nname = two_regime\n"
        "[grid]\nepsilon = 0.5\nn = 100, 10000\n";
    Config cfg = Config::parse_string(text);
    const Report rep = run_experiment(cfg);
    REQUIRE(rep.cells.size() == 3);

    const auto& target = rep.cells[0];
    CHECK(target.bound_name == "analytic_target");
    CHECK_FALSE(target.n.has_value());
    CHECK(*target.bound_value == doctest::Approx(-std::sqrt(0.5)).epsilon(1e-15));

    const double r100 = *rep.cells[1].bound_value;
    const double r10000 = *rep.cells[2].bound_value;
    CHECK(std::abs(r10000 - *target.bound_value) < std::abs(r100 - *target.bound_value));
    CHECK(r10000 > *target.bound_value); // the bound approaches from above
}

// --- the installed binary ----------------------------------------------------

TEST_CASE("cli: the minimal table emits frozen bytes") {
    const CliResult r =
        run_cli("bound -c \"" + data_path("bound_table_minimal.cfg") + "\" --format csv");
    CHECK(r.code == 0);

    const double at1 = std::exp(-0.5) + std::exp(-1.0);
    const double at2 = std::exp(0.25 - std::sqrt(2.0)) + 0.25 * std::exp(-std::sqrt(2.0));
    const std::string expected =
        "experiment,model,n,alpha,p,delta,x,statistic,bound_name,bound_value,bound_branch,"
        "p_hat,ci_low,ci_high,verdict,seed\n"
        "bound_table,,,0.5,,,0,,two_regime,1,sub_gaussian,,,,N/A,1\n"
        "bound_table,,,0.5,,,1,,two_regime," +
        csv_number(at1) +
        ",subexponential,,,,N/A,1\n"
        "bound_table,,,0.5,,,2,,two_regime," +
        csv_number(at2) + ",subexponential,,,,N/A,1\n";
    CHECK(r.out == expected);
    CHECK(r.err.find("overall=N/A") != std::string::npos);
}

TEST_CASE("cli: a fixed seed reproduces the csv byte for byte") {
    const std::string args =
        "verify -c \"" + data_path("domination_pass.cfg") + "\" --format csv";
    const CliResult a = run_cli(args);
    const CliResult b = run_cli(args);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("FAIL") == std::string::npos);
}

TEST_CASE("cli: artifacts survive the report round-trip byte for byte") {
    TempDir dir;
    const CliResult run = run_cli("verify -c \"" + data_path("domination_pass.cfg") +
                                  "\" -o \"" + dir.path.string() + "\" --format both");
    REQUIRE(run.code == 0);
    const fs::path csv_path = dir.path / "domination.csv";
    const fs::path json_path = dir.path / "domination.json";
    REQUIRE(fs::exists(csv_path));
    REQUIRE(fs::exists(json_path));
    CHECK(run.out.find("wrote") != std::string::npos);

    const CliResult as_json =
        run_cli("report --in \"" + json_path.string() + "\" --format json");
    CHECK(as_json.code == 0);
    CHECK(as_json.out == slurp(json_path));

    const CliResult as_csv = run_cli("report --in \"" + json_path.string() + "\" --format csv");
    CHECK(as_csv.code == 0);
    CHECK(as_csv.out == slurp(csv_path));
}

TEST_CASE("cli: exit codes separate failed checks from config and usage errors") {
    CHECK(run_cli("verify -c \"" + data_path("domination_pass.cfg") + "\"").code == 0);

    const CliResult fail = run_cli("verify -c \"" + data_path("domination_fail.cfg") + "\"");
    CHECK(fail.code == 1);
    CHECK(fail.out.find("FAIL") != std::string::npos);

    const CliResult unknown = run_cli("simulate -c \"" + data_path("unknown_key.cfg") + "\"");
    CHECK(unknown.code == 2);
    CHECK(unknown.err.find("unknown key 'bogus_key'") != std::string::npos);
    CHECK(unknown.err.find("unknown_key.cfg:2") != std::string::npos);

    // kind/subcommand mismatch, missing file, bad flag value, no subcommand
    CHECK(run_cli("bound -c \"" + data_path("domination_pass.cfg") + "\"").code == 2);
    CHECK(run_cli("verify -c /no/such/file.cfg").code == 2);
    CHECK(run_cli("bound -c \"" + data_path("bound_table_minimal.cfg") + "\" --format xml").code ==
          2);
    CHECK(run_cli("").code == 2);
    CHECK(run_cli("--help").code == 0);

    // verify insists on a bound section; simulate accepts the same config
    TempDir dir;
    const fs::path cfg = dir.path / "nobound.cfg";
    std::ofstream(cfg) << "experiment = domination\n[run]\nreps = 200\n"
                          "[model]\nkind = self_normalized\nn = 20\n[grid]\nx = 1\n";
    CHECK(run_cli("verify -c \"" + cfg.string() + "\"").code == 2);
    CHECK(run_cli("simulate -c \"" + cfg.string() + "\"").code == 0);
}

TEST_CASE("cli: seed precedence is flag over environment over config") {
    const std::string base = "verify -c \"" + data_path("domination_pass.cfg") + "\" --format csv";
    auto seed_column = [](const std::string& csv) {
        const auto line_end = csv.find('\n', csv.find('\n') + 1); // end of first data row
        const auto row = csv.substr(csv.find('\n') + 1, line_end - csv.find('\n') - 1);
        return row.substr(row.rfind(',') + 1);
    };
    CHECK(seed_column(run_cli(base).out) == "42");                          // config
    CHECK(seed_column(run_cli(base, "MTB_SEED=555 ").out) == "555");        // env
    CHECK(seed_column(run_cli(base + " --seed 777", "MTB_SEED=555 ").out) == "777"); // flag
}

TEST_CASE("cli: the regression experiment runs end to end") {
    const CliResult r =
        run_cli("regression -c \"" + data_path("regression_weibull.cfg") + "\" --format csv");
    CHECK(r.code == 0);
    CHECK(r.out.find("weibull") != std::string::npos);
    CHECK(r.out.find("regression[phi=normal(1); noise=laplace(") != std::string::npos);
}
