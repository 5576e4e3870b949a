#include "mtb/report.hpp"

#include <cstdio>
#include <stdexcept>

#include "json.hpp"

namespace mtb {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string opt_number(const std::optional<double>& v) {
    return v.has_value() ? csv_number(*v) : std::string();
}

ordered_json opt_json(const std::optional<double>& v) {
    return v.has_value() ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json opt_json(const std::optional<long>& v) {
    return v.has_value() ? ordered_json(*v) : ordered_json(nullptr);
}

template <typename T>
std::optional<T> opt_from(const ordered_json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<T>();
}

} // namespace

std::string csv_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string overall_verdict(const std::vector<ReportCell>& cells) {
    bool any_weak = false, any_pass = false;
    for (const auto& cell : cells) {
        if (cell.verdict == "FAIL") return "FAIL";
        if (cell.verdict == "WEAK-PASS") any_weak = true;
        if (cell.verdict == "PASS") any_pass = true;
    }
    if (any_weak) return "WEAK-PASS";
    if (any_pass) return "PASS";
    return "N/A";
}

std::string to_csv(const Report& report) {
    std::string out =
        "experiment,model,n,alpha,p,delta,x,statistic,bound_name,bound_value,"
        "bound_branch,p_hat,ci_low,ci_high,verdict,seed\n";
    for (const auto& c : report.cells) {
        out += csv_escape(c.experiment);
        out += ',';
        out += csv_escape(c.model);
        out += ',';
        out += c.n.has_value() ? std::to_string(*c.n) : std::string();
        out += ',';
        out += opt_number(c.alpha);
        out += ',';
        out += opt_number(c.p);
        out += ',';
        out += opt_number(c.delta);
        out += ',';
        out += opt_number(c.x);
        out += ',';
        out += csv_escape(c.statistic);
        out += ',';
        out += csv_escape(c.bound_name);
        out += ',';
        out += opt_number(c.bound_value);
        out += ',';
        out += csv_escape(c.bound_branch);
        out += ',';
        out += opt_number(c.p_hat);
        out += ',';
        out += opt_number(c.ci_low);
        out += ',';
        out += opt_number(c.ci_high);
        out += ',';
        out += csv_escape(c.verdict);
        out += ',';
        out += std::to_string(c.seed);
        out += '\n';
    }
    return out;
}

std::string to_json(const Report& report) {
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["version"] = report.version;
    j["experiment"] = report.experiment;
    j["seed"] = report.seed;
    j["overall"] = report.overall;
    j["config"] = ordered_json::array();
    for (const auto& [key, value] : report.config_echo)
        j["config"].push_back(ordered_json{{"key", key}, {"value", value}});
    j["cells"] = ordered_json::array();
    for (const auto& c : report.cells) {
        ordered_json cell;
        cell["experiment"] = c.experiment;
        cell["model"] = c.model;
        cell["n"] = opt_json(c.n);
        cell["alpha"] = opt_json(c.alpha);
        cell["p"] = opt_json(c.p);
        cell["delta"] = opt_json(c.delta);
        cell["x"] = opt_json(c.x);
        cell["statistic"] = c.statistic;
        cell["bound_name"] = c.bound_name;
        cell["bound_value"] = opt_json(c.bound_value);
        cell["bound_branch"] = c.bound_branch;
        cell["p_hat"] = opt_json(c.p_hat);
        cell["ci_low"] = opt_json(c.ci_low);
        cell["ci_high"] = opt_json(c.ci_high);
        cell["verdict"] = c.verdict;
        cell["seed"] = c.seed;
        j["cells"].push_back(std::move(cell));
    }
    return j.dump(2) + "\n";
}

Report report_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& ex) {
        throw std::invalid_argument(std::string("report JSON parse error: ") + ex.what());
    }
    if (!j.contains("schema_version") || j["schema_version"].get<int>() != kReportSchemaVersion)
        throw std::invalid_argument("report JSON: missing or unsupported schema_version");

    Report report;
    try {
        report.version = j.at("version").get<std::string>();
        report.experiment = j.at("experiment").get<std::string>();
        report.seed = j.at("seed").get<std::uint64_t>();
        report.overall = j.at("overall").get<std::string>();
        for (const auto& item : j.at("config"))
            report.config_echo.emplace_back(item.at("key").get<std::string>(),
                                            item.at("value").get<std::string>());
        for (const auto& cj : j.at("cells")) {
            ReportCell c;
            c.experiment = cj.at("experiment").get<std::string>();
            c.model = cj.at("model").get<std::string>();
            c.n = opt_from<long>(cj.at("n"));
            c.alpha = opt_from<double>(cj.at("alpha"));
            c.p = opt_from<double>(cj.at("p"));
            c.delta = opt_from<double>(cj.at("delta"));
            c.x = opt_from<double>(cj.at("x"));
            c.statistic = cj.at("statistic").get<std::string>();
            c.bound_name = cj.at("bound_name").get<std::string>();
            c.bound_value = opt_from<double>(cj.at("bound_value"));
            c.bound_branch = cj.at("bound_branch").get<std::string>();
            c.p_hat = opt_from<double>(cj.at("p_hat"));
            c.ci_low = opt_from<double>(cj.at("ci_low"));
            c.ci_high = opt_from<double>(cj.at("ci_high"));
            c.verdict = cj.at("verdict").get<std::string>();
            c.seed = cj.at("seed").get<std::uint64_t>();
            report.cells.push_back(std::move(c));
        }
    } catch (const ordered_json::exception& ex) {
        throw std::invalid_argument(std::string("report JSON: ") + ex.what());
    }
    return report;
}

} // namespace mtb
