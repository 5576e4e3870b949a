#include "mtb/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mtb {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_'))
            return false;
    return true;
}

// cut `# ...` / `; ...` comments; a marker only counts at the start of the
// line or after whitespace, so values themselves may not contain it
std::string strip_comment(const std::string& line) {
    for (std::size_t i = 0; i < line.size(); ++i) {
        if ((line[i] == '#' || line[i] == ';') &&
            (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t'))
            return line.substr(0, i);
    }
    return line;
}

std::vector<std::string> split_args(const std::string& s, const char* seps) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::strchr(seps, c) != nullptr) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    if (out.size() == 1 && out[0].empty()) out.clear();
    return out;
}

double parse_double_token(const std::string& token, const std::string& what) {
    const std::string t = trim(token);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(what + ": expected a number, got '" + t + "'");
    }
    if (used != t.size())
        throw std::invalid_argument(what + ": trailing characters in number '" + t + "'");
    return v;
}

long parse_long_token(const std::string& token, const std::string& what) {
    const double v = parse_double_token(token, what);
    const long l = static_cast<long>(v);
    if (static_cast<double>(l) != v)
        throw std::invalid_argument(what + ": expected an integer, got '" + trim(token) + "'");
    return l;
}

// shortest decimal that parses back to the same double, for human-facing labels
std::string shortest_double(double v) {
    char buf[64];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::stod(buf) == v) break;
    }
    return buf;
}

} // namespace

Distribution parse_distribution(const std::string& text) {
    const std::string t = trim(text);
    std::string name = t;
    std::vector<std::string> args;
    const std::size_t open = t.find('(');
    if (open != std::string::npos) {
        if (t.back() != ')')
            throw std::invalid_argument("distribution '" + t + "': missing closing parenthesis");
        name = trim(t.substr(0, open));
        args = split_args(t.substr(open + 1, t.size() - open - 2), ",;");
    }
    auto want = [&](std::size_t lo, std::size_t hi) {
        if (args.size() < lo || args.size() > hi)
            throw std::invalid_argument("distribution '" + name + "': wrong argument count");
    };
    auto num = [&](std::size_t i) { return parse_double_token(args[i], "distribution " + name); };

    Distribution d;
    if (name == "normal") {
        want(0, 1);
        d = Normal{args.empty() ? 1.0 : num(0)};
    } else if (name == "laplace") {
        want(0, 1);
        d = Laplace{args.empty() ? 1.0 : num(0)};
    } else if (name == "pareto") {
        want(1, 2);
        d = SymmetricPareto{num(0), args.size() > 1 ? num(1) : 1.0};
    } else if (name == "rademacher") {
        want(0, 0);
        d = Rademacher{};
    } else if (name == "exponential") {
        want(0, 1);
        d = Exponential{args.empty() ? 1.0 : num(0)};
    } else if (name == "three_point") {
        want(6, 6);
        d = make_three_point(num(0), num(1), num(2), num(3), num(4), num(5));
    } else if (name == "tail_spec") {
        want(4, 4);
        d = make_tail_spec(num(0), num(1), num(2), num(3));
    } else {
        throw std::invalid_argument("unknown distribution '" + name + "'");
    }
    validate(d);
    return d;
}

std::string distribution_spec(const Distribution& dist) {
    struct V {
        std::string operator()(const Normal& d) { return "normal(" + shortest_double(d.sd) + ")"; }
        std::string operator()(const Laplace& d) {
            return "laplace(" + shortest_double(d.scale) + ")";
        }
        std::string operator()(const SymmetricPareto& d) {
            return "pareto(" + shortest_double(d.index) + "; " + shortest_double(d.scale) + ")";
        }
        std::string operator()(const Rademacher&) { return "rademacher"; }
        std::string operator()(const Exponential& d) {
            return "exponential(" + shortest_double(d.rate) + ")";
        }
        std::string operator()(const ThreePoint& d) {
            std::string s = "three_point(";
            for (int i = 0; i < 3; ++i) s += shortest_double(d.value[i]) + "; ";
            for (int i = 0; i < 3; ++i) s += shortest_double(d.prob[i]) + (i < 2 ? "; " : ")");
            return s;
        }
        std::string operator()(const TailSpecLaw& d) {
            const double tail = d.c * std::pow(d.x0, -d.q) * std::exp(-std::pow(d.x0, d.alpha));
            return "tail_spec(" + shortest_double(d.alpha) + "; " + shortest_double(d.q) + "; " +
                   shortest_double(d.x0) + "; " + shortest_double(tail) + ")";
        }
    };
    return std::visit(V{}, dist);
}

std::vector<double> parse_grid(const std::string& text) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("grid: empty value");
    if (t.find(':') != std::string::npos) {
        auto parts = split_args(t, ":");
        if (parts.size() != 3)
            throw std::invalid_argument("grid '" + t + "': want start:stop:count");
        const double start = parse_double_token(parts[0], "grid start");
        const double stop = parse_double_token(parts[1], "grid stop");
        const long count = parse_long_token(parts[2], "grid count");
        if (count < 1) throw std::invalid_argument("grid '" + t + "': count must be >= 1");
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(count));
        if (count == 1) {
            out.push_back(start);
        } else {
            for (long i = 0; i < count; ++i)
                out.push_back(start + (stop - start) * static_cast<double>(i) /
                                          static_cast<double>(count - 1));
        }
        return out;
    }
    std::vector<double> out;
    for (const auto& tok : split_args(t, ","))
        out.push_back(parse_double_token(tok, "grid value"));
    if (out.empty()) throw std::invalid_argument("grid: empty list");
    return out;
}

Config Config::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_string(buf.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                      ": unterminated section header",
                                  line_no);
            section = trim(line.substr(1, line.size() - 2));
            if (!valid_name(section))
                throw ConfigError(origin + ":" + std::to_string(line_no) +
                                      ": bad section name '" + section + "'",
                                  line_no);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                                  ": expected 'key = value', got '" + line + "'",
                              line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_name(key))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": bad key name '" + key +
                                  "'",
                              line_no);
        if (value.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty value for '" +
                                  key + "'",
                              line_no);
        const std::string full = section.empty() ? key : section + "." + key;
        if (const Entry* prev = cfg.find(full))
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                                  full + "' (first set on line " + std::to_string(prev->line) +
                                  ")",
                              line_no);
        cfg.entries_.push_back(Entry{full, value, line_no, false});
    }
    return cfg;
}

const Config::Entry* Config::find(const std::string& key) const {
    for (const auto& e : entries_)
        if (e.key == key) return &e;
    return nullptr;
}

const Config::Entry& Config::require(const std::string& key) const {
    const Entry* e = find(key);
    if (e == nullptr) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    e->consumed = true;
    return *e;
}

bool Config::has(const std::string& key) const { return find(key) != nullptr; }

std::string Config::get_string(const std::string& key) const { return require(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const {
    const Entry& e = require(key);
    try {
        return parse_double_token(e.value, "key '" + key + "'");
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + ex.what(), e.line);
    }
}

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long Config::get_long(const std::string& key) const {
    const Entry& e = require(key);
    try {
        return parse_long_token(e.value, "key '" + key + "'");
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": " + ex.what(), e.line);
    }
}

long Config::get_long(const std::string& key, long fallback) const {
    return has(key) ? get_long(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const Entry& e = require(key);
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(e.value, &used);
        if (used != e.value.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key +
                              "': expected an unsigned integer, got '" + e.value + "'",
                          e.line);
    }
}

std::vector<double> Config::get_grid(const std::string& key) const {
    const Entry& e = require(key);
    try {
        return parse_grid(e.value);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key + "': " +
                              ex.what(),
                          e.line);
    }
}

std::vector<double> Config::get_grid(const std::string& key,
                                     const std::vector<double>& fallback) const {
    return has(key) ? get_grid(key) : fallback;
}

Distribution Config::get_distribution(const std::string& key) const {
    const Entry& e = require(key);
    try {
        return parse_distribution(e.value);
    } catch (const std::invalid_argument& ex) {
        throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": key '" + key + "': " +
                              ex.what(),
                          e.line);
    }
}

Distribution Config::get_distribution(const std::string& key, const Distribution& fallback) const {
    return has(key) ? get_distribution(key) : fallback;
}

void Config::reject_unknown_keys() const {
    for (const auto& e : entries_)
        if (!e.consumed)
            throw ConfigError(origin_ + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                                  "' for this experiment",
                              e.line);
}

std::vector<std::pair<std::string, std::string>> Config::items() const {
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(entries_.size());
    for (const auto& e : entries_) out.emplace_back(e.key, e.value);
    return out;
}

} // namespace mtb
