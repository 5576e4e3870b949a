#pragma once
// INI-style experiment configuration: `key = value` lines grouped under
// [section] headers, `#`/`;` comments.  Keys are addressed as "section.key".
// Every lookup records the key as consumed; after an experiment has pulled
// everything it understands, `reject_unknown_keys` turns leftover keys into
// position-annotated errors, so a typo in a hypothesis constant cannot
// silently fall back to a default.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mtb/distributions.hpp"

namespace mtb {

// configuration problem with a file position when one is known (line 0 = none)
struct ConfigError : std::runtime_error {
    ConfigError(const std::string& message, int line_number = 0)
        : std::runtime_error(message), line(line_number) {}
    int line = 0;
};

class Config {
  public:
    static Config parse_file(const std::string& path);
    static Config parse_string(const std::string& text, const std::string& origin = "<config>");

    bool has(const std::string& key) const;

    // typed getters; the two-argument forms fall back to the default when the
    // key is absent, the one-argument forms make the key required
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_long(const std::string& key) const;
    long get_long(const std::string& key, long fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

    // grid values: either an explicit comma list "0.5, 1, 2" or a linear
    // range "start:stop:count" with count >= 1
    std::vector<double> get_grid(const std::string& key) const;
    std::vector<double> get_grid(const std::string& key, const std::vector<double>& fallback) const;

    // distribution spec, e.g. normal(1), laplace(0.5), pareto(1.8; 1),
    // rademacher, exponential(2), three_point(-1;0;1; 0.3;0.4;0.3),
    // tail_spec(0.5; 3; 1; 0.3)
    Distribution get_distribution(const std::string& key) const;
    Distribution get_distribution(const std::string& key, const Distribution& fallback) const;

    // throws for the first stored key that was never consumed by a getter
    void reject_unknown_keys() const;

    // key/value pairs in file order, for echoing into reports
    std::vector<std::pair<std::string, std::string>> items() const;

    const std::string& origin() const { return origin_; }

  private:
    struct Entry {
        std::string key;
        std::string value;
        int line = 0;
        mutable bool consumed = false;
    };
    const Entry* find(const std::string& key) const;
    const Entry& require(const std::string& key) const;

    std::string origin_;
    std::vector<Entry> entries_;
};

// the spec string the parser accepts for this law, parameters included
std::string distribution_spec(const Distribution& d);
Distribution parse_distribution(const std::string& text);

// numeric grid in the same "list or start:stop:count" grammar
std::vector<double> parse_grid(const std::string& text);

} // namespace mtb
