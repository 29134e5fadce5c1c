#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "hosgd/config.hpp"

namespace hosgd::cli {

/// Parse failure with position information; cmd_run turns this into exit 2.
class SpecParseError : public std::runtime_error {
public:
    SpecParseError(const std::string& message, int line, int column)
        : std::runtime_error(message), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// The config format is a flat TOML subset: `key = value` pairs, optional
/// `[section]` headers, `#` comments. Values: quoted strings, integers,
/// floats, true/false, and `[int, int, ...]` lists.
struct ParsedValue {
    std::string raw;
    int line = 0;
    int column = 0;
};

struct ParsedSection {
    std::string name;  // "" for the root
    int line = 0;
    std::map<std::string, ParsedValue> entries;
};

struct ParsedFile {
    std::string path;
    std::vector<ParsedSection> sections;  // root first, then in file order

    const ParsedSection* find(const std::string& name) const;
};

ParsedFile parse_config_text(const std::string& text, const std::string& path);
ParsedFile parse_config_file(const std::string& path);

/// Typed accessors; every failure names the key and its position.
std::string get_string(const ParsedSection& s, const std::string& key);
long get_int(const ParsedSection& s, const std::string& key);
double get_double(const ParsedSection& s, const std::string& key);
std::uint64_t get_uint64(const ParsedSection& s, const std::string& key);
std::vector<std::uint64_t> get_uint64_list(const ParsedSection& s, const std::string& key);
bool has_key(const ParsedSection& s, const std::string& key);

/// Objective construction parameters named by an experiment spec.
struct ObjectiveParams {
    ObjectiveId id = ObjectiveId::quadratic;
    std::size_t d = 0;       // quadratic / sigmoid dimension
    double spread = 10.0;    // quadratic
    std::size_t K = 1000;    // sigmoid / two-layer sample count
    double noise = 0.05;     // sigmoid
    std::uint64_t data_seed = 1;
    std::size_t d_in = 0;    // two-layer
    std::size_t hidden = 0;  // two-layer
};

struct RunSpec {
    std::string label;
    Algorithm algorithm = Algorithm::hosgd;
    ObjectiveParams objective;
    std::size_t d = 0;
    int m = 1;
    int B = 1;
    int tau = 1;
    long N = 0;
    double mu = 0.0;           // resolved; <= 0 means "default" 1/sqrt(dN)
    bool mu_default_req = false;
    StepSchedule step;
    std::string x0_mode = "zeros";  // "zeros" | "gaussian"
};

struct ExperimentSpec {
    std::string output_dir = ".";
    long record_stride = 0;  // 0 = auto
    std::vector<std::uint64_t> seeds{1};
    std::vector<RunSpec> runs;
};

/// Loads and validates a `[run.<label>]` experiment file. Throws
/// SpecParseError on syntax or schema problems (unknown keys, unknown
/// objective_id, duplicate labels, missing required fields).
ExperimentSpec load_experiment_spec(const std::string& path);

}  // namespace hosgd::cli
