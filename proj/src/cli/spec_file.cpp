#include "cli/spec_file.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "hosgd/objectives.hpp"

namespace hosgd::cli {
namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

// Strips a trailing comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) return line.substr(0, i);
    }
    return line;
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') {
            return false;
        }
    }
    return true;
}

[[noreturn]] void fail(const ParsedSection& s, const std::string& key,
                       const std::string& what, const ParsedValue* v = nullptr) {
    const int line = v != nullptr ? v->line : s.line;
    const int col = v != nullptr ? v->column : 1;
    throw SpecParseError("key '" + key + "'" +
                             (s.name.empty() ? "" : " in [" + s.name + "]") + ": " + what,
                         line, col);
}

}  // namespace

const ParsedSection* ParsedFile::find(const std::string& name) const {
    for (const ParsedSection& s : sections) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

ParsedFile parse_config_text(const std::string& text, const std::string& path) {
    ParsedFile file;
    file.path = path;
    file.sections.push_back(ParsedSection{"", 1, {}});
    std::size_t current = 0;

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') {
                throw SpecParseError("unterminated section header", line_no,
                                     static_cast<int>(raw.find('[')) + 1);
            }
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name)) {
                throw SpecParseError("invalid section name '" + name + "'", line_no, 1);
            }
            for (const ParsedSection& s : file.sections) {
                if (s.name == name) {
                    throw SpecParseError("duplicate section [" + name + "]", line_no, 1);
                }
            }
            file.sections.push_back(ParsedSection{name, line_no, {}});
            current = file.sections.size() - 1;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw SpecParseError("expected 'key = value'", line_no, 1);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key)) {
            throw SpecParseError("invalid key '" + key + "'", line_no, 1);
        }
        if (value.empty()) {
            throw SpecParseError("missing value for key '" + key + "'", line_no,
                                 static_cast<int>(raw.find('=')) + 2);
        }
        ParsedSection& section = file.sections[current];
        if (section.entries.count(key) != 0) {
            throw SpecParseError("duplicate key '" + key + "'", line_no, 1);
        }
        const int column = static_cast<int>(raw.find(value.front(), raw.find('='))) + 1;
        section.entries[key] = ParsedValue{value, line_no, column};
    }
    return file;
}

ParsedFile parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecParseError("cannot open '" + path + "'", 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

bool has_key(const ParsedSection& s, const std::string& key) {
    return s.entries.count(key) != 0;
}

namespace {

const ParsedValue& require(const ParsedSection& s, const std::string& key) {
    auto it = s.entries.find(key);
    if (it == s.entries.end()) fail(s, key, "missing");
    return it->second;
}

}  // namespace

std::string get_string(const ParsedSection& s, const std::string& key) {
    const ParsedValue& v = require(s, key);
    if (v.raw.size() >= 2 && v.raw.front() == '"' && v.raw.back() == '"') {
        return v.raw.substr(1, v.raw.size() - 2);
    }
    return v.raw;
}

long get_int(const ParsedSection& s, const std::string& key) {
    const ParsedValue& v = require(s, key);
    char* end = nullptr;
    const long value = std::strtol(v.raw.c_str(), &end, 10);
    if (end == v.raw.c_str() || *end != '\0') {
        fail(s, key, "expected an integer, got '" + v.raw + "'", &v);
    }
    return value;
}

double get_double(const ParsedSection& s, const std::string& key) {
    const ParsedValue& v = require(s, key);
    char* end = nullptr;
    const double value = std::strtod(v.raw.c_str(), &end);
    if (end == v.raw.c_str() || *end != '\0') {
        fail(s, key, "expected a number, got '" + v.raw + "'", &v);
    }
    return value;
}

std::uint64_t get_uint64(const ParsedSection& s, const std::string& key) {
    const ParsedValue& v = require(s, key);
    char* end = nullptr;
    const unsigned long long value = std::strtoull(v.raw.c_str(), &end, 10);
    if (end == v.raw.c_str() || *end != '\0' || v.raw.front() == '-') {
        fail(s, key, "expected a non-negative integer, got '" + v.raw + "'", &v);
    }
    return static_cast<std::uint64_t>(value);
}

std::vector<std::uint64_t> get_uint64_list(const ParsedSection& s, const std::string& key) {
    const ParsedValue& v = require(s, key);
    if (v.raw.size() < 2 || v.raw.front() != '[' || v.raw.back() != ']') {
        fail(s, key, "expected a list like [1, 2, 3]", &v);
    }
    std::vector<std::uint64_t> values;
    std::string body = v.raw.substr(1, v.raw.size() - 2);
    std::istringstream in(body);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item.empty()) fail(s, key, "empty list element", &v);
        char* end = nullptr;
        const unsigned long long value = std::strtoull(item.c_str(), &end, 10);
        if (end == item.c_str() || *end != '\0') {
            fail(s, key, "list element '" + item + "' is not an integer", &v);
        }
        values.push_back(static_cast<std::uint64_t>(value));
    }
    if (values.empty()) fail(s, key, "list must not be empty", &v);
    return values;
}

namespace {

constexpr const char* kRunKeys[] = {"algorithm", "objective", "d",       "m",
                                    "B",         "tau",       "N",       "mu",
                                    "step",      "x0",        "spread",  "K",
                                    "noise",     "data_seed", "d_in",    "hidden"};

RunSpec parse_run_section(const ParsedSection& s) {
    for (const auto& [key, value] : s.entries) {
        bool known = false;
        for (const char* k : kRunKeys) known = known || key == k;
        if (!known) fail(s, key, "unknown key", &value);
    }

    RunSpec run;
    run.label = s.name.substr(std::string("run.").size());

    const std::string alg = get_string(s, "algorithm");
    try {
        run.algorithm = algorithm_from_string(alg);
    } catch (const std::invalid_argument&) {
        fail(s, "algorithm", "unknown algorithm '" + alg + "'", &s.entries.at("algorithm"));
    }

    const std::string obj = get_string(s, "objective");
    if (obj == "quadratic") {
        run.objective.id = ObjectiveId::quadratic;
        run.d = static_cast<std::size_t>(get_int(s, "d"));
        run.objective.d = run.d;
        if (has_key(s, "spread")) run.objective.spread = get_double(s, "spread");
    } else if (obj == "sigmoid" || obj == "sigmoid_regression") {
        run.objective.id = ObjectiveId::sigmoid_regression;
        run.d = static_cast<std::size_t>(get_int(s, "d"));
        run.objective.d = run.d;
        if (has_key(s, "K")) run.objective.K = static_cast<std::size_t>(get_int(s, "K"));
        if (has_key(s, "noise")) run.objective.noise = get_double(s, "noise");
        if (has_key(s, "data_seed")) run.objective.data_seed = get_uint64(s, "data_seed");
    } else if (obj == "two_layer_tanh") {
        run.objective.id = ObjectiveId::two_layer_tanh;
        run.objective.d_in = static_cast<std::size_t>(get_int(s, "d_in"));
        run.objective.hidden = static_cast<std::size_t>(get_int(s, "hidden"));
        if (has_key(s, "K")) run.objective.K = static_cast<std::size_t>(get_int(s, "K"));
        if (has_key(s, "data_seed")) run.objective.data_seed = get_uint64(s, "data_seed");
        run.d = run.objective.hidden * (run.objective.d_in + 1) + run.objective.hidden + 1;
        run.objective.d = run.d;
        if (has_key(s, "d") &&
            static_cast<std::size_t>(get_int(s, "d")) != run.d) {
            fail(s, "d", "does not match the parameter count " + std::to_string(run.d),
                 &s.entries.at("d"));
        }
    } else {
        fail(s, "objective", "unknown objective_id '" + obj + "'",
             &s.entries.at("objective"));
    }

    run.m = static_cast<int>(get_int(s, "m"));
    run.B = static_cast<int>(get_int(s, "B"));
    run.tau = static_cast<int>(get_int(s, "tau"));
    run.N = get_int(s, "N");
    if (run.m < 1) fail(s, "m", "must be >= 1", &s.entries.at("m"));
    if (run.B < 1) fail(s, "B", "must be >= 1", &s.entries.at("B"));
    if (run.tau < 1) fail(s, "tau", "must be >= 1", &s.entries.at("tau"));
    if (run.N < 1) fail(s, "N", "must be >= 1", &s.entries.at("N"));

    if (!has_key(s, "mu") || get_string(s, "mu") == "default") {
        run.mu_default_req = true;
        run.mu = mu_default(run.d, run.N);
    } else {
        run.mu = get_double(s, "mu");
        if (!(run.mu > 0.0)) fail(s, "mu", "must be > 0", &s.entries.at("mu"));
    }

    if (!has_key(s, "step") || get_string(s, "step") == "default" ||
        get_string(s, "step") == "theorem_default") {
        run.step = StepSchedule::theorem();
    } else {
        const double alpha = get_double(s, "step");
        if (!(alpha > 0.0)) fail(s, "step", "must be > 0", &s.entries.at("step"));
        run.step = StepSchedule::constant(alpha);
    }

    if (has_key(s, "x0")) {
        run.x0_mode = get_string(s, "x0");
        if (run.x0_mode != "zeros" && run.x0_mode != "gaussian") {
            fail(s, "x0", "expected \"zeros\" or \"gaussian\"", &s.entries.at("x0"));
        }
    }
    return run;
}

}  // namespace

ExperimentSpec load_experiment_spec(const std::string& path) {
    const ParsedFile file = parse_config_file(path);
    ExperimentSpec spec;

    const ParsedSection& root = file.sections.front();
    for (const auto& [key, value] : root.entries) {
        if (key == "output_dir") {
            spec.output_dir = get_string(root, key);
        } else if (key == "record_stride") {
            spec.record_stride = get_int(root, key);
            if (spec.record_stride < 0) fail(root, key, "must be >= 0", &value);
        } else if (key == "seeds") {
            spec.seeds = get_uint64_list(root, key);
        } else {
            fail(root, key, "unknown key", &value);
        }
    }

    for (std::size_t i = 1; i < file.sections.size(); ++i) {
        const ParsedSection& s = file.sections[i];
        if (s.name.rfind("run.", 0) != 0 || s.name.size() <= 4) {
            throw SpecParseError("expected a [run.<label>] section, got [" + s.name + "]",
                                 s.line, 1);
        }
        spec.runs.push_back(parse_run_section(s));
    }
    if (spec.runs.empty()) {
        throw SpecParseError("spec contains no [run.<label>] sections", 1, 1);
    }
    for (std::size_t i = 0; i < spec.runs.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.runs.size(); ++j) {
            if (spec.runs[i].label == spec.runs[j].label) {
                throw SpecParseError("duplicate run label '" + spec.runs[i].label + "'", 1, 1);
            }
        }
    }
    return spec;
}

}  // namespace hosgd::cli
