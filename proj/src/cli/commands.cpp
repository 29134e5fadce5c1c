#include "cli/commands.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "hosgd/analysis.hpp"
#include "hosgd/objectives.hpp"

namespace hosgd::cli {

PreparedObjective prepare_objective(const ObjectiveParams& params) {
    PreparedObjective out;
    switch (params.id) {
        case ObjectiveId::quadratic:
            out.objective = make_quadratic(params.d, params.spread);
            out.description = {{"id", "quadratic"},
                               {"d", params.d},
                               {"spread", params.spread}};
            break;
        case ObjectiveId::sigmoid_regression:
            out.objective =
                make_sigmoid_regression(params.d, params.K, params.noise, params.data_seed);
            out.description = {{"id", "sigmoid_regression"},
                               {"d", params.d},
                               {"K", params.K},
                               {"noise", params.noise},
                               {"data_seed", params.data_seed}};
            break;
        case ObjectiveId::two_layer_tanh:
            out.objective = make_two_layer_tanh(params.d_in, params.hidden, params.K,
                                                params.data_seed);
            out.description = {{"id", "two_layer_tanh"},
                               {"d_in", params.d_in},
                               {"hidden", params.hidden},
                               {"K", params.K},
                               {"data_seed", params.data_seed}};
            break;
        case ObjectiveId::attack:
            throw std::invalid_argument(
                "the attack objective needs a classifier and images; it is not "
                "constructible from an experiment spec");
    }
    out.constants.L = out.objective->lipschitz_estimate();
    out.constants.f_star = out.objective->f_star_estimate();
    const ModelVector origin(out.objective->dimension(), 0.0);
    out.constants.sigma = std::sqrt(empirical_sigma_sq(*out.objective, origin));
    out.constants.M = 0.0;
    return out;
}

PreparedObjective objective_from_json(const nlohmann::json& description) {
    ObjectiveParams params;
    const std::string id = description.at("id").get<std::string>();
    if (id == "quadratic") {
        params.id = ObjectiveId::quadratic;
        params.d = description.at("d").get<std::size_t>();
        params.spread = description.at("spread").get<double>();
    } else if (id == "sigmoid_regression") {
        params.id = ObjectiveId::sigmoid_regression;
        params.d = description.at("d").get<std::size_t>();
        params.K = description.at("K").get<std::size_t>();
        params.noise = description.at("noise").get<double>();
        params.data_seed = description.at("data_seed").get<std::uint64_t>();
    } else if (id == "two_layer_tanh") {
        params.id = ObjectiveId::two_layer_tanh;
        params.d_in = description.at("d_in").get<std::size_t>();
        params.hidden = description.at("hidden").get<std::size_t>();
        params.K = description.at("K").get<std::size_t>();
        params.data_seed = description.at("data_seed").get<std::uint64_t>();
    } else {
        throw std::invalid_argument("manifest names unknown objective '" + id + "'");
    }
    return prepare_objective(params);
}

ModelVector resolve_x0(const std::string& mode, std::size_t d, std::uint64_t master_seed) {
    ModelVector x0(d, 0.0);
    if (mode == "gaussian") {
        const KeyStream stream(master_seed, {static_cast<std::uint64_t>(Stream::init)});
        stream.fill_normals(x0.data(), d, 0);
    } else if (mode != "zeros") {
        throw std::invalid_argument("unknown x0 mode '" + mode + "'");
    }
    return x0;
}

RunConfig build_config(const RunSpec& run, std::uint64_t master_seed,
                       const ModelVector& x0) {
    RunConfig cfg;
    cfg.d = run.d;
    cfg.m = run.m;
    cfg.B = run.B;
    cfg.tau = run.tau;
    cfg.mu = run.mu;
    cfg.N = run.N;
    cfg.step = run.step;
    cfg.objective_id = run.objective.id;
    cfg.master_seed = master_seed;
    cfg.algorithm = run.algorithm;
    cfg.x0 = x0;
    return cfg;
}

nlohmann::json make_manifest(const RunSpec& run, const PreparedObjective& prepared,
                             const std::vector<std::uint64_t>& seeds, long record_stride) {
    nlohmann::json m;
    m["format"] = "hosgd-manifest-v1";
    m["label"] = run.label;
    m["algorithm"] = to_string(run.algorithm);
    m["objective"] = prepared.description;
    m["d"] = run.d;
    m["m"] = run.m;
    m["B"] = run.B;
    m["tau"] = run.tau;
    m["mu"] = run.mu;
    m["N"] = run.N;
    m["record_stride"] = record_stride;
    if (run.step.kind == StepSchedule::Kind::theorem_default) {
        m["step"] = {{"kind", "theorem_default"},
                     {"alpha", step_size_default(run.B, run.m, prepared.constants.L,
                                                 run.N)}};
    } else {
        m["step"] = {{"kind", "constant"}, {"alpha", run.step.alpha}};
    }
    m["constants"] = {{"L", prepared.constants.L},
                      {"sigma", prepared.constants.sigma},
                      {"f_star", prepared.constants.f_star},
                      {"M", prepared.constants.M}};
    m["seeds"] = nlohmann::json::array();
    for (std::uint64_t seed : seeds) {
        const ModelVector x0 = resolve_x0(run.x0_mode, run.d, seed);
        m["seeds"].push_back({{"master_seed", seed},
                              {"x0", x0},
                              {"csv", run.label + "_seed" + std::to_string(seed) + ".csv"}});
    }
    return m;
}

Trajectory run_from_manifest(const nlohmann::json& manifest, std::size_t seed_index) {
    if (manifest.at("format").get<std::string>() != "hosgd-manifest-v1") {
        throw std::invalid_argument("unsupported manifest format");
    }
    const PreparedObjective prepared = objective_from_json(manifest.at("objective"));

    RunConfig cfg;
    cfg.d = manifest.at("d").get<std::size_t>();
    cfg.m = manifest.at("m").get<int>();
    cfg.B = manifest.at("B").get<int>();
    cfg.tau = manifest.at("tau").get<int>();
    cfg.mu = manifest.at("mu").get<double>();
    cfg.N = manifest.at("N").get<long>();
    const auto& step = manifest.at("step");
    cfg.step = step.at("kind").get<std::string>() == "theorem_default"
                   ? StepSchedule::theorem()
                   : StepSchedule::constant(step.at("alpha").get<double>());
    cfg.algorithm = algorithm_from_string(manifest.at("algorithm").get<std::string>());
    cfg.objective_id =
        objective_from_string(manifest.at("objective").at("id").get<std::string>());
    const auto& seed_entry = manifest.at("seeds").at(seed_index);
    cfg.master_seed = seed_entry.at("master_seed").get<std::uint64_t>();
    cfg.x0 = seed_entry.at("x0").get<ModelVector>();

    AssumptionConstants constants;
    constants.L = manifest.at("constants").at("L").get<double>();
    constants.sigma = manifest.at("constants").at("sigma").get<double>();
    constants.f_star = manifest.at("constants").at("f_star").get<double>();
    constants.M = manifest.at("constants").at("M").get<double>();

    RunOptions opts;
    opts.record_stride = manifest.at("record_stride").get<long>();
    return run(cfg, *prepared.objective, constants, opts);
}

namespace {

struct RunTask {
    const RunSpec* run = nullptr;
    const PreparedObjective* prepared = nullptr;
    std::uint64_t seed = 0;
    long record_stride = 0;
    std::filesystem::path csv_path;
};

}  // namespace

int cmd_run(const std::string& spec_path, const std::string& out_override, int jobs) {
    ExperimentSpec spec;
    try {
        spec = load_experiment_spec(spec_path);
    } catch (const SpecParseError& e) {
        std::cerr << spec_path << ":" << e.line() << ":" << e.column() << ": " << e.what()
                  << "\n";
        return 2;
    }
    if (!out_override.empty()) spec.output_dir = out_override;
    if (const char* env = std::getenv("HOSGD_SEED_OVERRIDE")) {
        char* end = nullptr;
        const unsigned long long value = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0') {
            std::cerr << "HOSGD_SEED_OVERRIDE is not an integer: " << env << "\n";
            return 2;
        }
        spec.seeds = {static_cast<std::uint64_t>(value)};
        std::cerr << "HOSGD_SEED_OVERRIDE in effect: all master seeds = " << value << "\n";
    }

    std::error_code ec;
    std::filesystem::create_directories(spec.output_dir, ec);
    if (ec) {
        std::cerr << "cannot create output directory '" << spec.output_dir
                  << "': " << ec.message() << "\n";
        return 2;
    }

    // Objectives are shared across the seeds of a run; construction (data
    // synthesis + L estimation) is the expensive part.
    std::vector<PreparedObjective> prepared;
    prepared.reserve(spec.runs.size());
    for (const RunSpec& run_spec : spec.runs) {
        try {
            prepared.push_back(prepare_objective(run_spec.objective));
        } catch (const std::exception& e) {
            std::cerr << "run '" << run_spec.label << "': " << e.what() << "\n";
            return 2;
        }
    }

    std::vector<RunTask> tasks;
    for (std::size_t r = 0; r < spec.runs.size(); ++r) {
        const long stride = resolve_record_stride(spec.record_stride, spec.runs[r].N);
        if (spec.record_stride == 0 && stride > 1) {
            std::cerr << "run '" << spec.runs[r].label << "': record stride auto-raised to "
                      << stride << " for N = " << spec.runs[r].N << "\n";
        }
        for (std::uint64_t seed : spec.seeds) {
            RunTask task;
            task.run = &spec.runs[r];
            task.prepared = &prepared[r];
            task.seed = seed;
            task.record_stride = stride;
            task.csv_path = std::filesystem::path(spec.output_dir) /
                            (spec.runs[r].label + "_seed" + std::to_string(seed) + ".csv");
            tasks.push_back(std::move(task));
        }
    }

    std::atomic<std::size_t> next{0};
    std::mutex io_mutex;
    std::vector<std::string> diverged;
    std::vector<std::string> failures;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const RunTask& task = tasks[i];
            try {
                const ModelVector x0 =
                    resolve_x0(task.run->x0_mode, task.run->d, task.seed);
                const RunConfig cfg = build_config(*task.run, task.seed, x0);
                RunOptions opts;
                opts.record_stride = task.record_stride;
                const Trajectory traj =
                    run(cfg, *task.prepared->objective, task.prepared->constants, opts);
                std::ofstream out(task.csv_path, std::ios::binary | std::ios::trunc);
                write_csv(traj, out);
                std::lock_guard<std::mutex> lock(io_mutex);
                for (const std::string& w : traj.warnings) {
                    std::cerr << task.run->label << " seed " << task.seed << ": " << w
                              << "\n";
                }
                if (traj.diverged) {
                    diverged.push_back(task.run->label + " (seed " +
                                       std::to_string(task.seed) + "): " + traj.error);
                }
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(io_mutex);
                failures.push_back(task.run->label + " (seed " + std::to_string(task.seed) +
                                   "): " + e.what());
            }
        }
    };

    const int n_threads = std::max(1, jobs);
    std::vector<std::thread> pool;
    for (int i = 1; i < n_threads; ++i) pool.emplace_back(worker);
    worker();
    for (std::thread& th : pool) th.join();

    for (std::size_t r = 0; r < spec.runs.size(); ++r) {
        const nlohmann::json manifest = make_manifest(
            spec.runs[r], prepared[r], spec.seeds,
            resolve_record_stride(spec.record_stride, spec.runs[r].N));
        const auto path = std::filesystem::path(spec.output_dir) /
                          (spec.runs[r].label + "_manifest.json");
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << manifest.dump(2) << "\n";
    }

    for (const std::string& f : failures) std::cerr << "error: " << f << "\n";
    if (!failures.empty()) return 2;
    for (const std::string& d : diverged) std::cerr << "diverged: " << d << "\n";
    if (!diverged.empty()) return 3;
    return 0;
}

int cmd_bound(const std::string& config_path) {
    ParsedFile file;
    try {
        file = parse_config_file(config_path);
    } catch (const SpecParseError& e) {
        std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": " << e.what()
                  << "\n";
        return 2;
    }
    const ParsedSection& root = file.sections.front();

    RunConfig cfg;
    AssumptionConstants constants;
    double f0 = 0.0;
    try {
        cfg.d = static_cast<std::size_t>(get_int(root, "d"));
        cfg.m = static_cast<int>(get_int(root, "m"));
        cfg.B = static_cast<int>(get_int(root, "B"));
        cfg.tau = static_cast<int>(get_int(root, "tau"));
        cfg.N = get_int(root, "N");
        constants.L = get_double(root, "L");
        constants.sigma = get_double(root, "sigma");
        constants.f_star = get_double(root, "f_star");
        f0 = get_double(root, "f0");
        if (!has_key(root, "mu") || get_string(root, "mu") == "default") {
            cfg.mu = mu_default(cfg.d, cfg.N);
        } else {
            cfg.mu = get_double(root, "mu");
        }
        if (!has_key(root, "alpha") || get_string(root, "alpha") == "default") {
            cfg.step = StepSchedule::theorem();
        } else {
            cfg.step = StepSchedule::constant(get_double(root, "alpha"));
        }
    } catch (const SpecParseError& e) {
        std::cerr << config_path << ":" << e.line() << ":" << e.column() << ": " << e.what()
                  << "\n";
        return 2;
    }

    BoundReport report;
    try {
        report = theoretical_bound(cfg, constants, f0);
    } catch (const std::exception& e) {
        std::cerr << "bound: " << e.what() << "\n";
        return 2;
    }

    std::printf("%-22s %s\n", "term", "value");
    for (const auto& [name, value] : report.term_breakdown) {
        std::printf("%-22s %.17g\n", name.c_str(), value);
    }
    std::printf("%-22s %.17g\n", "rhs_total", report.rhs_total);
    std::printf("preconditions: step_size=%s mu=%s iterations=%s\n",
                report.step_size_ok ? "ok" : "violated",
                report.mu_ok ? "ok" : "violated",
                report.iterations_ok ? "ok" : "violated");
    return 0;
}

}  // namespace hosgd::cli
