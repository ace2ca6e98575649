#include "fbmavg/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "fbmavg/ensemble.hpp"
#include "fbmavg/errors.hpp"
#include "fbmavg/experiments.hpp"
#include "fbmavg/report.hpp"
#include "fbmavg/verify.hpp"
#include "fbmavg/version.hpp"

namespace fbmavg {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// Thrown for bad flags or config contents; maps to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

class OutputDir {
public:
    explicit OutputDir(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

    template <class Writer>
    void write(const std::string& name, Writer&& writer) {
        std::ofstream os(dir_ / name, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + (dir_ / name).string() + " for writing");
        writer(os);
        os.close();
        if (!os) throw std::runtime_error("failed writing " + (dir_ / name).string());
        files_.push_back(name);
    }

    void write_manifest(json seed, json config, std::size_t divergent, double wall_ms) {
        json m;
        m["version"] = kVersion;
        m["seed"] = std::move(seed);
        m["config"] = std::move(config);
        json outputs = files_;
        outputs.push_back("manifest.json");
        m["outputs"] = std::move(outputs);
        m["divergent_count"] = divergent;
        m["wall_ms"] = wall_ms;
        std::ofstream os(dir_ / "manifest.json", std::ios::binary);
        os << m.dump(2) << '\n';
        if (!os) throw std::runtime_error("failed writing manifest.json");
    }

private:
    fs::path dir_;
    std::vector<std::string> files_;
};

// ------------------------------------------------------------ generate

struct GenerateOptions {
    double hurst = 0.75;
    std::size_t steps = 256;
    double t_end = 1.0;
    std::size_t paths = 1;
    std::uint64_t seed = 20240917;
    std::string method = "circulant";
    std::string out = "out";
    int threads = 0;
};

int cmd_generate(const GenerateOptions& o, std::ostream& out) {
    const auto start = Clock::now();
    std::optional<HurstParameter> h;
    std::optional<GenerationMethod> method;
    std::optional<TimeGrid> grid;
    try {
        h.emplace(o.hurst);
        method = parse_generation_method(o.method);
        grid.emplace(o.t_end, o.steps);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    if (o.paths == 0) throw UsageError("--paths must be positive");

    const FbmGenerator gen(*method, *grid, *h);
    const auto paths = generate_ensemble(gen, o.paths, o.seed, o.threads);
    std::size_t clipped = 0;
    for (const auto& p : paths) clipped = std::max(clipped, p.clipped_eigenvalues());

    OutputDir dir(o.out);
    dir.write("paths.csv", [&](std::ostream& os) { write_paths_csv(os, paths); });
    json config = {{"command", "generate"}, {"hurst", o.hurst},          {"steps", o.steps},
                   {"t_end", o.t_end},      {"paths", o.paths},          {"method", o.method},
                   {"threads", o.threads},  {"clipped_eigenvalues", clipped}};
    dir.write_manifest(o.seed, std::move(config), 0, elapsed_ms(start));
    out << "wrote " << o.paths << " path(s) of " << o.steps << " steps to " << o.out << "/paths.csv\n";
    return kExitOk;
}

// ------------------------------------------------------------ experiment

const std::set<std::string> kConfigKeys = {
    "preset", "case",  "lambda", "hurst",          "x0",   "window", "epsilon_0", "epsilons",          "replicates",
    "seed",   "delta", "kind",   "diffusion_mode", "method", "t_end", "steps",    "keep_trajectories", "threads"};

struct ExperimentOptions {
    std::string preset;
    std::string case_name = "a";
    std::optional<double> lambda, hurst, x0, window, epsilon_0, delta, t_end;
    std::vector<double> epsilons;
    std::optional<std::size_t> replicates, steps, keep_trajectories;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> kind, diffusion_mode, method;
    std::optional<int> threads;
};

template <class T>
T get_as(const json& j, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, std::string>) {
            if (!j.is_string()) throw UsageError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!j.is_number_integer()) throw UsageError("");
            if constexpr (std::is_unsigned_v<T>) {
                if (j.is_number_integer() && !j.is_number_unsigned()) throw UsageError("");
            }
        } else {
            if (!j.is_number()) throw UsageError("");
        }
        return j.get<T>();
    } catch (const std::exception&) {
        throw UsageError("config key '" + key + "' has the wrong type");
    }
}

ExperimentOptions load_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot read config file " + path);
    json j;
    try {
        j = json::parse(is);
    } catch (const json::parse_error& e) {
        throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw UsageError("config file must hold a flat JSON object");

    std::vector<std::string> unknown;
    for (const auto& [key, _] : j.items()) {
        if (!kConfigKeys.contains(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
        std::string list;
        for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
        throw UsageError("unknown config key(s): " + list);
    }
    if (!j.contains("preset")) throw UsageError("config key 'preset' is required");

    ExperimentOptions o;
    o.preset = get_as<std::string>(j["preset"], "preset");
    if (j.contains("case")) o.case_name = get_as<std::string>(j["case"], "case");
    auto opt_d = [&](const char* k, std::optional<double>& dst) {
        if (j.contains(k)) dst = get_as<double>(j[k], k);
    };
    opt_d("lambda", o.lambda);
    opt_d("hurst", o.hurst);
    opt_d("x0", o.x0);
    opt_d("window", o.window);
    opt_d("epsilon_0", o.epsilon_0);
    opt_d("delta", o.delta);
    opt_d("t_end", o.t_end);
    if (j.contains("epsilons")) {
        const json& e = j["epsilons"];
        if (e.is_number()) {
            o.epsilons = {e.get<double>()};
        } else if (e.is_array()) {
            for (const auto& v : e) o.epsilons.push_back(get_as<double>(v, "epsilons"));
        } else {
            throw UsageError("config key 'epsilons' has the wrong type");
        }
    }
    if (j.contains("replicates")) o.replicates = get_as<std::size_t>(j["replicates"], "replicates");
    if (j.contains("steps")) o.steps = get_as<std::size_t>(j["steps"], "steps");
    if (j.contains("keep_trajectories"))
        o.keep_trajectories = get_as<std::size_t>(j["keep_trajectories"], "keep_trajectories");
    if (j.contains("seed")) o.seed = get_as<std::uint64_t>(j["seed"], "seed");
    if (j.contains("threads")) o.threads = get_as<int>(j["threads"], "threads");
    if (j.contains("kind")) o.kind = get_as<std::string>(j["kind"], "kind");
    if (j.contains("diffusion_mode")) o.diffusion_mode = get_as<std::string>(j["diffusion_mode"], "diffusion_mode");
    if (j.contains("method")) o.method = get_as<std::string>(j["method"], "method");
    return o;
}

ExperimentConfig build_experiment(const ExperimentOptions& o) {
    const PresetCase pc = parse_preset_case(o.case_name);
    const DiffusionMode mode = o.diffusion_mode ? parse_diffusion_mode(*o.diffusion_mode) : DiffusionMode::mean;

    ExampleParameters p;
    if (o.preset == "example1") {
        p = example1_case(pc);
    } else if (o.preset == "example2") {
        p = example2_case(pc);
    } else if (o.preset == "autonomous") {
        p = {.x0 = 0.5, .lambda = 0.5, .epsilon = 0.1, .hurst = 0.7};
    } else {
        throw DomainError("unknown preset '" + o.preset + "' (expected example1, example2 or autonomous)");
    }
    p.lambda = o.lambda.value_or(p.lambda);
    p.hurst = o.hurst.value_or(p.hurst);
    p.x0 = o.x0.value_or(p.x0);
    p.window = o.window.value_or(p.window);
    p.epsilon_0 = o.epsilon_0.value_or(p.epsilon_0);
    if (!o.epsilons.empty()) p.epsilon = o.epsilons.front();

    ExperimentConfig cfg = [&] {
        if (o.preset == "example1") return example1_config(p, mode);
        if (o.preset == "example2") return example2_config(p, mode);
        ExperimentConfig a = autonomous_preset(p.lambda, p.hurst, p.epsilon);
        a.x0 = {p.x0};
        a.diffusion_mode = mode;
        return a;
    }();
    cfg.name = o.preset + "/" + o.case_name;
    cfg.epsilons = o.epsilons.empty() ? std::vector<double>{p.epsilon} : o.epsilons;
    cfg.replicates = o.replicates.value_or(cfg.replicates);
    cfg.master_seed = o.seed.value_or(cfg.master_seed);
    cfg.delta = o.delta.value_or(cfg.delta);
    if (o.kind) cfg.kind = parse_integral_kind(*o.kind);
    if (o.method) cfg.method = parse_generation_method(*o.method);
    cfg.grid = TimeGrid(o.t_end.value_or(cfg.grid.t_end()), o.steps.value_or(cfg.grid.n_steps()));
    cfg.keep_trajectories = o.keep_trajectories.value_or(cfg.keep_trajectories);
    cfg.threads = o.threads.value_or(0);
    cfg.validate();
    return cfg;
}

json config_echo(const ExperimentConfig& cfg, const ExperimentOptions& o) {
    json j;
    j["preset"] = o.preset;
    j["case"] = o.case_name;
    for (const auto& [k, v] : cfg.parameters) j[k] = v;
    j["hurst"] = cfg.system.hurst().value();
    j["window"] = cfg.window;
    j["epsilon_0"] = cfg.system.epsilon_0();
    j["epsilons"] = cfg.epsilons;
    j["replicates"] = cfg.replicates;
    j["seed"] = cfg.master_seed;
    j["delta"] = cfg.delta;
    j["kind"] = to_string(cfg.kind);
    j["diffusion_mode"] = to_string(cfg.diffusion_mode);
    j["method"] = to_string(cfg.method);
    j["t_end"] = cfg.grid.t_end();
    j["steps"] = cfg.grid.n_steps();
    j["keep_trajectories"] = cfg.keep_trajectories;
    j["threads"] = cfg.threads;
    return j;
}

json experiment_metadata(const ExperimentConfig& cfg, const SweepResult& sweep) {
    json j;
    j["averaged"] = {{"provenance", to_string(cfg.averaged->provenance())},
                     {"diffusion_mode", to_string(cfg.averaged->mode())}};
    json stated = json::array();
    for (const StatedValue& s : cfg.averaged->stated_values()) {
        stated.push_back({{"name", s.name}, {"stated", s.stated}, {"computed", s.computed}});
    }
    j["averaged"]["stated_values"] = std::move(stated);

    // Fixed horizon T; the constant L in T = L eps^{-2H beta} for beta = 1/2.
    json horizon = json::array();
    for (double eps : cfg.epsilons) {
        horizon.push_back({{"epsilon", eps},
                           {"beta", 0.5},
                           {"L", implied_horizon_constant(cfg.grid.t_end(), eps, cfg.system.hurst(), 0.5)}});
    }
    j["horizon"] = std::move(horizon);

    if (sweep.has_diagnostics) {
        j["diagnostics"] = {{"mse_nonincreasing", sweep.mse_nonincreasing},
                            {"mse_strictly_decreasing", sweep.mse_strictly_decreasing},
                            {"exceedance_nonincreasing", sweep.exceedance_nonincreasing}};
    }
    const RegularityReport& r = sweep.runs.front().regularity;
    j["regularity"] = {{"drift_lipschitz", r.drift_lipschitz},
                       {"diffusion_lipschitz", r.diffusion_lipschitz},
                       {"drift_growth", r.drift_growth},
                       {"diffusion_growth", r.diffusion_growth},
                       {"samples", r.samples}};
    return j;
}

int cmd_experiment(const ExperimentOptions& o, const std::string& out_dir, std::ostream& out,
                   std::ostream& err) {
    const auto start = Clock::now();
    ExperimentConfig cfg = [&] {
        try {
            return build_experiment(o);
        } catch (const DomainError& e) {
            throw UsageError(e.what());
        }
    }();

    SweepResult sweep;
    try {
        sweep = epsilon_sweep(cfg);
    } catch (const ExperimentError& e) {
        err << "experiment failed: " << e.what() << '\n';
        return kExitFailure;
    }

    OutputDir dir(out_dir);
    const PairedEnsemble& first = sweep.runs.front();
    dir.write("trajectories.csv", [&](std::ostream& os) { write_trajectories_csv(os, first); });
    dir.write("mse.csv", [&](std::ostream& os) { write_mse_csv(os, first); });
    dir.write("sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, sweep); });
    json config = config_echo(cfg, o);
    config["metadata"] = experiment_metadata(cfg, sweep);
    dir.write_manifest(cfg.master_seed, std::move(config), sweep.divergent_total, elapsed_ms(start));

    out << cfg.name << ": " << cfg.replicates << " replicates, kind " << to_string(cfg.kind) << '\n';
    out << std::setw(12) << "epsilon" << std::setw(16) << "sup_mse" << std::setw(14) << "exceedance" << '\n';
    for (const SweepRow& row : sweep.rows) {
        out << std::setw(12) << row.epsilon << std::setw(16) << row.sup_mse << std::setw(14) << row.exceedance
            << '\n';
    }
    if (sweep.has_diagnostics) {
        out << "sup_mse non-increasing: " << (sweep.mse_nonincreasing ? "yes" : "no")
            << ", exceedance non-increasing: " << (sweep.exceedance_nonincreasing ? "yes" : "no") << '\n';
    }
    if (sweep.divergent_total > 0) out << "divergent replicates excluded: " << sweep.divergent_total << '\n';
    return kExitOk;
}

// ------------------------------------------------------------ verify

json report_json(const VerifyReport& r) {
    json j;
    j["suite"] = to_string(r.suite);
    j["budget"] = to_string(r.budget);
    j["passed"] = r.all_passed();
    json checks = json::array();
    for (const Check& c : r.checks) {
        json stats = json::object();
        for (const auto& [k, v] : c.statistics) stats[k] = v;
        checks.push_back({{"id", c.id},
                          {"suite", c.suite},
                          {"passed", c.passed},
                          {"tolerance", c.tolerance},
                          {"statistics", std::move(stats)},
                          {"detail", c.detail},
                          {"wall_ms", c.wall_ms}});
    }
    j["checks"] = std::move(checks);
    return j;
}

int cmd_verify(const std::string& suite_name, const std::string& budget_name, const std::string& out_dir,
               int threads, std::ostream& out) {
    const auto start = Clock::now();
    VerifySuite suite;
    Budget budget;
    try {
        suite = parse_verify_suite(suite_name);
        budget = parse_budget(budget_name);
    } catch (const DomainError& e) {
        throw UsageError(e.what());
    }
    const VerifyReport report = run_verify(suite, budget, threads);
    for (const Check& c : report.checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.id;
        if (!c.detail.empty() && !c.passed) out << "  (" << c.detail << ')';
        out << '\n';
    }
    OutputDir dir(out_dir);
    dir.write("verify_report.json", [&](std::ostream& os) { os << report_json(report).dump(2) << '\n'; });
    dir.write_manifest(nullptr, {{"command", "verify"}, {"suite", suite_name}, {"budget", budget_name}}, 0,
                       elapsed_ms(start));
    return report.all_passed() ? kExitOk : kExitFailure;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Averaging-principle experiments for SDEs driven by fractional Brownian motion", "fbmavg"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    GenerateOptions gen;
    auto* g = app.add_subcommand("generate", "Sample fBm paths to paths.csv");
    g->add_option("--hurst", gen.hurst, "Hurst index in [0.5, 1)")->capture_default_str();
    g->add_option("--steps", gen.steps, "Number of time steps")->capture_default_str();
    g->add_option("--t-end", gen.t_end, "Horizon T")->capture_default_str();
    g->add_option("--paths", gen.paths, "Number of paths")->capture_default_str();
    g->add_option("--seed", gen.seed, "Master seed")->capture_default_str();
    g->add_option("--method", gen.method, "cholesky or circulant")->capture_default_str();
    g->add_option("--out", gen.out, "Output directory")->capture_default_str();
    g->add_option("--threads", gen.threads, "Worker threads (0 = runtime default)");

    ExperimentOptions exp;
    std::string config_path, exp_out = "out";
    std::vector<double> eps_flags;
    std::optional<std::size_t> replicates_flag;
    std::optional<std::uint64_t> seed_flag;
    std::optional<std::string> kind_flag, mode_flag;
    std::optional<int> exp_threads;
    auto* e = app.add_subcommand("experiment", "Paired original/averaged Monte Carlo over epsilons");
    auto* cfg_opt = e->add_option("--config", config_path, "Flat JSON config file");
    auto* preset_opt = e->add_option("--preset", exp.preset, "example1, example2 or autonomous");
    e->add_option("--case", exp.case_name, "Preset case a, b, c or d")->needs(preset_opt);
    cfg_opt->excludes(preset_opt);
    e->add_option("--out", exp_out, "Output directory")->capture_default_str();
    e->add_option("--threads", exp_threads, "Worker threads (0 = runtime default)");
    e->add_option("--epsilon", eps_flags, "Epsilon value(s), descending")->expected(1, -1);
    e->add_option("--replicates", replicates_flag, "Monte Carlo replicates");
    e->add_option("--seed", seed_flag, "Master seed");
    e->add_option("--kind", kind_flag, "symmetric, forward or backward");
    e->add_option("--diffusion-mode", mode_flag, "mean or rms");

    std::string suite, budget = "quick", verify_out = "out";
    int verify_threads = 0;
    auto* v = app.add_subcommand("verify", "Run the property suite and write a JSON report");
    v->add_option("--suite", suite, "fgn, integrals, averaging, theorems or all")->required();
    v->add_option("--budget", budget, "quick or full")->capture_default_str();
    v->add_option("--out", verify_out, "Output directory")->capture_default_str();
    v->add_option("--threads", verify_threads, "Worker threads (0 = runtime default)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& pe) {
        const int code = app.exit(pe, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*g) return cmd_generate(gen, out);
        if (*e) {
            if (config_path.empty() && exp.preset.empty()) throw UsageError("experiment needs --config or --preset");
            ExperimentOptions o = config_path.empty() ? exp : load_config_file(config_path);
            if (!eps_flags.empty()) o.epsilons = eps_flags;
            if (replicates_flag) o.replicates = replicates_flag;
            if (seed_flag) o.seed = seed_flag;
            if (kind_flag) o.kind = kind_flag;
            if (mode_flag) o.diffusion_mode = mode_flag;
            if (exp_threads) o.threads = exp_threads;
            return cmd_experiment(o, exp_out, out, err);
        }
        return cmd_verify(suite, budget, verify_out, verify_threads, out);
    } catch (const UsageError& ue) {
        err << "usage error: " << ue.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << '\n';
        return kExitFailure;
    }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"fbmavg"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace fbmavg
