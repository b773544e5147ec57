// vvc: command-line front end for the Volt/VAr simulator.
//
//   vvc run          time-series simulation + metrics
//   vvc sweep        hosting-capacity sweep per controller
//   vvc fit-droop    ORPF training data and fitted ML-droop curves
//   vvc sensitivity  voltage/reactive-power sensitivity matrix
//
// Exit codes: 0 success, 1 numerical failure, 2 usage or input error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <string_view>

#include "vvc/error.hpp"
#include "vvc/export.hpp"
#include "vvc/mldroop_fit.hpp"
#include "vvc/simulation.hpp"

namespace fs = std::filesystem;
using namespace vvc;

namespace {

constexpr int exit_numerical = 1;
constexpr int exit_usage = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Flags given on the command line; unset ones fall back to the config file.
struct Flags {
    std::optional<std::string> config, grid, profiles, controller, h_matrix, curves, out, operating_point;
    std::optional<double> scenario, alpha, beta, vmin, vmax, p_start, p_end, p_step;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> downsample;
    bool force = false, identity = false, all_buses = false;
};

class Settings {
  public:
    explicit Settings(const Flags& f) : f_(f) {
        if (f.config) {
            try {
                cfg_ = nlohmann::json::parse(read_text_file(*f.config));
            } catch (const nlohmann::json::exception& e) {
                throw ParseError("config '" + *f.config + "': " + e.what());
            }
            if (!cfg_.is_object()) throw ParseError("config '" + *f.config + "': expected a JSON object");
            check_keys(cfg_, kTopLevel, "");
            if (cfg_.contains("controller") && cfg_["controller"].is_object())
                check_keys(cfg_["controller"], kControllerKeys, "controller.");
        }
    }

    template <typename T>
    T get(const std::optional<T>& flag, const char* key, T fallback) const {
        if (flag) return *flag;
        if (cfg_.contains(key)) return cfg_[key].get<T>();
        if (cfg_.contains("controller") && cfg_["controller"].is_object() && cfg_["controller"].contains(key))
            return cfg_["controller"][key].get<T>();
        return fallback;
    }
    template <typename T>
    std::optional<T> maybe(const std::optional<T>& flag, const char* key) const {
        if (flag) return flag;
        if (cfg_.contains(key)) return cfg_[key].get<T>();
        if (cfg_.contains("controller") && cfg_["controller"].is_object() && cfg_["controller"].contains(key))
            return cfg_["controller"][key].get<T>();
        return std::nullopt;
    }
    std::string controller_name(const char* fallback) const {
        if (f_.controller) return *f_.controller;
        if (cfg_.contains("controller")) {
            const auto& c = cfg_["controller"];
            return c.is_object() ? c.value("type", std::string(fallback)) : c.get<std::string>();
        }
        return fallback;
    }
    const Flags& flags() const { return f_; }

  private:
    static constexpr std::string_view kControllerKeys[] = {"type",  "v1",       "v2",        "v3",
                                                           "v4",    "alpha",    "beta",      "h_matrix",
                                                           "curves", "all_buses", "slope_floor"};
    static constexpr std::string_view kTopLevel[] = {
        "controller", "grid",  "profiles", "downsample", "seed",     "scenario_factor", "v_min",
        "v_max",      "out",   "p_start",  "p_end",      "p_step",   "operating_point", "v1",
        "v2",         "v3",    "v4",       "alpha",      "beta",     "h_matrix",        "curves",
        "all_buses",  "slope_floor"};

    template <std::size_t N>
    static void check_keys(const nlohmann::json& obj, const std::string_view (&known)[N], const std::string& prefix) {
        for (const auto& [key, value] : obj.items())
            if (std::find(std::begin(known), std::end(known), key) == std::end(known))
                throw ParseError("config: unknown key '" + prefix + key + "'");
    }

    const Flags& f_;
    nlohmann::json cfg_ = nlohmann::json::object();
};

Network load_grid(const std::string& spec) {
    if (spec == "cigre-lv") return build_cigre_lv_residential();
    if (!fs::exists(spec)) throw ParseError("grid not found: '" + spec + "'");
    return load_network(spec);
}

ProfileSet load_profile_spec(const std::string& spec, const Network& network, std::size_t downsample_window,
                             std::uint64_t seed = 42) {
    if (spec.rfind("synthetic", 0) == 0) {
        // synthetic[:<seed>[:<days>]]
        int days = 1;
        const auto first = spec.find(':');
        if (first != std::string::npos) {
            const auto second = spec.find(':', first + 1);
            seed = std::stoull(spec.substr(first + 1, second - first - 1));
            if (second != std::string::npos) days = std::stoi(spec.substr(second + 1));
        }
        auto ps = synth_for_network(network, seed, days);
        return downsample_window > 1 ? downsample(ps, downsample_window) : ps;
    }
    if (!fs::exists(spec)) throw ParseError("profiles not found: '" + spec + "'");
    return load_profiles(spec, downsample_window);
}

fs::path prepare_out(const std::optional<std::string>& out, bool force) {
    if (!out) throw UsageError("--out is required");
    const fs::path dir(*out);
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) throw UsageError("output path '" + *out + "' is not a directory");
        if (!fs::is_empty(dir) && !force)
            throw UsageError("output directory '" + *out + "' is not empty (use --force to overwrite)");
    }
    fs::create_directories(dir);
    return dir;
}

std::vector<MlDroopCurve> load_curves(const std::string& dir) {
    std::vector<MlDroopCurve> curves;
    if (!fs::is_directory(dir)) throw ParseError("curve directory not found: '" + dir + "'");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".json" && e.path().filename().string().rfind("curve_", 0) == 0)
            files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) curves.push_back(curve_from_json(read_text_file(p.string())));
    if (curves.empty()) throw ParseError("no curve_*.json files in '" + dir + "'");
    return curves;
}

ControllerSpec controller_spec(const Settings& s, ControllerKind kind) {
    ControllerSpec spec;
    spec.kind = kind;
    spec.v1 = s.get<double>(std::nullopt, "v1", spec.v1);
    spec.v2 = s.get<double>(std::nullopt, "v2", spec.v2);
    spec.v3 = s.get<double>(std::nullopt, "v3", spec.v3);
    spec.v4 = s.get<double>(std::nullopt, "v4", spec.v4);
    spec.alpha = s.get(s.flags().alpha, "alpha", spec.alpha);
    spec.beta = s.get(s.flags().beta, "beta", spec.beta);
    if (!(spec.beta > 0.0 && spec.beta <= 1.0)) throw UsageError("--beta must lie in (0, 1]");
    if (!(spec.alpha > 0.0)) throw UsageError("--alpha must be positive");
    const auto h = s.get<std::string>(s.flags().h_matrix, "h_matrix", "computed");
    if (h == "identity") {
        spec.h_source = HSource::identity;
    } else if (h != "computed") {
        if (!fs::exists(h)) throw ParseError("H matrix not found: '" + h + "'");
        spec.h_source = HSource::file;
        spec.h_matrix = sensitivity_from_csv(read_text_file(h));
    }
    if (s.flags().all_buses || s.get<bool>(std::nullopt, "all_buses", false)) spec.monitor = MonitoredBuses::all_buses;
    if (kind == ControllerKind::mldroop) {
        if (const auto dir = s.maybe(s.flags().curves, "curves")) spec.ml_curves = load_curves(*dir);
    }
    return spec;
}

void write_fit(const fs::path& dir, const TrainingSet& training, const std::vector<MlDroopCurve>& curves) {
    write_text_file((dir / "training.csv").string(), training_to_csv(training));
    for (const auto& c : curves)
        write_text_file((dir / ("curve_" + std::to_string(c.inverter_bus) + ".json")).string(), curve_to_json(c));
}

int cmd_run(const Flags& f) {
    const Settings s(f);
    const Network grid = load_grid(s.get<std::string>(f.grid, "grid", "cigre-lv"));
    const auto profiles = load_profile_spec(s.get<std::string>(f.profiles, "profiles", "synthetic:42:1"), grid,
                                            s.get<std::size_t>(f.downsample, "downsample", 1),
                                            s.get<std::uint64_t>(f.seed, "seed", 42));
    SimulationConfig cfg;
    cfg.scenario_factor = s.get(f.scenario, "scenario_factor", 1.0);
    if (!(cfg.scenario_factor > 0.0)) throw UsageError("--scenario must be positive");
    cfg.v_min = s.maybe(f.vmin, "v_min");
    cfg.v_max = s.maybe(f.vmax, "v_max");
    cfg.controller = controller_spec(s, controller_kind_from(s.controller_name("ofo")));
    const auto out = prepare_out(s.maybe(f.out, "out"), f.force);

    if (cfg.controller.kind == ControllerKind::mldroop && cfg.controller.ml_curves.empty()) {
        // In-sample training on the evaluation profiles.
        const Network net = scenario_network(grid, cfg.scenario_factor, cfg.v_min, cfg.v_max);
        TrainingOptions topt;
        topt.require_full_day = false;
        const auto training = generate_training_data(net, apply_scenario(profiles, cfg.scenario_factor), topt);
        FitOptions fopt;
        fopt.beta = cfg.controller.beta;
        cfg.controller.ml_curves = fit_all(net, training, fopt);
        write_fit(out, training, cfg.controller.ml_curves);
    }

    const auto result = run_timeseries(grid, profiles, cfg);
    write_text_file((out / "voltages.csv").string(), voltages_to_csv(result));
    write_text_file((out / "setpoints.csv").string(), setpoints_to_csv(result));
    write_text_file((out / "metrics.json").string(), metrics_to_json(result.metrics));
    write_text_file((out / "histogram.csv").string(), histogram_to_csv(result.metrics.voltage_histogram));
    std::cout << to_string(result.controller) << ": " << result.size() << " records, violation_time "
              << result.metrics.violation_time_h << " h, reactive_energy " << result.metrics.reactive_energy_kvarh
              << " kVArh -> " << out.string() << "\n";
    return 0;
}

int cmd_sweep(const Flags& f) {
    const Settings s(f);
    const Network grid = load_grid(s.get<std::string>(f.grid, "grid", "cigre-lv"));
    CapacitySweep sweep;
    sweep.p_start_kw = s.get(f.p_start, "p_start", sweep.p_start_kw);
    sweep.p_end_kw = s.get(f.p_end, "p_end", sweep.p_end_kw);
    sweep.p_step_kw = s.get(f.p_step, "p_step", sweep.p_step_kw);
    if (!(sweep.p_step_kw > 0.0) || !(sweep.p_start_kw < sweep.p_end_kw))
        throw UsageError("sweep needs p_start < p_end and p_step > 0");
    CapacityOptions opt;
    opt.scenario_factor = s.get(f.scenario, "scenario_factor", opt.scenario_factor);
    opt.v_min = s.maybe(f.vmin, "v_min");
    opt.v_max = s.maybe(f.vmax, "v_max");

    std::vector<ControllerKind> kinds;
    const auto name = s.controller_name("all");
    if (name == "all") {
        kinds = {ControllerKind::none, ControllerKind::droop, ControllerKind::ofo, ControllerKind::orpf};
    } else {
        kinds = {controller_kind_from(name)};
    }
    const auto out = prepare_out(s.maybe(f.out, "out"), f.force);

    std::vector<CapacityResult> results;
    for (auto k : kinds) {
        auto spec = controller_spec(s, k);
        if (k == ControllerKind::mldroop && spec.ml_curves.empty())
            throw UsageError("sweep with mldroop needs --curves <dir>");
        results.push_back(capacity_sweep(grid, spec, sweep, opt));
        const auto& r = results.back();
        std::cout << to_string(k) << ": capacity ";
        if (r.capacity_kw)
            std::cout << *r.capacity_kw << " kW\n";
        else
            std::cout << "none (no feasible level)\n";
    }
    write_text_file((out / "capacity.json").string(), capacity_to_json(results));
    write_text_file((out / "capacity_levels.csv").string(), capacity_levels_to_csv(results));
    return 0;
}

int cmd_fit_droop(const Flags& f) {
    const Settings s(f);
    const Network grid = load_grid(s.get<std::string>(f.grid, "grid", "cigre-lv"));
    const auto profiles = load_profile_spec(s.get<std::string>(f.profiles, "profiles", "synthetic:42:7"), grid,
                                            s.get<std::size_t>(f.downsample, "downsample", 1),
                                            s.get<std::uint64_t>(f.seed, "seed", 42));
    const double factor = s.get(f.scenario, "scenario_factor", 1.0);
    if (!(factor > 0.0)) throw UsageError("--scenario must be positive");
    const Network net = scenario_network(grid, factor, s.maybe(f.vmin, "v_min"), s.maybe(f.vmax, "v_max"));
    const auto out = prepare_out(s.maybe(f.out, "out"), f.force);

    const auto training = generate_training_data(net, apply_scenario(profiles, factor));
    FitOptions fopt;
    fopt.beta = s.get(f.beta, "beta", fopt.beta);
    fopt.slope_floor = s.get<double>(std::nullopt, "slope_floor", fopt.slope_floor);
    const auto curves = fit_all(net, training, fopt);
    write_fit(out, training, curves);
    std::cout << curves.size() << " curves from " << training.samples.size() << " samples ("
              << training.skipped_steps << " steps skipped) -> " << out.string() << "\n";
    return 0;
}

int cmd_sensitivity(const Flags& f) {
    const Settings s(f);
    const Network grid = load_grid(s.get<std::string>(f.grid, "grid", "cigre-lv"));
    const auto out = prepare_out(s.maybe(f.out, "out"), f.force);
    const auto mode = f.all_buses ? MonitoredBuses::all_buses : MonitoredBuses::inverter_buses;

    SensitivityMatrix h;
    if (f.identity) {
        h = SensitivityMatrix::identity(grid.inverter_buses());
    } else {
        // no-load, or <profiles>@<index>
        const auto op = s.get<std::string>(f.operating_point, "operating_point", "no-load");
        if (op == "no-load") {
            h = sensitivity(grid, Injections::zeros(grid.bus_count()), 1.0, mode);
        } else {
            const auto at = op.rfind('@');
            if (at == std::string::npos) throw UsageError("--operating-point must be 'no-load' or '<profiles>@<t>'");
            const auto profiles = load_profile_spec(op.substr(0, at), grid, 1);
            const auto t = std::stoull(op.substr(at + 1));
            if (t >= profiles.size()) throw UsageError("operating point index beyond the profile length");
            h = sensitivity(grid, uncontrolled_injections(grid, profiles, t), 1.0, mode);
            h.operating_point = op;
        }
    }
    write_text_file((out / "sensitivity.csv").string(), sensitivity_to_csv(h));
    std::cout << h.h.rows() << "x" << h.h.cols() << " sensitivity (" << h.operating_point << ") -> " << out.string()
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Volt/VAr control simulator for radial LV grids"};
    app.require_subcommand(1);
    Flags f;

    auto common = [&](CLI::App* c) {
        c->add_option("--config", f.config, "JSON config file (flags override it)");
        c->add_option("--grid", f.grid, "grid JSON file or 'cigre-lv'");
        c->add_option("--out", f.out, "output directory");
        c->add_flag("--force", f.force, "allow writing into a non-empty output directory");
        c->add_option("--vmin", f.vmin, "lower voltage limit, p.u.");
        c->add_option("--vmax", f.vmax, "upper voltage limit, p.u.");
        c->add_option("--scenario", f.scenario, "PV scenario factor (PV and inverter ratings)");
        c->add_option("--seed", f.seed, "seed for 'synthetic' profiles without an explicit seed");
    };
    auto controller_flags = [&](CLI::App* c) {
        c->add_option("--controller", f.controller, "none|droop|mldroop|ofo|orpf");
        c->add_option("--alpha", f.alpha, "OFO step size");
        c->add_option("--beta", f.beta, "ML-droop smoothing factor");
        c->add_option("--h-matrix", f.h_matrix, "OFO sensitivity: 'computed', 'identity' or a CSV path");
        c->add_option("--curves", f.curves, "directory of fitted curve_<bus>.json files");
        c->add_flag("--all-buses", f.all_buses, "monitor every LV bus instead of the inverter buses");
    };
    auto profile_flags = [&](CLI::App* c) {
        c->add_option("--profiles", f.profiles, "profile CSV or 'synthetic:<seed>:<days>'");
        c->add_option("--downsample", f.downsample, "average consecutive windows of this many samples")
            ->check(CLI::PositiveNumber);
    };

    auto* run = app.add_subcommand("run", "time-series simulation");
    common(run);
    controller_flags(run);
    profile_flags(run);

    auto* sweep = app.add_subcommand("sweep", "hosting-capacity sweep");
    common(sweep);
    controller_flags(sweep);
    sweep->add_option("--p-start", f.p_start, "first infeed level per load bus, kW");
    sweep->add_option("--p-end", f.p_end, "last infeed level per load bus, kW");
    sweep->add_option("--p-step", f.p_step, "level spacing per load bus, kW");

    auto* fit = app.add_subcommand("fit-droop", "fit ML-droop curves on ORPF setpoints");
    common(fit);
    profile_flags(fit);
    fit->add_option("--beta", f.beta, "smoothing factor stored in the curves");

    auto* sens = app.add_subcommand("sensitivity", "voltage sensitivity matrix");
    common(sens);
    sens->add_option("--operating-point", f.operating_point, "'no-load' or '<profiles>@<sample index>'");
    sens->add_flag("--identity", f.identity, "write the identity substitute");
    sens->add_flag("--all-buses", f.all_buses, "rows for every LV bus");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (run->parsed()) return cmd_run(f);
        if (sweep->parsed()) return cmd_sweep(f);
        if (fit->parsed()) return cmd_fit_droop(f);
        if (sens->parsed()) return cmd_sensitivity(f);
    } catch (const NumericalError& e) {
        std::cerr << "vvc: numerical failure: " << e.what() << "\n";
        return exit_numerical;
    } catch (const ParseError& e) {
        std::cerr << "vvc: " << e.what() << "\n";
        return exit_usage;
    } catch (const InvalidArgument& e) {
        std::cerr << "vvc: " << e.what() << "\n";
        return exit_usage;
    } catch (const UsageError& e) {
        std::cerr << "vvc: " << e.what() << "\n";
        return exit_usage;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "vvc: config: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "vvc: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}
