#include "qse/cli.hpp"

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "qse/errors.hpp"
#include "qse/io.hpp"
#include "qse/presets.hpp"

namespace qse {

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string one_line(std::string msg) {
    for (char& c : msg)
        if (c == '\n' || c == '\r') c = ' ';
    return msg;
}

// Per-label output path for battery mode: r.csv → r_<label>.csv.
std::string label_path(const std::string& path, const std::string& label) {
    std::string safe = label;
    for (char& c : safe)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-') c = '_';
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size()) + "_" + safe + ext;
    return path + "_" + safe;
}

std::string states_path(const std::string& path) {
    const std::string ext = ".csv";
    if (path.size() > ext.size() && path.compare(path.size() - ext.size(), ext.size(), ext) == 0)
        return path.substr(0, path.size() - ext.size()) + "_states" + ext;
    return path + ".states";
}

struct CommonArgs {
    std::string config_path;
    std::string out;
    long steps = -1;
    std::int64_t seed = -1;
};

ExperimentConfig load_config(const CommonArgs& args) {
    return parse_config(slurp(args.config_path));
}

std::string required_out(const std::string& flag_value, const std::string& config_value,
                         const char* what) {
    if (!flag_value.empty()) return flag_value;
    if (!config_value.empty()) return config_value;
    throw ValidationError(std::string("no output path for ") + what +
                          " (give --out or set it in the config run section)");
}

int cmd_validate(const CommonArgs& args) {
    load_config(args);
    std::cout << "ok\n";
    return 0;
}

int cmd_simulate(const CommonArgs& args) {
    ExperimentConfig cfg = load_config(args);
    if (args.steps > 0) cfg.run.steps = args.steps;
    if (args.seed >= 0) cfg.run.seed_base = static_cast<std::uint64_t>(args.seed);
    const SystemSpec spec = build_system_spec(cfg);

    const auto records = simulate_trajectory(spec, cfg.run.steps, cfg.run.seed_base);
    std::vector<std::string> labels;
    for (const auto& entry : spec.measurement.operators()) labels.push_back(entry.label);
    const std::string out = required_out(args.out, cfg.run.records_csv, "simulate");
    atomic_write_file(out, simulation_csv_text(records, labels));
    std::cout << "wrote " << out << " (" << records.size() << " steps)\n";
    return 0;
}

int cmd_estimate(const CommonArgs& args, bool log_states) {
    ExperimentConfig cfg = load_config(args);
    if (args.steps > 0) cfg.run.steps = args.steps;
    if (args.seed >= 0) cfg.run.seed_base = static_cast<std::uint64_t>(args.seed);
    if (log_states) cfg.run.log_states = true;
    const SystemSpec spec = build_system_spec(cfg);
    const EstimatorConfig est = build_estimator_config(cfg);
    const std::string out = required_out(args.out, cfg.run.records_csv, "estimate");

    if (spec.measurement.mode() == MeasurementMode::battery) {
        const auto batteries =
            run_trajectory_battery(spec, est, cfg.run.steps, cfg.run.seed_base);
        for (const auto& battery : batteries) {
            const std::string path = label_path(out, battery.label);
            write_records_csv(battery.records, path);
            if (cfg.run.log_states) write_states_csv(battery.records, states_path(path));
            std::cout << "wrote " << path << " (" << battery.records.size() << " steps, '"
                      << battery.label << "')\n";
        }
        return 0;
    }

    const auto records = run_trajectory(spec, est, cfg.run.steps, cfg.run.seed_base);
    write_records_csv(records, out);
    if (cfg.run.log_states) write_states_csv(records, states_path(out));
    std::cout << "wrote " << out << " (" << records.size()
              << " steps, final fidelity " << format_real17(records.back().fidelity) << ")\n";
    return 0;
}

int cmd_compare(const CommonArgs& args, int n_seeds_flag, int jobs_flag) {
    ExperimentConfig cfg = load_config(args);
    if (args.steps > 0) cfg.run.steps = args.steps;
    if (args.seed >= 0) cfg.run.seed_base = static_cast<std::uint64_t>(args.seed);
    if (n_seeds_flag > 0) cfg.run.n_seeds = n_seeds_flag;
    if (jobs_flag > 0) cfg.run.jobs = jobs_flag;
    const SystemSpec spec = build_system_spec(cfg);
    const EstimatorConfig est = build_estimator_config(cfg);
    const std::string out = required_out(args.out, cfg.run.summary, "compare");

    const RunSummary summary = monte_carlo_compare(spec, est, cfg.run.n_seeds, cfg.run.steps,
                                                   cfg.run.seed_base, cfg.run.jobs);
    write_summary(summary, serialize_config(cfg), out);
    std::cout << "wrote " << out << "\n"
              << "ose mean_mse=" << format_real17(summary.ose.mean_mse)
              << " raw mean_mse=" << format_real17(summary.raw_pseudo_inverse.mean_mse)
              << " improved_fraction=" << format_real17(summary.improved_fraction)
              << (summary.degenerate_tie ? " (degenerate tie)" : "") << "\n";
    return 0;
}

int cmd_gen_system(Eigen::Index dim, std::uint64_t seed, const std::string& out) {
    if (dim < 2) throw ValidationError("gen-system: --dim must be ≥ 2");
    RandomStream rng(seed);

    ExperimentConfig cfg;
    cfg.system.dim = dim;
    cfg.system.dynamics.unitary_ref.matrix = haar_random_unitary(dim, rng);

    const bool power_of_two = (dim & (dim - 1)) == 0;
    for (Eigen::Index k = 0; k < dim; ++k) {
        OperatorEntryConfig entry;
        entry.label = "a" + std::to_string(k);
        if (power_of_two) {
            std::vector<std::string> factors;
            for (Eigen::Index bit = dim >> 1; bit >= 1; bit >>= 1)
                factors.push_back((k & bit) ? "P1" : "P0");
            entry.ref.kron = std::move(factors);
        } else {
            CMatrix proj = CMatrix::Zero(dim, dim);
            proj(k, k) = 1.0;
            entry.ref.matrix = std::move(proj);
        }
        cfg.system.measurement.operators.push_back(std::move(entry));
    }
    cfg.system.initial_state = haar_random_state(dim, rng).ket;
    cfg.estimator.lambda = 1.0;
    cfg.estimator.delta = 1e6;
    cfg.run.steps = 50;
    cfg.run.n_seeds = 2;
    cfg.run.seed_base = seed;

    const std::string text = serialize_config(cfg);
    parse_config(text);  // generated configs must validate
    atomic_write_file(out, text);
    std::cout << "wrote " << out << " (dim " << dim << ", seed " << seed << ")\n";
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"quantum state estimation toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    bool log_states = false;
    int n_seeds_flag = -1;
    int jobs_flag = -1;
    Eigen::Index gen_dim = 2;
    std::uint64_t gen_seed = 0;
    std::string gen_out;

    auto add_common = [&](CLI::App* sub, bool with_steps_seed = true) {
        sub->add_option("--config", args.config_path, "experiment config file")->required();
        sub->add_option("--out", args.out, "output path (overrides the config)");
        if (with_steps_seed) {
            sub->add_option("--steps", args.steps, "step count override");
            sub->add_option("--seed", args.seed, "seed override");
        }
    };

    CLI::App* simulate = app.add_subcommand("simulate", "run the system without an estimator");
    add_common(simulate);

    CLI::App* estimate = app.add_subcommand("estimate", "run the full estimation loop");
    add_common(estimate);
    estimate->add_flag("--log-states", log_states, "also write full state vectors");

    CLI::App* compare =
        app.add_subcommand("compare", "paired Monte Carlo study vs the pseudo-inverse baseline");
    add_common(compare);
    compare->add_option("--seeds", n_seeds_flag, "number of paired seeds");
    compare->add_option("--jobs", jobs_flag, "parallel trajectory workers");

    CLI::App* gen = app.add_subcommand("gen-system", "emit a random system config");
    gen->add_option("--dim", gen_dim, "state dimension")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output config path")->required();

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a config");
    validate->add_option("--config", args.config_path, "experiment config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: usage: " << one_line(e.what()) << "\n";
        return 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(args);
        if (estimate->parsed()) return cmd_estimate(args, log_states);
        if (compare->parsed()) return cmd_compare(args, n_seeds_flag, jobs_flag);
        if (gen->parsed()) return cmd_gen_system(gen_dim, gen_seed, gen_out);
        if (validate->parsed()) return cmd_validate(args);
    } catch (const ParseError& e) {
        std::cerr << "error: parse: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: validation: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const BadConfig& e) {
        std::cerr << "error: validation: " << one_line(e.what()) << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: runtime: " << one_line(e.what()) << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: runtime: " << one_line(e.what()) << "\n";
        return 2;
    }
    return 1;
}

}  // namespace qse
