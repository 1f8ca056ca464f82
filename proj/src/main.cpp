#include "qsynapse/errors.hpp"
#include "qsynapse/io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

namespace {

using namespace qsynapse;

std::string resolve_out(const ExperimentConfig& cfg, const std::string& mode,
                        const std::string& preset) {
    if (!cfg.output_path.empty()) return cfg.output_path;
    const char* dir = std::getenv("QSYNAPSE_OUT_DIR");
    const std::filesystem::path base = (dir && *dir) ? dir : ".";
    std::string name = mode;
    if (!preset.empty()) name += "-" + preset;
    return (base / (name + ".csv")).string();
}

int run(const std::string& mode, const ExperimentConfig& cfg, const std::string& preset) {
    const std::string path = resolve_out(cfg, mode, preset);
    const CoupledState init{basis_state(cfg.initial), cfg.r0, 0.0};

    if (mode == "evolve") {
        const auto recs = evolve(init, cfg.model, cfg.integ);
        write_series(recs, path);
        std::cout << "output = " << path << "\n"
                  << format_metrics(report_metrics(recs, cfg.neg_threshold));
    } else if (mode == "sweep-rmin") {
        const auto rows = r_min_sweep(cfg.omega_values, cfg.tau_values, cfg.model, cfg.integ,
                                      cfg.transient_window);
        write_sweep(rows, path);
        std::cout << "output = " << path << "\nrows = " << rows.size() << "\n";
    } else if (mode == "trajectory") {
        const auto recs =
            run_trajectory(init, cfg.model, cfg.traj, trajectory_seed(cfg.traj.master_seed, 0));
        write_series(recs, path);
        long n_meas = 0;
        for (const auto& rec : recs)
            if (rec.meas) ++n_meas;
        std::cout << "output = " << path << "\nmeasurements = " << n_meas << "\n"
                  << format_metrics(report_metrics(to_time_series(recs), cfg.neg_threshold));
    } else if (mode == "ensemble") {
        const auto rows = ensemble_average(init, cfg.model, cfg.traj);
        write_ensemble(rows, path);
        const double t0 = rows.front().t;
        const double t1 = rows.back().t;
        const double window_start = t1 - 0.1 * (t1 - t0);
        double sp1 = 0.0, sp2 = 0.0, sr = 0.0;
        long count = 0;
        for (const auto& row : rows) {
            if (row.t >= window_start) {
                sp1 += row.p1_mean;
                sp2 += row.p2_mean;
                sr += row.r_mean;
                ++count;
            }
        }
        std::cout << "output = " << path << "\nrows = " << rows.size() << "\n";
        std::cout << "final_mean_p1 = " << sp1 / static_cast<double>(count) << "\n";
        std::cout << "final_mean_p2 = " << sp2 / static_cast<double>(count) << "\n";
        std::cout << "final_mean_r = " << sr / static_cast<double>(count) << "\n";
    } else if (mode == "classical-synapse") {
        std::vector<double> spikes = cfg.spike_times;
        if (spikes.empty()) {
            const double period = 1.0 / cfg.spike_rate;
            for (long k = 1; static_cast<double>(k) * period <= cfg.integ.t_end + 1e-12; ++k)
                spikes.push_back(static_cast<double>(k) * period);
        }
        const auto rows =
            simulate_classical_spikes(cfg.model.synapse, spikes, cfg.r0, cfg.integ.t_end, cfg.integ.dt);
        write_classical(rows, path);

        double sum = 0.0;
        for (const auto& row : rows) sum += row[1];
        std::cout << "output = " << path << "\n";
        std::cout << "time_average_r = " << sum / static_cast<double>(rows.size()) << "\n";

        // Stationary pre-spike average from the same closed-form segments.
        double r = cfg.r0;
        double t_prev = 0.0;
        double pre_sum = 0.0;
        long pre_n = 0;
        for (double tsp : spikes) {
            if (tsp <= 0.0) {
                r *= (1.0 - cfg.model.synapse.U);
                continue;
            }
            if (tsp > cfg.integ.t_end) break;
            const double r_pre = 1.0 - (1.0 - r) * std::exp(-(tsp - t_prev) / cfg.model.synapse.tau);
            pre_sum += r_pre;
            ++pre_n;
            r = r_pre * (1.0 - cfg.model.synapse.U);
            t_prev = tsp;
        }
        if (pre_n > 0)
            std::cout << "pre_spike_average_r = " << pre_sum / static_cast<double>(pre_n) << "\n";
        if (cfg.spike_rate > 0.0)
            std::cout << "r_stationary = " << r_stationary(cfg.model.synapse, cfg.spike_rate) << "\n";
    } else {
        throw Error("unhandled mode " + mode);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsynapse: two coupled qubits with an exchange interaction "
                 "modulated by a depressing synaptic resource"};
    app.require_subcommand(1);

    std::map<std::string, std::pair<std::string, int>> flag_kv;
    std::string preset_name, config_path;

    const std::vector<std::pair<std::string, std::string>> modes = {
        {"evolve", "deterministic coupled run; writes t,p1,p2,r,negativity"},
        {"sweep-rmin", "minimum-of-r sweep over (tau, omega) grids"},
        {"trajectory", "single measurement-protocol realization"},
        {"ensemble", "seeded average over measurement-protocol trajectories"},
        {"classical-synapse", "spike-driven depression oracle; writes t,r"},
    };
    const std::vector<std::pair<std::string, std::string>> value_flags = {
        {"--seed", "master seed for trajectory sampling"},
        {"--tau", "synapse recovery time"},
        {"--omega", "qubit interaction strength"},
        {"--eps1", "on-site energy of qubit 1"},
        {"--eps2", "on-site energy of qubit 2"},
        {"--u", "synaptic release probability in (0,1]"},
        {"--dt", "integrator time step"},
        {"--t-end", "simulation horizon"},
        {"--t-m", "time between projective measurements"},
        {"--n-traj", "ensemble size"},
        {"--initial", "initial basis state: 00, 01, 10 or 11"},
        {"--r0", "initial synaptic resource in (0,1]"},
        {"--neg-threshold", "negativity level defining the entanglement lifetime"},
        {"--transient-window", "discard window for sweep-rmin minima (default 5*tau + 2*pi/omega)"},
    };

    for (const auto& [name, desc] : modes) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("--preset", preset_name, "named parameter set (see README)");
        sub->add_option("--config", config_path, "key = value config file");
        sub->add_option_function<std::string>(
            "--out", [&](const std::string& v) { flag_kv["out"] = {v, 0}; }, "output CSV path");
        for (const auto& [flag, help] : value_flags) {
            const std::string key = flag.substr(2);
            sub->add_option_function<std::string>(
                flag, [&flag_kv, key](const std::string& v) { flag_kv[key] = {v, 0}; }, help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string mode = app.get_subcommands().front()->get_name();

    try {
        std::map<std::string, std::pair<std::string, int>> merged;
        if (!preset_name.empty()) {
            const auto& table = presets();
            const auto it = table.find(preset_name);
            if (it == table.end()) {
                std::string msg = "unknown preset '" + preset_name + "'; available:";
                for (const auto& [name, values] : table) msg += " " + name;
                throw ParseError(msg);
            }
            for (const auto& [key, value] : it->second) merged[key] = {value, 0};
        }
        if (!config_path.empty())
            for (const auto& [key, value] : parse_keyvalues(read_file(config_path)))
                merged[key] = value;
        for (const auto& [key, value] : flag_kv) merged[key] = value;

        if (merged.count("mode") && merged.at("mode").first != mode)
            throw ParseError("mode '" + merged.at("mode").first +
                             "' from preset/config conflicts with subcommand '" + mode + "'");
        merged["mode"] = {mode, 0};

        const ExperimentConfig cfg = build_config(mode, merged);
        return run(mode, cfg, preset_name);
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
