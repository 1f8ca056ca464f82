#pragma once

#include "qsynapse/evolution.hpp"
#include "qsynapse/trajectories.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qsynapse {

enum class Mode { evolve, sweep_rmin, trajectory, ensemble, classical_synapse };

std::string mode_name(Mode m);
Mode mode_from_name(const std::string& name); // throws ParseError

struct ExperimentConfig {
    Mode mode = Mode::evolve;
    ModelParams model;
    IntegratorConfig integ;
    TrajectoryConfig traj;
    BasisLabel initial{0, 1};
    double r0 = 1.0;
    std::string output_path; // empty -> default location
    double neg_threshold = 0.01;
    double transient_window = -1.0; // <0 -> automatic (see r_min_sweep)
    std::vector<double> omega_values{0.0, 0.05, 0.1, 0.2};
    std::vector<double> tau_values{0.001, 10.0, 100.0, 500.0};
    double spike_rate = 0.0;
    std::vector<double> spike_times;
};

// One "key = value" per line, '#' comments, blank lines ignored.
// Returns key -> (value, line number); malformed or duplicate lines
// throw ParseError naming the line.
std::map<std::string, std::pair<std::string, int>> parse_keyvalues(const std::string& text);

// Named parameter sets transcribed from the experiment definitions the
// tool ships with. Key -> (config key -> value).
const std::map<std::string, std::map<std::string, std::string>>& presets();

// Validate a merged key->value map into a config for the given mode.
// Unknown keys, missing required fields and out-of-range values are all
// collected into a single ParseError.
ExperimentConfig build_config(const std::string& mode,
                              const std::map<std::string, std::pair<std::string, int>>& kv);

// Full document form: requires a `mode` key inside the text.
ExperimentConfig parse_config(const std::string& text);

// %.17g — enough digits that parsing the text recovers the exact double.
std::string fmt17(double v);

// CSV writers. All of them write to <path>.part and rename on success,
// so a failed run never leaves a partial file at the target path.
void write_series(const std::vector<TimeSeriesRecord>& records, const std::string& path);
void write_series(const std::vector<TrajectoryRecord>& records, const std::string& path);
void write_ensemble(const std::vector<EnsembleRow>& rows, const std::string& path);
void write_sweep(const std::vector<RminRow>& rows, const std::string& path);
void write_classical(const std::vector<std::array<double, 2>>& rows, const std::string& path);

// CSV parsers for the two series shapes (round-trip counterparts of the
// writers above). Throw ParseError on header or cell mismatch.
std::vector<TimeSeriesRecord> parse_series_csv(const std::string& text);
std::vector<TrajectoryRecord> parse_trajectory_csv(const std::string& text);
std::string read_file(const std::string& path);

struct Metrics {
    std::optional<double> first_return_t;    // first t > t0 with p1 > 0.99
    double negativity_lifetime = 0.0;        // total time with negativity above threshold
    std::optional<double> first_neg_max_t;   // first local maximum of negativity
    double final_mean_p1 = 0.0;              // mean over the last 10% of the run
    double final_mean_r = 0.0;
};

Metrics report_metrics(const std::vector<TimeSeriesRecord>& records, double neg_threshold = 0.01);
std::string format_metrics(const Metrics& m);

std::vector<TimeSeriesRecord> to_time_series(const std::vector<TrajectoryRecord>& records);

} // namespace qsynapse
