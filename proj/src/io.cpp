#include "qsynapse/io.hpp"
#include "qsynapse/errors.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace qsynapse {

std::string mode_name(Mode m) {
    switch (m) {
        case Mode::evolve: return "evolve";
        case Mode::sweep_rmin: return "sweep-rmin";
        case Mode::trajectory: return "trajectory";
        case Mode::ensemble: return "ensemble";
        case Mode::classical_synapse: return "classical-synapse";
    }
    throw Error("mode_name: bad mode");
}

Mode mode_from_name(const std::string& name) {
    if (name == "evolve") return Mode::evolve;
    if (name == "sweep-rmin") return Mode::sweep_rmin;
    if (name == "trajectory") return Mode::trajectory;
    if (name == "ensemble") return Mode::ensemble;
    if (name == "classical-synapse") return Mode::classical_synapse;
    throw ParseError("unknown mode '" + name +
                     "' (expected evolve, sweep-rmin, trajectory, ensemble or classical-synapse)");
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::map<std::string, std::pair<std::string, int>> parse_keyvalues(const std::string& text) {
    std::map<std::string, std::pair<std::string, int>> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("line " + std::to_string(lineno) + ": empty key");
        if (value.empty())
            throw ParseError("line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        if (out.count(key))
            throw ParseError("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        out[key] = {value, lineno};
    }
    return out;
}

const std::map<std::string, std::map<std::string, std::string>>& presets() {
    static const std::map<std::string, std::map<std::string, std::string>> table = {
        {"fig2-sweep",
         {{"mode", "sweep-rmin"}, {"eps1", "0"}, {"eps2", "0"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "10"}, {"dt", "0.001"}, {"t-end", "5000"}, {"initial", "10"}, {"r0", "1"},
          {"omega-values", "0,0.05,0.1,0.2"}, {"tau-values", "0.001,10,100,500"},
          {"sample-every", "1000"}}},
        {"fig3-left-tau100",
         {{"mode", "evolve"}, {"eps1", "0"}, {"eps2", "0"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "100"}, {"dt", "0.001"}, {"t-end", "3000"}, {"initial", "01"}, {"r0", "1"},
          {"sample-every", "1000"}}},
        {"fig3-right-tau100",
         {{"mode", "evolve"}, {"eps1", "0"}, {"eps2", "0.1"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "100"}, {"dt", "0.001"}, {"t-end", "3000"}, {"initial", "01"}, {"r0", "1"},
          {"sample-every", "1000"}}},
        {"fig4-right-tau100",
         {{"mode", "evolve"}, {"eps1", "0"}, {"eps2", "0.1"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "100"}, {"dt", "0.001"}, {"t-end", "3000"}, {"initial", "01"}, {"r0", "1"},
          {"sample-every", "1000"}}},
        {"fig5-tau10",
         {{"mode", "ensemble"}, {"eps1", "0"}, {"eps2", "0.1"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "10"}, {"dt", "0.001"}, {"t-end", "600"}, {"t-m", "30"}, {"n-traj", "10000"},
          {"initial", "01"}, {"r0", "1"}, {"seed", "1"}, {"sample-every", "1000"}}},
        {"fig5-tau1",
         {{"mode", "ensemble"}, {"eps1", "0"}, {"eps2", "0.1"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "1"}, {"dt", "0.001"}, {"t-end", "600"}, {"t-m", "30"}, {"n-traj", "10000"},
          {"initial", "01"}, {"r0", "1"}, {"seed", "1"}, {"sample-every", "1000"}}},
        {"fig5-tau0.01",
         {{"mode", "ensemble"}, {"eps1", "0"}, {"eps2", "0.1"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "0.01"}, {"dt", "0.001"}, {"t-end", "600"}, {"t-m", "30"}, {"n-traj", "10000"},
          {"initial", "01"}, {"r0", "1"}, {"seed", "1"}, {"sample-every", "1000"}}},
        {"fig5-single-tau10",
         {{"mode", "trajectory"}, {"eps1", "0"}, {"eps2", "0.1"}, {"omega", "0.05"}, {"u", "0.5"},
          {"tau", "10"}, {"dt", "0.001"}, {"t-end", "600"}, {"t-m", "30"}, {"initial", "01"},
          {"r0", "1"}, {"seed", "1"}, {"sample-every", "1000"}}},
    };
    return table;
}

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "mode", "eps1", "eps2", "omega", "u", "tau", "dt", "t-end", "sample-every",
        "t-m", "n-traj", "seed", "threads", "initial", "r0", "out", "neg-threshold",
        "transient-window", "omega-values", "tau-values", "spike-rate", "spike-times"};
    return keys;
}

struct FieldReader {
    const std::map<std::string, std::pair<std::string, int>>& kv;
    std::vector<std::string>& errors;

    bool has(const std::string& key) const { return kv.count(key) != 0; }

    std::string where(const std::string& key) const {
        const int line = kv.at(key).second;
        return line > 0 ? " (line " + std::to_string(line) + ")" : "";
    }

    double number(const std::string& key, double fallback) {
        if (!has(key)) return fallback;
        const std::string& s = kv.at(key).first;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0') {
            errors.push_back("field '" + key + "': not a number: '" + s + "'" + where(key));
            return fallback;
        }
        return v;
    }

    long long integer(const std::string& key, long long fallback) {
        if (!has(key)) return fallback;
        const std::string& s = kv.at(key).first;
        char* end = nullptr;
        const long long v = std::strtoll(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0') {
            errors.push_back("field '" + key + "': not an integer: '" + s + "'" + where(key));
            return fallback;
        }
        return v;
    }

    std::uint64_t unsigned64(const std::string& key, std::uint64_t fallback) {
        if (!has(key)) return fallback;
        const std::string& s = kv.at(key).first;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(s.c_str(), &end, 10);
        if (end == s.c_str() || *end != '\0' || s.find('-') != std::string::npos) {
            errors.push_back("field '" + key + "': not an unsigned integer: '" + s + "'" + where(key));
            return fallback;
        }
        return v;
    }

    std::vector<double> number_list(const std::string& key, std::vector<double> fallback) {
        if (!has(key)) return fallback;
        const std::string& s = kv.at(key).first;
        std::vector<double> out;
        std::istringstream in(s);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            char* end = nullptr;
            const double v = std::strtod(item.c_str(), &end);
            if (item.empty() || end == item.c_str() || *end != '\0') {
                errors.push_back("field '" + key + "': bad list entry '" + item + "'" + where(key));
                return fallback;
            }
            out.push_back(v);
        }
        if (out.empty()) {
            errors.push_back("field '" + key + "': empty list" + where(key));
            return fallback;
        }
        return out;
    }

    std::string text(const std::string& key, const std::string& fallback) {
        return has(key) ? kv.at(key).first : fallback;
    }
};

} // namespace

ExperimentConfig build_config(const std::string& mode_str,
                              const std::map<std::string, std::pair<std::string, int>>& kv) {
    std::vector<std::string> errors;

    for (const auto& [key, value] : kv)
        if (!known_keys().count(key))
            errors.push_back("line " + std::to_string(value.second) + ": unknown key '" + key + "'");

    ExperimentConfig cfg;
    try {
        cfg.mode = mode_from_name(mode_str);
    } catch (const ParseError& e) {
        errors.push_back(e.what());
    }

    // Required fields, by mode.
    std::vector<std::string> required;
    if (mode_str == "classical-synapse") {
        required = {"u", "tau", "dt", "t-end"};
    } else if (mode_str == "sweep-rmin") {
        required = {"eps1", "eps2", "u", "dt", "t-end"};
    } else {
        required = {"eps1", "eps2", "omega", "u", "tau", "dt", "t-end"};
        if (mode_str == "trajectory" || mode_str == "ensemble") required.push_back("t-m");
        if (mode_str == "ensemble") required.push_back("n-traj");
    }
    for (const std::string& key : required)
        if (!kv.count(key)) errors.push_back("missing required field '" + key + "'");

    FieldReader read{kv, errors};
    cfg.model.eps1 = read.number("eps1", 0.0);
    cfg.model.eps2 = read.number("eps2", 0.0);
    cfg.model.omega = read.number("omega", 0.05);
    cfg.model.synapse.U = read.number("u", 0.5);
    cfg.model.synapse.tau = read.number("tau", 10.0);
    cfg.integ.dt = read.number("dt", 0.001);
    cfg.integ.t_end = read.number("t-end", 1000.0);
    cfg.integ.sample_every = read.integer("sample-every", 1000);
    cfg.r0 = read.number("r0", 1.0);
    cfg.neg_threshold = read.number("neg-threshold", 0.01);
    cfg.transient_window = read.number("transient-window", -1.0);
    cfg.output_path = read.text("out", "");
    cfg.omega_values = read.number_list("omega-values", cfg.omega_values);
    cfg.tau_values = read.number_list("tau-values", cfg.tau_values);
    cfg.spike_rate = read.number("spike-rate", 0.0);
    if (read.has("spike-times")) cfg.spike_times = read.number_list("spike-times", {});

    const std::string initial = read.text("initial", "01");
    if (initial == "00") cfg.initial = {0, 0};
    else if (initial == "01") cfg.initial = {0, 1};
    else if (initial == "10") cfg.initial = {1, 0};
    else if (initial == "11") cfg.initial = {1, 1};
    else errors.push_back("field 'initial': expected one of 00, 01, 10, 11, got '" + initial + "'");

    cfg.traj.t_m = read.number("t-m", 30.0);
    cfg.traj.n_traj = static_cast<int>(read.integer("n-traj", 1));
    cfg.traj.master_seed = read.unsigned64("seed", 1);
    cfg.traj.threads = static_cast<int>(read.integer("threads", 1));
    cfg.traj.dt = cfg.integ.dt;
    cfg.traj.t_end = cfg.integ.t_end;
    cfg.traj.sample_every = cfg.integ.sample_every;

    // Range checks, only meaningful when the fields were present/parsed.
    auto range_error = [&](const std::string& msg) { errors.push_back(msg); };
    if (!(cfg.model.synapse.U > 0.0 && cfg.model.synapse.U <= 1.0))
        range_error("field 'u': release probability must be in (0,1]");
    if (!(cfg.model.synapse.tau > 0.0)) range_error("field 'tau': must be positive");
    if (cfg.model.omega < 0.0) range_error("field 'omega': must be >= 0");
    if (!(cfg.integ.dt > 0.0)) range_error("field 'dt': must be positive");
    if (kv.count("t-end") && cfg.integ.t_end < cfg.integ.dt)
        range_error("field 't-end': must be >= dt");
    if (cfg.integ.sample_every < 1) range_error("field 'sample-every': must be >= 1");
    if (!(cfg.r0 > 0.0 && cfg.r0 <= 1.0)) range_error("field 'r0': must be in (0,1]");
    if (cfg.traj.n_traj < 1) range_error("field 'n-traj': must be >= 1");
    if (cfg.traj.threads < 1) range_error("field 'threads': must be >= 1");
    if ((mode_str == "trajectory" || mode_str == "ensemble") && cfg.traj.t_m < cfg.integ.dt)
        range_error("field 't-m': must be >= dt");
    if (mode_str == "classical-synapse" && cfg.spike_times.empty() && !(cfg.spike_rate > 0.0))
        range_error("classical-synapse needs 'spike-rate' > 0 or explicit 'spike-times'");

    if (!errors.empty()) {
        std::string msg = "invalid configuration:";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw ParseError(msg);
    }
    return cfg;
}

ExperimentConfig parse_config(const std::string& text) {
    const auto kv = parse_keyvalues(text);
    if (!kv.count("mode")) {
        // Without a mode nothing else can be judged; report the full
        // baseline requirement list to make the fix obvious.
        throw ParseError(
            "invalid configuration:\n  - missing required field 'mode'"
            "\n  - missing required field 'eps1'\n  - missing required field 'eps2'"
            "\n  - missing required field 'omega'\n  - missing required field 'u'"
            "\n  - missing required field 'tau'\n  - missing required field 'dt'"
            "\n  - missing required field 't-end'");
    }
    return build_config(kv.at("mode").first, kv);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void atomic_write(const std::string& path, const std::string& content) {
    const std::string part = path + ".part";
    {
        std::ofstream out(part, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open '" + part + "' for writing");
        out << content;
        out.flush();
        if (!out.good()) {
            std::error_code ec;
            std::filesystem::remove(part, ec);
            throw Error("write failed for '" + part + "'");
        }
    }
    std::error_code ec;
    std::filesystem::rename(part, path, ec);
    if (ec) {
        std::filesystem::remove(part, ec);
        throw Error("cannot move '" + part + "' to '" + path + "'");
    }
}

} // namespace

void write_series(const std::vector<TimeSeriesRecord>& records, const std::string& path) {
    std::string buf = "t,p1,p2,r,negativity\n";
    for (const TimeSeriesRecord& rec : records) {
        buf += fmt17(rec.t);
        buf += ',';
        buf += fmt17(rec.p1);
        buf += ',';
        buf += fmt17(rec.p2);
        buf += ',';
        buf += fmt17(rec.r);
        buf += ',';
        buf += fmt17(rec.negativity);
        buf += '\n';
    }
    atomic_write(path, buf);
}

void write_series(const std::vector<TrajectoryRecord>& records, const std::string& path) {
    std::string buf = "t,p1,p2,r,negativity,s_c,meas\n";
    for (const TrajectoryRecord& rec : records) {
        buf += fmt17(rec.t);
        buf += ',';
        buf += fmt17(rec.p1);
        buf += ',';
        buf += fmt17(rec.p2);
        buf += ',';
        buf += fmt17(rec.r);
        buf += ',';
        buf += fmt17(rec.negativity);
        buf += ',';
        buf += std::to_string(rec.s_c);
        buf += ',';
        buf += (rec.meas ? "1" : "0");
        buf += '\n';
    }
    atomic_write(path, buf);
}

void write_ensemble(const std::vector<EnsembleRow>& rows, const std::string& path) {
    std::string buf = "t,p1_mean,p2_mean,r_mean,p1_stderr\n";
    for (const EnsembleRow& row : rows) {
        buf += fmt17(row.t);
        buf += ',';
        buf += fmt17(row.p1_mean);
        buf += ',';
        buf += fmt17(row.p2_mean);
        buf += ',';
        buf += fmt17(row.r_mean);
        buf += ',';
        buf += fmt17(row.p1_stderr);
        buf += '\n';
    }
    atomic_write(path, buf);
}

void write_sweep(const std::vector<RminRow>& rows, const std::string& path) {
    std::string buf = "tau,omega,r_min,r_min_over_r0\n";
    for (const RminRow& row : rows) {
        buf += fmt17(row.tau);
        buf += ',';
        buf += fmt17(row.omega);
        buf += ',';
        buf += fmt17(row.r_min);
        buf += ',';
        buf += fmt17(row.ratio);
        buf += '\n';
    }
    atomic_write(path, buf);
}

void write_classical(const std::vector<std::array<double, 2>>& rows, const std::string& path) {
    std::string buf = "t,r\n";
    for (const auto& row : rows) {
        buf += fmt17(row[0]);
        buf += ',';
        buf += fmt17(row[1]);
        buf += '\n';
    }
    atomic_write(path, buf);
}

namespace {

std::vector<std::vector<double>> parse_csv_table(const std::string& text,
                                                 const std::string& expected_header,
                                                 size_t columns) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("csv: empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header)
        throw ParseError("csv: expected header '" + expected_header + "', got '" + line + "'");

    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end == cell.c_str() || *end != '\0')
                throw ParseError("csv line " + std::to_string(lineno) + ": bad cell '" + cell + "'");
            row.push_back(v);
        }
        if (row.size() != columns)
            throw ParseError("csv line " + std::to_string(lineno) + ": expected " +
                             std::to_string(columns) + " columns, got " + std::to_string(row.size()));
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

std::vector<TimeSeriesRecord> parse_series_csv(const std::string& text) {
    const auto table = parse_csv_table(text, "t,p1,p2,r,negativity", 5);
    std::vector<TimeSeriesRecord> out;
    out.reserve(table.size());
    for (const auto& row : table) out.push_back({row[0], row[1], row[2], row[3], row[4]});
    return out;
}

std::vector<TrajectoryRecord> parse_trajectory_csv(const std::string& text) {
    const auto table = parse_csv_table(text, "t,p1,p2,r,negativity,s_c,meas", 7);
    std::vector<TrajectoryRecord> out;
    out.reserve(table.size());
    for (const auto& row : table) {
        TrajectoryRecord rec;
        rec.t = row[0];
        rec.p1 = row[1];
        rec.p2 = row[2];
        rec.r = row[3];
        rec.negativity = row[4];
        rec.s_c = static_cast<int>(row[5]);
        rec.meas = row[6] != 0.0;
        out.push_back(rec);
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "' for reading");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

Metrics report_metrics(const std::vector<TimeSeriesRecord>& records, double neg_threshold) {
    if (records.size() < 2) throw Error("report_metrics: need at least 2 records");
    Metrics m;

    const double t0 = records.front().t;
    for (size_t k = 1; k < records.size(); ++k) {
        if (records[k].t > t0 && records[k].p1 > 0.99) {
            m.first_return_t = records[k].t;
            break;
        }
    }

    for (size_t k = 0; k + 1 < records.size(); ++k)
        if (records[k].negativity > neg_threshold)
            m.negativity_lifetime += records[k + 1].t - records[k].t;

    for (size_t k = 1; k + 1 < records.size(); ++k) {
        const double n = records[k].negativity;
        if (n > 1e-6 && n > records[k - 1].negativity && n >= records[k + 1].negativity) {
            m.first_neg_max_t = records[k].t;
            break;
        }
    }

    const double t_last = records.back().t;
    const double window_start = t_last - 0.1 * (t_last - t0);
    double sum_p1 = 0.0, sum_r = 0.0;
    long count = 0;
    for (const TimeSeriesRecord& rec : records) {
        if (rec.t >= window_start) {
            sum_p1 += rec.p1;
            sum_r += rec.r;
            ++count;
        }
    }
    m.final_mean_p1 = sum_p1 / static_cast<double>(count);
    m.final_mean_r = sum_r / static_cast<double>(count);
    return m;
}

std::string format_metrics(const Metrics& m) {
    char buf[64];
    std::string out;
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.9g", v);
        return std::string(buf);
    };
    out += "first_return_p1 = " + (m.first_return_t ? num(*m.first_return_t) : "none") + "\n";
    out += "negativity_lifetime = " + num(m.negativity_lifetime) + "\n";
    out += "first_negativity_max_t = " + (m.first_neg_max_t ? num(*m.first_neg_max_t) : "none") + "\n";
    out += "final_mean_p1 = " + num(m.final_mean_p1) + "\n";
    out += "final_mean_r = " + num(m.final_mean_r) + "\n";
    return out;
}

std::vector<TimeSeriesRecord> to_time_series(const std::vector<TrajectoryRecord>& records) {
    std::vector<TimeSeriesRecord> out;
    out.reserve(records.size());
    for (const TrajectoryRecord& rec : records)
        out.push_back({rec.t, rec.p1, rec.p2, rec.r, rec.negativity});
    return out;
}

} // namespace qsynapse
