#include "cli_main.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <vector>

#include "xbar/sim.hpp"

namespace xbar {

namespace {

struct Options {
    std::string policy = "islip";
    int n = 16;
    int classes = 1;
    int iters = 1;
    int speedup = 1;
    double load = 0.5;
    std::string load_sweep;  // lo:hi:step
    std::string traffic = "uniform";
    std::string rate_matrix;  // comma-separated N*N entries
    int64_t horizon = 100000;
    int64_t warmup = -1;
    uint64_t seed = 1;
    std::string preset;
    std::string out;
    int trace = 0;
    bool force = false;
    double wba_age = 1.0;
    double wba_fanout = 1.0;
};

struct Row {
    std::string policy;
    int iterations;
    double load;
    SimConfig config;
    SimResult result;
};

std::vector<double> parse_sweep(const std::string& sweep) {
    double lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(sweep);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0 || hi < lo)
        throw ConfigError("bad --load-sweep '" + sweep + "', expected lo:hi:step");
    std::vector<double> loads;
    for (double v = lo; v <= hi + 1e-9; v += step) loads.push_back(v);
    return loads;
}

TrafficSpec parse_traffic(const std::string& text, double load, const std::string& rate_matrix) {
    TrafficSpec spec;
    spec.load = load;
    if (text == "uniform") {
        spec.kind = TrafficKind::BernoulliUniform;
    } else if (text.rfind("bursty", 0) == 0) {
        spec.kind = TrafficKind::OnOffBursty;
        if (text.size() > 7 && text[6] == ':') spec.mean_burst = std::stod(text.substr(7));
    } else if (text.rfind("multicast", 0) == 0) {
        spec.kind = TrafficKind::MulticastBernoulli;
        if (text.size() > 10 && text[9] == ':') spec.mean_fanout = std::stod(text.substr(10));
    } else if (text.rfind("saturate", 0) == 0) {
        spec.kind = TrafficKind::Saturate;
        if (text.size() > 9 && text[8] == ':') spec.mean_fanout = std::stod(text.substr(9));
    } else if (text == "matrix") {
        spec.kind = TrafficKind::BernoulliMatrix;
        std::istringstream in(rate_matrix);
        std::string field;
        while (std::getline(in, field, ','))
            if (!field.empty()) spec.rate_matrix.push_back(std::stod(field));
        if (spec.rate_matrix.empty())
            throw ConfigError("traffic 'matrix' needs --rate-matrix with N*N entries");
    } else {
        throw ConfigError("unknown traffic '" + text +
                          "' (expected uniform | bursty:B | multicast:F | matrix | saturate)");
    }
    return spec;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string describe_match(const Match& m) {
    std::string out = "[";
    bool first = true;
    for (const auto& [i, o] : m.pairs()) {
        if (!first) out += ",";
        out += std::to_string(i) + ">" + std::to_string(o);
        first = false;
    }
    return out + "]";
}

std::string format_slot_record(const SlotRecord& rec) {
    std::string line = "slot=" + std::to_string(rec.slot);
    line += " arr=" + std::to_string(rec.arrivals.size());
    for (size_t it = 0; it < rec.trace.size(); ++it) {
        const IterationRecord& r = rec.trace[it];
        line += " it" + std::to_string(it + 1) + "{g:";
        bool first = true;
        for (size_t o = 0; o < r.grants.size(); ++o)
            if (r.grants[o] >= 0) {
                if (!first) line += ",";
                line += std::to_string(o) + "<" + std::to_string(r.grants[o]);
                first = false;
            }
        line += " a:";
        first = true;
        for (size_t i = 0; i < r.accepts.size(); ++i)
            if (r.accepts[i] >= 0) {
                if (!first) line += ",";
                line += std::to_string(i) + ">" + std::to_string(r.accepts[i]);
                first = false;
            }
        line += " ptr:";
        first = true;
        for (const PointerUpdate& u : r.pointer_updates) {
            if (!first) line += ",";
            line += std::string(1, u.which) + std::to_string(u.index) + ":" +
                    std::to_string(u.from) + ">" + std::to_string(u.to);
            first = false;
        }
        line += "}";
    }
    for (const Match& m : rec.phase_matches) line += " match=" + describe_match(m);
    line += " dep=" + std::to_string(rec.departures.size());
    return line;
}

SimConfig build_config(const Options& opt, double load) {
    SimConfig cfg;
    cfg.n = opt.n;
    cfg.classes = opt.classes;
    cfg.policy = parse_policy(opt.policy);
    cfg.policy.iterations = opt.iters;
    cfg.policy.wba_age_weight = opt.wba_age;
    cfg.policy.wba_fanout_weight = opt.wba_fanout;
    cfg.speedup = opt.speedup;
    cfg.horizon = opt.horizon;
    cfg.warmup = opt.warmup;
    cfg.seed = opt.seed;
    cfg.traffic = parse_traffic(opt.traffic, load, opt.rate_matrix);
    cfg.validate();
    return cfg;
}

void gate_admissibility(const SimConfig& cfg, bool force) {
    if (cfg.traffic.kind == TrafficKind::Saturate) return;  // measurement mode
    const Admissibility a = admissible_check(offered_rate_matrix(cfg.traffic, cfg.n), cfg.n);
    if (a.admissible || force) return;
    throw ConfigError("offered load is inadmissible (max row sum " +
                      format_double(a.max_row_sum) + ", max col sum " +
                      format_double(a.max_col_sum) + "); rerun with --force to override");
}

// Runs one configuration; when tracing, the first `trace_slots` slots are
// printed to stdout one line per slot.
Row run_one(const SimConfig& cfg, const std::string& policy_name, double load, int trace_slots) {
    Simulator sim(cfg);
    for (int64_t t = 0; t < cfg.horizon; ++t) {
        if (t < trace_slots) {
            SlotRecord rec;
            sim.step(&rec, /*want_trace=*/true);
            std::cout << format_slot_record(rec) << "\n";
        } else {
            sim.step();
        }
    }
    Row row;
    row.policy = policy_name;
    row.iterations = cfg.policy.iterations;
    row.load = load;
    row.config = cfg;
    row.result = sim.finalize();
    return row;
}

const char* csv_header =
    "policy,iterations,load,mean_delay_slots,throughput,max_iters_used,seed,"
    "n,classes,speedup,horizon,warmup,traffic,diverged,mean_iters_used,notes";

std::string csv_row(const Row& row) {
    const SimResult& r = row.result;
    std::string notes = r.notes;
    std::string line;
    line += csv_escape(row.policy) + ",";
    line += std::to_string(row.iterations) + ",";
    line += format_double(row.load) + ",";
    line += (r.delay.count > 0 ? format_double(r.delay.mean) : "") + std::string(",");
    line += format_double(r.throughput.aggregate()) + ",";
    line += std::to_string(r.convergence.max) + ",";
    line += std::to_string(row.config.seed) + ",";
    line += std::to_string(row.config.n) + ",";
    line += std::to_string(row.config.classes) + ",";
    line += std::to_string(row.config.speedup) + ",";
    line += std::to_string(row.config.horizon) + ",";
    line += std::to_string(row.config.effective_warmup()) + ",";
    line += csv_escape(row.config.traffic.describe()) + ",";
    line += std::string(r.diverged ? "1" : "0") + ",";
    line += format_double(r.convergence.mean) + ",";
    line += csv_escape(notes);
    return line;
}

void write_csv(const std::vector<Row>& rows, const std::string& out_path) {
    std::ostringstream body;
    body << csv_header << "\r\n";
    for (const Row& row : rows) body << csv_row(row) << "\r\n";
    if (out_path.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ConfigError("cannot open output file '" + out_path + "'");
        out << body.str();
    }
}

// ---- presets ------------------------------------------------------------

std::vector<Row> preset_fig6(const Options& opt) {
    // delay vs load for the FIFO baseline, iSLIP at 1/2/4 iterations, and
    // the ideal output-queued reference on a 16-port switch
    std::vector<double> loads;
    for (double v = 0.1; v <= 0.901; v += 0.1) loads.push_back(v);
    loads.push_back(0.95);
    loads.push_back(0.99);

    struct Entry {
        const char* policy;
        int iters;
    };
    const Entry entries[] = {{"oq", 1}, {"islip", 4}, {"islip", 2}, {"islip", 1}, {"fifo", 1}};

    std::vector<Row> rows;
    for (const Entry& e : entries)
        for (double load : loads) {
            Options o = opt;
            o.policy = e.policy;
            o.iters = e.iters;
            o.n = 16;
            const SimConfig cfg = build_config(o, load);
            rows.push_back(run_one(cfg, o.policy, load, 0));
        }
    return rows;
}

std::vector<Row> preset_fig8(const Options& opt) {
    // multicast latency vs offered output load (load * F copies per output
    // per slot), with fanout splitting (random) and without (no-split)
    const double fanout = 4.0;
    std::vector<Row> rows;
    for (const char* policy : {"mc-random", "mc-nosplit"}) {
        for (double output_load = 0.1; output_load <= 0.901; output_load += 0.1) {
            Options o = opt;
            o.policy = policy;
            o.n = 8;
            o.traffic = "multicast:4";
            const double lambda_in = output_load / fanout;
            SimConfig cfg = build_config(o, lambda_in);
            Row row = run_one(cfg, policy, lambda_in, 0);
            row.result.notes = "offered_output_load=" + format_double(output_load) +
                               ";definition=lambda_in*F copies per output per slot";
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<Row> preset_rrm_limit(const Options& opt) {
    // sweep across the RRM stability knee: offered load is carried in
    // full up to roughly 1 - 1/e and collapses beyond it
    std::vector<Row> rows;
    for (double load : {0.55, 0.58, 0.60, 0.62, 0.64, 0.66, 0.70}) {
        Options o = opt;
        o.policy = "rrm";
        o.iters = 1;
        o.n = 16;
        o.traffic = "uniform";
        rows.push_back(run_one(build_config(o, load), "rrm", load, 0));
    }
    return rows;
}

std::vector<Row> preset_fifo_limit(const Options& opt) {
    // saturated FIFO baseline: HOL blocking caps throughput near 0.586
    std::vector<Row> rows;
    for (uint64_t s = 0; s < 5; ++s) {
        Options o = opt;
        o.policy = "fifo";
        o.iters = 1;
        o.n = 16;
        o.traffic = "uniform";
        o.seed = opt.seed + s;
        SimConfig cfg = build_config(o, 1.0);
        rows.push_back(run_one(cfg, "fifo", 1.0, 0));
    }
    return rows;
}

std::vector<Row> preset_props(const Options& opt) {
    std::vector<Row> rows;

    // fairness of saturated single-iteration islip: per-output service spread
    {
        Options o = opt;
        o.policy = "islip";
        o.iters = 1;
        o.n = 16;
        o.traffic = "saturate";
        Row row = run_one(build_config(o, 1.0), "islip", 1.0, 0);
        const auto& sm = row.result.throughput.service_matrix;
        double worst = 0;
        for (int out = 0; out < o.n; ++out) {
            uint64_t lo = ~uint64_t{0}, hi = 0;
            for (int in = 0; in < o.n; ++in) {
                const uint64_t v = sm[static_cast<size_t>(in) * o.n + out];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (hi > 0) worst = std::max(worst, static_cast<double>(hi - lo) /
                                                    static_cast<double>(hi));
        }
        row.result.notes = "check=fairness;per_output_service_spread=" + format_double(worst);
        rows.push_back(std::move(row));
    }

    // convergence under load 0.9 with an unlimited iteration budget
    {
        Options o = opt;
        o.policy = "islip";
        o.iters = 16;
        o.n = 16;
        Row row = run_one(build_config(o, 0.9), "islip", 0.9, 0);
        row.result.notes =
            "check=convergence;mean_iters=" + format_double(row.result.convergence.mean) +
            ";max_iters=" + std::to_string(row.result.convergence.max);
        rows.push_back(std::move(row));
    }

    // starvation watch: largest gap between services of any port pair
    {
        Options o = opt;
        o.policy = "islip";
        o.iters = 1;
        o.n = 8;
        o.traffic = "saturate";
        SimConfig cfg = build_config(o, 1.0);
        cfg.randomize_pointers = true;
        Row row = run_one(cfg, "islip", 1.0, 0);
        row.result.notes = "check=starvation;max_service_gap=" +
                           std::to_string(row.result.max_service_gap) +
                           ";window=" + std::to_string(o.n * o.n);
        rows.push_back(std::move(row));
    }

    // burstiness surrogate at a bursty offered load
    {
        Options o = opt;
        o.policy = "islip";
        o.iters = 1;
        o.n = 16;
        o.traffic = "bursty:16";
        Row row = run_one(build_config(o, 0.6), "islip", 0.6, 0);
        row.result.notes =
            "check=burstiness;ingress_mean_run=" +
            format_double(row.result.burstiness.ingress_mean_run) +
            ";egress_mean_run=" + format_double(row.result.burstiness.egress_mean_run);
        rows.push_back(std::move(row));
    }
    return rows;
}

// Applies a flat key=value file to the defaults; the later CLI parse only
// overwrites fields actually given as flags, so flags win over the file.
void apply_config_file(Options& opt, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto context = "config file line " + std::to_string(lineno);
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(context + ": expected key=value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "policy") opt.policy = value;
            else if (key == "n") opt.n = std::stoi(value);
            else if (key == "classes") opt.classes = std::stoi(value);
            else if (key == "iters") opt.iters = std::stoi(value);
            else if (key == "speedup") opt.speedup = std::stoi(value);
            else if (key == "load") opt.load = std::stod(value);
            else if (key == "load-sweep") opt.load_sweep = value;
            else if (key == "traffic") opt.traffic = value;
            else if (key == "rate-matrix") opt.rate_matrix = value;
            else if (key == "horizon") opt.horizon = std::stoll(value);
            else if (key == "warmup") opt.warmup = std::stoll(value);
            else if (key == "seed") opt.seed = std::stoull(value);
            else if (key == "preset") opt.preset = value;
            else if (key == "out") opt.out = value;
            else if (key == "trace") opt.trace = std::stoi(value);
            else if (key == "force") opt.force = (value == "1" || value == "true");
            else if (key == "wba-age") opt.wba_age = std::stod(value);
            else if (key == "wba-fanout") opt.wba_fanout = std::stod(value);
            else throw ConfigError(context + ": unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(context + ": bad value '" + value + "' for key '" + key + "'");
        }
    }
}

// The config file must load before the main parse so flags can override it.
std::string find_config_argument(int argc, const char* const* argv) {
    for (int k = 1; k < argc; ++k) {
        const std::string arg = argv[k];
        if (arg == "--config" && k + 1 < argc) return argv[k + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

}  // namespace

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

int cli_main(int argc, const char* const* argv) {
    Options opt;
    std::string config_file;

    CLI::App app{"input-queued crossbar switch simulator"};
    app.add_option("--policy", opt.policy,
                   "islip | rrm | ilqf | iocf | maxsize | lqf | ocf | fifo | oq | mc-random | "
                   "mc-nosplit | mc-concentrate | mc-wba");
    app.add_option("--n", opt.n, "port count");
    app.add_option("--classes", opt.classes, "priority classes (strict priority), 1..4");
    app.add_option("--iters", opt.iters, "scheduler iterations per slot");
    app.add_option("--speedup", opt.speedup, "crossbar phases per slot");
    app.add_option("--load", opt.load, "offered load (probability per input per slot)");
    app.add_option("--load-sweep", opt.load_sweep, "sweep lo:hi:step instead of a single load");
    app.add_option("--traffic", opt.traffic,
                   "uniform | bursty:B | multicast:F | matrix | saturate");
    app.add_option("--rate-matrix", opt.rate_matrix,
                   "comma-separated N*N rates for --traffic matrix");
    app.add_option("--horizon", opt.horizon, "slots to simulate");
    app.add_option("--warmup", opt.warmup, "slots excluded from statistics (default horizon/10)");
    app.add_option("--seed", opt.seed, "master RNG seed");
    app.add_option("--preset", opt.preset, "fig6 | fig8 | rrm-limit | fifo-limit | props");
    app.add_option("--out", opt.out, "CSV output path (default stdout)");
    app.add_option("--trace", opt.trace, "print a per-slot trace for the first K slots");
    app.add_flag("--force", opt.force, "run even if the offered load is inadmissible");
    app.add_option("--wba-age", opt.wba_age, "WBA age weight");
    app.add_option("--wba-fanout", opt.wba_fanout, "WBA fanout penalty weight");
    app.add_option("--config", config_file, "flat key=value config file (flags override)");

    try {
        const std::string early_config = find_config_argument(argc, argv);
        if (!early_config.empty()) apply_config_file(opt, early_config);
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        std::vector<Row> rows;
        if (!opt.preset.empty()) {
            if (opt.preset == "fig6")
                rows = preset_fig6(opt);
            else if (opt.preset == "fig8")
                rows = preset_fig8(opt);
            else if (opt.preset == "rrm-limit")
                rows = preset_rrm_limit(opt);
            else if (opt.preset == "fifo-limit")
                rows = preset_fifo_limit(opt);
            else if (opt.preset == "props")
                rows = preset_props(opt);
            else
                throw ConfigError("unknown preset '" + opt.preset + "'");
        } else {
            std::vector<double> loads =
                opt.load_sweep.empty() ? std::vector<double>{opt.load} : parse_sweep(opt.load_sweep);
            for (double load : loads) {
                const SimConfig cfg = build_config(opt, load);
                gate_admissibility(cfg, opt.force);
                rows.push_back(run_one(cfg, opt.policy, load, opt.trace));
            }
        }
        write_csv(rows, opt.out);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ContractViolation& e) {
        std::cerr << "contract violation: " << e.what() << "\n";
        // deterministic replay with tracing to expose the offending slot
        if (opt.preset.empty() && opt.load_sweep.empty()) {
            try {
                const SimConfig cfg = build_config(opt, opt.load);
                Simulator sim(cfg);
                SlotRecord rec;
                for (int64_t t = 0; t < cfg.horizon; ++t) {
                    try {
                        sim.step(&rec, true);
                    } catch (const ContractViolation&) {
                        std::cerr << "offending slot: " << format_slot_record(rec) << "\n";
                        break;
                    }
                }
            } catch (...) {  // the replay is best-effort
            }
        }
        return 2;
    }
}

}  // namespace xbar
