#include "cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "mginf/analysis.hpp"
#include "mginf/classifier.hpp"
#include "mginf/report_io.hpp"
#include "mginf/service_law.hpp"
#include "mginf/simulator.hpp"

namespace mginf::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
    std::string law = "";
    double lambda = 1.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::size_t replicas = 1;
    std::int64_t k_max = kDefaultKMax;
    double q = 0.5;
    std::optional<double> t_min;
    std::string out_dir;
    unsigned threads = 0;
    double rel_tol = 1e-10;
    std::size_t panel_budget = 1'000'000;
    std::size_t max_events = 20'000'000;
    bool numeric = false;
    bool trace = false;
    int horizon_budget = 1000;
    std::vector<double> horizons;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void add_law_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--law", o.law, "Service law, e.g. \"strange(b=2.5)\", \"pareto(alpha=0.5,scale=1)\", "
                                    "\"exp(mean=1)\", \"det(value=1)\"")
        ->required();
    cmd->add_option("--lambda", o.lambda, "Arrival rate (> 0)")->capture_default_str();
}

void add_quad_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--rel-tol", o.rel_tol, "Relative quadrature tolerance")->capture_default_str();
    cmd->add_option("--panel-budget", o.panel_budget, "Integrand evaluations allowed per integral")
        ->capture_default_str();
}

void add_sim_flags(CLI::App* cmd, Options& o, bool replicas) {
    cmd->add_option("--horizon", o.horizon, "Simulation horizon T (> 0)")->required();
    cmd->add_option("--seed", o.seed, "Base seed; replica i uses seed + i")->capture_default_str();
    if (replicas) cmd->add_option("--replicas", o.replicas, "Number of replicas")->capture_default_str();
    cmd->add_option("--out", o.out_dir,
                    fmt::format("Output directory (default: ${} or the current directory)", kOutDirEnv));
    cmd->add_option("--max-events", o.max_events, "Event cap per replica; 0 disables it")->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (0 = all cores); outputs do not depend on it")
        ->capture_default_str();
}

quad::QuadratureOptions quad_options(const Options& o) { return {o.rel_tol, 0.0, o.panel_budget}; }

ServiceLaw law_from(const Options& o) {
    try {
        return parse_law(o.law);
    } catch (const LawSpecError& e) {
        throw UsageError(e.what());
    }
}

QueueConfig config_from(const Options& o) {
    QueueConfig c{.lambda = o.lambda, .law = law_from(o), .horizon = o.horizon, .seed = o.seed};
    c.max_events = o.max_events;
    try {
        validate(c);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return c;
}

fs::path output_dir(const Options& o) {
    fs::path dir = o.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv(kOutDirEnv);
        dir = env && *env ? fs::path(env) : fs::path(".");
    }
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw UsageError(fmt::format("cannot create output directory '{}'", dir.string()));
    }
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError(fmt::format("cannot write '{}'", path.string()));
    f << content;
    if (!f) throw UsageError(fmt::format("write to '{}' failed", path.string()));
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json manifest(const std::string& command, const Options& o, const ServiceLaw& law) {
    json m{{"tool", "mginf"}, {"version", kVersion}, {"subcommand", command}, {"law", law.name()},
           {"lambda", o.lambda}};
    if (command == "classify") {
        m["numeric"] = o.numeric;
        m["k_max"] = o.k_max;
        if (o.numeric) {
            m["horizon_budget_log2"] = o.horizon_budget;
            m["rel_tol"] = o.rel_tol;
        }
        return m;
    }
    if (command == "liminf") {
        m["horizons"] = o.horizons;
    } else {
        m["horizon"] = o.horizon;
    }
    m["seed"] = o.seed;
    m["max_events"] = o.max_events;
    if (command != "simulate") {
        m["replicas"] = o.replicas;
        m["rel_tol"] = o.rel_tol;
        m["panel_budget"] = o.panel_budget;
    }
    m["k_max"] = o.k_max;
    if (command == "growth") {
        m["q"] = o.q;
        m["t_min"] = o.t_min.value_or(o.horizon / 10.0);
    }
    return m;
}

int cmd_classify(const Options& o, std::ostream& out, std::ostream& err) {
    const ServiceLaw law = law_from(o);
    if (!(o.lambda > 0.0)) throw UsageError("--lambda must be positive");
    if (o.k_max < 0) throw UsageError("--k-max must be nonnegative");
    ClassificationResult result;
    if (o.numeric) {
        NumericClassifyOptions nopts;
        nopts.k_max = o.k_max;
        nopts.log2_horizon_budget = o.horizon_budget;
        nopts.rel_tol = o.rel_tol;
        nopts.keep_trace = o.trace;
        try {
            result = classify_numeric(law, o.lambda, nopts);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    } else {
        try {
            result = classify_symbolic(law, o.lambda, o.k_max);
        } catch (const ProfileNotCertified& e) {
            err << "classify: " << e.what() << "\n";
            return kInconclusive;
        }
    }
    out << dump(to_json(result, o.trace));
    return result.conclusive() && !result.outside_supported_class ? kOk : kInconclusive;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const QueueConfig config = config_from(o);
    const fs::path dir = output_dir(o);
    write_file(dir / "manifest.json", dump(manifest("simulate", o, config.law)));
    Trajectory path;
    try {
        path = simulate(config);
    } catch (const SimulationOverflow& e) {
        err << "simulate: " << e.what() << "\n";
        write_file(dir / "PARTIAL", std::string("simulation overflow: ") + e.what() + "\n");
        return kPartial;
    }
    std::ostringstream traj;
    write_trajectory_csv(traj, path);
    write_file(dir / "trajectory.csv", traj.str());
    std::ostringstream occ;
    write_occupation_csv(occ, occupation(path, o.k_max));
    write_file(dir / "occupation.csv", occ.str());
    out << fmt::format("{} events, Y_T = {}; wrote {}\n", path.events.size(), path.final_value(), dir.string());
    return kOk;
}

int cmd_occupancy(const Options& o, std::ostream& out, std::ostream& err) {
    const QueueConfig config = config_from(o);
    if (o.replicas < 2) throw UsageError("--replicas must be at least 2");
    if (o.k_max < 0) throw UsageError("--k-max must be nonnegative");
    const fs::path dir = output_dir(o);
    write_file(dir / "manifest.json", dump(manifest("occupancy", o, config.law)));
    const auto summary = run_experiment(config, o.replicas, o.k_max, {o.threads, quad_options(o)});
    std::ostringstream table;
    write_occupancy_table_csv(table, summary);
    write_file(dir / "occupancy.csv", table.str());
    write_file(dir / "experiment.json", dump(to_json(summary)));
    out << table.str();
    if (summary.failed_replicas > 0) {
        err << fmt::format("occupancy: {} of {} replicas overflowed; results cover the rest (partial)\n",
                           summary.failed_replicas, o.replicas);
        return kPartial;
    }
    return kOk;
}

int cmd_growth(const Options& o, std::ostream& out, std::ostream& err) {
    const QueueConfig config = config_from(o);
    if (o.replicas < 1) throw UsageError("--replicas must be at least 1");
    if (!(o.q > 0.0 && o.q < 1.0)) throw UsageError("--q must lie in (0, 1)");
    const double t_min = o.t_min.value_or(o.horizon / 10.0);
    if (!(t_min >= 0.0)) throw UsageError("--t-min must be nonnegative");
    const fs::path dir = output_dir(o);
    write_file(dir / "manifest.json", dump(manifest("growth", o, config.law)));

    const GrowthChecker checker(config, o.q, t_min, quad_options(o));
    struct Outcome {
        std::optional<GrowthReport> report;
        std::string failure;
    };
    const std::function<Outcome(std::size_t)> one = [&](std::size_t i) {
        QueueConfig replica = config;
        replica.seed = config.seed + i;
        GrowthChecker::Accumulator acc(checker, 0);
        try {
            simulate_stream(replica, acc);
        } catch (const SimulationOverflow& e) {
            return Outcome{std::nullopt, e.what()};
        }
        return Outcome{acc.report(), {}};
    };
    const auto outcomes = run_indexed(o.replicas, o.threads, one);

    RunningStats h;
    std::optional<double> earliest;
    std::size_t failed = 0;
    std::ostringstream rows;
    rows << "seed,h_q_measure,first_violation_after,last_violation\n";
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const auto& r = outcomes[i].report;
        if (!r) {
            ++failed;
            continue;
        }
        h.add(r->h_q_measure);
        if (r->first_violation_after && (!earliest || *r->first_violation_after < *earliest)) {
            earliest = r->first_violation_after;
        }
        rows << config.seed + i << ',' << format_double(r->h_q_measure) << ','
             << (r->first_violation_after ? format_double(*r->first_violation_after) : "") << ','
             << (r->last_violation ? format_double(*r->last_violation) : "") << '\n';
    }

    json report;
    if (o.replicas == 1 && outcomes[0].report) {
        report = to_json(*outcomes[0].report);
    } else {
        GrowthReport mean_report;
        mean_report.q = o.q;
        mean_report.t_min = t_min;
        mean_report.h_q_measure = h.mean;
        mean_report.bound_value = checker.bound_value();
        mean_report.first_violation_after = earliest;
        report = to_json(mean_report);
        report["replicas"] = h.n;
        report["failed_replicas"] = failed;
        report["h_q_stderr"] = h.std_error();
        report["bound_satisfied"] = h.mean <= checker.bound_value() + 3.0 * h.std_error();
        write_file(dir / "growth_replicas.csv", rows.str());
    }
    write_file(dir / "growth.json", dump(report));
    out << dump(report);
    if (failed > 0) {
        err << fmt::format("growth: {} replicas overflowed; partial results\n", failed);
        return kPartial;
    }
    return kOk;
}

int cmd_liminf(const Options& o, std::ostream& out, std::ostream& err) {
    const ServiceLaw law = law_from(o);
    if (o.horizons.size() < 3) throw UsageError("--horizons needs at least three values");
    if (o.replicas < 2) throw UsageError("--replicas must be at least 2");
    const fs::path dir = output_dir(o);
    write_file(dir / "manifest.json", dump(manifest("liminf", o, law)));

    CriticalState k0 = CriticalState::at_least(0);
    try {
        k0 = classify_symbolic(law, o.lambda).k0;
    } catch (const ProfileNotCertified&) {
        k0 = classify_numeric(law, o.lambda).k0;
    }
    std::vector<LateMinSample> samples;
    std::size_t failed = 0;
    for (double horizon : o.horizons) {
        Options per = o;
        per.horizon = horizon;
        const QueueConfig config = config_from(per);
        const auto acc = run_replicas(config, 0, o.replicas, 0, o.threads);
        failed += acc.failures().size();
        samples.push_back({horizon, acc.late_min_histogram()});
    }
    LiminfReport report;
    try {
        report = liminf_estimate(samples, k0);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const json j = to_json(report);
    write_file(dir / "liminf.json", dump(j));
    out << dump(j);
    if (failed > 0) {
        err << fmt::format("liminf: {} replicas overflowed; partial results\n", failed);
        return kPartial;
    }
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"M/G/inf occupancy-state classification and Poisson-representation simulation"};
    app.name(args.empty() ? "mginf" : args.front());
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Options o;

    auto* classify = app.add_subcommand("classify", "Compute k0 and the transience/recurrence regime (JSON)");
    add_law_flags(classify, o);
    classify->add_flag("--numeric", o.numeric, "Use the numeric divergence diagnostic instead of the profile rules");
    classify->add_option("--k-max", o.k_max, "Largest state examined")->capture_default_str();
    classify->add_option("--horizon-budget", o.horizon_budget,
                         "Numeric diagnostic: integrate up to t = 2^N")
        ->capture_default_str();
    classify->add_option("--rel-tol", o.rel_tol, "Numeric diagnostic: relative quadrature tolerance")
        ->capture_default_str();
    classify->add_flag("--trace", o.trace, "Numeric diagnostic: include per-segment partial integrals");

    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate one path; write trajectory.csv and occupation.csv");
    add_law_flags(simulate_cmd, o);
    add_sim_flags(simulate_cmd, o, false);
    simulate_cmd->add_option("--k-max", o.k_max, "Largest state with its own occupation bucket")
        ->capture_default_str();

    auto* occupancy_cmd =
        app.add_subcommand("occupancy", "Monte Carlo occupation times against the quadrature identity");
    add_law_flags(occupancy_cmd, o);
    add_sim_flags(occupancy_cmd, o, true);
    occupancy_cmd->add_option("--k-max", o.k_max, "Largest state reported")->capture_default_str();
    add_quad_flags(occupancy_cmd, o);

    auto* growth_cmd = app.add_subcommand("growth", "Measure of {t : Y_t < q lambda m(t)} against its bound");
    add_law_flags(growth_cmd, o);
    add_sim_flags(growth_cmd, o, true);
    growth_cmd->add_option("--q", o.q, "Fraction q in (0, 1)")->capture_default_str();
    growth_cmd->add_option("--t-min", o.t_min, "Start of the checked window (default T/10)");
    add_quad_flags(growth_cmd, o);

    auto* liminf_cmd = app.add_subcommand("liminf", "Late-window minimum of Y over several horizons against k0");
    add_law_flags(liminf_cmd, o);
    liminf_cmd->add_option("--horizons", o.horizons, "Geometrically spaced horizons, e.g. 100,1000,10000")
        ->delimiter(',')
        ->required();
    liminf_cmd->add_option("--seed", o.seed, "Base seed")->capture_default_str();
    liminf_cmd->add_option("--replicas", o.replicas, "Replicas per horizon")->capture_default_str();
    liminf_cmd->add_option("--out", o.out_dir, "Output directory");
    liminf_cmd->add_option("--max-events", o.max_events, "Event cap per replica")->capture_default_str();
    liminf_cmd->add_option("--threads", o.threads, "Worker threads")->capture_default_str();

    std::vector<std::string> rest(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rest.begin(), rest.end());
    try {
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*classify) return cmd_classify(o, out, err);
        if (*simulate_cmd) return cmd_simulate(o, out, err);
        if (*occupancy_cmd) return cmd_occupancy(o, out, err);
        if (*growth_cmd) return cmd_growth(o, out, err);
        if (*liminf_cmd) return cmd_liminf(o, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}

}  // namespace mginf::cli
