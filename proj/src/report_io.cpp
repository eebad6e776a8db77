#include "mginf/report_io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>

namespace mginf {

using nlohmann::json;

std::string format_double(double x) { return fmt::format("{}", x); }

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    os << "t,y\n";
    os << "0," << trajectory.initial_value << '\n';
    for (const auto& e : trajectory.events) os << format_double(e.time) << ',' << e.value << '\n';
}

void write_occupation_csv(std::ostream& os, const OccupationRecord& record) {
    os << "k,time\n";
    for (std::size_t k = 0; k < record.per_state.size(); ++k) {
        os << k << ',' << format_double(record.per_state[k]) << '\n';
    }
    os << '>' << record.per_state.size() - 1 << ',' << format_double(record.overflow_time) << '\n';
}

void write_occupancy_table_csv(std::ostream& os, const MonteCarloSummary& summary) {
    os << "k,mc_mean,mc_stderr,theory,z\n";
    for (std::size_t k = 0; k < summary.mean_occ.size(); ++k) {
        os << k << ',' << format_double(summary.mean_occ[k]) << ',' << format_double(summary.std_error[k]) << ','
           << format_double(summary.theory_occ[k]) << ',';
        if (summary.z_scores[k]) os << format_double(*summary.z_scores[k]);
        os << '\n';
    }
}

namespace {
json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }
}  // namespace

json to_json(const GrowthReport& report) {
    return json{{"q", report.q},
                {"t_min", report.t_min},
                {"h_q_measure", report.h_q_measure},
                {"bound_value", report.bound_value},
                {"first_violation_after", optional_number(report.first_violation_after)}};
}

json to_json(const ClassificationResult& result, bool include_trace) {
    json k0;
    switch (result.k0.kind) {
        case CriticalState::Kind::finite: k0 = result.k0.value; break;
        case CriticalState::Kind::infinite: k0 = "inf"; break;
        case CriticalState::Kind::at_least: k0 = nullptr; break;
    }
    json verdicts = json::array();
    for (const auto& v : result.verdicts) {
        json entry{{"k", v.k}};
        switch (v.divergence) {
            case Divergence::divergent: entry["divergent"] = true; break;
            case Divergence::convergent: entry["divergent"] = false; break;
            case Divergence::inconclusive: entry["divergent"] = nullptr; break;
        }
        entry["basis"] = v.numeric_only ? "numeric-only" : "symbolic";
        if (v.tail_slope) entry["tail_slope"] = std::isfinite(*v.tail_slope) ? json(*v.tail_slope) : json("-inf");
        if (include_trace && !v.trace.empty()) {
            json trace = json::array();
            for (const auto& s : v.trace) {
                trace.push_back({{"log_t_mid", s.log_t_mid},
                                 {"log_segment_integral",
                                  std::isfinite(s.log_integral) ? json(s.log_integral) : json("-inf")}});
            }
            entry["partial_integral_trace"] = std::move(trace);
        }
        verdicts.push_back(std::move(entry));
    }
    json out{{"lambda", result.lambda},
             {"law", result.law},
             {"method", std::string(to_string(result.method))},
             {"k0", k0},
             {"regime", std::string(to_string(result.regime))},
             {"verdicts", std::move(verdicts)},
             {"warnings", result.warnings}};
    if (result.k0.kind == CriticalState::Kind::at_least) out["k0_lower_bound"] = result.k0.value;
    return out;
}

json to_json(const MonteCarloSummary& s) {
    json states = json::array();
    for (std::size_t k = 0; k < s.mean_occ.size(); ++k) {
        states.push_back({{"k", k},
                          {"mc_mean", s.mean_occ[k]},
                          {"mc_stderr", s.std_error[k]},
                          {"theory", s.theory_occ[k]},
                          {"z", optional_number(s.z_scores[k])}});
    }
    json hist = json::array();
    for (const auto& [v, c] : s.late_min_histogram) hist.push_back({{"late_min", v}, {"count", c}});
    return json{{"law", s.law},
                {"lambda", s.lambda},
                {"horizon", s.horizon},
                {"seed", s.seed},
                {"k_max", s.k_max},
                {"replicas", s.n_replicas},
                {"failed_replicas", s.failed_replicas},
                {"failures", s.failures},
                {"states", std::move(states)},
                {"late_min_histogram", std::move(hist)}};
}

json to_json(const LiminfReport& r) {
    json horizons = json::array();
    for (const auto& h : r.horizons) {
        horizons.push_back({{"horizon", h.horizon},
                            {"replicas", h.replicas},
                            {"mode", h.mode},
                            {"lower_decile", h.lower_decile},
                            {"lower_value", h.lower_value},
                            {"fraction_below_k0", h.fraction_below_k0}});
    }
    return json{{"horizons", std::move(horizons)},
                {"trend", std::string(to_string(r.trend))},
                {"stabilized_value", r.stabilized_value ? json(*r.stabilized_value) : json(nullptr)},
                {"k0", to_string(r.k0)},
                {"consistent", r.consistent},
                {"horizon_too_small", r.horizon_too_small},
                {"verdict", r.verdict}};
}

}  // namespace mginf
