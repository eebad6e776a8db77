#include "mginf/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mginf {

void RunningStats::add(double x) {
    ++n;
    const double delta = x - mean;
    mean += delta / static_cast<double>(n);
    m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n == 0) return;
    if (n == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n);
    const double nb = static_cast<double>(other.n);
    const double total = na + nb;
    const double delta = other.mean - mean;
    mean += delta * nb / total;
    m2 += other.m2 + delta * delta * na * nb / total;
    n += other.n;
}

double RunningStats::variance() const { return n < 2 ? 0.0 : m2 / static_cast<double>(n - 1); }

double RunningStats::std_error() const { return n < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n)); }

MonteCarloAccumulator::MonteCarloAccumulator(std::int64_t k_max)
    : k_max_(k_max), occupation_(static_cast<std::size_t>(k_max) + 1) {
    if (k_max < 0) throw std::invalid_argument("k_max must be nonnegative");
}

void MonteCarloAccumulator::add(const OccupationRecord& record) {
    if (record.per_state.size() != occupation_.size()) {
        throw std::invalid_argument("occupation record has a different k_max");
    }
    for (std::size_t k = 0; k < occupation_.size(); ++k) occupation_[k].add(record.per_state[k]);
    ++late_min_[record.late_min];
    ++replicas_;
}

void MonteCarloAccumulator::add_failure(std::string reason) { failures_.push_back(std::move(reason)); }

void MonteCarloAccumulator::merge(const MonteCarloAccumulator& other) {
    if (other.k_max_ != k_max_) throw std::invalid_argument("cannot merge accumulators with different k_max");
    for (std::size_t k = 0; k < occupation_.size(); ++k) occupation_[k].merge(other.occupation_[k]);
    for (const auto& [v, c] : other.late_min_) late_min_[v] += c;
    failures_.insert(failures_.end(), other.failures_.begin(), other.failures_.end());
    replicas_ += other.replicas_;
}

double theory_occupation(const ServiceLaw& law, double lambda, std::int64_t k, double horizon,
                         const quad::QuadratureOptions& opts) {
    if (k < 0) throw std::invalid_argument("k must be nonnegative");
    if (!(horizon >= 0.0)) throw std::invalid_argument("horizon must be nonnegative");
    const double log_k_factorial = std::lgamma(static_cast<double>(k) + 1.0);
    auto integrand = [&](double t) {
        const double m = law.truncated_mean(t);
        if (k == 0) return std::exp(-lambda * m);
        if (m <= 0.0) return 0.0;
        return std::exp(static_cast<double>(k) * std::log(lambda * m) - lambda * m - log_k_factorial);
    };
    std::vector<double> cuts(law.breakpoints().begin(), law.breakpoints().end());
    for (double d = 1.0; d < horizon; d *= 10.0) cuts.push_back(d);
    const auto est = quad::integrate_finite(integrand, 0.0, horizon, cuts, opts);
    if (!est.converged) {
        throw std::runtime_error(fmt::format("occupation integral for k = {} did not converge", k));
    }
    return est.value;
}

namespace {

struct ReplicaResult {
    std::optional<OccupationRecord> record;
    std::string failure;
};

}  // namespace

MonteCarloAccumulator run_replicas(const QueueConfig& config, std::size_t first_replica, std::size_t count,
                                   std::int64_t k_max, unsigned threads) {
    validate(config);
    const std::function<ReplicaResult(std::size_t)> one = [&](std::size_t i) {
        QueueConfig replica = config;
        replica.seed = config.seed + first_replica + i;
        OccupationAccumulator occ(config.horizon, k_max, static_cast<std::int64_t>(config.initial_remaining.size()));
        try {
            simulate_stream(replica, occ);
        } catch (const SimulationOverflow& e) {
            return ReplicaResult{std::nullopt, fmt::format("seed {}: {}", replica.seed, e.what())};
        }
        return ReplicaResult{occ.finish(), {}};
    };
    const auto results = run_indexed(count, threads, one);

    MonteCarloAccumulator acc(k_max);
    for (const auto& r : results) {
        if (r.record) {
            acc.add(*r.record);
        } else {
            acc.add_failure(r.failure);
        }
    }
    return acc;
}

MonteCarloSummary summarize(const MonteCarloAccumulator& acc, const QueueConfig& config,
                            const quad::QuadratureOptions& quad_opts) {
    MonteCarloSummary out;
    out.law = config.law.name();
    out.lambda = config.lambda;
    out.horizon = config.horizon;
    out.seed = config.seed;
    out.k_max = acc.k_max();
    out.n_replicas = acc.replicas();
    out.failed_replicas = acc.failures().size();
    out.failures = acc.failures();
    out.late_min_histogram = acc.late_min_histogram();
    for (std::int64_t k = 0; k <= acc.k_max(); ++k) {
        const auto& s = acc.occupation()[static_cast<std::size_t>(k)];
        const double theory = theory_occupation(config.law, config.lambda, k, config.horizon, quad_opts);
        out.mean_occ.push_back(s.mean);
        out.std_error.push_back(s.std_error());
        out.theory_occ.push_back(theory);
        const double se = s.std_error();
        out.z_scores.push_back(se > 0.0 ? std::optional<double>((s.mean - theory) / se) : std::nullopt);
    }
    return out;
}

MonteCarloSummary run_experiment(const QueueConfig& config, std::size_t n_replicas, std::int64_t k_max,
                                 const ExperimentOptions& opts) {
    if (n_replicas < 2) throw std::invalid_argument("run_experiment needs at least 2 replicas");
    const auto acc = run_replicas(config, 0, n_replicas, k_max, opts.threads);
    return summarize(acc, config, opts.quad);
}

HorizonConvergence theory_occupation_limit(const ServiceLaw& law, double lambda, std::int64_t k, double first_horizon,
                                           double rel_tol, int max_doublings) {
    HorizonConvergence out;
    double horizon = first_horizon;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i <= max_doublings; ++i) {
        const double value = theory_occupation(law, lambda, k, horizon, {1e-12});
        out.horizons.push_back(horizon);
        out.values.push_back(value);
        if (!std::isnan(prev) && std::abs(value - prev) <= rel_tol * std::abs(value)) {
            out.converged = true;
            break;
        }
        prev = value;
        horizon *= 2.0;
    }
    return out;
}

std::string_view to_string(LiminfTrend t) {
    switch (t) {
        case LiminfTrend::stabilized: return "stabilized";
        case LiminfTrend::growing: return "growing";
        case LiminfTrend::unsettled: return "unsettled";
    }
    return "?";
}

namespace {

HorizonLiminf describe(const LateMinSample& s, const CriticalState& k0, double coverage) {
    HorizonLiminf h;
    h.horizon = s.horizon;
    for (const auto& [v, c] : s.histogram) h.replicas += c;
    if (h.replicas == 0) throw std::invalid_argument("empty late-min histogram");
    const double n = static_cast<double>(h.replicas);

    std::size_t best = 0;
    for (const auto& [v, c] : s.histogram) {
        if (c > best) {
            best = c;
            h.mode = v;
        }
    }

    // Walk the CDF: F(v) = fraction with late_min <= v.
    std::size_t below = 0;
    bool decile_set = false;
    h.lower_value = s.histogram.begin()->first;
    for (const auto& [v, c] : s.histogram) {
        // fraction with late_min >= v is 1 - F(v - 1) = 1 - below / n
        if (1.0 - static_cast<double>(below) / n >= coverage) h.lower_value = v;
        below += c;
        if (!decile_set && static_cast<double>(below) / n >= 0.1) {
            h.lower_decile = v;
            decile_set = true;
        }
    }

    if (k0.kind == CriticalState::Kind::finite) {
        std::size_t under = 0;
        for (const auto& [v, c] : s.histogram) {
            if (v < k0.value) under += c;
        }
        h.fraction_below_k0 = static_cast<double>(under) / n;
    }
    return h;
}

}  // namespace

LiminfReport liminf_estimate(std::span<const LateMinSample> samples, const CriticalState& k0, double coverage) {
    if (samples.size() < 3) throw std::invalid_argument("liminf_estimate needs at least three horizons");
    if (!(coverage > 0.0 && coverage < 1.0)) throw std::invalid_argument("coverage must lie in (0, 1)");
    const double ratio = samples[1].horizon / samples[0].horizon;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double r = samples[i].horizon / samples[i - 1].horizon;
        if (!(r > 1.0) || std::abs(r - ratio) > 1e-6 * ratio) {
            throw std::invalid_argument("liminf_estimate needs increasing, geometrically spaced horizons");
        }
    }

    LiminfReport out;
    out.k0 = k0;
    for (const auto& s : samples) out.horizons.push_back(describe(s, k0, coverage));

    const auto& hs = out.horizons;
    for (std::size_t i = 1; i < hs.size(); ++i) {
        if (hs[i].mode < hs[i - 1].mode) out.horizon_too_small = true;
    }

    const auto n = hs.size();
    if (hs[n - 1].lower_value == hs[n - 2].lower_value) {
        out.trend = LiminfTrend::stabilized;
        out.stabilized_value = hs[n - 1].lower_value;
    } else {
        bool growing = true;
        for (std::size_t i = 1; i < n; ++i) growing = growing && hs[i].lower_value > hs[i - 1].lower_value;
        out.trend = growing ? LiminfTrend::growing : LiminfTrend::unsettled;
    }

    const std::int64_t last = hs.back().lower_value;
    switch (k0.kind) {
        case CriticalState::Kind::infinite:
            out.consistent = out.trend == LiminfTrend::growing;
            out.verdict = out.consistent ? "consistent with k0 = inf"
                                         : fmt::format("lower value not growing ({}); expected k0 = inf",
                                                       to_string(out.trend));
            break;
        case CriticalState::Kind::at_least:
            out.consistent = last >= k0.value;
            out.verdict = fmt::format("lower value {} against k0 {}", last, to_string(k0));
            break;
        case CriticalState::Kind::finite: {
            if (out.stabilized_value && *out.stabilized_value == k0.value) {
                out.consistent = true;
                out.verdict = fmt::format("stabilized at k0 = {}", k0.value);
                break;
            }
            bool leaving = true;
            for (std::size_t i = 1; i < n; ++i) {
                leaving = leaving && hs[i].fraction_below_k0 <= hs[i - 1].fraction_below_k0;
            }
            if (k0.value > 0 && last >= k0.value && leaving) {
                out.consistent = true;
                out.verdict = fmt::format(
                    "not yet stabilized; states below k0 = {} are being left (fraction below k0 non-increasing)",
                    k0.value);
            } else {
                out.consistent = false;
                out.verdict = fmt::format("lower value {} ({}) inconsistent with k0 = {}", last,
                                          to_string(out.trend), k0.value);
            }
            break;
        }
    }
    if (out.horizon_too_small) out.verdict += "; horizon too small (mode decreasing in horizon)";
    return out;
}

}  // namespace mginf
