#pragma once

// Monte Carlo orchestration: replica farms, associative aggregation of
// occupation records, the occupation-time identity
//     E|T_k cap [0,T]| = lambda^k / k! int_0^T m(t)^k exp(-lambda m(t)) dt
// and the late-window liminf diagnostics.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mginf/classifier.hpp"
#include "mginf/quadrature.hpp"
#include "mginf/simulator.hpp"

namespace mginf {

/// Mean and centred second moment; merge() is Chan's pairwise update.
struct RunningStats {
    std::size_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x);
    void merge(const RunningStats& other);
    double variance() const;  ///< sample variance (n - 1)
    double std_error() const;
};

/// Partial summary over a batch of replicas. Merging batches is associative.
class MonteCarloAccumulator {
public:
    explicit MonteCarloAccumulator(std::int64_t k_max);

    void add(const OccupationRecord& record);
    void add_failure(std::string reason);
    void merge(const MonteCarloAccumulator& other);

    std::int64_t k_max() const { return k_max_; }
    std::size_t replicas() const { return replicas_; }
    const std::vector<RunningStats>& occupation() const { return occupation_; }
    const std::map<std::int64_t, std::size_t>& late_min_histogram() const { return late_min_; }
    const std::vector<std::string>& failures() const { return failures_; }

private:
    std::int64_t k_max_;
    std::size_t replicas_ = 0;
    std::vector<RunningStats> occupation_;
    std::map<std::int64_t, std::size_t> late_min_;
    std::vector<std::string> failures_;
};

struct MonteCarloSummary {
    std::string law;
    double lambda = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::int64_t k_max = 0;
    std::size_t n_replicas = 0;       ///< successful replicas
    std::size_t failed_replicas = 0;
    std::vector<std::string> failures;
    std::vector<double> mean_occ;
    std::vector<double> std_error;
    std::vector<double> theory_occ;
    std::vector<std::optional<double>> z_scores;  ///< empty when std_error is 0
    std::map<std::int64_t, std::size_t> late_min_histogram;
};

struct ExperimentOptions {
    unsigned threads = 0;  ///< 0 = hardware concurrency
    quad::QuadratureOptions quad{1e-10};
};

/// lambda^k / k! int_0^T m(t)^k exp(-lambda m(t)) dt.
double theory_occupation(const ServiceLaw& law, double lambda, std::int64_t k, double horizon,
                         const quad::QuadratureOptions& opts = {1e-10});

/// Runs fn(i) for i in [0, n) on a worker pool; results come back in index
/// order whatever the thread count.
template <class R>
std::vector<R> run_indexed(std::size_t n, unsigned threads, const std::function<R(std::size_t)>& fn);

/// Replicas use seeds seed + 0 .. seed + n - 1. A replica that overflows is
/// counted as failed; the batch carries on.
MonteCarloAccumulator run_replicas(const QueueConfig& config, std::size_t first_replica, std::size_t count,
                                   std::int64_t k_max, unsigned threads = 0);

MonteCarloSummary summarize(const MonteCarloAccumulator& acc, const QueueConfig& config,
                            const quad::QuadratureOptions& quad_opts = {1e-10});

MonteCarloSummary run_experiment(const QueueConfig& config, std::size_t n_replicas, std::int64_t k_max,
                                 const ExperimentOptions& opts = {});

/// theory_occupation at horizons T0, 2 T0, 4 T0, ... until two successive
/// values agree to rel_tol (Cauchy) or max_doublings is hit.
struct HorizonConvergence {
    bool converged = false;
    std::vector<double> horizons;
    std::vector<double> values;
};

HorizonConvergence theory_occupation_limit(const ServiceLaw& law, double lambda, std::int64_t k, double first_horizon,
                                           double rel_tol = 1e-6, int max_doublings = 40);

struct LateMinSample {
    double horizon = 0.0;
    std::map<std::int64_t, std::size_t> histogram;
};

struct HorizonLiminf {
    double horizon = 0.0;
    std::size_t replicas = 0;
    std::int64_t mode = 0;
    std::int64_t lower_decile = 0;
    /// Largest v with at least `coverage` of the replicas having late_min >= v.
    std::int64_t lower_value = 0;
    /// Fraction with late_min < k0 (0 when k0 is infinite or unknown).
    double fraction_below_k0 = 0.0;
};

enum class LiminfTrend { stabilized, growing, unsettled };
std::string_view to_string(LiminfTrend t);

struct LiminfReport {
    std::vector<HorizonLiminf> horizons;
    LiminfTrend trend = LiminfTrend::unsettled;
    std::optional<std::int64_t> stabilized_value;
    CriticalState k0;
    bool consistent = false;
    bool horizon_too_small = false;
    std::string verdict;
};

/// Needs at least three geometrically spaced, increasing horizons.
LiminfReport liminf_estimate(std::span<const LateMinSample> samples, const CriticalState& k0, double coverage = 0.8);

}  // namespace mginf

#include "mginf/detail/run_indexed.hpp"
