#pragma once

// Exact event-driven simulation of the M/G/inf queue. Customers are the
// points (arrival time, service duration) of a Poisson process with
// intensity lambda dt x dF_S(u); Y_t counts those still in service.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mginf/quadrature.hpp"
#include "mginf/service_law.hpp"

namespace mginf {

struct QueueConfig {
    double lambda = 1.0;
    ServiceLaw law;
    double horizon = 1.0;
    std::uint64_t seed = 0;
    /// Remaining service times of customers present at time 0 (empty by default).
    std::vector<double> initial_remaining{};
    /// Event cap per replica; 0 disables it.
    std::size_t max_events = 20'000'000;
};

/// Throws std::invalid_argument unless lambda > 0, horizon > 0 and the
/// initial remaining times are nonnegative.
void validate(const QueueConfig& config);

struct Event {
    double time;
    std::int64_t value;  ///< Y just after the event
};

/// Piecewise-constant path of Y on [0, horizon]. Consecutive values differ
/// by exactly one; simultaneous arrival and departure order arrival first.
struct Trajectory {
    std::int64_t initial_value = 0;
    std::vector<Event> events;
    double horizon = 0.0;

    /// Y_t (right-continuous).
    std::int64_t value_at(double t) const;
    std::int64_t final_value() const { return events.empty() ? initial_value : events.back().value; }
};

class SimulationOverflow : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Receives events in time order.
class EventSink {
public:
    virtual ~EventSink() = default;
    virtual void on_event(double time, std::int64_t value) = 0;
};

/// Streams the path without storing it. Arrival gaps and service draws use
/// separate substreams of the seed, so a longer horizon extends the same path.
/// Throws SimulationOverflow past config.max_events events.
void simulate_stream(const QueueConfig& config, EventSink& sink);

Trajectory simulate(const QueueConfig& config);

/// Per-state occupation times on [0, T]. States above k_max share one
/// overflow bucket.
struct OccupationRecord {
    std::vector<double> per_state;
    double overflow_time = 0.0;
    double horizon = 0.0;
    std::int64_t late_min = 0;   ///< min of Y over [T/2, T]
    std::int64_t final_value = 0;

    double total() const;
};

class OccupationAccumulator final : public EventSink {
public:
    OccupationAccumulator(double horizon, std::int64_t k_max, std::int64_t initial_value = 0);
    void on_event(double time, std::int64_t value) override;
    OccupationRecord finish() const;

private:
    void add(double duration, std::int64_t value);

    OccupationRecord record_;
    double last_time_ = 0.0;
    std::int64_t current_ = 0;
    std::int64_t window_min_ = 0;
    bool window_open_ = false;
};

OccupationRecord occupation(const Trajectory& trajectory, std::int64_t k_max);

/// gamma_q = 1 - q - q ln(1/q).
double gamma_q(double q);

/// exp(-gamma_q mu): bound on P[Poisson(mu) <= q mu].
double chernoff_poisson_bound(double mu, double q);

struct GrowthReport {
    double q = 0.0;
    double t_min = 0.0;
    double horizon = 0.0;
    /// |{t in [t_min, T] : Y_t < q lambda m(t)}|
    double h_q_measure = 0.0;
    std::optional<double> first_violation_after;
    std::optional<double> last_violation;
    /// int_0^T exp(-gamma_q lambda m(t)) dt
    double bound_value = 0.0;
};

/// Compares paths against the increasing threshold q lambda m(t). The bound
/// integral is computed once at construction.
class GrowthChecker {
public:
    GrowthChecker(const QueueConfig& config, double q, double t_min, const quad::QuadratureOptions& quad_opts = {1e-10});

    double bound_value() const { return bound_value_; }
    double q() const { return q_; }
    double t_min() const { return t_min_; }

    GrowthReport check(const Trajectory& trajectory) const;

    /// Streaming form: feed events, then call report().
    class Accumulator final : public EventSink {
    public:
        Accumulator(const GrowthChecker& checker, std::int64_t initial_value);
        void on_event(double time, std::int64_t value) override;
        GrowthReport report() const;

    private:
        double onset(std::int64_t value);
        void add(double a, double b, std::int64_t value);

        const GrowthChecker* checker_;
        GrowthReport report_;
        std::vector<double> onset_cache_;
        double last_time_ = 0.0;
        std::int64_t current_ = 0;
    };

private:
    /// inf{t in [0, T] : q lambda m(t) > value}, +inf if none.
    double violation_onset(std::int64_t value) const;

    ServiceLaw law_;
    double lambda_;
    double horizon_;
    double q_;
    double t_min_;
    double bound_value_ = 0.0;
};

GrowthReport growth_check(const Trajectory& trajectory, const QueueConfig& config, double q, double t_min);

}  // namespace mginf
