#include "mginf/simulator.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <queue>

#include "mginf/rng.hpp"

namespace mginf {

namespace {
constexpr std::uint64_t kArrivalStream = 0xA11;
constexpr std::uint64_t kServiceStream = 0x5E2;
}  // namespace

void validate(const QueueConfig& config) {
    if (!(config.lambda > 0.0) || !std::isfinite(config.lambda)) {
        throw std::invalid_argument(fmt::format("arrival rate must be positive, got {}", config.lambda));
    }
    if (!(config.horizon > 0.0) || !std::isfinite(config.horizon)) {
        throw std::invalid_argument(fmt::format("horizon must be positive, got {}", config.horizon));
    }
    for (double r : config.initial_remaining) {
        if (!(r >= 0.0)) throw std::invalid_argument("initial remaining service times must be nonnegative");
    }
}

std::int64_t Trajectory::value_at(double t) const {
    const auto it = std::upper_bound(events.begin(), events.end(), t,
                                     [](double x, const Event& e) { return x < e.time; });
    return it == events.begin() ? initial_value : std::prev(it)->value;
}

void simulate_stream(const QueueConfig& config, EventSink& sink) {
    validate(config);
    UniformStream arrivals(config.seed, kArrivalStream);
    UniformStream services(config.seed, kServiceStream);
    std::priority_queue<double, std::vector<double>, std::greater<>> departures(std::greater<>{},
                                                                               config.initial_remaining);

    const double horizon = config.horizon;
    const double rate = config.lambda;
    std::int64_t y = static_cast<std::int64_t>(config.initial_remaining.size());
    std::size_t emitted = 0;
    auto emit = [&](double t, std::int64_t v) {
        if (config.max_events != 0 && ++emitted > config.max_events) {
            throw SimulationOverflow(fmt::format(
                "simulation exceeded {} events before t = {}; raise the cap or use streaming mode (max_events = 0)",
                config.max_events, t));
        }
        sink.on_event(t, v);
    };

    double next_arrival = -std::log(arrivals.next()) / rate;
    while (true) {
        // Strict comparison: a departure coinciding with an arrival goes after it.
        while (!departures.empty() && departures.top() < next_arrival && departures.top() <= horizon) {
            const double t = departures.top();
            departures.pop();
            emit(t, --y);
        }
        if (next_arrival > horizon) break;
        emit(next_arrival, ++y);
        departures.push(next_arrival + config.law.sample(services.next()));
        next_arrival += -std::log(arrivals.next()) / rate;
    }
}

namespace {
class CollectingSink final : public EventSink {
public:
    explicit CollectingSink(Trajectory& out) : out_(out) {}
    void on_event(double time, std::int64_t value) override { out_.events.push_back({time, value}); }

private:
    Trajectory& out_;
};
}  // namespace

Trajectory simulate(const QueueConfig& config) {
    Trajectory out;
    out.horizon = config.horizon;
    out.initial_value = static_cast<std::int64_t>(config.initial_remaining.size());
    CollectingSink sink(out);
    simulate_stream(config, sink);
    return out;
}

double OccupationRecord::total() const {
    return std::accumulate(per_state.begin(), per_state.end(), 0.0) + overflow_time;
}

OccupationAccumulator::OccupationAccumulator(double horizon, std::int64_t k_max, std::int64_t initial_value)
    : current_(initial_value), window_min_(initial_value) {
    if (k_max < 0) throw std::invalid_argument("k_max must be nonnegative");
    record_.per_state.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    record_.horizon = horizon;
}

void OccupationAccumulator::add(double duration, std::int64_t value) {
    if (value < static_cast<std::int64_t>(record_.per_state.size())) {
        record_.per_state[static_cast<std::size_t>(value)] += duration;
    } else {
        record_.overflow_time += duration;
    }
}

void OccupationAccumulator::on_event(double time, std::int64_t value) {
    if (time < last_time_ || time > record_.horizon || value < 0) {
        throw std::invalid_argument(fmt::format("malformed event ({}, {})", time, value));
    }
    add(time - last_time_, current_);
    const double window_start = 0.5 * record_.horizon;
    if (time > window_start) {
        if (!window_open_) {
            window_min_ = current_;  // value holding at T/2
            window_open_ = true;
        }
        window_min_ = std::min(window_min_, value);
    }
    last_time_ = time;
    current_ = value;
}

OccupationRecord OccupationAccumulator::finish() const {
    OccupationRecord out = record_;
    const double rest = out.horizon - last_time_;
    if (current_ < static_cast<std::int64_t>(out.per_state.size())) {
        out.per_state[static_cast<std::size_t>(current_)] += rest;
    } else {
        out.overflow_time += rest;
    }
    out.late_min = window_open_ ? window_min_ : current_;
    out.final_value = current_;
    return out;
}

OccupationRecord occupation(const Trajectory& trajectory, std::int64_t k_max) {
    OccupationAccumulator acc(trajectory.horizon, k_max, trajectory.initial_value);
    for (const auto& e : trajectory.events) acc.on_event(e.time, e.value);
    return acc.finish();
}

double gamma_q(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument(fmt::format("q = {} outside [0, 1]", q));
    return q == 0.0 ? 1.0 : 1.0 - q + q * std::log(q);
}

double chernoff_poisson_bound(double mu, double q) {
    if (!(mu >= 0.0)) throw std::invalid_argument(fmt::format("mu = {} must be nonnegative", mu));
    return std::exp(-gamma_q(q) * mu);
}

}  // namespace mginf
