#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "mginf/simulator.hpp"

namespace mginf {

namespace {
constexpr double kOnsetRelTol = 1e-10;
constexpr double kUnset = -1.0;
}  // namespace

GrowthChecker::GrowthChecker(const QueueConfig& config, double q, double t_min,
                             const quad::QuadratureOptions& quad_opts)
    : law_(config.law), lambda_(config.lambda), horizon_(config.horizon), q_(q), t_min_(t_min) {
    validate(config);
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument(fmt::format("q = {} must lie in (0, 1)", q));
    if (!(t_min >= 0.0)) throw std::invalid_argument(fmt::format("t_min = {} must be nonnegative", t_min));

    const double rate = gamma_q(q) * lambda_;
    const ServiceLaw& law = law_;
    auto integrand = [&law, rate](double t) { return std::exp(-rate * law.truncated_mean(t)); };
    const auto est = quad::integrate_finite(integrand, 0.0, horizon_, law_.breakpoints(), quad_opts);
    if (!est.converged) {
        throw std::runtime_error("growth bound integral did not converge");
    }
    bound_value_ = est.value;
}

double GrowthChecker::violation_onset(std::int64_t value) const {
    const double level = static_cast<double>(value) / (q_ * lambda_);
    if (level <= 0.0) return 0.0;  // m(t) > 0 for every t > 0
    if (law_.truncated_mean(horizon_) <= level) return std::numeric_limits<double>::infinity();
    double lo = 0.0;
    double hi = horizon_;
    const double tol = kOnsetRelTol * horizon_;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (law_.truncated_mean(mid) > level ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

GrowthChecker::Accumulator::Accumulator(const GrowthChecker& checker, std::int64_t initial_value)
    : checker_(&checker), current_(initial_value) {
    report_.q = checker.q_;
    report_.t_min = checker.t_min_;
    report_.horizon = checker.horizon_;
    report_.bound_value = checker.bound_value_;
}

double GrowthChecker::Accumulator::onset(std::int64_t value) {
    const auto idx = static_cast<std::size_t>(value);
    if (idx >= onset_cache_.size()) onset_cache_.resize(idx + 1, kUnset);
    if (onset_cache_[idx] == kUnset) onset_cache_[idx] = checker_->violation_onset(value);
    return onset_cache_[idx];
}

// Y = value on [a, b); the threshold rises, so the violating part is a suffix.
void GrowthChecker::Accumulator::add(double a, double b, std::int64_t value) {
    const double lo = std::max(a, checker_->t_min_);
    const double hi = std::min(b, checker_->horizon_);
    if (!(hi > lo)) return;
    const double start = std::max(lo, onset(value));
    if (start < hi) {
        report_.h_q_measure += hi - start;
        if (!report_.first_violation_after) report_.first_violation_after = start;
        report_.last_violation = hi;
    }
}

void GrowthChecker::Accumulator::on_event(double time, std::int64_t value) {
    add(last_time_, time, current_);
    last_time_ = time;
    current_ = value;
}

GrowthReport GrowthChecker::Accumulator::report() const {
    Accumulator tail_pass = *this;
    tail_pass.add(last_time_, checker_->horizon_, current_);
    return tail_pass.report_;
}

GrowthReport GrowthChecker::check(const Trajectory& trajectory) const {
    Accumulator acc(*this, trajectory.initial_value);
    for (const auto& e : trajectory.events) acc.on_event(e.time, e.value);
    return acc.report();
}

GrowthReport growth_check(const Trajectory& trajectory, const QueueConfig& config, double q, double t_min) {
    return GrowthChecker(config, q, t_min).check(trajectory);
}

}  // namespace mginf
