#include "mginf/service_law.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace mginf {

std::string_view to_string(GrowthClass g) {
    switch (g) {
        case GrowthClass::bounded_mean: return "bounded-mean";
        case GrowthClass::logarithmic: return "logarithmic";
        case GrowthClass::super_logarithmic: return "super-logarithmic";
    }
    return "unknown";
}

ServiceLaw::ServiceLaw(std::string name, std::shared_ptr<const Model> model, std::optional<AsymptoticProfile> profile,
                       std::vector<double> breakpoints)
    : name_(std::move(name)), model_(std::move(model)), profile_(profile), breakpoints_(std::move(breakpoints)) {}

double ServiceLaw::quantile(double p) const {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument(fmt::format("quantile: p = {} outside (0, 1)", p));
    }
    return model_->survival_quantile(1.0 - p);
}

double ServiceLaw::truncated_mean(double t) const {
    if (!(t >= 0.0)) {
        throw std::invalid_argument(fmt::format("truncated_mean: t = {} must be nonnegative", t));
    }
    return model_->truncated_mean(t);
}

namespace {

void require_positive(double x, const char* what) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument(fmt::format("{} must be positive and finite, got {}", what, x));
    }
}

class StrangeModel final : public ServiceLaw::Model {
public:
    explicit StrangeModel(double b)
        : b_(b), u0_(strange_crossing_point(b)), cache_([this](double u) { return tail(u); }, u0_) {}
    StrangeModel(const StrangeModel&) = delete;
    StrangeModel& operator=(const StrangeModel&) = delete;

    double crossing_point() const { return u0_; }

    double tail(double u) const override {
        if (u < u0_) return 1.0;
        return std::min(1.0, (1.0 + b_ / std::log(u)) / u);
    }

    // Newton on phi(x) = ln tail(e^x) - ln v = -x + ln(1 + b/x) - ln v.
    // phi is convex and decreasing, so iterates started left of the root
    // increase monotonically to it.
    double survival_quantile(double v) const override {
        if (v >= 1.0) return u0_;
        const double log_v = std::log(v);
        double x = std::max(std::log(u0_), -log_v);
        for (int iter = 0; iter < 100; ++iter) {
            const double phi = -x + std::log1p(b_ / x) - log_v;
            const double dphi = -1.0 - b_ / (x * (x + b_));
            const double step = phi / dphi;
            if (!(step < 0.0)) break;  // at or past the root
            x -= step;
            if (-step <= 1e-15 * x) break;
        }
        return std::max(u0_, std::exp(x));
    }

    double truncated_mean(double t) const override { return cache_(t); }
    bool closed_form_mean() const override { return false; }

private:
    double b_;
    double u0_;
    TruncatedMeanCache cache_;
};

class ParetoModel final : public ServiceLaw::Model {
public:
    ParetoModel(double alpha, double scale) : alpha_(alpha), scale_(scale) {}

    double tail(double u) const override { return u <= scale_ ? 1.0 : std::pow(scale_ / u, alpha_); }

    double survival_quantile(double v) const override {
        if (v >= 1.0) return scale_;
        return scale_ * std::pow(v, -1.0 / alpha_);
    }

    double truncated_mean(double t) const override {
        if (t <= scale_) return t;
        const double log_ratio = std::log(t / scale_);
        if (alpha_ == 1.0) return scale_ * (1.0 + log_ratio);
        return scale_ * (1.0 + std::expm1((1.0 - alpha_) * log_ratio) / (1.0 - alpha_));
    }
    bool closed_form_mean() const override { return true; }

private:
    double alpha_;
    double scale_;
};

class ExponentialModel final : public ServiceLaw::Model {
public:
    explicit ExponentialModel(double mean) : mean_(mean) {}
    double tail(double u) const override { return std::exp(-u / mean_); }
    double survival_quantile(double v) const override { return v >= 1.0 ? 0.0 : -mean_ * std::log(v); }
    double truncated_mean(double t) const override { return -mean_ * std::expm1(-t / mean_); }
    bool closed_form_mean() const override { return true; }

private:
    double mean_;
};

class DeterministicModel final : public ServiceLaw::Model {
public:
    explicit DeterministicModel(double value) : value_(value) {}
    double tail(double u) const override { return u < value_ ? 1.0 : 0.0; }
    double survival_quantile(double) const override { return value_; }
    double truncated_mean(double t) const override { return std::min(t, value_); }
    bool closed_form_mean() const override { return true; }

private:
    double value_;
};

class NumericModel final : public ServiceLaw::Model {
public:
    NumericModel(std::function<double(double)> tail, std::function<double(double)> inverse, double flat_until)
        : tail_(std::move(tail)), inverse_(std::move(inverse)), cache_(tail_, flat_until) {}
    double tail(double u) const override { return tail_(u); }
    double survival_quantile(double v) const override { return inverse_(v); }
    double truncated_mean(double t) const override { return cache_(t); }
    bool closed_form_mean() const override { return false; }

private:
    std::function<double(double)> tail_;
    std::function<double(double)> inverse_;
    TruncatedMeanCache cache_;
};

}  // namespace

double strange_crossing_point(double b) {
    require_positive(b, "strange law parameter b");
    auto g = [b](double u) { return (1.0 + b / std::log(u)) / u; };
    double lo = 1.0;
    double hi = 2.0;
    while (g(hi) > 1.0) {
        lo = hi;
        hi *= 2.0;
    }
    for (int i = 0; i < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 1.0 ? lo : hi) = mid;
    }
    return hi;
}

ServiceLaw make_strange_law(double b) {
    require_positive(b, "strange law parameter b");
    auto model = std::make_shared<StrangeModel>(b);
    const double u0 = model->crossing_point();
    return ServiceLaw(fmt::format("strange(b={})", b), std::move(model), AsymptoticProfile::log_class(1.0, b), {u0});
}

ServiceLaw make_pareto_law(double alpha, double scale) {
    require_positive(alpha, "pareto alpha");
    require_positive(scale, "pareto scale");
    AsymptoticProfile profile = alpha > 1.0    ? AsymptoticProfile::bounded()
                                : alpha < 1.0 ? AsymptoticProfile::super_log()
                                              : AsymptoticProfile::log_class(scale, 0.0);
    return ServiceLaw(fmt::format("pareto(alpha={},scale={})", alpha, scale),
                      std::make_shared<ParetoModel>(alpha, scale), profile, {scale});
}

ServiceLaw make_exponential_law(double mean) {
    require_positive(mean, "exponential mean");
    return ServiceLaw(fmt::format("exp(mean={})", mean), std::make_shared<ExponentialModel>(mean),
                      AsymptoticProfile::bounded());
}

ServiceLaw make_deterministic_law(double value) {
    require_positive(value, "deterministic service value");
    return ServiceLaw(fmt::format("det(value={})", value), std::make_shared<DeterministicModel>(value),
                      AsymptoticProfile::bounded(), {value});
}

ServiceLaw make_numeric_law(std::string name, std::function<double(double)> tail,
                            std::function<double(double)> survival_quantile, double flat_until,
                            std::optional<AsymptoticProfile> profile, std::vector<double> breakpoints) {
    auto model = std::make_shared<NumericModel>(std::move(tail), std::move(survival_quantile), flat_until);
    return ServiceLaw(std::move(name), std::move(model), profile, std::move(breakpoints));
}

}  // namespace mginf
