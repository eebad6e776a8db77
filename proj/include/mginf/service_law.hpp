#pragma once

// Service-time distributions for the M/G/inf queue: tail P[S > t],
// inverse-CDF sampling and the truncated mean m(t) = E(S ^ t).

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mginf {

/// Growth class of m(t) = E(S ^ t) on the log scale.
enum class GrowthClass {
    bounded_mean,     ///< E S < inf, m(t) -> E S
    logarithmic,      ///< m(t) / ln t -> log_coefficient < inf
    super_logarithmic ///< m(t) / ln t -> inf
};

std::string_view to_string(GrowthClass g);

/// Two-term expansion m(t) = L ln t + beta ln ln t + O(1).
struct AsymptoticProfile {
    GrowthClass growth = GrowthClass::logarithmic;
    double log_coefficient = 0.0;   ///< L; meaningful for GrowthClass::logarithmic
    double loglog_coefficient = 0.0;///< beta
    bool beta_known = false;
    /// Set when the law is known to carry terms beyond the two-term class
    /// (e.g. ln ln ln t). Boundary classifications are then not decided.
    bool has_higher_order_terms = false;

    static AsymptoticProfile bounded() { return {GrowthClass::bounded_mean, 0.0, 0.0, true, false}; }
    static AsymptoticProfile super_log() { return {GrowthClass::super_logarithmic, 0.0, 0.0, true, false}; }
    static AsymptoticProfile log_class(double L, double beta) {
        return {GrowthClass::logarithmic, L, beta, true, false};
    }
};

/// Cumulative integral of a tail function on a doubling grid, so that
/// m(t) costs one short residual integral. Immutable once built.
class TruncatedMeanCache {
public:
    /// `tail` must equal 1 on [0, first_knot). Knots double from first_knot
    /// up to the largest finite double.
    TruncatedMeanCache(std::function<double(double)> tail, double first_knot, double rel_tol = 1e-12);

    double operator()(double t) const;
    std::size_t knot_count() const { return knots_.size(); }

private:
    std::function<double(double)> tail_;
    std::vector<double> knots_;
    std::vector<double> cumulative_;
    double rel_tol_;
};

class ServiceLaw {
public:
    /// Behaviour a concrete law supplies. Implementations are immutable.
    class Model {
    public:
        virtual ~Model() = default;
        virtual double tail(double t) const = 0;
        /// Smallest u with tail(u) <= v, for v in (0, 1].
        virtual double survival_quantile(double v) const = 0;
        virtual double truncated_mean(double t) const = 0;
        virtual bool closed_form_mean() const = 0;
    };

    ServiceLaw(std::string name, std::shared_ptr<const Model> model, std::optional<AsymptoticProfile> profile,
               std::vector<double> breakpoints = {});

    const std::string& name() const { return name_; }
    double tail(double t) const { return t < 0.0 ? 1.0 : model_->tail(t); }
    /// Inverse CDF: inf{u : P[S <= u] >= p}, p in (0, 1).
    double quantile(double p) const;
    double survival_quantile(double v) const { return model_->survival_quantile(v); }
    /// Draw from a uniform variate on (0, 1). Uses the survival inverse, which
    /// has the same law as quantile(u) but keeps precision deep in the tail.
    double sample(double u) const { return model_->survival_quantile(u); }
    /// m(t) = E(S ^ t); closed form where available, cached quadrature otherwise.
    double truncated_mean(double t) const;
    bool has_closed_form_mean() const { return model_->closed_form_mean(); }
    const std::optional<AsymptoticProfile>& profile() const { return profile_; }
    /// Points where tail has a kink; quadrature splits there.
    std::span<const double> breakpoints() const { return breakpoints_; }

private:
    std::string name_;
    std::shared_ptr<const Model> model_;
    std::optional<AsymptoticProfile> profile_;
    std::vector<double> breakpoints_;
};

/// Tail min(1, 1/u + b/(u ln u)): equal to 1 below the crossing point u0,
/// so S >= u0 almost surely. m(t) = ln t + b ln ln t + O(1).
ServiceLaw make_strange_law(double b);
ServiceLaw make_pareto_law(double alpha, double scale);
ServiceLaw make_exponential_law(double mean);
/// S = value almost surely.
ServiceLaw make_deterministic_law(double value);

/// Law backed only by a tail and its survival inverse; m(t) via cached
/// quadrature. `flat_until` is where the tail first drops below 1.
ServiceLaw make_numeric_law(std::string name, std::function<double(double)> tail,
                            std::function<double(double)> survival_quantile, double flat_until,
                            std::optional<AsymptoticProfile> profile = std::nullopt,
                            std::vector<double> breakpoints = {});

/// Crossing point u0 > 1 of 1/u + b/(u ln u) = 1.
double strange_crossing_point(double b);

class LawSpecError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Parses `strange(b=2.5)`, `pareto(alpha=1,scale=1)`, `exp(mean=1)`,
/// `det(value=1)`. Case-insensitive, whitespace-tolerant. Unknown names,
/// unknown or repeated parameters, and missing required parameters throw
/// LawSpecError. `pareto` defaults scale to 1.
ServiceLaw parse_law(std::string_view spec);

}  // namespace mginf
