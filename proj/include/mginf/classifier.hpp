#pragma once

// Transience/recurrence classification of the occupancy states.
//
// k0 is the smallest k for which
//     int_0^inf m(t)^k exp(-lambda m(t)) dt = inf,   m(t) = E(S ^ t),
// and liminf Y_t = k0 almost surely: states below k0 are transient, the
// rest recurrent. The symbolic path decides divergence exactly from a
// certified AsymptoticProfile; the numeric path is a diagnostic.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mginf/quadrature.hpp"
#include "mginf/service_law.hpp"

namespace mginf {

/// k0, which may be infinite, or only bounded below when a numeric
/// diagnostic found no divergence up to its k_max.
struct CriticalState {
    enum class Kind { finite, infinite, at_least };
    Kind kind = Kind::finite;
    std::int64_t value = 0;

    static CriticalState finite(std::int64_t k) { return {Kind::finite, k}; }
    static CriticalState infinite() { return {Kind::infinite, 0}; }
    static CriticalState at_least(std::int64_t k) { return {Kind::at_least, k}; }

    bool operator==(const CriticalState&) const = default;
};

std::string to_string(const CriticalState& k0);

enum class Regime { recurrent, transient, mixed, undetermined };
enum class Method { symbolic_profile, numeric_diagnostic };
enum class Divergence { divergent, convergent, inconclusive };

std::string_view to_string(Regime r);
std::string_view to_string(Method m);
std::string_view to_string(Divergence d);

/// Recurrent iff k0 = 0, transient iff k0 = inf, mixed otherwise.
Regime regime_for(const CriticalState& k0);

struct StateVerdict {
    std::int64_t k = 0;
    Divergence divergence = Divergence::inconclusive;
    bool numeric_only = false;
    std::optional<double> tail_slope;
    /// Per-doubling segment integrals (log form); numeric path only, on request.
    std::vector<quad::TailSegment> trace;
};

struct ClassificationResult {
    CriticalState k0;
    Regime regime = Regime::undetermined;
    std::vector<StateVerdict> verdicts;
    Method method = Method::symbolic_profile;
    double lambda = 0.0;
    std::string law;
    std::vector<std::string> warnings;
    bool outside_supported_class = false;

    /// True when a verdict was reached (exit status 0 in the CLI).
    bool conclusive() const { return regime != Regime::undetermined; }
};

class ProfileNotCertified : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr std::int64_t kDefaultKMax = 8;

/// Exact rules on the two-term class m(t) = L ln t + beta ln ln t + O(1),
/// with p = lambda L:
///   bounded mean or p < 1        -> k0 = 0
///   L = inf or p > 1             -> k0 = inf
///   p = 1                        -> k0 = max(0, ceil(lambda beta - 1))
/// The boundary k = lambda beta - 1 counts as divergent. Depends on
/// (lambda L, lambda beta) only.
ClassificationResult classify_symbolic(const AsymptoticProfile& profile, double lambda,
                                       std::int64_t k_max = kDefaultKMax);

/// Uses the law's declared profile; throws ProfileNotCertified when it has none.
ClassificationResult classify_symbolic(const ServiceLaw& law, double lambda, std::int64_t k_max = kDefaultKMax);

struct NumericClassifyOptions {
    std::int64_t k_max = kDefaultKMax;
    /// Segments [2^j, 2^(j+1)] for first_log2 <= j < log2_horizon_budget.
    int first_log2 = 10;
    int log2_horizon_budget = 1000;
    double rel_tol = 1e-10;
    bool keep_trace = false;
};

/// Integrates each k-integrand over doubling horizons and applies the tail
/// trend heuristic. Verdicts are numeric-only; quadrature trouble gives an
/// inconclusive verdict. If the law declares a profile, disagreement with
/// the symbolic result is reported in `warnings`.
ClassificationResult classify_numeric(const ServiceLaw& law, double lambda, const NumericClassifyOptions& opts = {});

/// Agreement between a numeric diagnostic and the symbolic result: equal
/// finite k0 when the symbolic k0 is within the numeric k_max, otherwise the
/// numeric result must be "at least k_max + 1".
bool numeric_agrees(const ClassificationResult& numeric, const ClassificationResult& symbolic, std::int64_t k_max);

struct ProfileEstimate {
    AsymptoticProfile profile;   ///< beta_known is always false
    double residual_rms = 0.0;
    double condition_number = 0.0;
    bool low_confidence = false;
};

struct ProfileFitOptions {
    double t_max = 1e12;
    double decades = 2.0;
    int points = 41;
    /// Condition number of the column-scaled design above which the fit is
    /// flagged low-confidence.
    double max_condition = 1e7;
};

/// Least-squares fit of m(t) ~ L ln t + beta ln ln t + c over the top
/// `decades` of a geometric grid ending at t_max. Bounded and
/// super-logarithmic growth are detected first.
ProfileEstimate estimate_profile(const ServiceLaw& law, const ProfileFitOptions& opts = {});

}  // namespace mginf
