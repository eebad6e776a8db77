#pragma once

// Adaptive Gauss-Kronrod integration over finite and semi-infinite ranges,
// plus the tail-trend heuristic used to flag suspected divergence of
// improper integrals.

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace mginf::quad {

using Integrand = std::function<double(double)>;

struct IntegralEstimate {
    double value = 0.0;
    double abs_error_bound = 0.0;
    std::size_t panels_used = 0;
    bool converged = false;
};

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    /// Total integrand evaluations allowed for one integral.
    std::size_t max_evaluations = 1'000'000;
};

/// Globally adaptive G7/K15 on [a, b]. Subdivides the panel with the largest
/// error estimate until the summed estimate drops below
/// max(abs_tol, rel_tol * |value|) or the evaluation budget runs out.
IntegralEstimate integrate_finite(const Integrand& f, double a, double b,
                                  const QuadratureOptions& opts = {});

/// Same, but the range is first split at the given interior points.
IntegralEstimate integrate_finite(const Integrand& f, double a, double b,
                                  std::span<const double> breakpoints,
                                  const QuadratureOptions& opts = {});

enum class DecayHint { exponential, polynomial, unknown };

enum class TailStatus { converged, not_converged, divergence_suspected };

std::string_view to_string(TailStatus s);

/// One doubling segment of an improper integral, kept in log form so that
/// segments of growing integrals never overflow.
struct TailSegment {
    double log_t_mid = 0.0;       // ln of the segment midpoint (time)
    double log_integral = 0.0;    // ln of the segment integral; -inf when it vanishes
    bool converged = true;
};

struct TailTrend {
    /// Least-squares slope of ln(segment integral) against ln(ln t).
    /// A segment sequence behaving like (ln t)^a has slope a, and the
    /// sum diverges iff a >= -1.
    double slope = 0.0;
    bool divergence_suspected = false;
    bool geometric_shrink = false;
    bool usable = false;
};

/// Slope margin below -1 that still counts as divergence. Second-order
/// ln ln t / ln t corrections bias finite-horizon slopes downward.
inline constexpr double kBorderlineSlopeMargin = 0.25;
/// Number of trailing segments the trend is fitted on.
inline constexpr std::size_t kTrendWindow = 8;

TailTrend assess_tail(std::span<const TailSegment> segments);

struct SemiInfiniteOptions {
    QuadratureOptions quad{};
    DecayHint hint = DecayHint::unknown;
    /// Segments double until t - a exceeds 2^log2_horizon_budget.
    int log2_horizon_budget = 60;
};

struct SemiInfiniteEstimate {
    IntegralEstimate estimate;
    TailStatus status = TailStatus::not_converged;
    TailTrend trend;
    std::vector<TailSegment> segments;
};

/// Integrates f over [a, inf) segment by segment: [a, a+1], then
/// [a + 2^i, a + 2^(i+1)]. Polynomial and unknown hints integrate each
/// segment in the logarithmic variable. Stops once segments shrink
/// geometrically below tolerance; if the horizon budget is exhausted first,
/// the tail trend decides between not_converged and divergence_suspected.
/// A suspected divergence never reports converged = true.
SemiInfiniteEstimate integrate_semi_infinite(const Integrand& f, double a,
                                             const SemiInfiniteOptions& opts = {});

}  // namespace mginf::quad
