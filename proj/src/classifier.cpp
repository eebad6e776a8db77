#include "mginf/classifier.hpp"

#include <fmt/format.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

namespace mginf {

std::string to_string(const CriticalState& k0) {
    switch (k0.kind) {
        case CriticalState::Kind::finite: return std::to_string(k0.value);
        case CriticalState::Kind::infinite: return "inf";
        case CriticalState::Kind::at_least: return ">=" + std::to_string(k0.value);
    }
    return "?";
}

std::string_view to_string(Regime r) {
    switch (r) {
        case Regime::recurrent: return "Recurrent";
        case Regime::transient: return "Transient";
        case Regime::mixed: return "Mixed";
        case Regime::undetermined: return "Inconclusive";
    }
    return "?";
}

std::string_view to_string(Method m) {
    return m == Method::symbolic_profile ? "symbolic-profile" : "numeric-diagnostic";
}

std::string_view to_string(Divergence d) {
    switch (d) {
        case Divergence::divergent: return "divergent";
        case Divergence::convergent: return "convergent";
        case Divergence::inconclusive: return "inconclusive";
    }
    return "?";
}

Regime regime_for(const CriticalState& k0) {
    switch (k0.kind) {
        case CriticalState::Kind::infinite: return Regime::transient;
        case CriticalState::Kind::at_least: return Regime::undetermined;
        case CriticalState::Kind::finite: return k0.value == 0 ? Regime::recurrent : Regime::mixed;
    }
    return Regime::undetermined;
}

namespace {

void require_rate(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument(fmt::format("arrival rate must be positive, got {}", lambda));
    }
}

// p within this relative distance of 1 is treated as the boundary case.
constexpr double kBoundaryTol = 1e-12;

}  // namespace

ClassificationResult classify_symbolic(const AsymptoticProfile& profile, double lambda, std::int64_t k_max) {
    require_rate(lambda);
    if (k_max < 0) throw std::invalid_argument("k_max must be nonnegative");

    ClassificationResult out;
    out.method = Method::symbolic_profile;
    out.lambda = lambda;

    switch (profile.growth) {
        case GrowthClass::bounded_mean:
            out.k0 = CriticalState::finite(0);
            break;
        case GrowthClass::super_logarithmic:
            out.k0 = CriticalState::infinite();
            break;
        case GrowthClass::logarithmic: {
            if (!(profile.log_coefficient >= 0.0)) {
                throw std::invalid_argument("profile log coefficient must be nonnegative");
            }
            const double p = lambda * profile.log_coefficient;
            if (std::abs(p - 1.0) <= kBoundaryTol) {
                if (!profile.beta_known) {
                    throw ProfileNotCertified(
                        "boundary case lambda*L = 1 needs a certified second-order coefficient; "
                        "use classify_numeric");
                }
                // Integrand ~ C t^-1 (ln t)^(k - lambda beta); divergent iff k >= lambda beta - 1.
                const double threshold = lambda * profile.loglog_coefficient - 1.0;
                const double ceil_threshold = std::ceil(threshold);
                out.k0 = CriticalState::finite(std::max<std::int64_t>(0, static_cast<std::int64_t>(ceil_threshold)));
                if (profile.has_higher_order_terms && threshold >= 0.0 && ceil_threshold == threshold) {
                    out.outside_supported_class = true;
                    out.k0 = CriticalState::at_least(static_cast<std::int64_t>(threshold));
                    out.warnings.push_back(fmt::format(
                        "outside supported class: k = lambda*beta - 1 = {} sits exactly on the boundary and the law "
                        "carries higher-order terms",
                        threshold));
                }
            } else if (p < 1.0) {
                out.k0 = CriticalState::finite(0);
            } else {
                out.k0 = CriticalState::infinite();
            }
            break;
        }
    }
    out.regime = regime_for(out.k0);

    for (std::int64_t k = 0; k <= k_max; ++k) {
        StateVerdict v;
        v.k = k;
        if (out.k0.kind == CriticalState::Kind::at_least && k == out.k0.value) {
            v.divergence = Divergence::inconclusive;
        } else if (out.k0.kind == CriticalState::Kind::infinite) {
            v.divergence = Divergence::convergent;
        } else {
            v.divergence = k >= out.k0.value ? Divergence::divergent : Divergence::convergent;
        }
        out.verdicts.push_back(v);
    }
    return out;
}

ClassificationResult classify_symbolic(const ServiceLaw& law, double lambda, std::int64_t k_max) {
    if (!law.profile()) {
        throw ProfileNotCertified("law '" + law.name() + "' declares no asymptotic profile; use classify_numeric");
    }
    auto out = classify_symbolic(*law.profile(), lambda, k_max);
    out.law = law.name();
    return out;
}

bool numeric_agrees(const ClassificationResult& numeric, const ClassificationResult& symbolic, std::int64_t k_max) {
    const auto& s = symbolic.k0;
    const auto& n = numeric.k0;
    if (s.kind == CriticalState::Kind::finite && s.value <= k_max) {
        return n.kind == CriticalState::Kind::finite && n.value == s.value;
    }
    if (s.kind == CriticalState::Kind::at_least) return true;
    return n.kind == CriticalState::Kind::at_least && n.value == k_max + 1;
}

ClassificationResult classify_numeric(const ServiceLaw& law, double lambda, const NumericClassifyOptions& opts) {
    require_rate(lambda);
    if (opts.k_max < 0) throw std::invalid_argument("k_max must be nonnegative");
    if (opts.first_log2 < 2 || opts.log2_horizon_budget <= opts.first_log2 + static_cast<int>(quad::kTrendWindow) ||
        opts.log2_horizon_budget > 1020) {
        throw std::invalid_argument("numeric classification: horizon budget must lie in (first + 8, 1020]");
    }

    ClassificationResult out;
    out.method = Method::numeric_diagnostic;
    out.lambda = lambda;
    out.law = law.name();

    const quad::QuadratureOptions qopts{opts.rel_tol, 0.0, 1'000'000};
    const double ln2 = std::log(2.0);

    for (std::int64_t k = 0; k <= opts.k_max; ++k) {
        StateVerdict verdict;
        verdict.k = k;
        verdict.numeric_only = true;
        std::vector<quad::TailSegment> segments;
        bool failed = false;
        try {
            for (int j = opts.first_log2; j < opts.log2_horizon_budget; ++j) {
                const double s_lo = j * ln2;
                const double s_hi = (j + 1) * ln2;
                // Segment integral of m^k e^{-lambda m} dt with t = e^s, computed as
                // e^shift * int exp(s + log f - shift) ds so it neither overflows nor underflows.
                auto log_integrand = [&](double s) {
                    const double m = law.truncated_mean(std::exp(s));
                    return s + (k == 0 ? 0.0 : static_cast<double>(k) * std::log(m)) - lambda * m;
                };
                // Shift by the largest sampled log-integrand: values across one segment can
                // differ by far more than the exponent range of a double.
                double shift = -std::numeric_limits<double>::infinity();
                for (int i = 0; i <= 8; ++i) shift = std::max(shift, log_integrand(s_lo + (s_hi - s_lo) * i / 8.0));
                if (!std::isfinite(shift)) shift = 0.0;
                auto g = [&](double s) { return std::exp(log_integrand(s) - shift); };
                const auto est = quad::integrate_finite(g, s_lo, s_hi, qopts);
                const double log_integral = est.value > 0.0 ? shift + std::log(est.value)
                                                            : -std::numeric_limits<double>::infinity();
                segments.push_back({0.5 * (s_lo + s_hi), log_integral, est.converged || est.value == 0.0});
            }
        } catch (const std::exception& e) {
            failed = true;
            out.warnings.push_back(fmt::format("k = {}: quadrature failure: {}", k, e.what()));
        }

        if (!failed) {
            // log_t_mid is ln of the horizon midpoint; assess_tail regresses on ln(ln t).
            const auto trend = quad::assess_tail(segments);
            if (trend.usable) {
                verdict.divergence = trend.divergence_suspected ? Divergence::divergent : Divergence::convergent;
                verdict.tail_slope = trend.slope;
            }
        }
        if (opts.keep_trace) verdict.trace = std::move(segments);
        out.verdicts.push_back(std::move(verdict));
    }

    out.k0 = CriticalState::at_least(opts.k_max + 1);
    for (const auto& v : out.verdicts) {
        if (v.divergence == Divergence::divergent) {
            out.k0 = CriticalState::finite(v.k);
            break;
        }
        if (v.divergence == Divergence::inconclusive) {
            out.k0 = CriticalState::at_least(v.k);
            break;
        }
    }
    out.regime = regime_for(out.k0);

    bool seen_divergent = false;
    for (const auto& v : out.verdicts) {
        if (seen_divergent && v.divergence == Divergence::convergent) {
            out.warnings.push_back(fmt::format("non-monotone verdicts: k = {} convergent after a divergent state", v.k));
            break;
        }
        seen_divergent = seen_divergent || v.divergence == Divergence::divergent;
    }

    if (law.profile()) {
        try {
            const auto symbolic = classify_symbolic(law, lambda, opts.k_max);
            if (!numeric_agrees(out, symbolic, opts.k_max)) {
                out.warnings.push_back(fmt::format("numeric k0 = {} disagrees with symbolic k0 = {} from the declared profile",
                                                   to_string(out.k0), to_string(symbolic.k0)));
            }
        } catch (const ProfileNotCertified&) {
        }
    }
    return out;
}

ProfileEstimate estimate_profile(const ServiceLaw& law, const ProfileFitOptions& opts) {
    if (!(opts.t_max > 100.0) || opts.points < 4 || !(opts.decades > 0.0)) {
        throw std::invalid_argument("estimate_profile: need t_max > 100, decades > 0 and at least 4 points");
    }
    ProfileEstimate out;
    out.profile.beta_known = false;

    const double m_top = law.truncated_mean(opts.t_max);
    const double m_root = law.truncated_mean(std::sqrt(opts.t_max));
    if (m_top - m_root < std::max(1e-6, 1e-4 * m_top)) {
        out.profile.growth = GrowthClass::bounded_mean;
        return out;
    }

    const double t_low = opts.t_max / std::pow(10.0, opts.decades);
    const double m_low = law.truncated_mean(t_low);
    // Local exponent of m against ln t: ~1 for logarithmic growth, ~ a ln t for t^a growth.
    const double loglog_exponent =
        (std::log(m_top) - std::log(m_low)) / (std::log(std::log(opts.t_max)) - std::log(std::log(t_low)));
    if (loglog_exponent > 2.0) {
        out.profile.growth = GrowthClass::super_logarithmic;
        return out;
    }

    const int n = opts.points;
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        const double frac = static_cast<double>(i) / (n - 1);
        const double t = t_low * std::pow(opts.t_max / t_low, frac);
        design(i, 0) = std::log(t);
        design(i, 1) = std::log(std::log(t));
        design(i, 2) = 1.0;
        y(i) = law.truncated_mean(t);
    }
    const Eigen::VectorXd norms = design.colwise().norm();
    const Eigen::MatrixXd scaled = design * norms.cwiseInverse().asDiagonal();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd coef = svd.solve(y).cwiseQuotient(norms);
    const auto& sv = svd.singularValues();
    out.condition_number = sv(0) / sv(sv.size() - 1);
    out.residual_rms = std::sqrt((design * coef - y).squaredNorm() / n);
    out.low_confidence = out.condition_number > opts.max_condition;

    out.profile.growth = GrowthClass::logarithmic;
    out.profile.log_coefficient = coef(0);
    out.profile.loglog_coefficient = coef(1);
    return out;
}

}  // namespace mginf
