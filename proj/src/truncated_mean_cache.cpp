#include <algorithm>
#include <cmath>
#include <limits>

#include "mginf/quadrature.hpp"
#include "mginf/service_law.hpp"

namespace mginf {

TruncatedMeanCache::TruncatedMeanCache(std::function<double(double)> tail, double first_knot, double rel_tol)
    : tail_(std::move(tail)), rel_tol_(rel_tol) {
    if (!(first_knot > 0.0) || !std::isfinite(first_knot)) {
        throw std::invalid_argument("TruncatedMeanCache: first knot must be positive and finite");
    }
    const quad::QuadratureOptions opts{rel_tol, 0.0, 1'000'000};
    knots_.push_back(0.0);
    cumulative_.push_back(0.0);
    double lo = 0.0;
    double hi = first_knot;
    double acc = 0.0;
    constexpr double kLimit = std::numeric_limits<double>::max() / 2.0;
    while (true) {
        const auto seg = quad::integrate_finite(tail_, lo, hi, opts);
        if (!seg.converged) {
            throw std::runtime_error("TruncatedMeanCache: quadrature did not converge on [" + std::to_string(lo) +
                                     ", " + std::to_string(hi) + "]");
        }
        acc += seg.value;
        knots_.push_back(hi);
        cumulative_.push_back(acc);
        if (hi > kLimit) break;
        lo = hi;
        hi *= 2.0;
    }
}

double TruncatedMeanCache::operator()(double t) const {
    if (!(t > 0.0)) return 0.0;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    const auto i = static_cast<std::size_t>(std::distance(knots_.begin(), it)) - 1;
    if (knots_[i] == t) return cumulative_[i];
    const quad::QuadratureOptions opts{rel_tol_, 0.0, 1'000'000};
    const auto rest = quad::integrate_finite(tail_, knots_[i], t, opts);
    if (!rest.converged) {
        throw std::runtime_error("truncated mean: quadrature did not converge at t = " + std::to_string(t));
    }
    return cumulative_[i] + rest.value;
}

}  // namespace mginf
