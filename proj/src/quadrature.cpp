#include "mginf/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace mginf::quad {
namespace {

// Kronrod abscissae (descending) and weights; the Gauss 7-point rule uses
// every other abscissa.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUflow = std::numeric_limits<double>::min();

struct Panel {
    double a;
    double b;
    double value;
    double error;
};

Panel gk15(const Integrand& f, double a, double b) {
    const double centr = 0.5 * (a + b);
    const double hlgth = 0.5 * (b - a);
    const double dhlgth = std::abs(hlgth);

    std::array<double, 7> fv1{};
    std::array<double, 7> fv2{};
    const double fc = f(centr);
    double resg = fc * kWg[3];
    double resk = fc * kWgk[7];
    double resabs = std::abs(resk);

    for (int j = 0; j < 3; ++j) {
        const int jtw = 2 * j + 1;
        const double absc = hlgth * kXgk[jtw];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        resg += kWg[j] * (f1 + f2);
        resk += kWgk[jtw] * (f1 + f2);
        resabs += kWgk[jtw] * (std::abs(f1) + std::abs(f2));
    }
    for (int j = 0; j < 4; ++j) {
        const int jtwm1 = 2 * j;
        const double absc = hlgth * kXgk[jtwm1];
        const double f1 = f(centr - absc);
        const double f2 = f(centr + absc);
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        resk += kWgk[jtwm1] * (f1 + f2);
        resabs += kWgk[jtwm1] * (std::abs(f1) + std::abs(f2));
    }

    const double reskh = 0.5 * resk;
    double resasc = kWgk[7] * std::abs(fc - reskh);
    for (int j = 0; j < 7; ++j) {
        resasc += kWgk[j] * (std::abs(fv1[j] - reskh) + std::abs(fv2[j] - reskh));
    }

    const double result = resk * hlgth;
    resabs *= dhlgth;
    resasc *= dhlgth;
    double abserr = std::abs((resk - resg) * hlgth);
    if (resasc != 0.0 && abserr != 0.0) {
        abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
    }
    if (resabs > kUflow / (50.0 * kEps)) {
        abserr = std::max(50.0 * kEps * resabs, abserr);
    }
    return {a, b, result, abserr};
}

bool by_error(const Panel& x, const Panel& y) { return x.error < y.error; }

IntegralEstimate adapt(const Integrand& f, std::vector<double> cuts, const QuadratureOptions& opts) {
    constexpr std::size_t kEvalsPerPanel = 15;
    std::vector<Panel> heap;
    heap.reserve(64);
    std::size_t evals = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] > cuts[i]) {
            heap.push_back(gk15(f, cuts[i], cuts[i + 1]));
            evals += kEvalsPerPanel;
        }
    }
    std::make_heap(heap.begin(), heap.end(), by_error);

    auto totals = [&heap] {
        double v = 0.0;
        double e = 0.0;
        for (const auto& p : heap) {
            v += p.value;
            e += p.error;
        }
        return std::pair{v, e};
    };

    auto [value, error] = totals();
    auto tolerance = [&opts](double v) { return std::max(opts.abs_tol, opts.rel_tol * std::abs(v)); };

    while (!heap.empty() && std::isfinite(value) && error > tolerance(value) &&
           evals + 2 * kEvalsPerPanel <= opts.max_evaluations) {
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Panel worst = heap.back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            std::push_heap(heap.begin(), heap.end(), by_error);
            break;  // panel at machine resolution
        }
        heap.pop_back();
        const Panel left = gk15(f, worst.a, mid);
        const Panel right = gk15(f, mid, worst.b);
        evals += 2 * kEvalsPerPanel;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
    }

    // Recompute from scratch; the running sums drift.
    std::tie(value, error) = totals();
    IntegralEstimate out;
    out.value = value;
    out.abs_error_bound = error;
    out.panels_used = heap.size();
    out.converged = std::isfinite(value) && error <= tolerance(value);
    return out;
}

}  // namespace

IntegralEstimate integrate_finite(const Integrand& f, double a, double b, const QuadratureOptions& opts) {
    return integrate_finite(f, a, b, std::span<const double>{}, opts);
}

IntegralEstimate integrate_finite(const Integrand& f, double a, double b, std::span<const double> breakpoints,
                                  const QuadratureOptions& opts) {
    if (a == b) {
        return {0.0, 0.0, 0, true};
    }
    if (a > b) {
        auto flipped = integrate_finite(f, b, a, breakpoints, opts);
        flipped.value = -flipped.value;
        return flipped;
    }
    std::vector<double> cuts{a};
    for (double x : breakpoints) {
        if (x > a && x < b) cuts.push_back(x);
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    return adapt(f, std::move(cuts), opts);
}

std::string_view to_string(TailStatus s) {
    switch (s) {
        case TailStatus::converged: return "converged";
        case TailStatus::not_converged: return "not-converged";
        case TailStatus::divergence_suspected: return "divergence-suspected";
    }
    return "unknown";
}

TailTrend assess_tail(std::span<const TailSegment> segments) {
    TailTrend trend;
    std::vector<TailSegment> window;
    for (auto it = segments.rbegin(); it != segments.rend() && window.size() < kTrendWindow; ++it) {
        if (it->log_t_mid <= 1.0) break;
        window.push_back(*it);
    }
    std::reverse(window.begin(), window.end());
    if (window.size() < 3) return trend;
    for (const auto& s : window) {
        if (!s.converged || std::isnan(s.log_integral) || s.log_integral == std::numeric_limits<double>::infinity()) {
            return trend;
        }
    }
    trend.usable = true;

    const bool vanishing = std::any_of(window.begin(), window.end(), [](const TailSegment& s) {
        return std::isinf(s.log_integral);
    });
    if (vanishing) {
        trend.slope = -std::numeric_limits<double>::infinity();
        trend.geometric_shrink = true;
        return trend;
    }

    double sx = 0.0;
    double sy = 0.0;
    for (const auto& s : window) {
        sx += std::log(s.log_t_mid);
        sy += s.log_integral;
    }
    const double n = static_cast<double>(window.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : window) {
        const double dx = std::log(s.log_t_mid) - mx;
        sxx += dx * dx;
        sxy += dx * (s.log_integral - my);
    }
    trend.slope = sxy / sxx;
    trend.divergence_suspected = trend.slope >= -1.0 - kBorderlineSlopeMargin;

    trend.geometric_shrink = true;
    for (std::size_t i = 1; i < window.size(); ++i) {
        if (window[i].log_integral - window[i - 1].log_integral > std::log(0.75)) {
            trend.geometric_shrink = false;
            break;
        }
    }
    return trend;
}

SemiInfiniteEstimate integrate_semi_infinite(const Integrand& f, double a, const SemiInfiniteOptions& opts) {
    SemiInfiniteEstimate out;
    const bool log_variable = opts.hint != DecayHint::exponential;

    double total = 0.0;
    double quad_error = 0.0;
    std::size_t panels = 0;
    double prev_abs = std::numeric_limits<double>::quiet_NaN();

    for (int i = 0; i <= opts.log2_horizon_budget; ++i) {
        const double lo_off = i == 0 ? 0.0 : std::ldexp(1.0, i - 1);
        const double hi_off = std::ldexp(1.0, i);

        QuadratureOptions seg_opts = opts.quad;
        seg_opts.abs_tol = std::max(opts.quad.abs_tol, 0.1 * opts.quad.rel_tol * std::abs(total));

        IntegralEstimate seg;
        if (log_variable && i > 0) {
            auto g = [&f, a](double s) {
                const double e = std::exp(s);
                return f(a + e) * e;
            };
            seg = integrate_finite(g, std::log(lo_off), std::log(hi_off), seg_opts);
        } else {
            seg = integrate_finite(f, a + lo_off, a + hi_off, seg_opts);
        }
        total += seg.value;
        quad_error += seg.abs_error_bound;
        panels += seg.panels_used;

        const double mid = a + 0.5 * (lo_off + hi_off);
        const double seg_abs = std::abs(seg.value);
        out.segments.push_back({mid > 0.0 ? std::log(mid) : -std::numeric_limits<double>::infinity(),
                                seg_abs > 0.0 ? std::log(seg_abs) : -std::numeric_limits<double>::infinity(),
                                seg.converged});

        if (!std::isfinite(total)) break;

        const double tol = std::max(opts.quad.abs_tol, opts.quad.rel_tol * std::abs(total));
        if (i >= 3 && !std::isnan(prev_abs) && seg_abs <= 0.5 * tol && prev_abs <= 0.5 * tol) {
            const double ratio = prev_abs > 0.0 ? seg_abs / prev_abs : 0.0;
            if (ratio <= 0.75) {
                const double tail = ratio > 0.0 ? seg_abs * ratio / (1.0 - ratio) : 0.0;
                out.estimate = {total + tail, quad_error + tail, panels, quad_error + tail <= tol};
                out.status = out.estimate.converged ? TailStatus::converged : TailStatus::not_converged;
                out.trend = assess_tail(out.segments);
                return out;
            }
        }
        prev_abs = seg_abs;
    }

    out.trend = assess_tail(out.segments);
    out.estimate = {total, std::numeric_limits<double>::infinity(), panels, false};
    out.status = out.trend.divergence_suspected ? TailStatus::divergence_suspected : TailStatus::not_converged;
    return out;
}

}  // namespace mginf::quad
