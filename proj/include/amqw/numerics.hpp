#pragma once

// Small numerical kernels shared by the band solver, the effective model and
// the light-cone fitter.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <vector>

namespace amqw::numerics {

/// Bisection on a bracket with f(lo), f(hi) of opposite sign (or one of them zero).
/// Stops when the bracket is narrower than `tol`; with tol <= 0 it runs to
/// full double precision.
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-12, int max_iter = 200)
{
    double flo = f(lo);
    if (flo == 0.0)
        return lo;
    double fhi = f(hi);
    if (fhi == 0.0)
        return hi;
    for (int it = 0; it < max_iter && std::abs(hi - lo) > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        const double fmid = f(mid);
        if (fmid == 0.0)
            return mid;
        if ((fmid < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Dense sign-change scan of f on [lo, hi] followed by bisection of every
/// bracket. Grid points where f is exactly zero are reported as roots.
/// Roots without a sign change (tangencies) are not found.
template <class F>
std::vector<double> scan_roots(F&& f, double lo, double hi, std::size_t samples, double tol = 1e-12)
{
    std::vector<double> roots;
    if (!(hi > lo) || samples < 2)
        return roots;
    const double step = (hi - lo) / static_cast<double>(samples - 1);
    double x_prev = lo;
    double f_prev = f(x_prev);
    if (f_prev == 0.0)
        roots.push_back(x_prev);
    for (std::size_t i = 1; i < samples; ++i) {
        const double x = (i + 1 == samples) ? hi : lo + step * static_cast<double>(i);
        const double fx = f(x);
        if (fx == 0.0) {
            roots.push_back(x);
        } else if (f_prev != 0.0 && std::signbit(fx) != std::signbit(f_prev)) {
            roots.push_back(bisect(f, x_prev, x, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    return roots;
}

/// Least-squares slope and intercept of y against x.
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y)
{
    const auto n = static_cast<double>(x.size());
    if (x.size() < 2)
        return {};
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0)
        return {0.0, my};
    const double slope = sxy / sxx;
    return {slope, my - slope * mx};
}

/// Nelder-Mead simplex minimiser for a handful of parameters.
template <std::size_t N, class F>
std::array<double, N> nelder_mead(F&& cost, std::array<double, N> start, std::array<double, N> scale,
                                  double ftol = 1e-14, int max_iter = 4000)
{
    using Point = std::array<double, N>;
    std::array<Point, N + 1> simplex{};
    std::array<double, N + 1> values{};
    simplex[0] = start;
    for (std::size_t i = 0; i < N; ++i) {
        simplex[i + 1] = start;
        simplex[i + 1][i] += scale[i];
    }
    for (std::size_t i = 0; i <= N; ++i)
        values[i] = cost(simplex[i]);

    auto lerp = [](const Point& a, const Point& b, double t) {
        Point p{};
        for (std::size_t i = 0; i < N; ++i)
            p[i] = a[i] + t * (b[i] - a[i]);
        return p;
    };

    for (int it = 0; it < max_iter; ++it) {
        std::array<std::size_t, N + 1> order{};
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second = order[N - 1];
        if (std::abs(values[worst] - values[best]) <= ftol * (std::abs(values[best]) + ftol))
            break;

        Point centroid{};
        for (std::size_t k = 0; k < N; ++k) {
            const std::size_t i = order[k];
            for (std::size_t d = 0; d < N; ++d)
                centroid[d] += simplex[i][d] / static_cast<double>(N);
        }

        const Point reflected = lerp(centroid, simplex[worst], -1.0);
        const double f_ref = cost(reflected);
        if (f_ref < values[best]) {
            const Point expanded = lerp(centroid, simplex[worst], -2.0);
            const double f_exp = cost(expanded);
            if (f_exp < f_ref) {
                simplex[worst] = expanded;
                values[worst] = f_exp;
            } else {
                simplex[worst] = reflected;
                values[worst] = f_ref;
            }
            continue;
        }
        if (f_ref < values[second]) {
            simplex[worst] = reflected;
            values[worst] = f_ref;
            continue;
        }
        const Point contracted = lerp(centroid, simplex[worst], 0.5);
        const double f_con = cost(contracted);
        if (f_con < values[worst]) {
            simplex[worst] = contracted;
            values[worst] = f_con;
            continue;
        }
        for (std::size_t i = 0; i <= N; ++i) {
            if (i == best)
                continue;
            simplex[i] = lerp(simplex[best], simplex[i], 0.5);
            values[i] = cost(simplex[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    return simplex[best];
}

} // namespace amqw::numerics
