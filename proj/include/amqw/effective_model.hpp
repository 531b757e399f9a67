#pragma once

// Frozen-limit dressed states and the second-order effective single-particle
// model of each dressed bound-state band.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "amqw/band_solver.hpp"
#include "amqw/dynamics.hpp"
#include "amqw/errors.hpp"
#include "amqw/lattice_model.hpp"
#include "amqw/numerics.hpp"

namespace amqw {

/// On-site eigenstate A|molecule> + B|doublon> of the J_a = J_m = 0 problem.
/// sigma = 1 is the lower level, sigma = 2 the upper one.
struct DressedState {
    int sigma = 1;
    double E0 = 0.0;
    double C = 0.0; ///< A / B
    double A = 0.0;
    double B = 0.0;
};

inline std::pair<DressedState, DressedState> frozen_limit(const ModelParams& p)
{
    if (p.g == 0.0)
        throw InvalidArgument("frozen-limit labelling needs g != 0");
    const double U = p.U;
    const double d = p.delta();
    const double root = std::sqrt(8.0 * p.g * p.g + (U - d) * (U - d));
    auto make = [&](int sigma, double sign) {
        DressedState s;
        s.sigma = sigma;
        s.E0 = 0.5 * (U + d + sign * root);
        s.C = (d - U + sign * root) / (2.0 * std::sqrt(2.0) * p.g);
        const double n = std::sqrt(1.0 + s.C * s.C);
        s.A = s.C / n;
        s.B = 1.0 / n;
        return s;
    };
    return {make(1, -1.0), make(2, +1.0)};
}

struct EffectiveModel {
    int sigma = 1;
    double E0 = 0.0;
    double A = 0.0;
    double B = 0.0;
    double onsite = 0.0;
    double J_nn = 0.0;
    double J_nnn = 0.0;
    std::optional<std::string> warning; ///< set when perturbation theory is not expected to hold
};

inline EffectiveModel effective_couplings(const ModelParams& p, int sigma)
{
    if (sigma != 1 && sigma != 2)
        throw InvalidArgument("band index sigma must be 1 or 2");
    const auto [lower, upper] = frozen_limit(p);
    const DressedState& s = sigma == 1 ? lower : upper;
    const DressedState& other = sigma == 1 ? upper : lower;
    if (std::abs(s.E0) < 1e-12 * std::max(1.0, std::abs(p.g)))
        throw PoleError("dressed level degenerate with the separated pair (E0 = 0)");

    EffectiveModel m;
    m.sigma = sigma;
    m.E0 = s.E0;
    m.A = s.A;
    m.B = s.B;
    const double atomic = 2.0 * p.J_a * p.J_a * s.B * s.B / s.E0;
    m.J_nn = atomic - p.J_m * s.A * s.A;
    m.J_nnn = p.J_m * p.J_m * lower.A * lower.A * upper.A * upper.A / (s.E0 - other.E0);
    m.onsite = s.E0 + 2.0 * atomic + 2.0 * m.J_nnn;

    if (p.U != 0.0 && resonance_window(p, 0.0).contains(p.delta()))
        m.warning = "detuning inside the K = 0 resonance window; second-order couplings unreliable";
    return m;
}

/// onsite + 2 J_nn cos K + 2 J_nnn cos 2K.
inline double effective_dispersion(const EffectiveModel& m, double K)
{
    return m.onsite + 2.0 * m.J_nn * std::cos(K) + 2.0 * m.J_nnn * std::cos(2.0 * K);
}

namespace detail {

// Sign changes of f over [-span, span] that are genuine zeros, skipping poles.
template <class F>
std::vector<double> detuning_roots(F&& f, double span, std::size_t samples, double zero_tol)
{
    std::vector<double> out;
    double prev_d = -span;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < samples; ++i) {
        const double d = -span + 2.0 * span * static_cast<double>(i) / static_cast<double>(samples - 1);
        double v;
        try {
            v = f(d);
        } catch (const PoleError&) {
            prev = std::numeric_limits<double>::quiet_NaN();
            prev_d = d;
            continue;
        }
        if (std::isfinite(prev) && std::signbit(v) != std::signbit(prev)) {
            try {
                const double root = numerics::bisect(f, prev_d, d, 0.0);
                if (std::abs(f(root)) < zero_tol)
                    out.push_back(root);
            } catch (const PoleError&) {
            }
        }
        prev = v;
        prev_d = d;
    }
    return out;
}

} // namespace detail

/// Detunings in [-10 g, 10 g] where J_nn of band sigma changes sign. The
/// params' own detuning is ignored. Empty for J_m = 0.
inline std::vector<double> nn_cancellation_delta(const ModelParams& p, int sigma, std::size_t samples = 20001)
{
    if (p.J_m == 0.0)
        return {};
    auto j_nn = [&](double delta) {
        return effective_couplings(ModelParams::with_delta(p.J_a, p.J_m, p.U, p.g, delta), sigma).J_nn;
    };
    return detail::detuning_roots(j_nn, 10.0 * std::abs(p.g), samples,
                                  1e-8 * std::max(1.0, p.J_a * p.J_a + std::abs(p.J_m)));
}

/// Detunings in [-10 g, 10 g] where the two bands have equal J_nn.
inline std::vector<double> nn_crossing_deltas(const ModelParams& p, std::size_t samples = 20001)
{
    auto diff = [&](double delta) {
        const auto q = ModelParams::with_delta(p.J_a, p.J_m, p.U, p.g, delta);
        return effective_couplings(q, 1).J_nn - effective_couplings(q, 2).J_nn;
    };
    return detail::detuning_roots(diff, 10.0 * std::abs(p.g), samples,
                                  1e-8 * std::max(1.0, p.J_a * p.J_a + std::abs(p.J_m)));
}

/// Single particle from site 0 under the effective hoppings.
inline ParticleWalk effective_walk(const EffectiveModel& m, const Lattice& lattice, std::span<const double> times)
{
    ParticleWalk w;
    w.times.assign(times.begin(), times.end());
    for (double t : times)
        w.density.push_back(ring_walk_density(lattice.half_size(), m.J_nn, m.J_nnn, t));
    return w;
}

} // namespace amqw
