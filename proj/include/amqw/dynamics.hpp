#pragma once

// Exact time evolution by spectral decomposition, site-resolved observables
// and light-cone extraction.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amqw/errors.hpp"
#include "amqw/lattice_model.hpp"
#include "amqw/numerics.hpp"
#include "amqw/spectral.hpp"

namespace amqw {

/// Site-resolved walk data. Site index i in every row corresponds to the
/// label i - L.
struct WalkResult {
    std::vector<double> times;
    std::vector<std::vector<double>> n_a;
    std::vector<std::vector<double>> n_m;
    std::vector<Eigen::MatrixXd> gamma; ///< empty when correlations were not requested
};

/// Density of a single particle (or of one effective band) on the ring.
struct ParticleWalk {
    std::vector<double> times;
    std::vector<std::vector<double>> density;
};

/// Both atoms on site 0.
inline StateVector initial_doublon(const HilbertSpace& space) { return basis_vector(space, AtomPair{0, 0}); }

/// Observables of one two-particle state.
struct SiteObservables {
    std::vector<double> n_a;
    std::vector<double> n_m;
    Eigen::MatrixXd gamma;
};

/// n_a, n_m and the density-density correlation <a+_l1 a+_l2 a_l2 a_l1>, which
/// in this sector equals (1 + delta_l1l2) |<l1, l2|psi>|^2.
inline SiteObservables site_observables(const HilbertSpace& space, const StateVector& psi)
{
    const Lattice& lat = space.lattice();
    const int n = lat.sites();
    SiteObservables obs{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), Eigen::MatrixXd::Zero(n, n)};
    for (Eigen::Index i = 0; i < space.dimension(); ++i) {
        const double p = std::norm(psi(i));
        const BasisState& s = space.state(i);
        if (const auto* pair = std::get_if<AtomPair>(&s)) {
            const int a = lat.to_index(pair->l1);
            const int b = lat.to_index(pair->l2);
            if (a == b) {
                obs.n_a[a] += 2.0 * p;
                obs.gamma(a, a) += 2.0 * p;
            } else {
                obs.n_a[a] += p;
                obs.n_a[b] += p;
                obs.gamma(a, b) += p;
                obs.gamma(b, a) += p;
            }
        } else {
            obs.n_m[lat.to_index(std::get<Molecule>(s).j)] += p;
        }
    }
    return obs;
}

/// e^{-iHt} through one eigendecomposition of H.
class Propagator {
public:
    Propagator(const ModelParams& params, const HilbertSpace& space)
        : dimension_(space.dimension())
    {
        const auto solver = detail::solve_hermitian(build_hamiltonian(params, space), "full Hamiltonian");
        energies_ = solver.eigenvalues();
        vectors_ = solver.eigenvectors().cast<Complex>();
    }

    StateVector evolve(const StateVector& psi0, double t) const
    {
        if (psi0.size() != dimension_)
            throw InvalidArgument("state length does not match basis dimension");
        Eigen::VectorXcd coeff = vectors_.adjoint() * psi0;
        for (Eigen::Index j = 0; j < coeff.size(); ++j)
            coeff(j) *= std::polar(1.0, -energies_(j) * t);
        return vectors_ * coeff;
    }

    const Eigen::VectorXd& energies() const noexcept { return energies_; }

private:
    Eigen::Index dimension_;
    Eigen::VectorXd energies_;
    Eigen::MatrixXcd vectors_;
};

/// Uniform grid of `samples` times over [0, t_max].
inline std::vector<double> time_grid(double t_max, std::size_t samples)
{
    std::vector<double> t(samples, 0.0);
    for (std::size_t i = 1; i < samples; ++i)
        t[i] = t_max * static_cast<double>(i) / static_cast<double>(samples - 1);
    return t;
}

inline WalkResult evolve(const ModelParams& params, const HilbertSpace& space, const StateVector& psi0,
                         std::span<const double> times, bool with_correlations = true)
{
    if (std::abs(psi0.norm() - 1.0) > 1e-10)
        throw InvalidArgument("initial state is not normalised (norm " + std::to_string(psi0.norm()) + ")");
    for (double t : times)
        if (!std::isfinite(t))
            throw InvalidArgument("evolution times must be finite");

    const Propagator prop(params, space);
    WalkResult out;
    out.times.assign(times.begin(), times.end());
    for (double t : times) {
        auto obs = site_observables(space, prop.evolve(psi0, t));
        out.n_a.push_back(std::move(obs.n_a));
        out.n_m.push_back(std::move(obs.n_m));
        if (with_correlations)
            out.gamma.push_back(std::move(obs.gamma));
    }
    return out;
}

/// Share of the correlation on the diagonal l1 = l2.
inline double diagonal_weight(const Eigen::MatrixXd& gamma)
{
    const double total = gamma.sum();
    if (!(total > 0.0))
        throw InvalidArgument("correlation matrix has zero total weight");
    return gamma.trace() / total;
}

/// Density of a particle started on site 0 of an L_t ring under
/// H = nn * sum (d+_l d_l+1 + h.c.) + nnn * sum (d+_l d_l+2 + h.c.),
/// evaluated exactly in momentum space.
inline std::vector<double> ring_walk_density(int half_size, double nn, double nnn, double t)
{
    const int n = 2 * half_size + 1;
    std::vector<Complex> phase(n);
    for (int q = 0; q < n; ++q) {
        const double k = 2.0 * M_PI * q / n;
        phase[q] = std::polar(1.0, -t * (2.0 * nn * std::cos(k) + 2.0 * nnn * std::cos(2.0 * k)));
    }
    std::vector<double> density(n);
    for (int i = 0; i < n; ++i) {
        const int label = i - half_size;
        Complex amp = 0.0;
        for (int q = 0; q < n; ++q)
            amp += phase[q] * std::polar(1.0, 2.0 * M_PI * q * label / n);
        density[i] = std::norm(amp) / (static_cast<double>(n) * n);
    }
    return density;
}

/// Ballistic front speeds (sites per unit time) of a walk started at site 0.
struct LightCones {
    double v_outer = 0.0;
    std::optional<double> v_inner;
    double weight_outer = 0.0;
    double weight_inner = 0.0;
};

enum class DensityChannel { Atomic, Molecular };

namespace detail {

// Outermost distance from the origin at which the density reaches the
// threshold, interpolated logarithmically to the next site outward.
inline double threshold_front(std::span<const double> row, int half_size, double threshold)
{
    auto at = [&](int d) {
        if (d > half_size)
            return 0.0;
        return std::max(row[half_size + d], row[half_size - d]);
    };
    for (int d = half_size; d >= 0; --d) {
        const double here = at(d);
        if (here < threshold)
            continue;
        const double next = at(d + 1);
        if (d == half_size || next <= 0.0 || here == threshold)
            return d;
        return d + std::log(here / threshold) / std::log(here / next);
    }
    return -1.0;
}

// Cone profiles: single particle on the ring with hopping v/2, so the front
// moves at v sites per unit time.
inline std::vector<double> cone_profile(int half_size, double v, std::span<const double> times)
{
    std::vector<double> out;
    out.reserve(times.size() * static_cast<std::size_t>(2 * half_size + 1));
    for (double t : times) {
        const auto row = ring_walk_density(half_size, 0.5 * v, 0.0, t);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

// Least-squares amplitudes of the given profiles against the data; returns the
// residual sum of squares.
inline double fit_weights(const std::vector<std::vector<double>>& profiles, std::span<const double> data,
                          std::vector<double>* weights = nullptr)
{
    const auto m = static_cast<Eigen::Index>(profiles.size());
    const auto rows = static_cast<Eigen::Index>(data.size());
    Eigen::MatrixXd a(rows, m);
    for (Eigen::Index c = 0; c < m; ++c)
        a.col(c) = Eigen::Map<const Eigen::VectorXd>(profiles[c].data(), rows);
    const Eigen::Map<const Eigen::VectorXd> y(data.data(), rows);
    const Eigen::VectorXd w = a.colPivHouseholderQr().solve(y);
    if (weights)
        weights->assign(w.data(), w.data() + w.size());
    return (a * w - y).squaredNorm();
}

} // namespace detail

/// Extracts up to two light cones from a density table.
///
/// The outer front is the outermost site whose density reaches `threshold`;
/// its least-squares slope sets the fitting window t <= L / (2 v_est). The
/// outer cone's envelope is then fitted as an amplitude times the density of a
/// single ballistic walker, and subtracted. If the residual still reaches the
/// threshold somewhere in the window, a second cone is fitted to it and both
/// cone speeds are refined jointly; the pair is kept only if both amplitudes
/// are positive and the speeds differ by more than 10%. Returns nullopt if no
/// front leaves site 0.
inline std::optional<LightCones> light_cone_speeds(std::span<const double> times,
                                                   const std::vector<std::vector<double>>& density,
                                                   double threshold = 0.01)
{
    if (!(threshold > 0.0 && threshold <= 0.2))
        throw InvalidArgument("light-cone threshold must lie in (0, 0.2]");
    if (times.size() != density.size() || density.empty())
        throw InvalidArgument("times and density rows differ in length");
    const int sites = static_cast<int>(density.front().size());
    const int half = (sites - 1) / 2;

    std::vector<double> ft;
    std::vector<double> fx;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double x = detail::threshold_front(density[i], half, threshold);
        if (x > 0.0 && x < half) {
            ft.push_back(times[i]);
            fx.push_back(x);
        }
    }
    if (ft.size() < 3)
        return std::nullopt;
    const double v_est = numerics::fit_line(ft, fx).slope;
    if (!(v_est > 0.0))
        return std::nullopt;

    const double t_window = half / (2.0 * v_est);
    std::vector<double> wt;
    std::vector<double> data;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] > t_window && wt.size() >= 10)
            break;
        wt.push_back(times[i]);
        data.insert(data.end(), density[i].begin(), density[i].end());
    }

    auto one_cone_cost = [&](double v, std::span<const double> target) {
        return detail::fit_weights({detail::cone_profile(half, v, wt)}, target);
    };
    auto best_single = [&](double lo, double hi, std::span<const double> target) {
        double best_v = lo;
        double best_c = std::numeric_limits<double>::infinity();
        constexpr int grid = 120;
        for (int i = 0; i <= grid; ++i) {
            const double v = lo + (hi - lo) * i / grid;
            const double c = one_cone_cost(v, target);
            if (c < best_c) {
                best_c = c;
                best_v = v;
            }
        }
        const double step = (hi - lo) / grid;
        const auto refined = numerics::nelder_mead<1>(
            [&](const std::array<double, 1>& x) { return x[0] > 0.0 ? one_cone_cost(x[0], target) : 1e300; },
            {best_v}, {0.25 * step});
        return refined[0];
    };

    LightCones cones;
    const double v1 = best_single(0.05 * v_est, 2.0 * v_est, data);
    std::vector<double> w1;
    const auto outer_profile = detail::cone_profile(half, v1, wt);
    detail::fit_weights({outer_profile}, data, &w1);
    cones.v_outer = v1;
    cones.weight_outer = w1[0];

    std::vector<double> residual(data.size());
    for (std::size_t i = 0; i < data.size(); ++i)
        residual[i] = data[i] - w1[0] * outer_profile[i];
    if (*std::max_element(residual.begin(), residual.end()) < threshold)
        return cones;

    const double v2_guess = best_single(0.02 * v1, v1, residual);
    auto two_cone_cost = [&](const std::array<double, 2>& v) {
        if (!(v[0] > 0.0 && v[1] > 0.0))
            return 1e300;
        return detail::fit_weights({detail::cone_profile(half, v[0], wt), detail::cone_profile(half, v[1], wt)}, data);
    };
    const auto v = numerics::nelder_mead<2>(two_cone_cost, {v1, v2_guess}, {0.05 * v1, 0.05 * v1});
    std::vector<double> w;
    detail::fit_weights({detail::cone_profile(half, v[0], wt), detail::cone_profile(half, v[1], wt)}, data, &w);
    // degenerate joint fits (cancelling amplitudes, coincident speeds) keep the single cone
    const double v_hi = std::max(v[0], v[1]), v_lo = std::min(v[0], v[1]);
    if (!(w[0] > 0.0 && w[1] > 0.0) || v_lo > 0.9 * v_hi)
        return cones;
    const bool first_outer = v[0] >= v[1];
    cones.v_outer = first_outer ? v[0] : v[1];
    cones.v_inner = first_outer ? v[1] : v[0];
    cones.weight_outer = first_outer ? w[0] : w[1];
    cones.weight_inner = first_outer ? w[1] : w[0];
    return cones;
}

inline std::optional<LightCones> light_cone_speeds(const WalkResult& walk, double threshold = 0.01,
                                                   DensityChannel channel = DensityChannel::Atomic)
{
    return light_cone_speeds(walk.times, channel == DensityChannel::Atomic ? walk.n_a : walk.n_m, threshold);
}

inline std::optional<LightCones> light_cone_speeds(const ParticleWalk& walk, double threshold = 0.01)
{
    return light_cone_speeds(walk.times, walk.density, threshold);
}

} // namespace amqw
