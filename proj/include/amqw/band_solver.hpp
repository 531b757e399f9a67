#pragma once

// Analytic band structure of the two-body problem at fixed centre-of-mass
// quasi-momentum K.
//
// Relative motion obeys  E xi(r) = J_K [xi(r+1) + xi(r-1)] + delta_{r0} U_eff(E) xi(r)
// with J_K = -2 J_a cos(K/2) and U_eff(E) = U + 2 g^2 / (E - Delta - J_m^K).
//
// Scattering states have real relative momentum k and E = 2 J_K cos k. On the
// ring, xi(r + L_t) = (-1)^n xi(r), which quantises k through
//
//     (2i J_K sin k - U_eff) / (2i J_K sin k + U_eff) = (-1)^n exp(-i k L_t).
//
// Both sides have unit modulus for real k, so the root condition is solved as
// a single real function: multiplying through by exp(i k L_t / 2) the equation
// becomes Re w = 0 (n even) or Im w = 0 (n odd) with
// w = (U_eff + 2i J_K sin k) exp(-i k L_t / 2). U_eff is multiplied by its
// denominator beforehand so the function stays smooth across the pole.
//
// Bound states decay as xi(r) = alpha^|r| with real 0 < |alpha| < 1:
//
//     E = 2 J_K alpha + U_eff(E)          (contact condition, r = 0)
//     E = J_K (alpha + 1/alpha)            (bulk condition, r > 0)
//
// bound_solutions() solves these for the infinite chain. ring_bound_solutions()
// solves the same pair with the periodic image term kept, which is exact on
// the L_t-site ring:
//
//     E = U_eff(E) + 2 J_K (alpha + s alpha^(L_t-1)) / (1 + s alpha^L_t),  s = (-1)^n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include "amqw/errors.hpp"
#include "amqw/lattice_model.hpp"
#include "amqw/numerics.hpp"

namespace amqw {

/// Centre-of-mass dressed hoppings at quasi-momentum K.
struct KinematicFactors {
    double J_a_K; ///< -2 J_a cos(K/2)
    double J_m_K; ///< -2 J_m cos(K)

    static KinematicFactors at(const ModelParams& p, double K) noexcept
    {
        return {-2.0 * p.J_a * std::cos(0.5 * K), -2.0 * p.J_m * std::cos(K)};
    }

    double continuum_edge() const noexcept { return 2.0 * std::abs(J_a_K); }
};

/// Energy-dependent contact interaction. Throws PoleError on the molecular level.
inline double u_eff(double E_tilde, double K, const ModelParams& p)
{
    const double denom = E_tilde - p.delta() - KinematicFactors::at(p, K).J_m_K;
    if (p.g == 0.0)
        return p.U;
    if (denom == 0.0)
        throw PoleError("U_eff evaluated on its pole E = Delta + J_m^K");
    return p.U + 2.0 * p.g * p.g / denom;
}

struct ScatteringRoot {
    double K = 0.0;
    double k = 0.0;        ///< relative momentum in [0, pi]
    double E_tilde = 0.0;  ///< 2 J_K cos k
    double residual = 0.0; ///< |lhs - rhs| of the complex quantisation condition
};

enum class Branch { Lower, Upper };

inline const char* to_string(Branch b) noexcept { return b == Branch::Lower ? "lower" : "upper"; }

struct BoundSolution {
    double K = 0.0;
    double E_tilde = 0.0;
    double alpha = 0.0; ///< decay ratio of xi(r); 0 for a bare molecule (g = 0) or frozen hopping
    Branch branch = Branch::Lower;
    double residual_contact = 0.0;
    double residual_bulk = 0.0;
    double molecular_fraction = 0.0; ///< weight on the molecule implied by the ansatz
};

namespace detail {

// Numerically stable decaying root of E = J (alpha + 1/alpha) for |E| >= 2|J|.
inline double decaying_alpha(double E, double J) noexcept
{
    if (J == 0.0)
        return 0.0;
    const double s = E >= 0.0 ? 1.0 : -1.0;
    const double root = std::sqrt(std::max(0.0, E * E - 4.0 * J * J));
    return 2.0 * J / (E + s * root);
}

inline double bound_molecular_fraction(double E, double alpha, double g, double delta_K)
{
    const double phi = g / (E - delta_K);
    const double pair = 0.5 + alpha * alpha / (1.0 - alpha * alpha);
    return phi * phi / (phi * phi + pair);
}

inline double bracket_span(const ModelParams& p)
{
    return 2.0 * (std::abs(p.U) + std::abs(p.delta()) + 2.0 * std::sqrt(2.0) * std::abs(p.g) + 4.0 * std::abs(p.J_a) +
                  4.0 * std::abs(p.J_m));
}

inline void label_branches(std::vector<BoundSolution>& out)
{
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.E_tilde < b.E_tilde; });
    if (out.size() == 1) {
        out.front().branch = out.front().E_tilde < 0.0 ? Branch::Lower : Branch::Upper;
        return;
    }
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i].branch = (2 * i < out.size()) ? Branch::Lower : Branch::Upper;
}

// Roots of f on both sides of the continuum, |E| in (edge, edge + span].
template <class F>
std::vector<double> outside_continuum_roots(F&& f, double edge, double span)
{
    constexpr std::size_t samples = 20000;
    const double gap = 1e-13 * std::max(1.0, edge);
    std::vector<double> roots = numerics::scan_roots(f, edge + gap, edge + span, samples, 0.0);
    for (double r : numerics::scan_roots(f, -edge - span, -edge - gap, samples, 0.0))
        roots.push_back(r);
    return roots;
}

constexpr double kResidualTol = 1e-9;

} // namespace detail

/// Real relative momenta of the scattering states in block n of the ring.
inline std::vector<ScatteringRoot> scattering_roots(const ModelParams& p, const Lattice& lattice, int n)
{
    p.validate();
    if (p.J_a == 0.0)
        throw NotApplicable("scattering roots need J_a != 0");
    const double K = lattice.momentum(n);
    const auto kin = KinematicFactors::at(p, K);
    const double J = kin.J_a_K;
    const double delta_K = p.delta() + kin.J_m_K;
    const int Lt = lattice.sites();
    const bool even = (n % 2) == 0;
    const double g2 = 2.0 * p.g * p.g;

    // (a, b) ~ (U_eff, 2 J sin k) up to the common positive-or-negative factor D.
    auto ab = [&](double k) {
        const double D = 2.0 * J * std::cos(k) - delta_K;
        if (p.g == 0.0)
            return std::pair{p.U, 2.0 * J * std::sin(k)};
        return std::pair{p.U * D + g2, 2.0 * J * std::sin(k) * D};
    };
    auto phase_fn = [&](double k) {
        const auto [a, b] = ab(k);
        const std::complex<double> w = std::complex<double>(a, b) * std::polar(1.0, -0.5 * k * Lt);
        return even ? w.real() : w.imag();
    };
    auto residual = [&](double k) {
        const auto [a, b] = ab(k);
        const std::complex<double> lhs = std::complex<double>(-a, b) / std::complex<double>(a, b);
        const std::complex<double> rhs = (even ? 1.0 : -1.0) * std::polar(1.0, -k * Lt);
        return std::abs(lhs - rhs);
    };

    const std::size_t samples = std::max<std::size_t>(40 * static_cast<std::size_t>(Lt), 4000);
    constexpr double margin = 1e-7;
    std::vector<double> ks = numerics::scan_roots(phase_fn, margin, M_PI - margin, samples, 0.0);

    // At k = 0 and k = pi the two plane waves coincide and the ansatz
    // degenerates to xi(r) = (+-1)^r (A + B r). Such a state exists when
    // U_eff(+-2J) equals 0 (B = 0) or +-4J/L_t (B != 0), depending on parity.
    auto endpoint = [&](double k, double target) {
        const double E = 2.0 * J * std::cos(k);
        const double D = E - delta_K;
        const double lhs = p.g == 0.0 ? p.U - target : p.U * D + g2 - target * D;
        const double scale = p.g == 0.0 ? std::abs(p.U) + std::abs(target) + std::abs(J)
                                        : std::abs(p.U * D) + g2 + std::abs(target * D) + std::abs(J * D);
        const bool clear = std::none_of(ks.begin(), ks.end(), [&](double r) { return std::abs(r - k) < 1e-3; });
        if (clear && std::abs(lhs) <= 1e-10 * std::max(scale, 1e-300))
            ks.push_back(k);
    };
    endpoint(0.0, even ? 0.0 : 4.0 * J / Lt);
    endpoint(M_PI, even ? -4.0 * J / Lt : 0.0);
    std::sort(ks.begin(), ks.end());

    std::vector<ScatteringRoot> out;
    out.reserve(ks.size());
    for (double k : ks) {
        const bool at_end = k == 0.0 || k == M_PI;
        out.push_back({K, k, 2.0 * J * std::cos(k), at_end ? 0.0 : residual(k)});
    }
    return out;
}

/// Dressed bound states of the infinite chain at quasi-momentum K, found as
/// intersections of f(E) = -2g^2/(E - Delta - J_m^K) with the decaying branch
/// of h(E) = U -+ sqrt(E^2 - 4 J_K^2) outside the continuum. Every candidate
/// is kept only if both bound-state conditions hold to 1e-9 with |alpha| < 1.
namespace detail {

// Decoupled molecule at g = 0, reported even inside the continuum.
inline void add_bare_molecule(std::vector<BoundSolution>& out, const ModelParams& p, double K, double delta_K)
{
    if (p.g != 0.0)
        return;
    BoundSolution b;
    b.K = K;
    b.E_tilde = delta_K;
    b.molecular_fraction = 1.0;
    out.push_back(b);
}

} // namespace detail

inline std::vector<BoundSolution> bound_solutions(const ModelParams& p, double K)
{
    p.validate();
    const auto kin = KinematicFactors::at(p, K);
    const double J = kin.J_a_K;
    const double delta_K = p.delta() + kin.J_m_K;
    const double g2 = 2.0 * p.g * p.g;
    const double edge = kin.continuum_edge();

    auto f = [&](double E) {
        const double s = E >= 0.0 ? 1.0 : -1.0;
        const double root = std::sqrt(std::max(0.0, E * E - 4.0 * J * J));
        // g = 0: the molecule factor is dropped and the bare molecule added below
        return p.g == 0.0 ? s * root - p.U : (s * root - p.U) * (E - delta_K) - g2;
    };

    std::vector<BoundSolution> out;
    for (double E : detail::outside_continuum_roots(f, edge, detail::bracket_span(p))) {
        BoundSolution b;
        b.K = K;
        b.E_tilde = E;
        const double alpha = detail::decaying_alpha(E, J);
        if (!(std::abs(alpha) < 1.0))
            continue;
        b.alpha = alpha;
        const double ueff = p.g == 0.0 ? p.U : p.U + g2 / (E - delta_K);
        b.residual_contact = std::abs(E - 2.0 * J * alpha - ueff);
        b.residual_bulk = alpha == 0.0 ? 0.0 : std::abs(E - J * (alpha + 1.0 / alpha));
        if (b.residual_contact > detail::kResidualTol * std::max(1.0, std::abs(E)) ||
            b.residual_bulk > detail::kResidualTol * std::max(1.0, std::abs(E)))
            continue;
        b.molecular_fraction = p.g == 0.0 ? 0.0 : detail::bound_molecular_fraction(E, alpha, p.g, delta_K);
        out.push_back(b);
    }
    detail::add_bare_molecule(out, p, K, delta_K);
    detail::label_branches(out);
    return out;
}

/// Bound states of block n on the finite ring (exact, including the periodic
/// image of the decaying tail).
inline std::vector<BoundSolution> ring_bound_solutions(const ModelParams& p, const Lattice& lattice, int n)
{
    p.validate();
    const double K = lattice.momentum(n);
    const auto kin = KinematicFactors::at(p, K);
    const double J = kin.J_a_K;
    const double delta_K = p.delta() + kin.J_m_K;
    const double g2 = 2.0 * p.g * p.g;
    const double edge = kin.continuum_edge();
    const int Lt = lattice.sites();
    const double s = (n % 2 == 0) ? 1.0 : -1.0;

    auto image = [&](double alpha) {
        return std::pair{1.0 + s * std::pow(alpha, Lt), alpha + s * std::pow(alpha, Lt - 1)};
    };
    auto f = [&](double E) {
        const double alpha = detail::decaying_alpha(E, J);
        const auto [norm0, norm1] = image(alpha);
        const double D = E - delta_K;
        if (p.g == 0.0)
            return (E - p.U) * norm0 - 2.0 * J * norm1;
        return ((E - p.U) * D - g2) * norm0 - 2.0 * J * D * norm1;
    };

    std::vector<BoundSolution> out;
    for (double E : detail::outside_continuum_roots(f, edge, detail::bracket_span(p))) {
        BoundSolution b;
        b.K = K;
        b.E_tilde = E;
        const double alpha = detail::decaying_alpha(E, J);
        if (!(std::abs(alpha) < 1.0))
            continue;
        b.alpha = alpha;
        const auto [norm0, norm1] = image(alpha);
        const double ueff = p.g == 0.0 ? p.U : p.U + g2 / (E - delta_K);
        b.residual_contact = std::abs(E - ueff - 2.0 * J * norm1 / norm0);
        b.residual_bulk = alpha == 0.0 ? 0.0 : std::abs(E - J * (alpha + 1.0 / alpha));
        if (b.residual_contact > detail::kResidualTol * std::max(1.0, std::abs(E)) ||
            b.residual_bulk > detail::kResidualTol * std::max(1.0, std::abs(E)))
            continue;
        b.molecular_fraction = p.g == 0.0 ? 0.0 : detail::bound_molecular_fraction(E, alpha, p.g, delta_K);
        out.push_back(b);
    }
    detail::add_bare_molecule(out, p, K, delta_K);
    detail::label_branches(out);
    return out;
}

/// Interval of Delta in which only one dressed bound state survives at K.
struct DeltaWindow {
    double lo;
    double hi;
    bool contains(double delta) const noexcept { return lo < delta && delta < hi; }
};

inline DeltaWindow resonance_window(const ModelParams& p, double K)
{
    if (p.U == 0.0)
        throw NoResonance("resonance window undefined for U = 0: two bound states always exist");
    const auto kin = KinematicFactors::at(p, K);
    const double centre = 2.0 * p.g * p.g / p.U - kin.J_m_K;
    const double half = kin.continuum_edge();
    return {centre - half, centre + half};
}

} // namespace amqw
