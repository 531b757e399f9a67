#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "amqw/band_solver.hpp"
#include "amqw/spectral.hpp"

using namespace amqw;

namespace {

std::vector<double> block_eigenvalues(const ModelParams& p, const HilbertSpace& s, int n)
{
    const auto b = momentum_block(p, s, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd ev = es.eigenvalues();
    return {ev.data(), ev.data() + ev.size()};
}

double nearest(const std::vector<double>& v, double x)
{
    double best = std::numeric_limits<double>::infinity();
    for (double y : v)
        best = std::min(best, std::abs(y - x));
    return best;
}

} // namespace

TEST(KinematicFactors, Definitions)
{
    const ModelParams p{1.5, 0.5, 0, 0, 0, 0};
    const auto k = KinematicFactors::at(p, 2.0);
    EXPECT_DOUBLE_EQ(k.J_a_K, -3.0 * std::cos(1.0));
    EXPECT_DOUBLE_EQ(k.J_m_K, -std::cos(2.0));
    EXPECT_DOUBLE_EQ(k.continuum_edge(), 6.0 * std::cos(1.0));
}

TEST(UEff, PlugInValues)
{
    EXPECT_EQ(u_eff(0.3, 0.0, ModelParams::with_delta(1, 0, 2.5, 0, 1)), 2.5);
    EXPECT_DOUBLE_EQ(u_eff(1.0, 0.0, ModelParams::with_delta(1, 0, 0, 1, 0)), 2.0);
    const double far = u_eff(0.5, 0.3, ModelParams::with_delta(1, 0, 3.0, 2.0, 1e9));
    EXPECT_NEAR(far / 3.0, 1.0, 1e-6);
}

TEST(UEff, PoleIsReported)
{
    const ModelParams p = ModelParams::with_delta(1, 0.5, 0, 1, 0.7);
    const double K = 0.4;
    const double pole = p.delta() + KinematicFactors::at(p, K).J_m_K;
    EXPECT_THROW(u_eff(pole, K, p), PoleError);
}

TEST(ScatteringRoots, NeedAtomicHopping)
{
    EXPECT_THROW(scattering_roots(ModelParams::with_delta(0, 1, 0, 1, 0), Lattice(3), 0), NotApplicable);
}

TEST(ScatteringRoots, FreeParticlesAreEvenlySpaced)
{
    const Lattice lat(10);
    const HilbertSpace s(lat);
    const ModelParams p = ModelParams::with_delta(1, 0, 0, 0, 0);
    for (int n : {-10, -3, 0, 4, 10}) {
        const auto roots = scattering_roots(p, lat, n);
        const auto ev = block_eigenvalues(p, s, n);
        for (const auto& r : roots) {
            EXPECT_LE(r.residual, 1e-9);
            EXPECT_LE(nearest(ev, r.E_tilde), 1e-8) << "n=" << n << " k=" << r.k;
            // e^{-ikL_t}(-1)^n = 1
            const double phase = std::remainder(r.k * lat.sites() + M_PI * n, 2.0 * M_PI);
            EXPECT_NEAR(phase, 0.0, 1e-8);
        }
    }
}

TEST(ScatteringRoots, InsideEnvelope)
{
    const Lattice lat(10);
    const ModelParams p = ModelParams::with_delta(1, 0, 0, 4, 0);
    for (const auto& r : scattering_roots(p, lat, 0)) {
        EXPECT_LE(std::abs(r.E_tilde), 4.0 + 1e-9);
        EXPECT_LE(r.residual, 1e-9);
        EXPECT_GE(r.k, 0.0);
        EXPECT_LE(r.k, M_PI);
    }
}

TEST(BoundSolutions, TwoSymmetricForZeroInteraction)
{
    const ModelParams p = ModelParams::with_delta(1, 0, 0, 4, 0);
    for (double K : {0.0, 0.7, 2.0, 3.0}) {
        const auto b = bound_solutions(p, K);
        ASSERT_EQ(b.size(), 2u) << "K=" << K;
        EXPECT_NEAR(b[0].E_tilde, -b[1].E_tilde, 1e-10);
        EXPECT_NEAR(b[0].alpha, -b[1].alpha, 1e-10);
        EXPECT_EQ(b[0].branch, Branch::Lower);
        EXPECT_EQ(b[1].branch, Branch::Upper);
        for (const auto& s : b) {
            EXPECT_LE(s.residual_contact, 1e-9);
            EXPECT_LE(s.residual_bulk, 1e-9);
            EXPECT_LT(std::abs(s.alpha), 1.0);
            EXPECT_GT(s.molecular_fraction, 0.0);
            EXPECT_LT(s.molecular_fraction, 1.0);
        }
    }
}

TEST(BoundSolutions, FrozenLimitProxy)
{
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> u(-10, 10);
    for (int draw = 0; draw < 10; ++draw) {
        const double U = u(rng), g = u(rng), d = u(rng);
        if (std::abs(g) < 0.5)
            continue;
        const auto b = bound_solutions(ModelParams::with_delta(1e-8, 0, U, g, d), 0.3);
        ASSERT_EQ(b.size(), 2u);
        const double r = std::sqrt(8 * g * g + (U - d) * (U - d));
        EXPECT_NEAR(b[0].E_tilde, 0.5 * (U + d - r), 1e-5);
        EXPECT_NEAR(b[1].E_tilde, 0.5 * (U + d + r), 1e-5);
    }
}

TEST(BoundSolutions, SandwichForZeroInteraction)
{
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> d(-30, 30);
    std::uniform_real_distribution<double> K(-M_PI, M_PI);
    for (int draw = 0; draw < 30; ++draw) {
        const ModelParams p = ModelParams::with_delta(1, 0, 0, 4, d(rng));
        const double k = K(rng);
        const auto b = bound_solutions(p, k);
        ASSERT_EQ(b.size(), 2u);
        const double edge = KinematicFactors::at(p, k).continuum_edge();
        EXPECT_LT(b[0].E_tilde, -edge);
        EXPECT_GT(b[1].E_tilde, edge);
    }
}

TEST(BoundSolutions, DecayingTail)
{
    const auto b = bound_solutions(ModelParams::with_delta(1, 0.3, 2, 3, -1), 1.1);
    for (const auto& s : b) {
        double prev = 1.0;
        for (int r = 1; r < 20; ++r) {
            const double xi = std::pow(std::abs(s.alpha), r);
            EXPECT_LT(xi, prev);
            prev = xi;
        }
    }
}

TEST(BoundSolutions, OneIntersectionAtSomeMomentum)
{
    // g=10, U=20, Delta=12.5: window [10 - 4cos(K/2), 10 + 4cos(K/2)] covers Delta only near K=0.
    const ModelParams p = ModelParams::with_delta(1, 0, 20, 10, 12.5);
    bool seen_one = false, seen_two = false;
    const Lattice lat(10);
    const HilbertSpace s(lat);
    const SpectrumResult blocks = diagonalize_blocks(p, s);
    for (int n = -10; n <= 10; ++n) {
        const auto b = bound_solutions(p, lat.momentum(n));
        seen_one |= b.size() == 1;
        seen_two |= b.size() == 2;
        long numeric = 0;
        for (Eigen::Index i = 0; i < blocks.size(); ++i)
            numeric += blocks.k_index[static_cast<std::size_t>(i)] == n &&
                       blocks.band_class[static_cast<std::size_t>(i)] != BandClass::Scattering;
        EXPECT_EQ(static_cast<long>(ring_bound_solutions(p, lat, n).size()), numeric) << "n=" << n;
    }
    EXPECT_TRUE(seen_one);
    EXPECT_TRUE(seen_two);
}

TEST(RingBoundSolutions, MatchBlockEigenvaluesAndTile)
{
    std::mt19937 rng(29);
    std::uniform_real_distribution<double> u(-6, 6);
    const Lattice lat(6);
    const HilbertSpace s(lat);
    for (int draw = 0; draw < 8; ++draw) {
        const ModelParams p = ModelParams::with_delta(1, 0.5 * u(rng) / 6, u(rng), u(rng), u(rng));
        for (int n = -6; n <= 6; ++n) {
            const auto ev = block_eigenvalues(p, s, n);
            const auto sc = scattering_roots(p, lat, n);
            const auto bd = ring_bound_solutions(p, lat, n);
            EXPECT_EQ(sc.size() + bd.size(), static_cast<std::size_t>(lat.half_size() + 2))
                << "draw " << draw << " n=" << n;
            for (const auto& r : sc)
                EXPECT_LE(nearest(ev, r.E_tilde), 1e-8);
            for (const auto& b : bd)
                EXPECT_LE(nearest(ev, b.E_tilde), 1e-8);
        }
    }
}

TEST(ResonanceWindow, Values)
{
    const auto w = resonance_window(ModelParams::with_delta(1, 0, 5, 10, 0), 0.0);
    EXPECT_DOUBLE_EQ(w.lo, 36.0);
    EXPECT_DOUBLE_EQ(w.hi, 44.0);
    EXPECT_THROW(resonance_window(ModelParams::with_delta(1, 0, 0, 10, 0), 0.0), NoResonance);
    const auto narrow = resonance_window(ModelParams::with_delta(1, 0, 5, 10, 0), M_PI);
    EXPECT_NEAR(narrow.hi - narrow.lo, 0.0, 1e-12);
    for (double K : {0.0, 1.0, 2.5})
        EXPECT_TRUE(resonance_window(ModelParams::with_delta(1, 0, 8, 4, 0), K).contains(4.0));
}

TEST(ResonanceWindow, CountsOneInsideTwoOutside)
{
    const double K = 0.9;
    for (double d = -10.0; d <= 20.0; d += 0.37) {
        const ModelParams p = ModelParams::with_delta(1, 0, 8, 4, d);
        const auto w = resonance_window(p, K);
        const auto b = bound_solutions(p, K);
        EXPECT_EQ(b.size(), w.contains(d) ? 1u : 2u) << "Delta=" << d;
    }
}
