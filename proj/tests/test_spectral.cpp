#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "amqw/spectral.hpp"

using namespace amqw;

namespace {

std::vector<double> sorted(const Eigen::VectorXd& v)
{
    std::vector<double> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(DiagonalizeFull, FrozenSymmetricSpectrum)
{
    const HilbertSpace s(Lattice(3));
    const auto r = diagonalize_full(ModelParams::with_delta(0, 0, 0, 1, 0), s);
    const auto ev = sorted(r.eigenvalues);
    const int n = s.lattice().sites();
    for (int i = 0; i < n; ++i) {
        EXPECT_NEAR(ev[static_cast<std::size_t>(i)], -std::sqrt(2.0), 1e-12);
        EXPECT_NEAR(ev[ev.size() - 1 - static_cast<std::size_t>(i)], std::sqrt(2.0), 1e-12);
    }
    for (std::size_t i = n; i < ev.size() - n; ++i)
        EXPECT_NEAR(ev[i], 0.0, 1e-12);
}

TEST(DiagonalizeFull, UncoupledMoleculesSitAtDetuning)
{
    const HilbertSpace s(Lattice(4));
    const auto r = diagonalize_full(ModelParams::with_delta(1, 0, 2, 0, 7.5), s);
    const auto count = std::count_if(r.eigenvalues.begin(), r.eigenvalues.end(),
                                     [](double e) { return std::abs(e - 7.5) < 1e-10; });
    EXPECT_EQ(count, s.lattice().sites());
}

TEST(DiagonalizeFull, TildeEnergyReference)
{
    const HilbertSpace s(Lattice(2));
    ModelParams p{1, 0.5, 2, 1, 0.0, 3.0};
    const auto base = sorted(diagonalize_full(p, s).eigenvalues);
    p.eps_a = 1.25;
    p.eps_m += 2.5; // same Delta
    const auto shifted = sorted(diagonalize_full(p, s).eigenvalues);
    for (std::size_t i = 0; i < base.size(); ++i)
        EXPECT_NEAR(base[i], shifted[i], 1e-11);
}

TEST(DiagonalizeFull, ResidualsAndFractions)
{
    const HilbertSpace s(Lattice(4));
    const ModelParams p{1, 0.4, 3, 2, 0.3, 1.1};
    const auto r = diagonalize_full(p, s);
    const Eigen::MatrixXcd h = build_hamiltonian(p, s).cast<Complex>();
    const double hn = h.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < r.size(); ++i) {
        const StateVector v = r.eigenvectors.col(i);
        const double E = r.eigenvalues(i) + 2.0 * p.eps_a;
        EXPECT_LE((h * v - E * v).norm(), 1e-9 * hn);
        const double pm = r.molecular_fraction[static_cast<std::size_t>(i)];
        EXPECT_GE(pm, 0.0);
        EXPECT_LE(pm, 1.0 + 1e-12);
        EXPECT_FALSE(r.k_index[static_cast<std::size_t>(i)].has_value());
    }
}

TEST(DiagonalizeFull, ChiralSymmetryOnlyWithoutAtomicHopping)
{
    const HilbertSpace s(Lattice(10));
    auto asymmetry = [&](const ModelParams& p) {
        const auto ev = sorted(diagonalize_full(p, s).eigenvalues);
        double w = 0.0;
        for (std::size_t i = 0; i < ev.size(); ++i)
            w = std::max(w, std::abs(ev[i] + ev[ev.size() - 1 - i]));
        return w;
    };
    for (double g : {1.0, 2.0, 4.0}) {
        EXPECT_LE(asymmetry(ModelParams::with_delta(0, 0, 0, g, 0)), 1e-12);
        // an odd ring has no sublattice structure, so hopping breaks E -> -E
        EXPECT_GT(asymmetry(ModelParams::with_delta(1, 0, 0, g, 0)), 1e-3);
    }
}

TEST(MomentumBlock, BasisIsOrthonormalTranslationEigenbasis)
{
    const HilbertSpace s(Lattice(4));
    const auto T = symmetry_operators(s).translation.cast<Complex>().eval();
    const ModelParams p{1, 0.3, 2, 1.5, 0, 0.4};
    for (int n = -4; n <= 4; ++n) {
        const auto b = momentum_block(p, s, n);
        EXPECT_EQ(b.matrix.rows(), 6);
        const Eigen::MatrixXcd gram = b.basis.adjoint() * b.basis;
        EXPECT_LE((gram - Eigen::MatrixXcd::Identity(6, 6)).cwiseAbs().maxCoeff(), 1e-12);
        const Eigen::MatrixXcd tb = T * b.basis;
        EXPECT_LE((tb - std::polar(1.0, -b.K) * b.basis).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
        EXPECT_LE((b.matrix - b.matrix.adjoint()).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(momentum_block(p, s, 5), InvalidArgument);
}

TEST(MomentumBlock, BlocksReproduceFullSpectrum)
{
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> u(-3, 3);
    const HilbertSpace s(Lattice(5));
    for (int draw = 0; draw < 20; ++draw) {
        const ModelParams p{u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)};
        const auto full = sorted(diagonalize_full(p, s).eigenvalues);
        const auto blocks = diagonalize_blocks(p, s);
        const auto joined = sorted(blocks.eigenvalues);
        ASSERT_EQ(joined.size(), full.size());
        for (std::size_t i = 0; i < full.size(); ++i)
            EXPECT_NEAR(joined[i], full[i], 1e-9);

        const Eigen::MatrixXcd h = build_hamiltonian(p, s).cast<Complex>();
        for (Eigen::Index i = 0; i < blocks.size(); ++i) {
            const StateVector v = blocks.eigenvectors.col(i);
            const double E = blocks.eigenvalues(i) + 2.0 * p.eps_a;
            EXPECT_LE((h * v - E * v).norm(), 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()));
        }
    }
}

TEST(MomentumBlock, HardcoreProxy)
{
    const HilbertSpace s(Lattice(10));
    const auto b = momentum_block(ModelParams::with_delta(1, 0, 1e6, 0, 0), s, 0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(b.matrix);
    const Eigen::VectorXd ev = es.eigenvalues();
    EXPECT_NEAR(ev(ev.size() - 1) / 1e6, 1.0, 1e-5);
    EXPECT_NEAR((ev.array() - 0.0).abs().minCoeff(), 0.0, 1e-9);
}

TEST(MolecularFraction, Extremes)
{
    const HilbertSpace s(Lattice(3));
    const auto b = momentum_block(ModelParams{}, s, 1);
    EXPECT_NEAR(molecular_fraction(s, b.basis.col(b.basis.cols() - 1)), 1.0, 1e-14);
    EXPECT_EQ(molecular_fraction(s, basis_vector(s, AtomPair{0, 0})), 0.0);
    StateVector dressed = (basis_vector(s, AtomPair{0, 0}) + basis_vector(s, Molecule{0})) / std::sqrt(2.0);
    EXPECT_NEAR(molecular_fraction(s, dressed), 0.5, 1e-15);
    EXPECT_THROW(molecular_fraction(s, StateVector::Zero(3)), InvalidArgument);
}

TEST(ClassifyState, Envelope)
{
    const ModelParams p = ModelParams::with_delta(1, 0, 0, 4, 0);
    EXPECT_EQ(classify_state(0.0, 0.0, 0.1, p), BandClass::Scattering);
    const auto b = bound_solutions(p, 0.0);
    ASSERT_EQ(b.size(), 2u);
    // U=0, J_m=0, K=0: E sqrt(E^2 - 16) = 2 g^2
    EXPECT_NEAR(b[1].E_tilde * std::sqrt(b[1].E_tilde * b[1].E_tilde - 16.0), 32.0, 1e-9);
    EXPECT_EQ(classify_state(b[1].E_tilde, 0.0, b[1].molecular_fraction, p), BandClass::DbsUpper);
    EXPECT_EQ(classify_state(b[0].E_tilde, 0.0, b[0].molecular_fraction, p), BandClass::DbsLower);
    const std::vector<BoundSolution> none;
    EXPECT_EQ(classify_state(9.0, 0.0, 0.5, p, none), BandClass::Unclassified);
}

TEST(DiagonalizeBlocks, ClassCountsPerMomentum)
{
    const Lattice lat(10);
    const HilbertSpace s(lat);
    auto per_k = [&](const ModelParams& p) {
        const auto r = diagonalize_blocks(p, s);
        std::vector<int> count(static_cast<std::size_t>(lat.sites()), 0);
        for (Eigen::Index i = 0; i < r.size(); ++i) {
            const auto u = static_cast<std::size_t>(i);
            EXPECT_NE(r.band_class[u], BandClass::Unclassified);
            if (r.band_class[u] != BandClass::Scattering)
                ++count[static_cast<std::size_t>(*r.k_index[u] + lat.half_size())];
        }
        return count;
    };
    for (int c : per_k(ModelParams::with_delta(1, 0, 0, 4, 0)))
        EXPECT_EQ(c, 2);
    for (int c : per_k(ModelParams::with_delta(1, 0, 8, 4, 4)))
        EXPECT_EQ(c, 1);
}

TEST(DiagonalizeBlocks, IsolatedBandFractions)
{
    const HilbertSpace s(Lattice(10));
    const auto bare = diagonalize_blocks(ModelParams::with_delta(1, 0, 0, 0, 10), s);
    const auto dressed = diagonalize_blocks(ModelParams::with_delta(1, 0, 0, 4, 0), s);
    for (Eigen::Index i = 0; i < bare.size(); ++i) {
        const auto u = static_cast<std::size_t>(i);
        if (bare.band_class[u] != BandClass::Scattering)
            EXPECT_NEAR(bare.molecular_fraction[u], 1.0, 1e-12);
        if (dressed.band_class[u] != BandClass::Scattering) {
            EXPECT_GT(dressed.molecular_fraction[u], 0.0);
            EXPECT_LT(dressed.molecular_fraction[u], 1.0);
        }
    }
}

TEST(DiagonalizeBlocks, SubsetAndOrdering)
{
    const HilbertSpace s(Lattice(4));
    const ModelParams p = ModelParams::with_delta(1, 0.2, 1, 2, 0.5);
    const std::vector<int> only{0};
    const auto r = diagonalize_blocks(p, s, only);
    EXPECT_EQ(r.size(), 6);
    const auto all = diagonalize_blocks(p, s);
    for (Eigen::Index i = 1; i < all.size(); ++i) {
        const auto a = *all.k_index[static_cast<std::size_t>(i - 1)];
        const auto b = *all.k_index[static_cast<std::size_t>(i)];
        EXPECT_TRUE(a < b || (a == b && all.eigenvalues(i - 1) <= all.eigenvalues(i)));
    }
}
