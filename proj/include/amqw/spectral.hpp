#pragma once

// Exact diagonalisation of the full Hamiltonian and of its centre-of-mass
// momentum blocks.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "amqw/band_solver.hpp"
#include "amqw/errors.hpp"
#include "amqw/lattice_model.hpp"

namespace amqw {

enum class BandClass { Scattering, DbsLower, DbsUpper, Unclassified };

inline const char* to_string(BandClass c) noexcept
{
    switch (c) {
    case BandClass::Scattering:
        return "scattering";
    case BandClass::DbsLower:
        return "dbs_lower";
    case BandClass::DbsUpper:
        return "dbs_upper";
    case BandClass::Unclassified:
        break;
    }
    return "unclassified";
}

/// Eigenpairs with per-state labels. Energies use the E - 2 eps_a reference.
struct SpectrumResult {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors; ///< one full-space state per column
    std::vector<double> molecular_fraction;
    std::vector<std::optional<int>> k_index; ///< empty when the momentum is not resolved
    std::vector<BandClass> band_class;

    Eigen::Index size() const noexcept { return eigenvalues.size(); }
};

/// Weight of a state on the molecule basis states.
inline double molecular_fraction(const HilbertSpace& space, const StateVector& v)
{
    if (v.size() != space.dimension())
        throw InvalidArgument("state length does not match basis dimension");
    return v.tail(space.lattice().sites()).squaredNorm();
}

namespace detail {

template <class Matrix>
auto solve_hermitian(const Matrix& m, const char* what)
{
    Eigen::SelfAdjointEigenSolver<Matrix> solver(m);
    if (solver.info() != Eigen::Success)
        throw NumericalError(std::string("eigensolver failed on ") + what + " (dimension " +
                             std::to_string(m.rows()) + ", max|H| = " + std::to_string(m.cwiseAbs().maxCoeff()) + ")");
    return solver;
}

} // namespace detail

inline SpectrumResult diagonalize_full(const ModelParams& params, const HilbertSpace& space)
{
    const Eigen::MatrixXd h = build_hamiltonian(params, space);
    const auto solver = detail::solve_hermitian(h, "full Hamiltonian");

    SpectrumResult out;
    out.eigenvalues = solver.eigenvalues().array() - 2.0 * params.eps_a;
    out.eigenvectors = solver.eigenvectors().cast<Complex>();
    const auto d = static_cast<std::size_t>(space.dimension());
    out.molecular_fraction.resize(d);
    out.k_index.assign(d, std::nullopt);
    out.band_class.assign(d, BandClass::Unclassified);
    for (Eigen::Index i = 0; i < space.dimension(); ++i)
        out.molecular_fraction[static_cast<std::size_t>(i)] = molecular_fraction(space, out.eigenvectors.col(i));
    return out;
}

/// Symmetry-adapted basis and Hamiltonian of centre-of-mass momentum block n.
///
/// Columns 0..L of `basis` are the pair states |K, r> = L_t^{-1/2} sum_R e^{iKR} |R, R + r>
/// for relative distance r, the last column is the molecular Bloch state.
/// All columns satisfy T|v> = e^{-iK}|v> for the one-site translation T.
struct MomentumBlock {
    int n = 0;
    double K = 0.0;
    Eigen::MatrixXcd basis;
    Eigen::MatrixXcd matrix;
};

namespace detail {

inline MomentumBlock momentum_block(const Eigen::MatrixXd& h, double eps_a, const HilbertSpace& space, int n)
{
    const Lattice& lat = space.lattice();
    const int L = lat.half_size();
    if (n < -L || n > L)
        throw InvalidArgument("momentum index " + std::to_string(n) + " outside [-L, L]");

    MomentumBlock block;
    block.n = n;
    block.K = lat.momentum(n);
    const int Lt = lat.sites();
    const double norm = 1.0 / std::sqrt(static_cast<double>(Lt));
    block.basis = Eigen::MatrixXcd::Zero(space.dimension(), L + 2);
    for (int r = 0; r <= L; ++r)
        for (int R = -L; R <= L; ++R)
            block.basis(space.pair_index(R, R + r), r) += norm * std::polar(1.0, block.K * R);
    for (int j = -L; j <= L; ++j)
        block.basis(space.molecule_index(j), L + 1) = norm * std::polar(1.0, block.K * j);

    block.matrix = block.basis.adjoint() * h * block.basis;
    block.matrix.diagonal().array() -= 2.0 * eps_a;
    return block;
}

} // namespace detail

inline MomentumBlock momentum_block(const ModelParams& params, const HilbertSpace& space, int n)
{
    return detail::momentum_block(build_hamiltonian(params, space), params.eps_a, space, n);
}

/// Labels one state. States inside the continuum envelope |E| <= 2|J_a^K| are
/// scattering states; states outside are matched to the closest candidate
/// bound solution (ties broken by molecular fraction). Without a candidate
/// within `match_tol`, the state is Unclassified.
inline BandClass classify_state(double E_tilde, double K, double P_m, const ModelParams& params,
                                std::span<const BoundSolution> candidates,
                                double match_tol = std::numeric_limits<double>::infinity())
{
    const double edge = KinematicFactors::at(params, K).continuum_edge();
    const double eps_band = 1e-6 * std::max(1.0, std::abs(params.J_a));
    if (std::abs(E_tilde) <= edge + eps_band)
        return BandClass::Scattering;

    const BoundSolution* best = nullptr;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        const double dist = std::abs(c.E_tilde - E_tilde);
        const bool tie = best && std::abs(dist - best_dist) <= 1e-9 * std::max(1.0, std::abs(E_tilde));
        if (tie) {
            if (std::abs(c.molecular_fraction - P_m) < std::abs(best->molecular_fraction - P_m))
                best = &c;
        } else if (dist < best_dist) {
            best = &c;
            best_dist = dist;
        }
    }
    if (!best || std::abs(best->E_tilde - E_tilde) > match_tol)
        return BandClass::Unclassified;
    return best->branch == Branch::Lower ? BandClass::DbsLower : BandClass::DbsUpper;
}

/// Same as above against the infinite-chain bound solutions at K.
inline BandClass classify_state(double E_tilde, double K, double P_m, const ModelParams& params)
{
    const auto candidates = bound_solutions(params, K);
    return classify_state(E_tilde, K, P_m, params, candidates);
}

namespace detail {

inline void append_block(const Eigen::MatrixXd& h, const ModelParams& params, const HilbertSpace& space, int n,
                         SpectrumResult& out)
{
    const MomentumBlock block = momentum_block(h, params.eps_a, space, n);
    const auto solver = solve_hermitian(block.matrix, "momentum block");
    const auto candidates =
        params.J_a != 0.0 ? ring_bound_solutions(params, space.lattice(), n) : bound_solutions(params, block.K);
    const Eigen::Index first = out.eigenvalues.size();
    const Eigen::Index m = block.matrix.rows();
    out.eigenvalues.conservativeResize(first + m);
    out.eigenvectors.conservativeResize(space.dimension(), first + m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double E = solver.eigenvalues()(i);
        const StateVector v = block.basis * solver.eigenvectors().col(i);
        const double pm = molecular_fraction(space, v);
        out.eigenvalues(first + i) = E;
        out.eigenvectors.col(first + i) = v;
        out.molecular_fraction.push_back(pm);
        out.k_index.emplace_back(n);
        out.band_class.push_back(classify_state(E, block.K, pm, params, candidates, 1e-6 * std::max(1.0, std::abs(E))));
    }
}

} // namespace detail

/// Spectrum of the listed momentum blocks, in the order given, each block
/// sorted by energy. Bound states are labelled against the exact ring
/// solutions of their block.
inline SpectrumResult diagonalize_blocks(const ModelParams& params, const HilbertSpace& space,
                                         std::span<const int> blocks)
{
    const Eigen::MatrixXd h = build_hamiltonian(params, space);
    SpectrumResult out;
    out.eigenvectors.resize(space.dimension(), 0);
    for (int n : blocks)
        detail::append_block(h, params, space, n, out);
    return out;
}

/// All blocks, ordered by (n, E).
inline SpectrumResult diagonalize_blocks(const ModelParams& params, const HilbertSpace& space)
{
    const int L = space.lattice().half_size();
    std::vector<int> blocks;
    for (int n = -L; n <= L; ++n)
        blocks.push_back(n);
    return diagonalize_blocks(params, space, blocks);
}

} // namespace amqw
