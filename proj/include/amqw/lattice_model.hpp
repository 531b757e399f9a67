#pragma once

// Two-boson sector of the atom-molecule Bose-Hubbard ring: lattice, basis and
// Hamiltonian.
//
// Sites carry labels -L..L. Internally every site is addressed by an index
// 0..L_t-1 with index = label + L, so all periodic arithmetic is done on
// non-negative integers.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "amqw/errors.hpp"

namespace amqw {

using Complex = std::complex<double>;
using StateVector = Eigen::VectorXcd;

/// Periodic chain of L_t = 2L + 1 sites.
class Lattice {
public:
    explicit Lattice(int half_size)
        : half_size_(half_size)
    {
        if (half_size < 1)
            throw InvalidArgument("lattice half-size L must be >= 1, got " + std::to_string(half_size));
    }

    int half_size() const noexcept { return half_size_; }
    int sites() const noexcept { return 2 * half_size_ + 1; }

    int to_index(int label) const noexcept { return wrap_index(label + half_size_); }
    int to_label(int index) const noexcept { return wrap_index(index) - half_size_; }
    int wrap(int label) const noexcept { return to_label(to_index(label)); }

    int wrap_index(int index) const noexcept
    {
        const int n = sites();
        const int r = index % n;
        return r < 0 ? r + n : r;
    }

    /// Quasi-momentum 2*pi*n/L_t of block n.
    double momentum(int n) const noexcept { return 2.0 * M_PI * n / sites(); }

    friend bool operator==(const Lattice&, const Lattice&) = default;

private:
    int half_size_;
};

/// Couplings of the Hamiltonian. The detuning is always derived from the
/// on-site energies.
struct ModelParams {
    double J_a = 0.0;
    double J_m = 0.0;
    double U = 0.0;
    double g = 0.0;
    double eps_a = 0.0;
    double eps_m = 0.0;

    double delta() const noexcept { return eps_m - 2.0 * eps_a; }

    /// Shorthand with eps_a = 0, eps_m = delta.
    static ModelParams with_delta(double J_a, double J_m, double U, double g, double delta)
    {
        return ModelParams{J_a, J_m, U, g, 0.0, delta};
    }

    void validate() const
    {
        for (double v : {J_a, J_m, U, g, eps_a, eps_m})
            if (!std::isfinite(v))
                throw InvalidArgument("model parameters must be finite");
    }
};

/// Two atoms on sites l1 <= l2 (labels).
struct AtomPair {
    int l1;
    int l2;
    friend bool operator==(const AtomPair&, const AtomPair&) = default;
};

/// One molecule on site j (label).
struct Molecule {
    int j;
    friend bool operator==(const Molecule&, const Molecule&) = default;
};

using BasisState = std::variant<AtomPair, Molecule>;

/// Ordered orthonormal basis of the two-atom-equivalent sector.
///
/// All atom pairs with -L <= l1 <= l2 <= L come first, ordered by (l1, l2),
/// followed by the L_t molecule states ordered by site.
class HilbertSpace {
public:
    explicit HilbertSpace(Lattice lattice)
        : lattice_(lattice)
    {
        const int n = lattice_.sites();
        states_.reserve(static_cast<std::size_t>(n * (n + 1) / 2 + n));
        for (int a = 0; a < n; ++a)
            for (int b = a; b < n; ++b)
                states_.emplace_back(AtomPair{lattice_.to_label(a), lattice_.to_label(b)});
        for (int j = 0; j < n; ++j)
            states_.emplace_back(Molecule{lattice_.to_label(j)});
    }

    const Lattice& lattice() const noexcept { return lattice_; }
    Eigen::Index dimension() const noexcept { return static_cast<Eigen::Index>(states_.size()); }
    Eigen::Index pair_count() const noexcept
    {
        const int n = lattice_.sites();
        return n * (n + 1) / 2;
    }
    const std::vector<BasisState>& states() const noexcept { return states_; }
    const BasisState& state(Eigen::Index i) const { return states_.at(static_cast<std::size_t>(i)); }

    /// Position of the pair state holding atoms on the two labels (any order, wrapped).
    Eigen::Index pair_index(int l1, int l2) const noexcept
    {
        int a = lattice_.to_index(l1);
        int b = lattice_.to_index(l2);
        if (a > b)
            std::swap(a, b);
        return pair_index_internal(a, b);
    }

    Eigen::Index molecule_index(int j) const noexcept { return pair_count() + lattice_.to_index(j); }

    Eigen::Index index_of(const BasisState& s) const
    {
        if (const auto* p = std::get_if<AtomPair>(&s))
            return pair_index(p->l1, p->l2);
        return molecule_index(std::get<Molecule>(s).j);
    }

    bool is_molecule(Eigen::Index i) const noexcept { return i >= pair_count(); }

private:
    Eigen::Index pair_index_internal(int a, int b) const noexcept
    {
        const int n = lattice_.sites();
        return static_cast<Eigen::Index>(a) * n - static_cast<Eigen::Index>(a) * (a - 1) / 2 + (b - a);
    }

    Lattice lattice_;
    std::vector<BasisState> states_;
};

inline HilbertSpace build_basis(const Lattice& lattice) { return HilbertSpace(lattice); }

namespace detail {

/// Visits every nonzero matrix element <row|H|col> produced from each basis
/// column. Elements reaching the same row from different terms are visited
/// separately and must be accumulated by the caller.
template <class Visitor>
void for_each_element(const ModelParams& p, const HilbertSpace& space, Visitor&& visit)
{
    const Lattice& lat = space.lattice();
    const double sqrt2 = std::sqrt(2.0);
    for (Eigen::Index col = 0; col < space.dimension(); ++col) {
        const BasisState& s = space.state(col);
        if (const auto* pair = std::get_if<AtomPair>(&s)) {
            const bool onsite = pair->l1 == pair->l2;
            // Move one atom from `from` to a neighbour. For a doubly occupied
            // site a_from gives sqrt(2); landing on an occupied site gives sqrt(2).
            auto hop = [&](int from, int other) {
                for (int step : {+1, -1}) {
                    const int to = lat.wrap(from + step);
                    double amp = onsite ? sqrt2 : 1.0;
                    if (to == other)
                        amp *= sqrt2;
                    visit(space.pair_index(to, other), col, -p.J_a * amp);
                }
            };
            hop(pair->l1, pair->l2);
            if (!onsite)
                hop(pair->l2, pair->l1);
            double diag = 2.0 * p.eps_a;
            if (onsite) {
                diag += p.U;
                visit(space.molecule_index(pair->l1), col, sqrt2 * p.g);
            }
            visit(col, col, diag);
        } else {
            const int j = std::get<Molecule>(s).j;
            visit(space.molecule_index(lat.wrap(j + 1)), col, -p.J_m);
            visit(space.molecule_index(lat.wrap(j - 1)), col, -p.J_m);
            visit(space.pair_index(j, j), col, sqrt2 * p.g);
            visit(col, col, p.eps_m);
        }
    }
}

} // namespace detail

/// Dense Hamiltonian in the orthonormal pair/molecule basis. Real symmetric.
inline Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const HilbertSpace& space)
{
    params.validate();
    const Eigen::Index d = space.dimension();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);
    detail::for_each_element(params, space,
                             [&](Eigen::Index row, Eigen::Index col, double v) { h(row, col) += v; });
    return h;
}

/// Matrix-free H|psi>.
inline StateVector apply_hamiltonian(const ModelParams& params, const HilbertSpace& space, const StateVector& psi)
{
    if (psi.size() != space.dimension())
        throw InvalidArgument("state length " + std::to_string(psi.size()) + " does not match basis dimension " +
                              std::to_string(space.dimension()));
    params.validate();
    StateVector out = StateVector::Zero(space.dimension());
    detail::for_each_element(params, space,
                             [&](Eigen::Index row, Eigen::Index col, double v) { out(row) += v * psi(col); });
    return out;
}

/// Translation by one site and the conserved charge N_a + 2 N_m.
struct SymmetryOperators {
    Eigen::MatrixXd translation;
    Eigen::MatrixXd charge;
};

inline SymmetryOperators symmetry_operators(const HilbertSpace& space)
{
    const Eigen::Index d = space.dimension();
    SymmetryOperators ops{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d)};
    for (Eigen::Index col = 0; col < d; ++col) {
        const BasisState& s = space.state(col);
        Eigen::Index row = 0;
        int atoms = 0;
        int molecules = 0;
        if (const auto* pair = std::get_if<AtomPair>(&s)) {
            row = space.pair_index(pair->l1 + 1, pair->l2 + 1);
            atoms = 2;
        } else {
            row = space.molecule_index(std::get<Molecule>(s).j + 1);
            molecules = 1;
        }
        ops.translation(row, col) = 1.0;
        ops.charge(col, col) = atoms + 2 * molecules;
    }
    return ops;
}

/// Basis vector for a single basis state.
inline StateVector basis_vector(const HilbertSpace& space, const BasisState& s)
{
    StateVector v = StateVector::Zero(space.dimension());
    v(space.index_of(s)) = 1.0;
    return v;
}

} // namespace amqw
