#pragma once

/**
 * @file
 * Joint states of two spins: product coherent pairs, collective rotations,
 * the exact group average onto total-J weights, and the two-qubit Werner family.
 */

#include "relq/coupling.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace relq {

/// Density matrix on the product space of a spin-j1 and a spin-j2 system.
class DensityMatrix {
  public:
    /// Validated construction: Hermitian and unit trace within 1e-12,
    /// spectrum bounded below by -1e-10.
    static DensityMatrix from_operator(Operator m, Spin j1, Spin j2) {
        const Eigen::Index dim = static_cast<Eigen::Index>(j1.dimension()) * j2.dimension();
        if (m.rows() != dim || m.cols() != dim) {
            throw DomainError("density matrix: size does not match (2j1+1)(2j2+1)");
        }
        if (max_abs(m - m.adjoint()) > 1e-12) {
            throw DomainError("density matrix: not Hermitian");
        }
        if (std::abs(m.trace() - Complex(1.0)) > 1e-12) {
            throw DomainError("density matrix: trace is not 1");
        }
        if (hermitian_eigenvalues(m).minCoeff() < -1e-10) {
            throw DomainError("density matrix: not positive semidefinite");
        }
        return {std::move(m), j1, j2};
    }

    /// |psi><psi| for a normalized joint vector.
    static DensityMatrix pure(const Amplitudes &psi, Spin j1, Spin j2) {
        if (std::abs(psi.squaredNorm() - 1.0) > 1e-12) {
            throw DomainError("density matrix: state vector not normalized");
        }
        return from_operator(psi * psi.adjoint(), j1, j2);
    }

    [[nodiscard]] const Operator &matrix() const { return matrix_; }
    [[nodiscard]] Spin j1() const { return j1_; }
    [[nodiscard]] Spin j2() const { return j2_; }
    [[nodiscard]] std::pair<int, int> dims() const {
        return {j1_.dimension(), j2_.dimension()};
    }

  private:
    DensityMatrix(Operator m, Spin j1, Spin j2) : matrix_(std::move(m)), j1_(j1), j2_(j2) {}

    Operator matrix_;
    Spin j1_;
    Spin j2_;
};

/// A rotationally invariant state, held as a distribution over total J.
class InvariantState {
  public:
    /// weights are indexed like total_j_values(j1, j2).
    InvariantState(Spin j1, Spin j2, std::vector<double> weights)
        : j1_(j1), j2_(j2), weights_(std::move(weights)) {
        if (weights_.size() != total_j_values(j1, j2).size()) {
            throw DomainError("invariant state: one weight per total J required");
        }
        double sum = 0.0;
        for (double w : weights_) {
            if (w < 0.0) {
                throw DomainError("invariant state: negative weight");
            }
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw DomainError("invariant state: weights do not sum to 1");
        }
    }

    [[nodiscard]] Spin j1() const { return j1_; }
    [[nodiscard]] Spin j2() const { return j2_; }
    [[nodiscard]] std::vector<Spin> totals() const { return total_j_values(j1_, j2_); }
    [[nodiscard]] const std::vector<double> &weights() const { return weights_; }

    [[nodiscard]] double weight(Spin total) const {
        const auto totals = this->totals();
        for (std::size_t k = 0; k < totals.size(); ++k) {
            if (totals[k] == total) {
                return weights_[k];
            }
        }
        throw DomainError("invariant state: J = " + total.to_string() + " not present");
    }

    /// sum_J p_J / (2J+1) Pi_J
    [[nodiscard]] DensityMatrix reconstruct() const {
        const CouplingDecomposition dec(j1_, j2_);
        Operator m = Operator::Zero(dec.dimension(), dec.dimension());
        for (std::size_t k = 0; k < dec.blocks().size(); ++k) {
            const auto &b = dec.blocks()[k];
            m += (weights_[k] / b.total.dimension()) *
                 (b.isometry * b.isometry.transpose()).cast<Complex>();
        }
        return DensityMatrix::from_operator(std::move(m), j1_, j2_);
    }

  private:
    Spin j1_;
    Spin j2_;
    std::vector<double> weights_;
};

inline Amplitudes product_coherent_vector(Spin j1, Spin j2, const Direction &n1,
                                          const Direction &n2) {
    return kron(coherent_state(j1, n1).amplitudes(), coherent_state(j2, n2).amplitudes());
}

/// |j1 n1><j1 n1| (x) |j2 n2><j2 n2|
inline DensityMatrix product_coherent_pair(Spin j1, Spin j2, const Direction &n1,
                                           const Direction &n2) {
    const long long dim = static_cast<long long>(j1.dimension()) * j2.dimension();
    if (dim > dense_dimension_cap) {
        throw CapacityError("product pair of dimension " + std::to_string(dim) +
                            " exceeds the dense cap");
    }
    return DensityMatrix::pure(product_coherent_vector(j1, j2, n1, n2), j1, j2);
}

inline Operator collective_rotation_matrix(Spin j1, Spin j2, const Rotation &r) {
    return kron(rotation_matrix(j1, r), rotation_matrix(j2, r));
}

inline DensityMatrix collective_rotate(const DensityMatrix &rho, const Rotation &r) {
    const Operator u = collective_rotation_matrix(rho.j1(), rho.j2(), r);
    Operator m = u * rho.matrix() * u.adjoint();
    // Re-symmetrize so the Hermiticity check sees no rounding asymmetry.
    m = (m + m.adjoint()) / 2.0;
    return DensityMatrix::from_operator(std::move(m), rho.j1(), rho.j2());
}

/// Haar average of rho over collective rotations. Each total-J block is an
/// irrep occurring once, so the average is fixed by the weights Tr(Pi_J rho).
inline InvariantState invariant_average(const DensityMatrix &rho) {
    const CouplingDecomposition dec(rho.j1(), rho.j2());
    std::vector<double> w = dec.block_weights(rho.matrix());
    for (double &x : w) {
        if (x < 0.0 && x > -1e-12) {
            x = 0.0;
        }
    }
    return {rho.j1(), rho.j2(), std::move(w)};
}

/// p Pi_A + (1 - p) Pi_S / 3 on two qubits.
inline DensityMatrix werner_state(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("werner_state: p must lie in [0, 1]");
    }
    return InvariantState(spin_half, spin_half, {p, 1.0 - p}).reconstruct();
}

} // namespace relq
