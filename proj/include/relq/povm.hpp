#pragma once

// Rotationally invariant POVMs E_k = sum_J s(k, J) Pi_J on a spin pair.

#include "relq/coupling.hpp"

#include <string>
#include <utility>
#include <vector>

namespace relq {

class RotInvariantPovm {
  public:
    /// weights(k, b) is the coefficient of the b-th block of total_j_values(j1, j2)
    /// in element k. Columns must be probability vectors.
    RotInvariantPovm(Spin j1, Spin j2, std::string name, std::vector<std::string> labels,
                     RealMatrix weights)
        : j1_(j1), j2_(j2), name_(std::move(name)), labels_(std::move(labels)),
          weights_(std::move(weights)) {
        const auto blocks = static_cast<Eigen::Index>(total_j_values(j1, j2).size());
        if (weights_.cols() != blocks) {
            throw DomainError("povm: one weight column per total J required");
        }
        if (weights_.rows() != static_cast<Eigen::Index>(labels_.size()) ||
            weights_.rows() == 0) {
            throw DomainError("povm: one label per element required");
        }
        if (weights_.minCoeff() < 0.0) {
            throw DomainError("povm: negative weight");
        }
        for (Eigen::Index b = 0; b < blocks; ++b) {
            if (std::abs(weights_.col(b).sum() - 1.0) > 1e-12) {
                throw DomainError("povm: elements do not sum to the identity on J = " +
                                  total_j_values(j1, j2)[static_cast<std::size_t>(b)]
                                      .to_string());
            }
        }
    }

    [[nodiscard]] Spin j1() const { return j1_; }
    [[nodiscard]] Spin j2() const { return j2_; }
    [[nodiscard]] const std::string &name() const { return name_; }
    [[nodiscard]] std::size_t size() const { return labels_.size(); }
    [[nodiscard]] const std::vector<std::string> &labels() const { return labels_; }
    [[nodiscard]] const RealMatrix &weights() const { return weights_; }
    [[nodiscard]] std::vector<Spin> totals() const { return total_j_values(j1_, j2_); }

    /// sum_J s(k, J) p_J
    [[nodiscard]] double likelihood(std::size_t outcome,
                                    const std::vector<double> &block_probabilities) const {
        double sum = 0.0;
        for (std::size_t b = 0; b < block_probabilities.size(); ++b) {
            sum += weights_(static_cast<Eigen::Index>(outcome), static_cast<Eigen::Index>(b)) *
                   block_probabilities[b];
        }
        return sum;
    }

    [[nodiscard]] std::vector<double>
    outcome_probabilities(const std::vector<double> &block_probabilities) const {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < size(); ++k) {
            out[k] = likelihood(k, block_probabilities);
        }
        return out;
    }

    /// Dense matrix of element k.
    [[nodiscard]] Operator element(std::size_t outcome) const {
        const CouplingDecomposition dec(j1_, j2_);
        Operator m = Operator::Zero(dec.dimension(), dec.dimension());
        for (std::size_t b = 0; b < dec.blocks().size(); ++b) {
            const RealMatrix &v = dec.blocks()[b].isometry;
            m += weights_(static_cast<Eigen::Index>(outcome), static_cast<Eigen::Index>(b)) *
                 (v * v.transpose()).cast<Complex>();
        }
        return m;
    }

  private:
    Spin j1_;
    Spin j2_;
    std::string name_;
    std::vector<std::string> labels_;
    RealMatrix weights_;
};

/// Outcome label for the total-J projector: A/S for two qubits, -/+ when one
/// spin is 1/2, "J=<value>" otherwise.
inline std::string block_label(Spin j1, Spin j2, Spin total) {
    if (j1 == spin_half && j2 == spin_half) {
        return total.twice() == 0 ? "A" : "S";
    }
    if ((j1 == spin_half || j2 == spin_half) && j1.twice() > 0 && j2.twice() > 0) {
        const Spin big = j1 == spin_half ? j2 : j1;
        return total.twice() < big.twice() ? "-" : "+";
    }
    return "J=" + total.to_string();
}

/// The projective measurement {Pi_J}, the most informative invariant POVM.
inline RotInvariantPovm optimal_povm(Spin j1, Spin j2) {
    const auto totals = total_j_values(j1, j2);
    std::vector<std::string> labels;
    for (Spin t : totals) {
        labels.push_back(block_label(j1, j2, t));
    }
    const auto n = static_cast<Eigen::Index>(totals.size());
    return {j1, j2, "optimal", std::move(labels), RealMatrix::Identity(n, n)};
}

} // namespace relq
