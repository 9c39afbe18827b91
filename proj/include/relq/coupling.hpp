#pragma once

/**
 * @file
 * Clebsch-Gordan coupling of two spins j1 (x) j2 into total-J blocks.
 *
 * Product basis index is i1 * (2 j2 + 1) + i2, with i1, i2 ladder indices of
 * the two factors. Block columns are ordered by M descending. Condon-Shortley
 * phases throughout.
 */

#include "relq/angular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

namespace relq {

/// Largest product-space dimension handled by dense matrices.
inline constexpr int dense_dimension_cap = 4096;

/// |j1 - j2|, ..., j1 + j2 in increasing order.
inline std::vector<Spin> total_j_values(Spin j1, Spin j2) {
    std::vector<Spin> out;
    for (int t = std::abs(j1.twice() - j2.twice()); t <= j1.twice() + j2.twice();
         t += 2) {
        out.push_back(Spin::from_twice(t));
    }
    return out;
}

inline bool in_triangle(Spin j1, Spin j2, Spin total) {
    const int t = total.twice();
    return t >= std::abs(j1.twice() - j2.twice()) && t <= j1.twice() + j2.twice() &&
           (j1.twice() + j2.twice() - t) % 2 == 0;
}

namespace detail {

inline double log_factorial(int n) { return std::lgamma(static_cast<double>(n) + 1.0); }

} // namespace detail

/// <j1 m1; j2 m2 | J M> with magnetic numbers passed as 2m.
inline double clebsch_gordan(Spin j1, int twice_m1, Spin j2, int twice_m2,
                             Spin total, int twice_total_m) {
    if (!in_ladder(j1, twice_m1) || !in_ladder(j2, twice_m2) ||
        !in_ladder(total, twice_total_m)) {
        throw DomainError("clebsch_gordan: magnetic number off its ladder (2m1=" +
                          std::to_string(twice_m1) + ", 2m2=" +
                          std::to_string(twice_m2) + ", 2M=" +
                          std::to_string(twice_total_m) + ")");
    }
    if (twice_total_m != twice_m1 + twice_m2 || !in_triangle(j1, j2, total)) {
        return 0.0;
    }

    // Racah's closed form; every bracket below is an integer by the checks above.
    const int a = j1.twice(), b = j2.twice(), c = total.twice();
    const int alpha = twice_m1, beta = twice_m2, gamma = twice_total_m;
    const int n1 = (a + b - c) / 2;     // j1 + j2 - J
    const int n2 = (a - alpha) / 2;     // j1 - m1
    const int n3 = (b + beta) / 2;      // j2 + m2
    const int n4 = (c - b + alpha) / 2; // J - j2 + m1
    const int n5 = (c - a - beta) / 2;  // J - j1 - m2

    using detail::log_factorial;
    const double log_prefactor =
        0.5 * (std::log(c + 1.0) + log_factorial((c + a - b) / 2) +
               log_factorial((c - a + b) / 2) + log_factorial(n1) -
               log_factorial((a + b + c) / 2 + 1) + log_factorial((c + gamma) / 2) +
               log_factorial((c - gamma) / 2) + log_factorial((a - alpha) / 2) +
               log_factorial((a + alpha) / 2) + log_factorial((b - beta) / 2) +
               log_factorial((b + beta) / 2));

    const int k_min = std::max({0, -n4, -n5});
    const int k_max = std::min({n1, n2, n3});
    double sum = 0.0;
    for (int k = k_min; k <= k_max; ++k) {
        const double log_term = log_prefactor - log_factorial(k) -
                                log_factorial(n1 - k) - log_factorial(n2 - k) -
                                log_factorial(n3 - k) - log_factorial(n4 + k) -
                                log_factorial(n5 + k);
        const double term = std::exp(log_term);
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

/// Orthogonal projector onto one total-J block.
struct Projector {
    Spin total;
    Operator matrix;
};

/// The isometry from each total-J block into the product space.
class CouplingDecomposition {
  public:
    struct Block {
        Spin total;
        RealMatrix isometry; ///< (2j1+1)(2j2+1) x (2J+1)
    };

    CouplingDecomposition(Spin j1, Spin j2) : j1_(j1), j2_(j2) {
        const long long dim =
            static_cast<long long>(j1.dimension()) * j2.dimension();
        if (dim > dense_dimension_cap) {
            throw CapacityError(
                "coupling " + j1.to_string() + " x " + j2.to_string() +
                " has dimension " + std::to_string(dim) + " > " +
                std::to_string(dense_dimension_cap) +
                "; use the closed-form spin-1/2 formulas instead");
        }
        const int d2 = j2.dimension();
        for (Spin total : total_j_values(j1, j2)) {
            RealMatrix iso = RealMatrix::Zero(dim, total.dimension());
            for (int col = 0; col < total.dimension(); ++col) {
                const int tm_total = total.twice() - 2 * col;
                for (int i1 = 0; i1 < j1.dimension(); ++i1) {
                    const int tm1 = j1.twice() - 2 * i1;
                    const int tm2 = tm_total - tm1;
                    if (!in_ladder(j2, tm2)) {
                        continue;
                    }
                    const int i2 = ladder_index(j2, tm2);
                    iso(i1 * d2 + i2, col) =
                        clebsch_gordan(j1, tm1, j2, tm2, total, tm_total);
                }
            }
            blocks_.push_back({total, std::move(iso)});
        }
    }

    [[nodiscard]] Spin j1() const { return j1_; }
    [[nodiscard]] Spin j2() const { return j2_; }
    [[nodiscard]] int dimension() const { return j1_.dimension() * j2_.dimension(); }
    [[nodiscard]] const std::vector<Block> &blocks() const { return blocks_; }

    /// Position of J in blocks(); throws if J is outside the triangle.
    [[nodiscard]] std::size_t block_index(Spin total) const {
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            if (blocks_[k].total == total) {
                return k;
            }
        }
        throw DomainError("J = " + total.to_string() + " does not occur in " +
                          j1_.to_string() + " x " + j2_.to_string());
    }

    [[nodiscard]] const Block &block(Spin total) const {
        return blocks_[block_index(total)];
    }

    [[nodiscard]] Projector projector(Spin total) const {
        const RealMatrix &v = block(total).isometry;
        return {total, (v * v.transpose()).cast<Complex>()};
    }

    /// Tr(Pi_J rho) for every block, in block order.
    [[nodiscard]] std::vector<double> block_weights(const Operator &rho) const {
        std::vector<double> out;
        out.reserve(blocks_.size());
        for (const Block &b : blocks_) {
            const Operator v = b.isometry.cast<Complex>();
            out.push_back((v.adjoint() * rho * v).trace().real());
        }
        return out;
    }

    /// ||Pi_J psi||^2 for every block, in block order.
    [[nodiscard]] std::vector<double> block_weights(const Amplitudes &psi) const {
        std::vector<double> out;
        out.reserve(blocks_.size());
        for (const Block &b : blocks_) {
            out.push_back((b.isometry.transpose().cast<Complex>() * psi).squaredNorm());
        }
        return out;
    }

  private:
    Spin j1_;
    Spin j2_;
    std::vector<Block> blocks_;
};

inline CouplingDecomposition decomposition(Spin j1, Spin j2) { return {j1, j2}; }

inline Projector projector(Spin j1, Spin j2, Spin total) {
    if (!in_triangle(j1, j2, total)) {
        throw DomainError("projector: J = " + total.to_string() +
                          " outside the coupling range of " + j1.to_string() +
                          " x " + j2.to_string());
    }
    return decomposition(j1, j2).projector(total);
}

} // namespace relq
