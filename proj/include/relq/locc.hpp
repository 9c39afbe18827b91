#pragma once

/**
 * @file
 * Local measurements on a spin-1/2 (x) spin-j pair.
 *
 * Separability is probed only through the partial transpose (PPT), which is
 * necessary for separability and sufficient in 2x2 and 2x3 dimensions. All
 * thresholds reported here are PPT thresholds.
 */

#include "relq/povm.hpp"
#include "relq/states.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace relq {

struct PartialTransposeResult {
    Operator transposed;
    double min_eigenvalue = 0.0;
    double negativity = 0.0; ///< sum of |lambda| over eigenvalues below -1e-12
};

/// Below this a partial-transpose eigenvalue counts as negative.
inline constexpr double ppt_tolerance = 1e-12;

/// Transpose on the second tensor factor, then a Hermitian eigensolve.
inline PartialTransposeResult partial_transpose(const Operator &op, int d1, int d2) {
    if (d1 < 1 || d2 < 1 || op.rows() != static_cast<Eigen::Index>(d1) * d2 ||
        op.cols() != op.rows()) {
        throw DomainError("partial_transpose: matrix is not " + std::to_string(d1) + "x" +
                          std::to_string(d2) + " on each side");
    }
    PartialTransposeResult out;
    out.transposed.resize(op.rows(), op.cols());
    for (int a = 0; a < d1; ++a) {
        for (int b = 0; b < d2; ++b) {
            for (int ap = 0; ap < d1; ++ap) {
                for (int bp = 0; bp < d2; ++bp) {
                    out.transposed(a * d2 + b, ap * d2 + bp) = op(a * d2 + bp, ap * d2 + b);
                }
            }
        }
    }
    const Eigen::VectorXd ev = hermitian_eigenvalues(out.transposed);
    out.min_eigenvalue = ev.minCoeff();
    for (Eigen::Index k = 0; k < ev.size(); ++k) {
        if (ev(k) < -ppt_tolerance) {
            out.negativity -= ev(k);
        }
    }
    return out;
}

inline constexpr double ppt_bisection_tolerance = 1e-10;

/// Boundary in [0, 1] between the PPT and non-PPT parts of a one-parameter
/// operator family, found by bisection on the sign of the minimum
/// partial-transpose eigenvalue. Twenty evenly spaced samples must show a
/// single sign change before bisection is trusted.
inline double ppt_boundary(const std::function<Operator(double)> &family, int d1, int d2,
                           double tol = ppt_bisection_tolerance) {
    auto is_ppt = [&](double x) {
        return partial_transpose(family(x), d1, d2).min_eigenvalue >= 0.0;
    };
    constexpr int samples = 20;
    std::array<bool, samples> pattern{};
    int changes = 0;
    for (int k = 0; k < samples; ++k) {
        pattern[static_cast<std::size_t>(k)] = is_ppt(static_cast<double>(k) / (samples - 1));
        if (k > 0 && pattern[static_cast<std::size_t>(k)] != pattern[static_cast<std::size_t>(k - 1)]) {
            ++changes;
        }
    }
    if (changes != 1) {
        throw ConsistencyError("ppt_boundary: PPT sign pattern over [0, 1] changes " +
                               std::to_string(changes) + " times, expected once");
    }
    // ppt_side ends up on the PPT side, other_side on the entangled side
    double ppt_side = pattern.front() ? 0.0 : 1.0;
    double other_side = 1.0 - ppt_side;
    while (std::abs(ppt_side - other_side) > tol) {
        const double mid = 0.5 * (ppt_side + other_side);
        if (is_ppt(mid)) {
            ppt_side = mid;
        } else {
            other_side = mid;
        }
    }
    return 0.5 * (ppt_side + other_side);
}

/// Smallest x with Pi_- + x Pi_+ PPT on spin-1/2 (x) spin-j.
inline double ppt_threshold(Spin j) {
    if (j.twice() < 1) {
        throw DomainError("ppt_threshold: needs j >= 1/2");
    }
    const CouplingDecomposition dec(spin_half, j);
    const int d2 = j.dimension();
    const Operator pm = dec.projector(dec.blocks()[0].total).matrix;
    const Operator pp = dec.projector(dec.blocks()[1].total).matrix;
    return ppt_boundary([&](double x) -> Operator { return pm + x * pp; }, 2, d2);
}

/// Largest Werner weight p with a PPT state; the family is PPT for p below it.
inline double werner_ppt_boundary() {
    const CouplingDecomposition dec(spin_half, spin_half);
    const Operator pa = dec.projector(Spin::from_twice(0)).matrix;
    const Operator ps = dec.projector(Spin::from_twice(2)).matrix;
    return ppt_boundary([&](double p) -> Operator { return p * pa + (1.0 - p) / 3.0 * ps; },
                        2, 2);
}

/// Pi_1 = (2j+1)/(2j+2) Pi_+ ("aligned"), Pi_2 = Pi_- + 1/(2j+2) Pi_+ ("anti-aligned")
/// on spin-1/2 (x) spin-j. At j = 1/2 this is {2/3 Pi_S, Pi_A + 1/3 Pi_S}.
inline RotInvariantPovm optimal_local_povm(Spin j1, Spin j2) {
    if (!(j1 == spin_half || j2 == spin_half) || j1.twice() < 1 || j2.twice() < 1) {
        throw DomainError("optimal_local_povm: needs a spin-1/2 paired with j >= 1/2");
    }
    const Spin big = j1 == spin_half ? j2 : j1;
    const double denom = big.twice() + 2.0; // 2j + 2
    RealMatrix w(2, 2);
    // columns: J = j - 1/2, J = j + 1/2
    w << 0.0, (big.twice() + 1.0) / denom, //
        1.0, 1.0 / denom;
    return {j1, j2, "local", {"aligned", "anti-aligned"}, std::move(w)};
}

inline RotInvariantPovm optimal_local_povm(Spin j) { return optimal_local_povm(spin_half, j); }

/// The one-way protocol: the spin-j system is measured against coherent states
/// along 2j+1 directions at theta_m = 2 pi m / (2j+1) in the x-z plane, then the
/// spin-1/2 system along +-n_m.
struct LoccProtocolConfig {
    Spin j;
    std::vector<double> angles;

    static LoccProtocolConfig for_spin(Spin j) {
        if (j.twice() < 1) {
            throw DomainError("locc protocol: needs j >= 1/2");
        }
        LoccProtocolConfig c{j, {}};
        const int count = j.dimension();
        for (int m = 0; m < count; ++m) {
            c.angles.push_back(2.0 * pi * m / count);
        }
        return c;
    }

    [[nodiscard]] Direction direction(std::size_t m) const {
        const double t = angles.at(m);
        return Direction::from_vector({std::sin(t), 0.0, std::cos(t)});
    }
};

struct ProtocolStatistics {
    double aligned = 0.0;
    double anti_aligned = 0.0;
    double predicted_aligned = 0.0; ///< Tr(Pi_1 rho_alpha)
    double predicted_anti_aligned = 0.0;

    [[nodiscard]] double deviation() const {
        return std::max(std::abs(aligned - predicted_aligned),
                        std::abs(anti_aligned - predicted_anti_aligned));
    }
};

/**
 * Dense realization of the protocol. The coherent states |j n_m> are not
 * orthogonal for j > 1/2; they are completed to a measurement by the
 * canonical tight frame F_m = S^{-1/2} |j n_m><j n_m| S^{-1/2},
 * S = sum_m |j n_m><j n_m|.
 */
class LoccProtocol {
  public:
    explicit LoccProtocol(LoccProtocolConfig config)
        : config_(std::move(config)), dec_(spin_half, config_.j),
          local_(optimal_local_povm(config_.j)) {
        if (config_.angles.size() != static_cast<std::size_t>(config_.j.dimension())) {
            throw DomainError("locc protocol: expected 2j+1 angles");
        }
        const int d = config_.j.dimension();
        std::vector<Amplitudes> frame;
        Operator s = Operator::Zero(d, d);
        for (std::size_t m = 0; m < config_.angles.size(); ++m) {
            frame.push_back(coherent_state(config_.j, config_.direction(m)).amplitudes());
            s += frame.back() * frame.back().adjoint();
        }
        Eigen::SelfAdjointEigenSolver<Operator> solver(s);
        if (solver.eigenvalues().minCoeff() < 1e-12) {
            throw ConsistencyError("locc protocol: coherent states do not span the spin-j space");
        }
        const Operator s_inv_sqrt = solver.eigenvectors() *
                                    solver.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() *
                                    solver.eigenvectors().adjoint();

        aligned_ = Operator::Zero(2 * d, 2 * d);
        anti_aligned_ = Operator::Zero(2 * d, 2 * d);
        for (std::size_t m = 0; m < frame.size(); ++m) {
            const Amplitudes f = s_inv_sqrt * frame[m];
            const Operator fm = f * f.adjoint();
            const Direction n = config_.direction(m);
            const Direction minus_n = Direction::from_vector(-n.unit_vector());
            const Amplitudes up = coherent_state(spin_half, n).amplitudes();
            const Amplitudes down = coherent_state(spin_half, minus_n).amplitudes();
            aligned_ += kron(Operator(up * up.adjoint()), fm);
            anti_aligned_ += kron(Operator(down * down.adjoint()), fm);
        }
    }

    [[nodiscard]] const LoccProtocolConfig &config() const { return config_; }
    [[nodiscard]] const Operator &aligned_element() const { return aligned_; }
    [[nodiscard]] const Operator &anti_aligned_element() const { return anti_aligned_; }

    /// Statistics on the orientation-averaged product pair at relative angle alpha.
    [[nodiscard]] ProtocolStatistics statistics(double alpha) const {
        if (!(alpha >= 0.0 && alpha <= pi)) {
            throw DomainError("locc protocol: alpha must lie in [0, pi]");
        }
        const DensityMatrix pair = product_coherent_pair(spin_half, config_.j, Direction::z_axis(),
                                                         Direction{alpha, 0.0});
        const InvariantState avg = invariant_average(pair);
        const Operator rho = avg.reconstruct().matrix();
        ProtocolStatistics out;
        out.aligned = (aligned_ * rho).trace().real();
        out.anti_aligned = (anti_aligned_ * rho).trace().real();
        out.predicted_aligned = local_.likelihood(0, avg.weights());
        out.predicted_anti_aligned = local_.likelihood(1, avg.weights());
        return out;
    }

    /// The invariant POVM with the same statistics: s_J = Tr(E Pi_J) / (2J+1).
    [[nodiscard]] RotInvariantPovm equivalent_invariant_povm() const {
        RealMatrix w(2, 2);
        for (std::size_t b = 0; b < 2; ++b) {
            const auto &block = dec_.blocks()[b];
            const Operator p = (block.isometry * block.isometry.transpose()).cast<Complex>();
            const auto col = static_cast<Eigen::Index>(b);
            w(0, col) = (aligned_ * p).trace().real() / block.total.dimension();
            w(1, col) = (anti_aligned_ * p).trace().real() / block.total.dimension();
        }
        return {spin_half, config_.j, "locc-protocol", {"aligned", "anti-aligned"}, std::move(w)};
    }

  private:
    LoccProtocolConfig config_;
    CouplingDecomposition dec_;
    RotInvariantPovm local_;
    Operator aligned_;
    Operator anti_aligned_;
};

inline ProtocolStatistics locc_protocol_statistics(const LoccProtocolConfig &config, double alpha) {
    return LoccProtocol(config).statistics(alpha);
}

} // namespace relq
