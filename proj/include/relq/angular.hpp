#pragma once

/**
 * @file
 * SU(2) representation machinery: spin labels, angular-momentum matrices,
 * rotation (Wigner) matrices and spin coherent states.
 *
 * Basis ordering is the magnetic ladder m = j, j-1, ..., -j; index k holds
 * the state with 2m = 2j - 2k.
 */

#include "relq/errors.hpp"
#include "relq/types.hpp"

#include <algorithm>
#include <cmath>
#include <compare>
#include <string>
#include <utility>
#include <vector>

namespace relq {

/// Spin quantum number j, stored exactly as the integer 2j.
class Spin {
  public:
    constexpr Spin() = default;

    static constexpr Spin from_twice(int twice_j) {
        if (twice_j < 0) {
            throw DomainError("spin: 2j must be non-negative, got " +
                              std::to_string(twice_j));
        }
        Spin s;
        s.twice_ = twice_j;
        return s;
    }

    static constexpr Spin integer(int j) { return from_twice(2 * j); }

    [[nodiscard]] constexpr int twice() const { return twice_; }
    [[nodiscard]] constexpr int dimension() const { return twice_ + 1; }
    [[nodiscard]] constexpr double value() const { return twice_ / 2.0; }
    [[nodiscard]] constexpr bool is_half_odd() const { return twice_ % 2 != 0; }

    /// "0", "1/2", "3", "7/2".
    [[nodiscard]] std::string to_string() const {
        if (twice_ % 2 == 0) {
            return std::to_string(twice_ / 2);
        }
        return std::to_string(twice_) + "/2";
    }

    constexpr auto operator<=>(const Spin &) const = default;

  private:
    int twice_ = 0;
};

inline constexpr Spin spin_half = Spin::from_twice(1);

/// Values of 2m, descending from 2j to -2j.
inline std::vector<int> magnetic_ladder(Spin j) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(j.dimension()));
    for (int tm = j.twice(); tm >= -j.twice(); tm -= 2) {
        out.push_back(tm);
    }
    return out;
}

inline bool in_ladder(Spin j, int twice_m) {
    return twice_m <= j.twice() && twice_m >= -j.twice() &&
           (j.twice() - twice_m) % 2 == 0;
}

/// Basis index of |j, m>; throws if m is not on the ladder of j.
inline int ladder_index(Spin j, int twice_m) {
    if (!in_ladder(j, twice_m)) {
        throw DomainError("2m = " + std::to_string(twice_m) +
                          " is not on the ladder of j = " + j.to_string());
    }
    return (j.twice() - twice_m) / 2;
}

/// Euler angles in the z-y-z convention: R = exp(-i a Jz) exp(-i b Jy) exp(-i g Jz).
struct Rotation {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;

    static constexpr Rotation identity() { return {}; }

    [[nodiscard]] constexpr Rotation inverse() const {
        return {-gamma, -beta, -alpha};
    }
};

namespace detail {

/// The spin-1/2 image of a rotation, m = +1/2 first.
inline Eigen::Matrix2cd su2_matrix(const Rotation &r) {
    const Complex i{0.0, 1.0};
    const double c = std::cos(r.beta / 2.0);
    const double s = std::sin(r.beta / 2.0);
    Eigen::Matrix2cd u;
    u(0, 0) = std::exp(-i * (r.alpha + r.gamma) / 2.0) * c;
    u(0, 1) = -std::exp(-i * (r.alpha - r.gamma) / 2.0) * s;
    u(1, 0) = std::exp(i * (r.alpha - r.gamma) / 2.0) * s;
    u(1, 1) = std::exp(i * (r.alpha + r.gamma) / 2.0) * c;
    return u;
}

/// Euler angles reproducing u exactly as an SU(2) element (not just up to sign).
inline Rotation euler_from_su2(const Eigen::Matrix2cd &u) {
    const double c = std::abs(u(1, 1));
    const double s = std::abs(u(1, 0));
    Rotation r;
    r.beta = 2.0 * std::atan2(s, c);
    constexpr double degenerate = 1e-14;
    if (s < degenerate) {
        r.alpha = 2.0 * std::arg(u(1, 1));
        r.gamma = 0.0;
    } else if (c < degenerate) {
        r.alpha = 2.0 * std::arg(u(1, 0));
        r.gamma = 0.0;
    } else {
        const double sum_half = std::arg(u(1, 1));
        const double diff_half = std::arg(u(1, 0));
        r.alpha = sum_half + diff_half;
        r.gamma = sum_half - diff_half;
    }
    return r;
}

} // namespace detail

/// The rotation a∘b, i.e. R(compose(a, b)) = R(a) R(b) in every representation.
inline Rotation compose(const Rotation &a, const Rotation &b) {
    return detail::euler_from_su2(detail::su2_matrix(a) * detail::su2_matrix(b));
}

/// Unit direction on the sphere.
struct Direction {
    double theta = 0.0; ///< polar angle in [0, pi]
    double phi = 0.0;   ///< azimuth in [0, 2 pi)

    static Direction z_axis() { return {}; }

    /// Direction of a non-zero vector.
    static Direction from_vector(const Eigen::Vector3d &v) {
        const double norm = v.norm();
        if (!(norm > 0.0)) {
            throw DomainError("direction: zero vector");
        }
        const double z = std::clamp(v.z() / norm, -1.0, 1.0);
        double phi = std::atan2(v.y(), v.x());
        if (phi < 0.0) {
            phi += 2.0 * pi;
        }
        if (phi >= 2.0 * pi) {
            phi = 0.0;
        }
        return {std::acos(z), phi};
    }

    [[nodiscard]] Eigen::Vector3d unit_vector() const {
        return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                std::cos(theta)};
    }
};

/// Angle between two directions, in [0, pi].
inline double angle_between(const Direction &a, const Direction &b) {
    return std::acos(std::clamp(a.unit_vector().dot(b.unit_vector()), -1.0, 1.0));
}

/// Apply a rotation to a direction (SO(3) action).
inline Direction rotate(const Rotation &r, const Direction &n) {
    const Eigen::Matrix3d m =
        (Eigen::AngleAxisd(r.alpha, Eigen::Vector3d::UnitZ()) *
         Eigen::AngleAxisd(r.beta, Eigen::Vector3d::UnitY()) *
         Eigen::AngleAxisd(r.gamma, Eigen::Vector3d::UnitZ()))
            .toRotationMatrix();
    return Direction::from_vector(m * n.unit_vector());
}

/// Normalized state of a single spin.
class StateVector {
  public:
    StateVector(Spin j, Amplitudes amplitudes)
        : spin_(j), amplitudes_(std::move(amplitudes)) {
        if (amplitudes_.size() != j.dimension()) {
            throw DomainError("state vector: size does not match 2j+1");
        }
        if (std::abs(amplitudes_.squaredNorm() - 1.0) > 1e-12) {
            throw DomainError("state vector: not normalized");
        }
    }

    [[nodiscard]] Spin spin() const { return spin_; }
    [[nodiscard]] const Amplitudes &amplitudes() const { return amplitudes_; }

  private:
    Spin spin_;
    Amplitudes amplitudes_;
};

struct AngularMomentum {
    Operator x;
    Operator y;
    Operator z;
};

inline AngularMomentum angular_momentum_operators(Spin j) {
    const int d = j.dimension();
    const double jv = j.value();
    Operator raise = Operator::Zero(d, d);
    AngularMomentum ops;
    ops.z = Operator::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double m = jv - k;
        ops.z(k, k) = m;
        if (k > 0) {
            // J+ |j,m> = sqrt(j(j+1) - m(m+1)) |j,m+1>
            raise(k - 1, k) = std::sqrt(jv * (jv + 1.0) - m * (m + 1.0));
        }
    }
    const Operator lower = raise.adjoint();
    ops.x = (raise + lower) / 2.0;
    ops.y = (raise - lower) / Complex(0.0, 2.0);
    return ops;
}

/// Wigner small-d matrix d^j(beta) = exp(-i beta Jy), from the eigenbasis of Jy.
inline RealMatrix wigner_small_d(Spin j, double beta) {
    const Operator jy = angular_momentum_operators(j).y;
    Eigen::SelfAdjointEigenSolver<Operator> solver(jy);
    const Eigen::VectorXd &mu = solver.eigenvalues();
    const Operator &v = solver.eigenvectors();
    Amplitudes phases(mu.size());
    for (Eigen::Index k = 0; k < mu.size(); ++k) {
        phases(k) = std::exp(Complex(0.0, -beta * mu(k)));
    }
    const Operator d = v * phases.asDiagonal() * v.adjoint();
    return d.real();
}

/// exp(-i alpha Jz) exp(-i beta Jy) exp(-i gamma Jz) on the spin-j space.
inline Operator rotation_matrix(Spin j, const Rotation &r) {
    const RealMatrix d = wigner_small_d(j, r.beta);
    const int dim = j.dimension();
    Operator out(dim, dim);
    for (int k = 0; k < dim; ++k) {
        const double mk = j.value() - k;
        for (int l = 0; l < dim; ++l) {
            const double ml = j.value() - l;
            out(k, l) = std::exp(Complex(0.0, -(r.alpha * mk + r.gamma * ml))) *
                        d(k, l);
        }
    }
    return out;
}

/// |j n>: the eigenstate of J.n with eigenvalue j, obtained as R(phi, theta, 0)|j, j>.
inline StateVector coherent_state(Spin j, const Direction &n) {
    const RealMatrix d = wigner_small_d(j, n.theta);
    Amplitudes amp(j.dimension());
    for (int k = 0; k < j.dimension(); ++k) {
        const double mk = j.value() - k;
        amp(k) = std::exp(Complex(0.0, -n.phi * mk)) * d(k, 0);
    }
    amp.normalize();
    return {j, std::move(amp)};
}

} // namespace relq
