#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>

namespace relq {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Amplitudes = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr double pi = std::numbers::pi;

/// Largest entry modulus, the norm used throughout for matrix comparisons.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived> &m) {
    if (m.size() == 0) {
        return 0.0;
    }
    return m.cwiseAbs().maxCoeff();
}

/// Kronecker product with the first factor as the major index.
inline Operator kron(const Operator &a, const Operator &b) {
    Operator out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
        }
    }
    return out;
}

inline Amplitudes kron(const Amplitudes &a, const Amplitudes &b) {
    Amplitudes out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

/// Eigenvalues of a Hermitian matrix, ascending.
inline Eigen::VectorXd hermitian_eigenvalues(const Operator &m) {
    Eigen::SelfAdjointEigenSolver<Operator> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues();
}

} // namespace relq
