#pragma once

// Gauss-Legendre rules and node-doubling integration on a finite interval.

#include "relq/errors.hpp"
#include "relq/types.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace relq {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return nodes.size(); }

    template <typename F> [[nodiscard]] double integrate(F &&f) const {
        double sum = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            sum += weights[i] * f(nodes[i]);
        }
        return sum;
    }
};

namespace detail {

// Newton iteration on P_n from the Tricomi initial guess.
inline QuadratureRule gauss_legendre_unit(int n) {
    QuadratureRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double step = p0 / dp;
            z -= step;
            if (std::abs(step) < 1e-16) {
                break;
            }
        }
        // weights from the converged node
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= n; ++k) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = -z;
        rule.nodes[static_cast<std::size_t>(n - 1 - i)] = z;
        rule.weights[static_cast<std::size_t>(i)] = w;
        rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    return rule;
}

// Read-through cache of reference rules; callers only ever see copies.
inline const QuadratureRule &cached_unit_rule(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<const QuadratureRule>> cache;
    std::lock_guard lock(mutex);
    auto &slot = cache[n];
    if (!slot) {
        slot = std::make_unique<const QuadratureRule>(gauss_legendre_unit(n));
    }
    return *slot;
}

} // namespace detail

/// n-point Gauss-Legendre rule on [a, b], nodes ascending.
inline QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 1) {
        throw DomainError("gauss_legendre: need at least one node");
    }
    const QuadratureRule &unit = detail::cached_unit_rule(n);
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    QuadratureRule rule;
    rule.nodes.reserve(unit.size());
    rule.weights.reserve(unit.size());
    for (std::size_t i = 0; i < unit.size(); ++i) {
        rule.nodes.push_back(mid + half * unit.nodes[i]);
        rule.weights.push_back(half * unit.weights[i]);
    }
    return rule;
}

inline constexpr int quadrature_initial_nodes = 16;
inline constexpr int quadrature_max_nodes = 8192;

struct DoublingResult {
    double value = 0.0;
    QuadratureRule rule; ///< the finest rule used
};

/// Integrate with 16, 32, 64, ... Gauss-Legendre nodes until two successive
/// estimates differ by less than tol.
template <typename F>
DoublingResult integrate_doubling(F &&f, double a, double b, double tol,
                                  int initial_nodes = quadrature_initial_nodes) {
    double previous = gauss_legendre(initial_nodes, a, b).integrate(f);
    for (int n = 2 * initial_nodes; n <= quadrature_max_nodes; n *= 2) {
        QuadratureRule finer = gauss_legendre(n, a, b);
        const double current = finer.integrate(f);
        if (std::abs(current - previous) < tol) {
            return {current, std::move(finer)};
        }
        previous = current;
    }
    throw ConsistencyError("quadrature did not converge within " +
                           std::to_string(quadrature_max_nodes) + " nodes");
}

} // namespace relq
