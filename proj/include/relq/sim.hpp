#pragma once

/**
 * @file
 * Monte Carlo oracles: Haar-random collective rotations, outcome sampling and
 * repeated single-shot experiments.
 *
 * Every trial draws from its own stream derived from (seed, trial index), so
 * results do not depend on execution order or thread count.
 */

#include "relq/estimation.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <random>
#include <string>
#include <thread>
#include <vector>

namespace relq {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Deterministic 64-bit stream: mt19937_64 seeded through splitmix64.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(detail::splitmix64(seed)) {}

    static RandomStream for_trial(std::uint64_t seed, std::uint64_t index) {
        return RandomStream(detail::splitmix64(seed) ^ detail::splitmix64(~index));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 engine_;
};

/// Haar-distributed SU(2) element: alpha uniform on [0, 2 pi), cos(beta)
/// uniform on [-1, 1], gamma uniform on [0, 4 pi). The 4 pi range for gamma
/// covers both preimages of each SO(3) rotation.
inline Rotation haar_rotation(RandomStream &stream) {
    Rotation r;
    r.alpha = 2.0 * pi * stream.uniform();
    r.beta = std::acos(1.0 - 2.0 * stream.uniform());
    r.gamma = 4.0 * pi * stream.uniform();
    return r;
}

/// Categorical sampler over a fixed probability vector.
class OutcomeSampler {
  public:
    explicit OutcomeSampler(std::vector<double> probabilities)
        : cumulative_(std::move(probabilities)) {
        if (cumulative_.empty()) {
            throw ConsistencyError("outcome sampler: no outcomes");
        }
        double sum = 0.0;
        for (double &p : cumulative_) {
            if (p < -1e-12) {
                throw ConsistencyError("outcome sampler: negative probability");
            }
            sum += std::max(p, 0.0);
            p = sum;
        }
        if (std::abs(sum - 1.0) > 1e-9) {
            throw ConsistencyError("outcome sampler: probabilities sum to " + std::to_string(sum));
        }
    }

    [[nodiscard]] std::size_t sample(RandomStream &stream) const {
        const double u = stream.uniform() * cumulative_.back();
        for (std::size_t k = 0; k < cumulative_.size(); ++k) {
            if (u < cumulative_[k]) {
                return k;
            }
        }
        // u landed on the top edge through rounding; return the last
        // outcome that carries probability
        std::size_t k = cumulative_.size() - 1;
        while (k > 0 && cumulative_[k] == cumulative_[k - 1]) {
            --k;
        }
        return k;
    }

  private:
    std::vector<double> cumulative_;
};

inline std::size_t sample_outcome(const InvariantState &state, const RotInvariantPovm &povm,
                                  RandomStream &stream) {
    if (state.j1() != povm.j1() || state.j2() != povm.j2()) {
        throw DomainError("sample_outcome: state and POVM live on different spin pairs");
    }
    return OutcomeSampler(povm.outcome_probabilities(state.weights())).sample(stream);
}

/// Tr(E_k rho) only sees the total-J weights of rho.
inline std::size_t sample_outcome(const DensityMatrix &rho, const RotInvariantPovm &povm,
                                  RandomStream &stream) {
    if (rho.j1() != povm.j1() || rho.j2() != povm.j2()) {
        throw DomainError("sample_outcome: state and POVM live on different spin pairs");
    }
    const CouplingDecomposition dec(rho.j1(), rho.j2());
    return OutcomeSampler(povm.outcome_probabilities(dec.block_weights(rho.matrix())))
        .sample(stream);
}

/// Draws alpha from a prior by inverse CDF. Densities without an exact
/// inverse are tabulated on a uniform grid and inverted piecewise-linearly.
class AngleSampler {
  public:
    explicit AngleSampler(const AngleDistribution &dist) {
        if (dist.is_discrete()) {
            double sum = 0.0;
            for (const auto &p : dist.points()) {
                sum += p.weight;
                alphas_.push_back(p.alpha);
                cumulative_.push_back(sum);
            }
            return;
        }
        const auto &d = dist.density();
        if (d.inverse_cdf) {
            inverse_cdf_ = d.inverse_cdf;
            return;
        }
        constexpr int cells = 4096;
        const QuadratureRule cell_rule = gauss_legendre(8, 0.0, 1.0);
        double sum = 0.0;
        alphas_.push_back(0.0);
        cumulative_.push_back(0.0);
        for (int c = 0; c < cells; ++c) {
            const double a = pi * c / cells;
            const double width = pi / cells;
            sum += width * cell_rule.integrate([&](double t) { return d.eval(a + width * t); });
            alphas_.push_back(pi * (c + 1) / cells);
            cumulative_.push_back(sum);
        }
        continuous_table_ = true;
    }

    [[nodiscard]] double sample(RandomStream &stream) const {
        const double u = stream.uniform();
        if (inverse_cdf_) {
            return std::clamp(inverse_cdf_(u), 0.0, pi);
        }
        const double target = u * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
        auto k = static_cast<std::size_t>(it - cumulative_.begin());
        if (k >= cumulative_.size()) {
            k = cumulative_.size() - 1;
        }
        if (!continuous_table_) {
            return alphas_[k];
        }
        const double lo = cumulative_[k - 1];
        const double hi = cumulative_[k];
        const double t = hi > lo ? (target - lo) / (hi - lo) : 0.0;
        return alphas_[k - 1] + t * (alphas_[k] - alphas_[k - 1]);
    }

  private:
    std::function<double(double)> inverse_cdf_;
    std::vector<double> alphas_;
    std::vector<double> cumulative_;
    bool continuous_table_ = false;
};

struct ExperimentSummary {
    std::size_t n_trials = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> labels;
    std::vector<std::size_t> counts;
    std::vector<double> frequencies;
    std::vector<double> frequency_standard_errors;
    double mean_information_bits = 0.0;
    double information_standard_error = 0.0;
    std::vector<double> analytic_probabilities;
    double analytic_information_bits = 0.0;
};

/**
 * Single-shot trials: draw alpha from the prior and a Haar collective
 * rotation, prepare the rotated coherent pair, sample an outcome of the POVM
 * and record that outcome's information gain.
 */
inline ExperimentSummary run_experiment(Spin j1, Spin j2, const PriorOverAngle &prior,
                                        const RotInvariantPovm &povm, std::size_t n_trials,
                                        std::uint64_t seed, unsigned threads = 1) {
    if (n_trials < 1) {
        throw DomainError("run_experiment: need at least one trial");
    }
    const EstimationReport report = average_information_gain(j1, j2, prior, povm);
    const CouplingDecomposition dec(j1, j2);
    const AngleSampler angles(prior);

    std::vector<std::size_t> outcome_of(n_trials);
    auto trial = [&](std::size_t i) {
        RandomStream stream = RandomStream::for_trial(seed, i);
        const double alpha = angles.sample(stream);
        const Rotation omega = haar_rotation(stream);
        const Amplitudes psi = kron(rotation_matrix(j1, omega).col(0).eval(),
                                    (rotation_matrix(j2, omega) *
                                     coherent_state(j2, Direction{alpha, 0.0}).amplitudes())
                                        .eval());
        const OutcomeSampler sampler(povm.outcome_probabilities(dec.block_weights(psi)));
        outcome_of[i] = sampler.sample(stream);
    };
    if (threads <= 1) {
        for (std::size_t i = 0; i < n_trials; ++i) {
            trial(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::exception_ptr> errors(threads);
        {
            std::vector<std::jthread> pool;
            for (unsigned t = 0; t < threads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (std::size_t i = next++; i < n_trials; i = next++) {
                            trial(i);
                        }
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
        }
        for (const auto &e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    ExperimentSummary s;
    s.n_trials = n_trials;
    s.seed = seed;
    s.labels = povm.labels();
    s.counts.assign(povm.size(), 0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t k : outcome_of) {
        ++s.counts[k];
        const double gain = report.outcomes[k].information_bits;
        sum += gain;
        sum_sq += gain * gain;
    }
    const auto n = static_cast<double>(n_trials);
    s.mean_information_bits = sum / n;
    if (n_trials > 1) {
        const double var = std::max(0.0, (sum_sq - n * s.mean_information_bits * s.mean_information_bits) / (n - 1.0));
        s.information_standard_error = std::sqrt(var / n);
    }
    for (std::size_t k = 0; k < povm.size(); ++k) {
        const double f = static_cast<double>(s.counts[k]) / n;
        s.frequencies.push_back(f);
        s.frequency_standard_errors.push_back(std::sqrt(f * (1.0 - f) / n));
        s.analytic_probabilities.push_back(report.outcomes[k].probability);
    }
    s.analytic_information_bits = report.average_information_bits;
    return s;
}

} // namespace relq
