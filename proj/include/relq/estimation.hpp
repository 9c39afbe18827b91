#pragma once

/**
 * @file
 * Bayesian estimation of the relative angle alpha between two spins prepared
 * in coherent states, measured with a rotationally invariant POVM.
 *
 * Outcome statistics depend only on the total-J weights p(J | alpha) of the
 * orientation-averaged pair, so every estimator here is driven by a
 * BlockLikelihood: alpha -> (p(J | alpha))_J in block order.
 *
 * Continuous priors are integrated with Gauss-Legendre rules on [0, pi],
 * doubling the node count (16, 32, ...) until successive values agree.
 * Information is measured in bits.
 */

#include "relq/locc.hpp"
#include "relq/povm.hpp"
#include "relq/quadrature.hpp"
#include "relq/states.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

namespace relq {

using BlockLikelihood = std::function<std::vector<double>(double alpha)>;

/// Outcomes whose probability falls below this are treated as impossible.
inline constexpr double impossible_outcome_threshold = 1e-14;
/// Convergence tolerance on normalizations (evidence integrals).
inline constexpr double evidence_tolerance = 1e-13;
/// Convergence tolerance on information gains, in bits.
inline constexpr double information_tolerance = 1e-10;

inline void check_angle(double alpha) {
    if (!(alpha >= 0.0 && alpha <= pi)) {
        throw DomainError("relative angle must lie in [0, pi], got " + std::to_string(alpha));
    }
}

/**
 * p(J | alpha) for |j1, +z> (x) |j2, n(alpha)>.
 *
 * When one spin is 1/2 the closed form p(j - 1/2 | alpha) =
 * 2j / (2j + 1) sin^2(alpha / 2) is used and any j is allowed; otherwise the
 * weights come from the dense block isometries.
 */
class CoherentPairModel {
  public:
    CoherentPairModel(Spin j1, Spin j2) : j1_(j1), j2_(j2) {
        const bool trivial = j1.twice() == 0 || j2.twice() == 0;
        const bool half = j1 == spin_half || j2 == spin_half;
        if (!trivial && !half) {
            dense_ = std::make_shared<const CouplingDecomposition>(j1, j2);
        }
    }

    [[nodiscard]] Spin j1() const { return j1_; }
    [[nodiscard]] Spin j2() const { return j2_; }
    [[nodiscard]] bool closed_form() const { return dense_ == nullptr; }

    [[nodiscard]] std::vector<double> operator()(double alpha) const {
        check_angle(alpha);
        if (j1_.twice() == 0 || j2_.twice() == 0) {
            return {1.0};
        }
        if (!dense_) {
            const Spin big = j1_ == spin_half ? j2_ : j1_;
            const double s = std::sin(alpha / 2.0);
            const double lower = big.twice() / (big.twice() + 1.0) * s * s;
            return {lower, 1.0 - lower};
        }
        const Amplitudes psi =
            product_coherent_vector(j1_, j2_, Direction::z_axis(), Direction{alpha, 0.0});
        return dense_->block_weights(psi);
    }

  private:
    Spin j1_;
    Spin j2_;
    std::shared_ptr<const CouplingDecomposition> dense_;
};

/// Dense p(J | alpha) = Tr(Pi_J rho_alpha) for any pair within the dense cap,
/// never using the spin-1/2 closed form.
inline std::vector<double> dense_outcome_probabilities(Spin j1, Spin j2, double alpha) {
    check_angle(alpha);
    const CouplingDecomposition dec(j1, j2);
    return dec.block_weights(
        product_coherent_vector(j1, j2, Direction::z_axis(), Direction{alpha, 0.0}));
}

inline double outcome_probability(Spin j1, Spin j2, Spin total, double alpha) {
    if (!in_triangle(j1, j2, total)) {
        throw DomainError("outcome_probability: J = " + total.to_string() +
                          " is outside the coupling range");
    }
    const auto totals = total_j_values(j1, j2);
    const auto k = static_cast<std::size_t>(
        std::find(totals.begin(), totals.end(), total) - totals.begin());
    return CoherentPairModel(j1, j2)(alpha)[k];
}

struct AnglePoint {
    double alpha = 0.0;
    double weight = 0.0;
};

/// Distribution over the relative angle: finitely many atoms, or a density
/// on [0, pi] together with the quadrature grid it is normalized on.
class AngleDistribution {
  public:
    struct Discrete {
        std::vector<AnglePoint> points;
    };
    struct Density {
        std::function<double(double)> eval;
        QuadratureRule grid;
        std::function<double(double)> inverse_cdf; ///< optional exact sampler
    };

    static AngleDistribution discrete(std::vector<AnglePoint> points) {
        if (points.empty()) {
            throw DomainError("angle distribution: no support points");
        }
        double sum = 0.0;
        for (const auto &p : points) {
            check_angle(p.alpha);
            if (!(p.weight >= 0.0)) {
                throw DomainError("angle distribution: negative weight");
            }
            sum += p.weight;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw DomainError("angle distribution: weights sum to " + std::to_string(sum));
        }
        return AngleDistribution(Discrete{std::move(points)});
    }

    static AngleDistribution density(std::function<double(double)> eval, QuadratureRule grid,
                                     std::function<double(double)> inverse_cdf = {}) {
        const double total = grid.integrate(eval);
        if (std::abs(total - 1.0) > 1e-10) {
            throw DomainError("angle distribution: density integrates to " +
                              std::to_string(total));
        }
        return AngleDistribution(Density{std::move(eval), std::move(grid), std::move(inverse_cdf)});
    }

    [[nodiscard]] bool is_discrete() const { return std::holds_alternative<Discrete>(rep_); }

    [[nodiscard]] const std::vector<AnglePoint> &points() const {
        if (!is_discrete()) {
            throw DomainError("angle distribution: not discrete");
        }
        return std::get<Discrete>(rep_).points;
    }

    [[nodiscard]] const Density &density() const {
        if (is_discrete()) {
            throw DomainError("angle distribution: not a density");
        }
        return std::get<Density>(rep_);
    }

    [[nodiscard]] double density_at(double alpha) const { return density().eval(alpha); }

  private:
    explicit AngleDistribution(std::variant<Discrete, Density> rep) : rep_(std::move(rep)) {}

    std::variant<Discrete, Density> rep_;
};

using PriorOverAngle = AngleDistribution;

struct PosteriorOverAngle {
    std::string outcome;
    double evidence = 0.0; ///< p(outcome)
    AngleDistribution distribution;
};

/// alpha = 0 or pi with equal probability.
inline PriorOverAngle parallel_antiparallel_prior() {
    return AngleDistribution::discrete({{0.0, 0.5}, {pi, 0.5}});
}

/// Both spin directions uniform on the sphere: p(alpha) = sin(alpha) / 2.
inline PriorOverAngle uniform_direction_prior() {
    auto eval = [](double a) { return 0.5 * std::sin(a); };
    auto fit = integrate_doubling(eval, 0.0, pi, evidence_tolerance);
    return AngleDistribution::density(eval, std::move(fit.rule),
                                      [](double u) { return std::acos(1.0 - 2.0 * u); });
}

namespace detail {

inline double outcome_likelihood(const BlockLikelihood &model, const RotInvariantPovm &povm,
                                 std::size_t outcome, double alpha) {
    return povm.likelihood(outcome, model(alpha));
}

inline void check_outcome(const RotInvariantPovm &povm, std::size_t outcome) {
    if (outcome >= povm.size()) {
        throw DomainError("outcome index " + std::to_string(outcome) + " out of range");
    }
}

} // namespace detail

/// p(outcome) = integral of p(alpha) L(alpha) over the prior.
inline double outcome_evidence(const PriorOverAngle &prior, const BlockLikelihood &model,
                               const RotInvariantPovm &povm, std::size_t outcome) {
    detail::check_outcome(povm, outcome);
    if (prior.is_discrete()) {
        double z = 0.0;
        for (const auto &p : prior.points()) {
            z += p.weight * detail::outcome_likelihood(model, povm, outcome, p.alpha);
        }
        return z;
    }
    const auto &d = prior.density();
    return integrate_doubling(
               [&](double a) {
                   return d.eval(a) * detail::outcome_likelihood(model, povm, outcome, a);
               },
               0.0, pi, evidence_tolerance)
        .value;
}

/// p(alpha | outcome) = L(alpha) p(alpha) / p(outcome).
inline PosteriorOverAngle bayes_update(const PriorOverAngle &prior, const BlockLikelihood &model,
                                       const RotInvariantPovm &povm, std::size_t outcome) {
    detail::check_outcome(povm, outcome);
    const std::string &label = povm.labels()[outcome];
    if (prior.is_discrete()) {
        std::vector<AnglePoint> post = prior.points();
        double z = 0.0;
        for (auto &p : post) {
            p.weight *= detail::outcome_likelihood(model, povm, outcome, p.alpha);
            z += p.weight;
        }
        if (z < impossible_outcome_threshold) {
            throw ImpossibleOutcomeError("outcome " + label + " has zero probability under the prior");
        }
        for (auto &p : post) {
            p.weight /= z;
        }
        return {label, z, AngleDistribution::discrete(std::move(post))};
    }

    const auto &d = prior.density();
    auto prior_eval = d.eval;
    auto joint = [=, &povm](double a) {
        return prior_eval(a) * detail::outcome_likelihood(model, povm, outcome, a);
    };
    auto fit = integrate_doubling(joint, 0.0, pi, evidence_tolerance);
    if (fit.value < impossible_outcome_threshold) {
        throw ImpossibleOutcomeError("outcome " + label + " has zero probability under the prior");
    }
    const double z = fit.value;
    const RealMatrix row = povm.weights().row(static_cast<Eigen::Index>(outcome));
    auto posterior = [prior_eval, model, row, z](double a) {
        const std::vector<double> pj = model(a);
        double l = 0.0;
        for (std::size_t b = 0; b < pj.size(); ++b) {
            l += row(0, static_cast<Eigen::Index>(b)) * pj[b];
        }
        return prior_eval(a) * l / z;
    };
    // Normalized on the very grid that produced z.
    return {label, z, AngleDistribution::density(posterior, std::move(fit.rule))};
}

inline PosteriorOverAngle bayes_update(const PriorOverAngle &prior, const RotInvariantPovm &povm,
                                       std::size_t outcome) {
    const CoherentPairModel model(povm.j1(), povm.j2());
    return bayes_update(prior, BlockLikelihood(model), povm, outcome);
}

/// Kullback-Leibler divergence D(posterior || prior) in bits, with 0 log 0 = 0.
inline double information_gain(const AngleDistribution &prior, const AngleDistribution &posterior) {
    if (prior.is_discrete() != posterior.is_discrete()) {
        throw DomainError("information_gain: prior and posterior representations differ");
    }
    if (prior.is_discrete()) {
        double sum = 0.0;
        for (const auto &q : posterior.points()) {
            if (q.weight == 0.0) {
                continue;
            }
            double p = 0.0;
            for (const auto &candidate : prior.points()) {
                if (candidate.alpha == q.alpha) {
                    p += candidate.weight;
                }
            }
            if (p == 0.0) {
                throw DivergenceError("information_gain: posterior mass at alpha = " +
                                      std::to_string(q.alpha) + " where the prior has none");
            }
            sum += q.weight * std::log2(q.weight / p);
        }
        return sum;
    }
    const auto &p = prior.density().eval;
    const auto &q = posterior.density().eval;
    auto integrand = [&](double a) {
        const double qa = q(a);
        if (qa <= 0.0) {
            return 0.0;
        }
        const double pa = p(a);
        if (pa <= 0.0) {
            throw DivergenceError("information_gain: posterior density positive where the prior "
                                  "vanishes, alpha = " +
                                  std::to_string(a));
        }
        return qa * std::log2(qa / pa);
    };
    return integrate_doubling(integrand, 0.0, pi, information_tolerance).value;
}

inline double information_gain(const PriorOverAngle &prior, const PosteriorOverAngle &posterior) {
    return information_gain(prior, posterior.distribution);
}

struct OutcomeReport {
    std::string label;
    double probability = 0.0;
    std::optional<PosteriorOverAngle> posterior; ///< empty for impossible outcomes
    double information_bits = 0.0;
};

struct EstimationReport {
    RotInvariantPovm povm;
    std::vector<OutcomeReport> outcomes;
    double average_information_bits = 0.0;
};

inline EstimationReport average_information_gain(const PriorOverAngle &prior,
                                                 const BlockLikelihood &model,
                                                 const RotInvariantPovm &povm) {
    EstimationReport report{povm, {}, 0.0};
    double total_probability = 0.0;
    for (std::size_t k = 0; k < povm.size(); ++k) {
        OutcomeReport o;
        o.label = povm.labels()[k];
        o.probability = outcome_evidence(prior, model, povm, k);
        total_probability += o.probability;
        if (o.probability >= impossible_outcome_threshold) {
            o.posterior = bayes_update(prior, model, povm, k);
            o.probability = o.posterior->evidence;
            o.information_bits = information_gain(prior, *o.posterior);
        }
        report.average_information_bits += o.probability * o.information_bits;
        report.outcomes.push_back(std::move(o));
    }
    if (std::abs(total_probability - 1.0) > 1e-10) {
        throw ConsistencyError("outcome probabilities sum to " + std::to_string(total_probability));
    }
    return report;
}

inline EstimationReport average_information_gain(Spin j1, Spin j2, const PriorOverAngle &prior,
                                                 const RotInvariantPovm &povm) {
    if (povm.j1() != j1 || povm.j2() != j2) {
        throw DomainError("average_information_gain: POVM is defined on a different spin pair");
    }
    return average_information_gain(prior, BlockLikelihood(CoherentPairModel(j1, j2)), povm);
}

inline constexpr double map_tolerance = 1e-9;

/// Most probable angle. Discrete: the heaviest point, ties to the smaller
/// angle. Density: golden-section search around the best grid node.
inline double map_estimate(const AngleDistribution &posterior) {
    if (posterior.is_discrete()) {
        std::vector<AnglePoint> pts = posterior.points();
        std::sort(pts.begin(), pts.end(),
                  [](const AnglePoint &a, const AnglePoint &b) { return a.alpha < b.alpha; });
        AnglePoint best = pts.front();
        for (const auto &p : pts) {
            if (p.weight > best.weight) {
                best = p;
            }
        }
        return best.alpha;
    }
    const auto &d = posterior.density();
    std::vector<double> candidates{0.0};
    candidates.insert(candidates.end(), d.grid.nodes.begin(), d.grid.nodes.end());
    candidates.push_back(pi);
    std::size_t best = 0;
    double best_value = d.eval(candidates[0]);
    for (std::size_t i = 1; i < candidates.size(); ++i) {
        const double v = d.eval(candidates[i]);
        if (v > best_value) {
            best = i;
            best_value = v;
        }
    }
    double lo = candidates[best == 0 ? 0 : best - 1];
    double hi = candidates[std::min(best + 1, candidates.size() - 1)];
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = d.eval(x1);
    double f2 = d.eval(x2);
    while (hi - lo > map_tolerance) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = d.eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = d.eval(x1);
        }
    }
    return 0.5 * (lo + hi);
}

inline double map_estimate(const PosteriorOverAngle &posterior) {
    return map_estimate(posterior.distribution);
}

enum class PriorKind { parallel_antiparallel, uniform_directions };
enum class PovmKind { optimal, optimal_local };

struct CurveScenario {
    PriorKind prior = PriorKind::parallel_antiparallel;
    PovmKind povm = PovmKind::optimal;
};

/// The four information-gain curves for spin-1/2 (x) spin-j:
/// a = (parallel/antiparallel, optimal), b = (parallel/antiparallel, local),
/// c = (uniform directions, optimal), d = (uniform directions, local).
inline CurveScenario curve_scenario(char letter) {
    switch (letter) {
    case 'a':
        return {PriorKind::parallel_antiparallel, PovmKind::optimal};
    case 'b':
        return {PriorKind::parallel_antiparallel, PovmKind::optimal_local};
    case 'c':
        return {PriorKind::uniform_directions, PovmKind::optimal};
    case 'd':
        return {PriorKind::uniform_directions, PovmKind::optimal_local};
    default:
        throw DomainError(std::string("unknown curve '") + letter + "'");
    }
}

inline PriorOverAngle make_prior(PriorKind kind) {
    return kind == PriorKind::parallel_antiparallel ? parallel_antiparallel_prior()
                                                    : uniform_direction_prior();
}

inline RotInvariantPovm make_povm(PovmKind kind, Spin j1, Spin j2) {
    return kind == PovmKind::optimal ? optimal_povm(j1, j2) : optimal_local_povm(j1, j2);
}

struct CurvePoint {
    Spin j;
    double average_information_bits = 0.0;
};

/// Average information gain for spin-1/2 (x) spin-j at each j, from the
/// closed-form probabilities. Points are independent; with threads > 1 they
/// are computed concurrently with identical results.
inline std::vector<CurvePoint> infogain_curve(const std::vector<Spin> &js, CurveScenario scenario,
                                              unsigned threads = 1) {
    const PriorOverAngle prior = make_prior(scenario.prior);
    std::vector<CurvePoint> out(js.size());
    auto compute = [&](std::size_t i) {
        const Spin j = js[i];
        const auto report = average_information_gain(spin_half, j, prior,
                                                     make_povm(scenario.povm, spin_half, j));
        out[i] = {j, report.average_information_bits};
    };
    if (threads <= 1 || js.size() < 2) {
        for (std::size_t i = 0; i < js.size(); ++i) {
            compute(i);
        }
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t i = next++; i < js.size(); i = next++) {
                        compute(i);
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
    return out;
}

/**
 * Distance between p(J | alpha) and the Born-rule statistics of measuring
 * spin j1 along the classical axis set by spin j2, pairing J with
 * m1 = J - j2. Requires j2 >= j1. Closed form for j1 = 1/2, where
 * |p(+ | alpha) - cos^2(alpha / 2)| = sin^2(alpha / 2) / (2 j2 + 1); dense path otherwise.
 */
inline double born_limit_check(Spin j1, double alpha, Spin j2) {
    check_angle(alpha);
    if (j2 < j1) {
        throw DomainError("born_limit_check: needs j2 >= j1");
    }
    if (j1.twice() == 0) {
        return 0.0;
    }
    if (j1 == spin_half) {
        // 1 - 2j/(2j+1) sin^2 - cos^2, simplified to avoid cancellation
        const double s = std::sin(alpha / 2.0);
        return s * s / (j2.twice() + 1.0);
    }
    const std::vector<double> pj = dense_outcome_probabilities(j1, j2, alpha);
    const RealMatrix d = wigner_small_d(j1, alpha);
    const auto totals = total_j_values(j1, j2);
    double worst = 0.0;
    for (std::size_t k = 0; k < totals.size(); ++k) {
        const int twice_m1 = totals[k].twice() - j2.twice();
        const double born = std::pow(d(ladder_index(j1, twice_m1), 0), 2);
        worst = std::max(worst, std::abs(pj[k] - born));
    }
    return worst;
}

} // namespace relq
