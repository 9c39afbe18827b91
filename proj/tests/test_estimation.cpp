#include "oracles.hpp"
#include "relq/locc.hpp"
#include "relq/estimation.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <random>

using namespace relq;
using Catch::Matchers::WithinAbs;

namespace {

const double log2_3 = std::log2(3.0);
const double ln2 = std::log(2.0);

// Two qubits, uniform prior, in u = sin^2(alpha/2) where the prior is uniform on [0, 1].
const double uniform_info_a = 1.0 - 1.0 / (2.0 * ln2);
const double uniform_info_s =
    (2.0 / 3.0) * (2.0 * std::log(4.0 / 3.0) - 0.5 * std::log(2.0 / 3.0) - 0.75) / ln2;

std::vector<double> alpha_grid(int points = 181) {
    std::vector<double> out;
    for (int k = 0; k < points; ++k) {
        out.push_back(k == points - 1 ? pi : pi * k / (points - 1));
    }
    return out;
}

RotInvariantPovm random_coarse_graining(Spin j1, Spin j2, std::mt19937_64 &rng) {
    const auto blocks = static_cast<Eigen::Index>(total_j_values(j1, j2).size());
    const Eigen::Index outcomes = 2 + static_cast<Eigen::Index>(rng() % 3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealMatrix w(outcomes, blocks);
    for (Eigen::Index b = 0; b < blocks; ++b) {
        double sum = 0.0;
        for (Eigen::Index k = 0; k < outcomes; ++k) {
            w(k, b) = u(rng);
            sum += w(k, b);
        }
        w.col(b) /= sum;
    }
    std::vector<std::string> labels;
    for (Eigen::Index k = 0; k < outcomes; ++k) {
        labels.push_back("e" + std::to_string(k));
    }
    return {j1, j2, "random", labels, w};
}

} // namespace

TEST_CASE("Gauss-Legendre rules") {
    for (int n : {1, 2, 5, 16, 64}) {
        const QuadratureRule rule = gauss_legendre(n, -1.0, 2.0);
        double wsum = 0.0;
        for (double w : rule.weights) {
            wsum += w;
        }
        CHECK_THAT(wsum, WithinAbs(3.0, 1e-13));
        // exact for degree 2n - 1
        const int deg = 2 * n - 1;
        const double exact = (std::pow(2.0, deg + 1) - std::pow(-1.0, deg + 1)) / (deg + 1);
        CHECK_THAT(rule.integrate([&](double x) { return std::pow(x, deg); }),
                   WithinAbs(exact, 1e-11 * std::max(1.0, std::abs(exact))));
    }
    CHECK_THROWS_AS(gauss_legendre(0, 0.0, 1.0), DomainError);
    const auto r = integrate_doubling([](double x) { return std::sin(x); }, 0.0, pi, 1e-13);
    CHECK_THAT(r.value, WithinAbs(2.0, 1e-13));
    CHECK_THROWS_AS(integrate_doubling([](double x) { return x < 1.0 / std::sqrt(2.0) ? 0.0 : 1.0; },
                                       0.0, 1.0, 1e-15),
                    ConsistencyError);
}

TEST_CASE("rotationally invariant POVMs") {
    const auto qubits = optimal_povm(spin_half, spin_half);
    CHECK(qubits.labels() == std::vector<std::string>{"A", "S"});
    CHECK(qubits.name() == "optimal");
    CHECK(optimal_povm(spin_half, Spin::integer(2)).labels() ==
          std::vector<std::string>{"-", "+"});
    CHECK(optimal_povm(Spin::integer(1), Spin::integer(1)).labels() ==
          std::vector<std::string>{"J=0", "J=1", "J=2"});

    const Spin j1 = Spin::integer(1), j2 = Spin::from_twice(3);
    const auto povm = optimal_povm(j1, j2);
    Operator sum = Operator::Zero(12, 12);
    for (std::size_t k = 0; k < povm.size(); ++k) {
        sum += povm.element(k);
    }
    CHECK(max_abs(sum - Operator::Identity(12, 12)) < 1e-13);

    RealMatrix bad(2, 2);
    bad << 0.5, 0.5, 0.4, 0.5;
    CHECK_THROWS_AS(RotInvariantPovm(spin_half, spin_half, "x", {"a", "b"}, bad), DomainError);
    bad << 1.5, 0.5, -0.5, 0.5;
    CHECK_THROWS_AS(RotInvariantPovm(spin_half, spin_half, "x", {"a", "b"}, bad), DomainError);
    CHECK_THROWS_AS(RotInvariantPovm(spin_half, spin_half, "x", {"a"}, RealMatrix::Identity(2, 2)),
                    DomainError);
}

TEST_CASE("outcome probabilities") {
    SECTION("two qubits") {
        for (double a : alpha_grid()) {
            CHECK_THAT(outcome_probability(spin_half, spin_half, Spin::integer(0), a),
                       WithinAbs(0.5 * std::pow(std::sin(a / 2.0), 2), 1e-15));
        }
    }
    SECTION("spin-1/2 closed form agrees with the dense path") {
        for (int t = 1; t <= 10; ++t) {
            const Spin j = Spin::from_twice(t);
            const Spin lower = Spin::from_twice(t - 1);
            double worst = 0.0;
            for (double a : alpha_grid()) {
                const double closed = outcome_probability(spin_half, j, lower, a);
                const double dense = dense_outcome_probabilities(spin_half, j, a)[0];
                worst = std::max(worst, std::abs(closed - dense));
                CHECK_THAT(closed, WithinAbs(t / (t + 1.0) * std::pow(std::sin(a / 2.0), 2), 1e-15));
            }
            CHECK(worst < 1e-11);
        }
    }
    SECTION("aligned pairs are in the top block") {
        for (auto [a, b] : {std::pair{1, 1}, {2, 3}, {4, 4}, {0, 5}, {6, 1}}) {
            const auto p = CoherentPairModel(Spin::from_twice(a), Spin::from_twice(b))(0.0);
            for (std::size_t k = 0; k + 1 < p.size(); ++k) {
                CHECK_THAT(p[k], WithinAbs(0.0, 1e-13));
            }
            CHECK_THAT(p.back(), WithinAbs(1.0, 1e-13));
        }
    }
    SECTION("agree with coupled states built from ladder operators") {
        const double alpha = pi / 3.0;
        const auto basis = oracle::coupled_basis(2, 3);
        const Amplitudes psi = product_coherent_vector(Spin::integer(1), Spin::from_twice(3),
                                                       Direction::z_axis(), {alpha, 0.0});
        const auto p = dense_outcome_probabilities(Spin::integer(1), Spin::from_twice(3), alpha);
        // oracle blocks run from the largest J down
        for (std::size_t blk = 0; blk < basis.states.size(); ++blk) {
            double expected = 0.0;
            for (const auto &v : basis.states[blk]) {
                expected += std::norm(v.cast<Complex>().dot(psi));
            }
            CHECK_THAT(p[p.size() - 1 - blk], WithinAbs(expected, 1e-11));
        }
    }
    SECTION("sum to one") {
        for (auto [a, b] : {std::pair{1, 1}, {1, 7}, {2, 3}, {4, 4}, {3, 6}}) {
            const CoherentPairModel model(Spin::from_twice(a), Spin::from_twice(b));
            for (double alpha : alpha_grid()) {
                double s = 0.0;
                for (double x : model(alpha)) {
                    s += x;
                }
                CHECK_THAT(s, WithinAbs(1.0, 1e-12));
            }
        }
    }
    CHECK_THROWS_AS(outcome_probability(spin_half, spin_half, Spin::integer(0), -0.1), DomainError);
    CHECK_THROWS_AS(outcome_probability(spin_half, spin_half, Spin::integer(0), 3.5), DomainError);
    CHECK_THROWS_AS(outcome_probability(spin_half, spin_half, Spin::integer(2), 1.0), DomainError);
    CHECK(CoherentPairModel(spin_half, Spin::integer(600)).closed_form());
    CHECK_FALSE(CoherentPairModel(Spin::integer(1), Spin::integer(1)).closed_form());
}

TEST_CASE("Bayesian updates, two qubits with a parallel/antiparallel prior") {
    const auto prior = parallel_antiparallel_prior();
    const auto povm = optimal_povm(spin_half, spin_half);
    const auto post_a = bayes_update(prior, povm, 0);
    const auto post_s = bayes_update(prior, povm, 1);
    CHECK_THAT(post_a.evidence, WithinAbs(0.25, 1e-12));
    CHECK_THAT(post_s.evidence, WithinAbs(0.75, 1e-12));
    CHECK_THAT(post_a.distribution.points()[0].weight, WithinAbs(0.0, 1e-12));
    CHECK_THAT(post_a.distribution.points()[1].weight, WithinAbs(1.0, 1e-12));
    CHECK_THAT(post_s.distribution.points()[0].weight, WithinAbs(2.0 / 3.0, 1e-12));
    CHECK_THAT(post_s.distribution.points()[1].weight, WithinAbs(1.0 / 3.0, 1e-12));
    CHECK_THAT(information_gain(prior, post_a), WithinAbs(1.0, 1e-12));
    CHECK_THAT(information_gain(prior, post_s), WithinAbs(5.0 / 3.0 - log2_3, 1e-12));
    CHECK_THAT(information_gain(prior, prior), WithinAbs(0.0, 1e-15));

    const auto report = average_information_gain(spin_half, spin_half, prior, povm);
    CHECK_THAT(report.average_information_bits,
               WithinAbs(0.25 + 0.75 * (5.0 / 3.0 - log2_3), 1e-12));
    CHECK_THAT(report.average_information_bits, WithinAbs(0.3113, 5e-5));
    CHECK_THAT(map_estimate(post_a), WithinAbs(pi, 0.0));
    CHECK_THROWS_AS(bayes_update(prior, povm, 2), DomainError);
}

TEST_CASE("Bayesian updates, spin-1/2 with spin-j") {
    const auto prior = parallel_antiparallel_prior();
    for (int t = 1; t <= 12; ++t) {
        const Spin j = Spin::from_twice(t);
        const auto post = bayes_update(prior, optimal_povm(spin_half, j), 1);
        CHECK_THAT(post.distribution.points()[0].weight, WithinAbs((t + 1.0) / (t + 2.0), 1e-12));
        CHECK_THAT(post.distribution.points()[1].weight, WithinAbs(1.0 / (t + 2.0), 1e-12));
    }
}

TEST_CASE("Bayesian updates, two qubits with a uniform prior") {
    const auto prior = uniform_direction_prior();
    const auto povm = optimal_povm(spin_half, spin_half);
    const auto post_a = bayes_update(prior, povm, 0);
    const auto post_s = bayes_update(prior, povm, 1);
    CHECK_THAT(post_a.evidence, WithinAbs(0.25, 1e-13));
    for (double a : alpha_grid(37)) {
        const double s2 = std::pow(std::sin(a / 2.0), 2);
        CHECK_THAT(post_a.distribution.density_at(a), WithinAbs(s2 * std::sin(a), 1e-12));
        CHECK_THAT(post_s.distribution.density_at(a),
                   WithinAbs((2.0 - s2) * std::sin(a) / 3.0, 1e-12));
    }
    const double ia = information_gain(prior, post_a);
    const double is = information_gain(prior, post_s);
    CHECK_THAT(ia, WithinAbs(uniform_info_a, 1e-10));
    CHECK_THAT(is, WithinAbs(uniform_info_s, 1e-10));
    CHECK_THAT(is, WithinAbs(0.02702, 5e-6));

    SECTION("match an adaptive Simpson evaluation of the divergence") {
        for (const auto *post : {&post_a, &post_s}) {
            const auto &q = post->distribution;
            const double oracle_kl = oracle::simpson(
                [&](double a) {
                    const double qa = q.density_at(a);
                    return qa > 0.0 ? qa * std::log2(qa / prior.density_at(a)) : 0.0;
                },
                1e-300, pi - 1e-15, 1e-13);
            CHECK_THAT(information_gain(prior, *post), WithinAbs(oracle_kl, 1e-9));
        }
    }

    SECTION("most probable angles") {
        CHECK_THAT(map_estimate(post_a), WithinAbs(2.0 * pi / 3.0, 1e-6));
        CHECK_THAT(map_estimate(post_s) / pi, WithinAbs(0.4094, 5e-4));
    }

    const auto report = average_information_gain(spin_half, spin_half, prior, povm);
    CHECK_THAT(report.average_information_bits,
               WithinAbs(0.25 * uniform_info_a + 0.75 * uniform_info_s, 1e-10));
    CHECK_THAT(report.average_information_bits, WithinAbs(0.08993, 5e-6));
}

TEST_CASE("local measurement reports") {
    const auto local = optimal_local_povm(spin_half);
    const auto pap =
        average_information_gain(spin_half, spin_half, parallel_antiparallel_prior(), local);
    CHECK_THAT(pap.average_information_bits, WithinAbs(5.0 / 3.0 - log2_3, 1e-12));
    CHECK_THAT(pap.average_information_bits, WithinAbs(0.0817, 5e-5));
    const auto uni = average_information_gain(spin_half, spin_half, uniform_direction_prior(), local);
    CHECK_THAT(uni.average_information_bits, WithinAbs(uniform_info_s, 1e-10));
    CHECK_THAT(uni.average_information_bits, WithinAbs(0.02702, 5e-6));
}

TEST_CASE("error paths") {
    const auto prior = AngleDistribution::discrete({{0.0, 1.0}});
    const auto povm = optimal_povm(spin_half, spin_half);
    CHECK_THROWS_AS(bayes_update(prior, povm, 0), ImpossibleOutcomeError);
    const auto report = average_information_gain(spin_half, spin_half, prior, povm);
    CHECK_FALSE(report.outcomes[0].posterior.has_value());
    CHECK(report.outcomes[0].probability == 0.0);
    CHECK_THAT(report.average_information_bits, WithinAbs(0.0, 1e-15));

    const auto other = AngleDistribution::discrete({{pi, 1.0}});
    CHECK_THROWS_AS(information_gain(prior, other), DivergenceError);
    CHECK_THROWS_AS(information_gain(prior, uniform_direction_prior()), DomainError);
    CHECK_THROWS_AS(AngleDistribution::discrete({}), DomainError);
    CHECK_THROWS_AS(AngleDistribution::discrete({{0.0, 0.4}, {1.0, 0.4}}), DomainError);
    CHECK_THROWS_AS(AngleDistribution::discrete({{4.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(
        AngleDistribution::density([](double) { return 1.0; }, gauss_legendre(16, 0.0, pi)),
        DomainError);
    CHECK_THROWS_AS(prior.density(), DomainError);
    CHECK_THROWS_AS(uniform_direction_prior().points(), DomainError);
    CHECK_THROWS_AS(average_information_gain(spin_half, Spin::integer(1),
                                             parallel_antiparallel_prior(), povm),
                    DomainError);
    CHECK_THROWS_AS(make_povm(PovmKind::optimal_local, Spin::integer(1), Spin::integer(1)),
                    DomainError);
    CHECK_THROWS_AS(curve_scenario('e'), DomainError);
}

TEST_CASE("MAP estimates on discrete posteriors") {
    CHECK(map_estimate(AngleDistribution::discrete({{0.0, 0.0}, {pi, 1.0}})) == pi);
    CHECK(map_estimate(AngleDistribution::discrete({{pi, 0.5}, {0.0, 0.5}})) == 0.0);
}

TEST_CASE("posteriors average back to the prior") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 6; ++trial) {
        const Spin j2 = Spin::from_twice(1 + static_cast<int>(rng() % 4));
        const auto povm = random_coarse_graining(spin_half, j2, rng);
        SECTION("discrete prior " + std::to_string(trial)) {
            const auto prior = parallel_antiparallel_prior();
            const auto report = average_information_gain(spin_half, j2, prior, povm);
            std::vector<double> mix(2, 0.0);
            for (const auto &o : report.outcomes) {
                for (std::size_t i = 0; i < 2; ++i) {
                    mix[i] += o.probability * o.posterior->distribution.points()[i].weight;
                }
            }
            CHECK_THAT(mix[0], WithinAbs(0.5, 1e-10));
            CHECK_THAT(mix[1], WithinAbs(0.5, 1e-10));
        }
        SECTION("density prior " + std::to_string(trial)) {
            const auto prior = uniform_direction_prior();
            const auto report = average_information_gain(spin_half, j2, prior, povm);
            for (double a : alpha_grid(19)) {
                double mix = 0.0;
                for (const auto &o : report.outcomes) {
                    mix += o.probability * o.posterior->distribution.density_at(a);
                }
                CHECK_THAT(mix, WithinAbs(prior.density_at(a), 1e-10));
            }
        }
    }
}

TEST_CASE("coarse-graining never increases the average information") {
    std::mt19937_64 rng(23);
    const std::vector<std::pair<Spin, Spin>> pairs{{spin_half, spin_half},
                                                   {spin_half, Spin::integer(1)},
                                                   {Spin::integer(1), Spin::integer(1)},
                                                   {spin_half, Spin::from_twice(5)}};
    for (int trial = 0; trial < 50; ++trial) {
        const auto [j1, j2] = pairs[static_cast<std::size_t>(trial) % pairs.size()];
        const auto prior = trial % 2 == 0 ? parallel_antiparallel_prior() : uniform_direction_prior();
        const auto coarse = random_coarse_graining(j1, j2, rng);
        const auto fine = average_information_gain(j1, j2, prior, optimal_povm(j1, j2));
        const auto report = average_information_gain(j1, j2, prior, coarse);
        CHECK(report.average_information_bits <= fine.average_information_bits + 1e-12);
        for (const auto &o : report.outcomes) {
            CHECK(o.information_bits >= -1e-12);
        }
    }
}

TEST_CASE("reports do not depend on the collective orientation") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Spin j1 = Spin::integer(1), j2 = Spin::from_twice(3);
    const CouplingDecomposition dec(j1, j2);
    const auto povm = optimal_povm(j1, j2);
    const auto reference = average_information_gain(j1, j2, uniform_direction_prior(), povm);
    for (int trial = 0; trial < 3; ++trial) {
        const Rotation r{2.0 * pi * u(rng), std::acos(1.0 - 2.0 * u(rng)), 2.0 * pi * u(rng)};
        const Operator w = collective_rotation_matrix(j1, j2, r);
        const BlockLikelihood rotated = [&](double alpha) {
            return dec.block_weights(
                Amplitudes(w * product_coherent_vector(j1, j2, Direction::z_axis(), {alpha, 0.0})));
        };
        const auto report = average_information_gain(uniform_direction_prior(), rotated, povm);
        CHECK_THAT(report.average_information_bits,
                   WithinAbs(reference.average_information_bits, 1e-10));
        for (std::size_t k = 0; k < povm.size(); ++k) {
            CHECK_THAT(report.outcomes[k].information_bits,
                       WithinAbs(reference.outcomes[k].information_bits, 1e-10));
        }
    }
}

TEST_CASE("information gain curves") {
    const auto a = infogain_curve({spin_half, Spin::integer(500)}, curve_scenario('a'));
    const auto report = average_information_gain(spin_half, spin_half, parallel_antiparallel_prior(),
                                                 optimal_povm(spin_half, spin_half));
    CHECK(a[0].average_information_bits == report.average_information_bits);
    CHECK(std::abs(a[1].average_information_bits - 1.0) < 0.01);
    const auto c = infogain_curve({Spin::integer(500)}, curve_scenario('c'));
    CHECK(std::abs(c[0].average_information_bits - uniform_info_a) < 5e-3);

    std::vector<Spin> js;
    for (int t = 2; t <= 40; ++t) {
        js.push_back(Spin::from_twice(t));
    }
    for (char s : {'a', 'c'}) {
        const auto curve = infogain_curve(js, curve_scenario(s));
        for (std::size_t i = 1; i < curve.size(); ++i) {
            CHECK(curve[i].average_information_bits > curve[i - 1].average_information_bits);
        }
    }
    const auto serial = infogain_curve(js, curve_scenario('d'), 1);
    const auto parallel = infogain_curve(js, curve_scenario('d'), 3);
    for (std::size_t i = 0; i < js.size(); ++i) {
        CHECK(serial[i].average_information_bits == parallel[i].average_information_bits);
    }
}

TEST_CASE("Born-rule limit") {
    for (int j2 : {10, 100, 1000}) {
        const Spin s = Spin::integer(j2);
        double worst = 0.0;
        for (double a : alpha_grid(721)) {
            worst = std::max(worst, born_limit_check(spin_half, a, s));
        }
        CHECK(worst <= 1.0 / (2.0 * j2 + 1.0));
        CHECK(born_limit_check(spin_half, 0.0, s) == 0.0);
        for (double a : alpha_grid(37)) {
            const double plus = outcome_probability(spin_half, s, Spin::from_twice(2 * j2 + 1), a);
            CHECK_THAT(born_limit_check(spin_half, a, s),
                       WithinAbs(std::abs(plus - std::pow(std::cos(a / 2.0), 2)), 1e-15));
        }
    }
    const double d10 = born_limit_check(Spin::integer(1), pi / 4.0, Spin::integer(10));
    const double d20 = born_limit_check(Spin::integer(1), pi / 4.0, Spin::integer(20));
    const double d30 = born_limit_check(Spin::integer(1), pi / 4.0, Spin::integer(30));
    CHECK(d10 > d20);
    CHECK(d20 > d30);
    CHECK_THAT(born_limit_check(Spin::integer(1), 0.0, Spin::integer(10)), WithinAbs(0.0, 1e-12));
    CHECK_THROWS_AS(born_limit_check(Spin::integer(2), 0.5, Spin::integer(1)), DomainError);
}
