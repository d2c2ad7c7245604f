#include <doctest.h>

#include <cmath>
#include <vector>

#include "gen.hpp"
#include "surrogate/core_math.hpp"
#include "surrogate/datagen.hpp"
#include "surrogate/errors.hpp"
#include "surrogate/oracle.hpp"

using namespace surrogate;
using namespace surrogate::oracle;

namespace {

// The joint P(x1,y) tables of the two worked examples with a single x2 cell.
DiscreteJoint table_joint(double j00, double j01, double j10, double j11) {
    return DiscreteJoint(1, {j00, j01, j10, j11});
}

}  // namespace

TEST_CASE("DiscreteJoint validates its table") {
    CHECK_THROWS_AS(DiscreteJoint(2, {0.5, 0.5}), InvalidSimplex);
    CHECK_THROWS_AS(DiscreteJoint(1, {0.5, 0.5, 0.5, -0.5}), InvalidSimplex);
    CHECK_THROWS_AS(DiscreteJoint(1, {0.3, 0.3, 0.3, 0.3}), InvalidSimplex);
    CHECK_NOTHROW(DiscreteJoint(1, {0.25, 0.25, 0.25, 0.25}));
}

TEST_CASE("cond_x1_given_y on the worked example tables") {
    const auto e1 = cond_x1_given_y(table_joint(0.3, 0.1, 0.2, 0.4));
    CHECK(e1.p_x1_given_y0.value() == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(e1.p_x1_given_y1.value() == doctest::Approx(0.8).epsilon(1e-14));

    const auto e2 = cond_x1_given_y(table_joint(0.3, 0.0, 0.2, 0.5));
    CHECK(e2.p_x1_given_y0.value() == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(e2.p_x1_given_y1.value() == 1.0);

    const auto uniform = cond_x1_given_y(table_joint(0.25, 0.25, 0.25, 0.25));
    CHECK(uniform.p_x1_given_y0.value() == 0.5);
    CHECK(uniform.p_x1_given_y1.value() == 0.5);
    CHECK_THROWS_AS(core::require_distinct(uniform), DegenerateConditionals);

    CHECK_THROWS_AS(cond_x1_given_y(table_joint(0.5, 0.0, 0.5, 0.0)), ZeroMarginal);
}

TEST_CASE("conditionals on small hand tables") {
    const DiscreteJoint uniform(2, std::vector<double>(8, 0.125));
    CHECK(cond_x1_given_x2(uniform, 0).value() == 0.5);
    CHECK(cond_y1_given_x2(uniform, 1).value() == 0.5);

    std::vector<double> point(8, 0.0);
    point[DiscreteJoint::index(1, 0, 1, 2)] = 1.0;
    const DiscreteJoint det(2, point);
    CHECK(cond_y_given_x1_x2(det, 1, 0).value() == 0.0);
    CHECK(cond_x1_given_x2(det, 0).value() == 1.0);
    CHECK_THROWS_AS(cond_x1_given_x2(det, 1), ZeroMarginal);
    CHECK_THROWS_AS(cond_y_given_x1_x2(det, 0, 0), ZeroMarginal);
    CHECK_THROWS_AS(cond_y1_given_x2(det, 1), ZeroMarginal);

    // x2 = 0: (0.1, 0.2, 0.3, 0.0); x2 = 1: (0.0, 0.1, 0.1, 0.2)
    std::vector<double> t(8);
    t[DiscreteJoint::index(0, 0, 0, 2)] = 0.1;
    t[DiscreteJoint::index(0, 0, 1, 2)] = 0.2;
    t[DiscreteJoint::index(1, 0, 0, 2)] = 0.3;
    t[DiscreteJoint::index(0, 1, 1, 2)] = 0.1;
    t[DiscreteJoint::index(1, 1, 0, 2)] = 0.1;
    t[DiscreteJoint::index(1, 1, 1, 2)] = 0.2;
    const DiscreteJoint j(2, t);
    CHECK(cond_x1_given_x2(j, 0).value() == doctest::Approx(0.5));
    CHECK(cond_x1_given_x2(j, 1).value() == doctest::Approx(0.75));
    CHECK(cond_y_given_x1_x2(j, 0, 0).value() == doctest::Approx(1.0 / 3.0));
    CHECK(cond_y1_given_x2(j, 1).value() == doctest::Approx(0.75));
    CHECK(bayes_accuracy(j) == doctest::Approx(0.2 + 0.3 + 0.1 + 0.2));
}

TEST_CASE("uniform P(x2|y) makes x2 uninformative") {
    const auto j = joint_from_ci_spec(gen::ci_spec(0.6, 0.3, 0.7, std::vector<double>(5, 0.2),
                                                   std::vector<double>(5, 0.2)));
    for (int x1 = 0; x1 < 2; ++x1) {
        const double first = cond_y_given_x1_x2(j, x1, 0).value();
        for (std::size_t x2 = 1; x2 < 5; ++x2) {
            CHECK(cond_y_given_x1_x2(j, x1, x2).value() == doctest::Approx(first).epsilon(1e-14));
        }
    }
}

TEST_CASE("joint_from_ci_spec rejects bad specs") {
    CHECK_THROWS_AS(joint_from_ci_spec(gen::ci_spec(0.5, 0.3, 0.7, {0.5, 0.6}, {0.5, 0.5})), InvalidSimplex);
    CHECK_THROWS_AS(joint_from_ci_spec(gen::ci_spec(0.5, 0.3, 0.7, {0.5, 0.5}, {1.0})), InvalidSimplex);
    CHECK_THROWS_AS(joint_from_ci_spec(gen::ci_spec(1.5, 0.3, 0.7, {0.5, 0.5}, {0.5, 0.5})), InvalidSimplex);
    CHECK_THROWS_AS(joint_from_ci_spec(gen::ci_spec(0.5, -0.1, 0.7, {0.5, 0.5}, {0.5, 0.5})), InvalidSimplex);
}

TEST_CASE("Example 2 spec leaves no mass on (x1=0, y=1)") {
    const auto spec = datagen::ExampleSpec::example2();
    const auto j = datagen::discretize_example(spec, 64, -6.0, 6.0);
    CHECK(j.marginal_x1_y(0, 1) == 0.0);
    CHECK(j.marginal_x1_y(1, 1) == doctest::Approx(0.5).epsilon(1e-12));
    for (std::size_t x2 = 0; x2 < 64; ++x2) CHECK(j.at(0, x2, 1) == 0.0);
}

TEST_CASE("random specs are class-conditionally independent and recoverable") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const std::size_t k = 2 + seed % 15;
        const auto spec = datagen::random_ci_joint(k, seed, 0.05);
        const auto j = joint_from_ci_spec(spec);
        REQUIRE(ci_violation(j) < 1e-12);

        const auto cond = cond_x1_given_y(j);
        REQUIRE(std::abs(cond.p_x1_given_y0.value() - spec.p_x1_given_y[0]) < 1e-12);
        REQUIRE(std::abs(cond.p_x1_given_y1.value() - spec.p_x1_given_y[1]) < 1e-12);
        REQUIRE(std::abs(j.marginal_y(0) - spec.p_y0) < 1e-12);
        for (int y = 0; y < 2; ++y) {
            const double py = j.marginal_y(y);
            for (std::size_t x2 = 0; x2 < k; ++x2) {
                const double px2y = j.at(0, x2, y) + j.at(1, x2, y);
                REQUIRE(std::abs(px2y / py - spec.p_x2_given_y[static_cast<std::size_t>(y)][x2]) < 1e-12);
            }
        }

        // recombining the conditionals reproduces every cell
        for (int x1 = 0; x1 < 2; ++x1) {
            for (std::size_t x2 = 0; x2 < k; ++x2) {
                const double pxx = j.marginal_x1_x2(x1, x2);
                if (pxx == 0.0) continue;
                const double p0 = cond_y_given_x1_x2(j, x1, x2).value();
                REQUIRE(std::abs(p0 * pxx - j.at(x1, x2, 0)) < 1e-12);
                REQUIRE(std::abs((1.0 - p0) * pxx - j.at(x1, x2, 1)) < 1e-12);
            }
        }
    }
}

TEST_CASE("ci_violation notices dependence") {
    std::vector<double> t(8, 0.0);
    t[DiscreteJoint::index(0, 0, 0, 2)] = 0.25;
    t[DiscreteJoint::index(1, 1, 0, 2)] = 0.25;
    t[DiscreteJoint::index(0, 0, 1, 2)] = 0.25;
    t[DiscreteJoint::index(1, 1, 1, 2)] = 0.25;
    CHECK(ci_violation(DiscreteJoint(2, t)) > 0.1);
}

TEST_CASE("general posterior on the discretized first example agrees with the oracle") {
    const auto spec = datagen::ExampleSpec::example1();
    const auto j = datagen::discretize_example(spec, 64, -6.0, 6.0);
    REQUIRE(ci_violation(j) < 1e-12);
    const auto cond = cond_x1_given_y(j);
    CHECK(cond.p_x1_given_y0.value() == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(cond.p_x1_given_y1.value() == doctest::Approx(0.8).epsilon(1e-12));
    for (std::size_t x2 = 0; x2 < 64; ++x2) {
        const auto p = cond_x1_given_x2(j, x2);
        for (int x1 = 0; x1 < 2; ++x1) {
            const double got = core::posterior_general(p, cond, x1 ? core::X1::One : core::X1::Zero).value();
            REQUIRE(std::abs(got - cond_y_given_x1_x2(j, x1, x2).value()) < 1e-10);
        }
    }
}

TEST_CASE("a cell where P(x1|x2) equals P(x1|y=0) is pure class 0") {
    // x2 = 2 never occurs under y = 1
    const auto j = joint_from_ci_spec(gen::ci_spec(0.5, 0.4, 0.8, {0.3, 0.3, 0.4}, {0.5, 0.5, 0.0}));
    CHECK(cond_x1_given_x2(j, 2).value() == doctest::Approx(0.4).epsilon(1e-14));
    CHECK(cond_y_given_x1_x2(j, 1, 2).value() == 1.0);
    CHECK(core::posterior_general(cond_x1_given_x2(j, 2), cond_x1_given_y(j), core::X1::One).value() ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decision_accuracy is bounded by the Bayes rule") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const auto j = joint_from_ci_spec(datagen::random_ci_joint(6, rng.next(), 0.05));
        const double bayes = bayes_accuracy(j);
        const double bayes_rule = decision_accuracy(
            j, [&](int x1, std::size_t x2) { return j.at(x1, x2, 1) > j.at(x1, x2, 0); });
        CHECK(bayes_rule == doctest::Approx(bayes).epsilon(1e-14));
        const double coin = decision_accuracy(j, [&](int, std::size_t) { return rng.bernoulli(0.5); });
        CHECK(coin <= bayes + 1e-14);
    }
}

TEST_CASE("joint JSON round trip") {
    const auto j = joint_from_ci_spec(datagen::random_ci_joint(4, 3, 0.05));
    const nlohmann::json doc = j;
    CHECK(doc.at("dims") == nlohmann::json::array({2, 4, 2}));
    CHECK(doc.at("order") == "x1,x2,y");
    CHECK(joint_from_json(doc) == j);
    CHECK(joint_from_json(nlohmann::json::parse(doc.dump())) == j);
    CHECK_THROWS_AS(joint_from_json(nlohmann::json{{"dims", {3, 4, 2}}, {"table", doc.at("table")}}),
                    InvalidSimplex);
    CHECK_THROWS_AS(joint_from_json(nlohmann::json{{"dims", "x"}}), InvalidSimplex);
}
