#include <doctest.h>

#include <cmath>
#include <vector>

#include "gen.hpp"
#include "surrogate/errors.hpp"
#include "surrogate/oracle.hpp"
#include "surrogate/predictor.hpp"

using namespace surrogate;
using namespace surrogate::predictor;

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<LabeledFeatures> logistic_data(Rng& rng, std::size_t n, const std::vector<double>& w, double b,
                                           double missing_rate = 0.0) {
    std::vector<LabeledFeatures> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x(w.size());
        std::vector<bool> miss(w.size(), false);
        double z = b;
        for (std::size_t j = 0; j < w.size(); ++j) {
            x[j] = rng.normal(0.0, 1.0);
            z += w[j] * x[j];
            if (rng.bernoulli(missing_rate)) miss[j] = true;
        }
        out.push_back({FeatureVector(x, miss), rng.bernoulli(sigmoid(z))});
    }
    return out;
}

// Central differences of the training objective against the analytic gradient.
double gradient_fd_gap(const Design& d, std::vector<double> w, double b, double l2) {
    const double h = 1e-5;
    const auto g = logistic_gradient(d, w, b, l2);
    double worst = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
        const double keep = w[j];
        w[j] = keep + h;
        const double up = logistic_loss(d, w, b, l2);
        w[j] = keep - h;
        const double down = logistic_loss(d, w, b, l2);
        w[j] = keep;
        worst = std::max(worst, std::abs((up - down) / (2 * h) - g.weights[j]));
    }
    const double fd_b = (logistic_loss(d, w, b + h, l2) - logistic_loss(d, w, b - h, l2)) / (2 * h);
    return std::max(worst, std::abs(fd_b - g.bias));
}

}  // namespace

TEST_CASE("FeatureVector") {
    const FeatureVector v({1.0, 2.0, 3.0}, {false, true, false});
    CHECK(v.size() == 3);
    CHECK(v.get(1) == std::nullopt);
    CHECK(v.get(2) == 3.0);
    const std::vector<double> fill{9.0, 8.0, 7.0};
    CHECK(v.imputed(fill) == std::vector<double>{1.0, 8.0, 3.0});
    CHECK(v.concat(FeatureVector({4.0})).size() == 4);
    CHECK(FeatureVector::all_missing(2).missing(1));
    CHECK_THROWS_AS(FeatureVector({1.0}, {false, false}), DimensionMismatch);
    CHECK_THROWS_AS(FeatureVector({std::nan("")}), DomainError);
    CHECK_NOTHROW(FeatureVector({std::nan("")}, {true}));
    CHECK_THROWS_AS(v.imputed(std::vector<double>{1.0}), DimensionMismatch);
}

TEST_CASE("predict_proba basics") {
    LogisticModel m;
    m.weights = {0.0, 0.0};
    m.feature_means = {0.0, 0.0};
    CHECK(predict_proba(m, FeatureVector({3.0, -1.0})).value() == 0.5);

    m.weights = {1.0};
    m.feature_means = {0.7};
    CHECK(predict_proba(m, FeatureVector({0.0})).value() == 0.5);
    CHECK(predict_proba(m, FeatureVector::all_missing(1)).value() == doctest::Approx(sigmoid(0.7)));
    CHECK_THROWS_AS(predict_proba(m, FeatureVector({1.0, 2.0})), DimensionMismatch);

    // stays strictly inside the unit interval for extreme logits
    const double hi = predict_proba(m, FeatureVector({1e4})).value();
    const double lo = predict_proba(m, FeatureVector({-1e4})).value();
    CHECK(hi < 1.0);
    CHECK(lo > 0.0);
}

TEST_CASE("fit_logistic input validation") {
    std::vector<LabeledFeatures> none;
    CHECK_THROWS_AS(fit_logistic(none), EmptyData);
    std::vector<LabeledFeatures> one_class{{FeatureVector({1.0}), true}, {FeatureVector({2.0}), true}};
    CHECK_THROWS_AS(fit_logistic(one_class), SingleClassData);

    TrainConfig bad;
    bad.learning_rate = 0.0;
    std::vector<LabeledFeatures> ok{{FeatureVector({1.0}), true}, {FeatureVector({2.0}), false}};
    CHECK_THROWS_AS(fit_logistic(ok, bad), DomainError);

    TrainConfig wild;
    wild.learning_rate = 1e6;
    wild.l2_penalty = 1.0;
    std::vector<LabeledFeatures> big{{FeatureVector({1e3}), true}, {FeatureVector({-1e3}), false},
                                     {FeatureVector({2e3}), false}};
    CHECK_THROWS_AS(fit_logistic(big, wild), NonFiniteLoss);
}

TEST_CASE("training loss decreases on separable data") {
    Rng rng(5);
    std::vector<LabeledFeatures> data;
    for (int i = 0; i < 200; ++i) {
        const double a = rng.normal(0, 1), b = rng.normal(0, 1);
        data.push_back({FeatureVector({a, b}), a + 0.5 * b > 0.0});
    }
    TrainConfig cfg;
    cfg.l2_penalty = 1e-2;
    cfg.max_epochs = 3000;
    FitTrace trace;
    const auto m = fit_logistic(data, cfg, &trace);
    REQUIRE(trace.loss.size() >= 2);
    for (std::size_t e = 1; e < trace.loss.size(); ++e) REQUIRE(trace.loss[e] < trace.loss[e - 1]);
    CHECK(m.trained_on == 200);
}

TEST_CASE("weights are recovered from a known generating model") {
    Rng rng(2024);
    const std::vector<double> w{1.5, -2.0, 0.8};
    const double b = 0.3;
    const auto data = logistic_data(rng, 50000, w, b);
    const auto m = fit_logistic(data);
    for (std::size_t j = 0; j < w.size(); ++j) {
        CHECK(std::abs(m.weights[j] - w[j]) / std::abs(w[j]) < 0.05);
    }
    CHECK(m.converged);
}

TEST_CASE("analytic gradient matches central differences") {
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 1 + rng.below(10);
        const std::size_t n = 10 + rng.below(191);
        std::vector<double> w(d);
        for (auto& v : w) v = rng.normal(0, 1);
        const auto data = logistic_data(rng, n, w, rng.normal(0, 1), 0.1);
        const auto means = feature_means(data);
        const auto design = make_design(data, means);
        std::vector<double> probe(d);
        for (auto& v : probe) v = rng.normal(0, 1);
        CHECK(gradient_fd_gap(design, probe, rng.normal(0, 1), 1e-3) < 1e-6);
    }

    // and at the fitted optimum
    Rng rng2(78);
    const auto data = logistic_data(rng2, 150, {0.5, -1.0}, 0.2);
    const auto m = fit_logistic(data);
    const auto design = make_design(data, m.feature_means);
    CHECK(gradient_fd_gap(design, m.weights, m.bias, m.config.l2_penalty) < 1e-6);
    CHECK(logistic_gradient(design, m.weights, m.bias, m.config.l2_penalty).max_abs() < 1e-6);
}

TEST_CASE("mean imputation uses non-missing training values") {
    std::vector<LabeledFeatures> data{{FeatureVector({1.0, 5.0}, {false, true}), true},
                                      {FeatureVector({3.0, 7.0}), false},
                                      {FeatureVector({0.0, 9.0}, {true, false}), true}};
    CHECK(feature_means(data) == std::vector<double>{2.0, 8.0});
    const auto m = fit_logistic(data);
    CHECK(m.feature_means == std::vector<double>{2.0, 8.0});
}

TEST_CASE("fitting is deterministic") {
    Rng a(9), b(9);
    const auto da = logistic_data(a, 500, {1.0, 1.0}, 0.0, 0.2);
    const auto db = logistic_data(b, 500, {1.0, 1.0}, 0.0, 0.2);
    const auto ma = fit_logistic(da);
    const auto mb = fit_logistic(db);
    CHECK(nlohmann::json(ma).dump() == nlohmann::json(mb).dump());
}

TEST_CASE("logistic model JSON round trip") {
    Rng rng(4);
    const auto m = fit_logistic(logistic_data(rng, 300, {0.4, -0.3}, 0.1));
    const auto back = logistic_from_json(nlohmann::json::parse(nlohmann::json(m).dump()));
    CHECK(back.weights == m.weights);
    CHECK(back.bias == m.bias);
    CHECK(back.feature_means == m.feature_means);
    CHECK(back.config.learning_rate == m.config.learning_rate);
    CHECK_THROWS_AS(logistic_from_json(nlohmann::json{{"type", "histogram"}}), DomainError);
    CHECK_THROWS_AS(logistic_from_json(nlohmann::json{{"type", "logistic"}}), DomainError);
}

TEST_CASE("histogram smoothing and edges") {
    std::vector<ScalarSample> all_ones;
    for (int i = 0; i < 10; ++i) all_ones.push_back({0.1 * i, true});
    const auto h = fit_histogram(all_ones, 4, 0.0, 1.0);
    for (std::size_t b = 0; b < 4; ++b) {
        const double n = static_cast<double>(h.counts()[b]);
        CHECK(h.estimate_bin(b).value() == doctest::Approx((n + 1) / (n + 2)));
    }

    const auto sparse = fit_histogram(std::vector<ScalarSample>{{0.1, true}}, 3, 0.0, 3.0);
    CHECK(sparse.estimate_bin(2).value() == 0.5);
    CHECK(sparse.bin_of(-100.0) == 0);
    CHECK(sparse.bin_of(100.0) == 2);
    CHECK(sparse.bin_of(3.0) == 2);
    CHECK(sparse.bin_of(1.0) == 1);

    CHECK_THROWS_AS(fit_histogram(std::vector<ScalarSample>{}, 4, 0.0, 1.0), EmptyData);
    CHECK_THROWS_AS(fit_histogram(all_ones, 1, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(fit_histogram(all_ones, 4, 1.0, 1.0), DomainError);
}

TEST_CASE("histogram estimates converge to the oracle conditionals") {
    const std::size_t k = 8;
    const auto joint = oracle::joint_from_ci_spec(gen::ci_spec(0.55, 0.3, 0.75,
                                                               {0.05, 0.1, 0.15, 0.2, 0.2, 0.15, 0.1, 0.05},
                                                               {0.2, 0.15, 0.1, 0.1, 0.1, 0.1, 0.1, 0.15}));
    Rng rng(31337);
    std::vector<ScalarSample> data;
    data.reserve(1000000);
    for (int i = 0; i < 1000000; ++i) {
        const std::size_t cell = rng.categorical(joint.table());
        const std::size_t x1 = cell / (2 * k);
        const std::size_t x2 = (cell / 2) % k;
        data.push_back({static_cast<double>(x2) + 0.5, x1 == 1});
    }
    const auto h = fit_histogram(data, k, 0.0, static_cast<double>(k));
    double worst = 0.0;
    for (std::size_t x2 = 0; x2 < k; ++x2) {
        worst = std::max(worst, std::abs(h.estimate_bin(x2).value() - oracle::cond_x1_given_x2(joint, x2).value()));
    }
    CHECK(worst < 0.01);
}

TEST_CASE("histogram JSON and predictor adapters") {
    const HistogramModel h(0.0, 2.0, {1, 3}, {4, 4});
    const auto back = histogram_from_json(nlohmann::json::parse(nlohmann::json(h).dump()));
    CHECK(back.ones() == h.ones());
    CHECK(back.counts() == h.counts());
    CHECK_THROWS_AS(histogram_from_json(nlohmann::json{{"type", "histogram"}, {"lo", 0.0}}), DomainError);
    CHECK_THROWS_AS(HistogramModel(0.0, 1.0, {5, 0}, {4, 4}), DomainError);

    const auto f = as_predictor(h);
    CHECK(f(FeatureVector({0.5})) == doctest::Approx(2.0 / 6.0));
    CHECK(f(FeatureVector({1.5})) == doctest::Approx(4.0 / 6.0));
    CHECK(f(FeatureVector::all_missing(1)) == doctest::Approx(5.0 / 10.0));

    LogisticModel m;
    m.weights = {2.0};
    m.feature_means = {0.0};
    CHECK(as_predictor(m)(FeatureVector({0.0})) == 0.5);
}
