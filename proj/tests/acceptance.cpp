// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "surrogate/core_math.hpp"
#include "surrogate/datagen.hpp"
#include "surrogate/experiments.hpp"
#include "surrogate/oracle.hpp"
#include "surrogate/predictor.hpp"
#include "surrogate/rng.hpp"

#ifndef SURROGATE_GOLDEN_DIR
#error "SURROGATE_GOLDEN_DIR must point at the golden report directory"
#endif

using namespace surrogate;
using core::Probability;
using core::X1;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

Outcome general_posterior_identity() {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const std::size_t k = 2 + t % 15;
        const auto joint = oracle::joint_from_ci_spec(datagen::random_ci_joint(k, derive_seed(1, t), 0.05));
        const auto cond = oracle::cond_x1_given_y(joint);
        for (std::size_t x2 = 0; x2 < k; ++x2) {
            const auto p = oracle::cond_x1_given_x2(joint, x2);
            for (int x1 = 0; x1 < 2; ++x1) {
                const double got = core::posterior_general(p, cond, x1 ? X1::One : X1::Zero).value();
                worst = std::max(worst, std::abs(got - oracle::cond_y_given_x1_x2(joint, x1, x2).value()));
            }
        }
    }
    return {worst <= 1e-10, fmt("1000 joints, max |err| = %.3g (tol 1e-10)", worst)};
}

Outcome special_score_consistency() {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 1000; ++t) {
        const std::size_t k = 2 + t % 15;
        const auto joint = oracle::joint_from_ci_spec(datagen::random_recall_joint(k, derive_seed(2, t), 0.05));
        const auto cond = oracle::cond_x1_given_y(joint);
        for (std::size_t x2 = 0; x2 < k; ++x2) {
            const double p1 = oracle::cond_x1_given_x2(joint, x2).value();
            const double special = core::score_special_unclamped(1.0 - p1, cond);
            const double general = core::posterior_y0_unclamped(p1, cond, X1::One);
            worst = std::max(worst, std::abs(special - general));
        }
    }
    Rng rng(3);
    std::size_t violations = 0;
    for (int i = 0; i < 100000; ++i) {
        const core::ClassConditionalX1 cond{Probability(0.01 + 0.9 * rng.uniform()), Probability(1.0)};
        double a = 1e-6 + (1 - 2e-6) * rng.uniform();
        double b = 1e-6 + (1 - 2e-6) * rng.uniform();
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        violations += core::score_special_unclamped(a, cond) < core::score_special_unclamped(b, cond) ? 0 : 1;
    }
    return {worst <= 1e-12 && violations == 0,
            fmt("1000 joints, max |err| = %.3g (tol 1e-12); %zu rank violations in 1e5 pairs", worst, violations)};
}

Outcome missing_x1_identity() {
    double worst = 0.0;
    for (std::uint64_t t = 0; t < 500; ++t) {
        const std::size_t k = 2 + t % 15;
        const auto joint = oracle::joint_from_ci_spec(datagen::random_recall_joint(k, derive_seed(4, t), 0.05));
        const auto cond = oracle::cond_x1_given_y(joint);
        for (std::size_t x2 = 0; x2 < k; ++x2) {
            const auto p1 = oracle::cond_x1_given_x2(joint, x2);
            const double post = std::clamp(1.0 - core::score_special_unclamped(1.0 - p1.value(), cond), 0.0, 1.0);
            const double got = core::score_missing_x1(p1, Probability(post)).value();
            worst = std::max(worst, std::abs(got - oracle::cond_y1_given_x2(joint, x2).value()));
        }
    }
    return {worst <= 1e-12, fmt("500 joints, max |err| = %.3g (tol 1e-12)", worst)};
}

Outcome examples_end_to_end() {
    experiments::ExampleParams params;  // n = 1e6, 64 bins over [-6, 6]
    Outcome out{true, ""};
    for (int which = 1; which <= 2; ++which) {
        const auto spec = which == 1 ? datagen::ExampleSpec::example1() : datagen::ExampleSpec::example2();
        const auto r = experiments::run_example(spec, params, 7);
        const double gap = r.metrics.at("accuracy_gap");
        out.pass = out.pass && gap <= 0.01;
        out.detail += fmt("example %d: bayes %.4f surrogate %.4f gap %.4f; ", which, r.metrics.at("bayes_accuracy"),
                          r.metrics.at("surrogate_accuracy"), gap);
    }
    out.detail += "tol 0.01";
    return out;
}

Outcome gradient_check() {
    Rng rng(5);
    double worst = 0.0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t d = 1 + rng.below(10);
        const std::size_t n = 2 + rng.below(199);
        std::vector<predictor::LabeledFeatures> data;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(d);
            for (auto& v : x) v = rng.normal(0, 2);
            data.push_back({FeatureVector(x), rng.bernoulli(0.5)});
        }
        const auto design = predictor::make_design(data, predictor::feature_means(data));
        std::vector<double> w(d);
        for (auto& v : w) v = rng.normal(0, 1);
        const double b = rng.normal(0, 1);
        const double l2 = 1e-2 * rng.uniform();
        const auto g = predictor::logistic_gradient(design, w, b, l2);
        const double h = 1e-5;
        for (std::size_t j = 0; j <= d; ++j) {
            auto wp = w, wm = w;
            double bp = b, bm = b;
            if (j < d) {
                wp[j] += h;
                wm[j] -= h;
            } else {
                bp += h;
                bm -= h;
            }
            const double fd = (predictor::logistic_loss(design, wp, bp, l2) -
                               predictor::logistic_loss(design, wm, bm, l2)) / (2 * h);
            worst = std::max(worst, std::abs(fd - (j < d ? g.weights[j] : g.bias)));
        }
    }
    return {worst < 1e-6, fmt("20 instances, max |analytic - central diff| = %.3g (tol 1e-6)", worst)};
}

Outcome record_linkage() {
    const auto r = experiments::run_experiment(
        experiments::resolve_config(nlohmann::json{{"experiment", "linkage-baseline-comparison"}}));
    const double p = r.precision.value_or(0.0);
    const double rec = r.recall.value_or(0.0);
    const double base = r.metrics.at("baseline_recall");
    return {p >= 0.9 && rec >= 0.9 && rec >= base,
            fmt("precision %.4f recall %.4f (min 0.9); baseline recall %.4f at 20%% labels", p, rec, base)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return {};
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome determinism() {
    Outcome out{true, ""};
    for (const auto name : experiments::kExperimentNames) {
        const auto cfg = experiments::resolve_config(nlohmann::json{{"experiment", std::string(name)}});
        const auto first = eval::report_json(experiments::run_experiment(cfg));
        const auto second = eval::report_json(experiments::run_experiment(cfg));
        const auto golden = slurp(std::filesystem::path(SURROGATE_GOLDEN_DIR) / (std::string(name) + ".json"));
        const bool ok = first == second && first == golden;
        if (!ok) {
            out.detail += std::string(name) + (golden.empty() ? " (no golden) " : first == second ? " (golden drift) " : " (run drift) ");
        }
        out.pass = out.pass && ok;
    }
    if (out.pass) out.detail = "5 experiments, two runs each, byte-identical to golden reports";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
        double budget_s;
    };
    const std::vector<Criterion> criteria{
        {"1 general posterior equals oracle", general_posterior_identity, 10},
        {"2 special score consistency + monotonicity", special_score_consistency, 5},
        {"3 missing-x1 identity", missing_x1_identity, 0},
        {"4 examples 1/2 end-to-end accuracy", examples_end_to_end, 60},
        {"5 logistic gradient check", gradient_check, 0},
        {"6 synthetic record linkage", record_linkage, 120},
        {"7 determinism vs golden reports", determinism, 0},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_budget = c.budget_s == 0 || secs < c.budget_s;
        const bool pass = o.pass && in_budget;
        failed += pass ? 0 : 1;
        std::printf("[%s] %-45s %s; %.2fs%s\n", pass ? "PASS" : "FAIL", c.name, o.detail.c_str(), secs,
                    c.budget_s > 0 ? fmt(" (budget %.0fs)", c.budget_s).c_str() : "");
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
