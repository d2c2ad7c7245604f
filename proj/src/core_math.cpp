#include "surrogate/core_math.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "surrogate/errors.hpp"

namespace surrogate::core {

Probability::Probability(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw DomainError("probability " + std::to_string(value) + " outside [0,1]");
    }
}

ClassConditionalX1 ClassConditionalX1::flipped() const {
    return {p_x1_given_y0.complement(), p_x1_given_y1.complement()};
}

double ClassConditionalX1::separation() const noexcept {
    return std::abs(p_x1_given_y1.value() - p_x1_given_y0.value());
}

void require_distinct(const ClassConditionalX1& cond, double epsilon) {
    if (cond.separation() < epsilon) {
        throw DegenerateConditionals("P(x1|y=0)=" + std::to_string(cond.p_x1_given_y0.value()) +
                                     " and P(x1|y=1)=" + std::to_string(cond.p_x1_given_y1.value()) +
                                     " are not distinguishable");
    }
}

double clamp_open(double p, double epsilon) noexcept {
    return std::clamp(p, epsilon, 1.0 - epsilon);
}

namespace {

struct ObservedTerms {
    double p;   // P(x1=observed | x2)
    double c0;  // P(x1=observed | y=0)
    double c1;  // P(x1=observed | y=1)
};

ObservedTerms observed_terms(double p_x1_given_x2, double c0, double c1, X1 observed) {
    if (observed == X1::One) return {p_x1_given_x2, c0, c1};
    return {1.0 - p_x1_given_x2, 1.0 - c0, 1.0 - c1};
}

void check_denominators(const ObservedTerms& t) {
    if (!(t.p > 0.0) || !std::isfinite(t.p)) {
        throw DomainError("P(x1|x2) for the observed x1 must be positive");
    }
    if (t.c1 == t.c0) {
        throw DegenerateConditionals("P(x1|y=0) equals P(x1|y=1)");
    }
}

}  // namespace

double posterior_y0_unclamped(double p_x1_given_x2, const ClassConditionalX1& cond, X1 observed) {
    const auto t = observed_terms(p_x1_given_x2, cond.p_x1_given_y0.value(), cond.p_x1_given_y1.value(),
                                  observed);
    check_denominators(t);
    return (t.c0 / t.p) * ((t.c1 - t.p) / (t.c1 - t.c0));
}

double posterior_y1_unclamped(double p_x1_given_x2, const ClassConditionalX1& cond, X1 observed) {
    const auto t = observed_terms(p_x1_given_x2, cond.p_x1_given_y0.value(), cond.p_x1_given_y1.value(),
                                  observed);
    check_denominators(t);
    return (t.c1 / t.p) * ((t.p - t.c0) / (t.c1 - t.c0));
}

double score_special_unclamped(double p_x1eq0_given_x2, const ClassConditionalX1& cond) {
    const double target_rate = cond.p_x1_given_y0.value();
    const double background_rate = 1.0 - target_rate;
    if (background_rate <= 0.0) {
        throw DegenerateConditionals("P(x1=0|y=0) is zero");
    }
    if (!(p_x1eq0_given_x2 < 1.0)) {
        throw DomainError("P(x1=0|x2) must be below 1");
    }
    return (target_rate / background_rate) * (p_x1eq0_given_x2 / (1.0 - p_x1eq0_given_x2));
}

Probability posterior_general(Probability p_x1_given_x2, const ClassConditionalX1& cond, X1 observed,
                              double epsilon) {
    const double p = p_x1_given_x2.value();
    if (!(p > 0.0 && p < 1.0)) {
        throw DomainError("P(x1|x2)=" + std::to_string(p) + " outside (0,1)");
    }
    require_distinct(cond, epsilon);
    const auto t = observed_terms(clamp_open(p, epsilon), clamp_open(cond.p_x1_given_y0.value(), epsilon),
                                  clamp_open(cond.p_x1_given_y1.value(), epsilon), observed);
    const double raw = (t.c0 / t.p) * ((t.c1 - t.p) / (t.c1 - t.c0));
    return Probability(std::clamp(raw, 0.0, 1.0));
}

Probability score_special(Probability p_x1eq0_given_x2, const ClassConditionalX1& cond, double epsilon) {
    const double background_rate = 1.0 - cond.p_x1_given_y0.value();
    if (background_rate < epsilon) {
        throw DegenerateConditionals("P(x1=0|y=0)=" + std::to_string(background_rate) +
                                     " below clamp epsilon");
    }
    const double target_rate = clamp_open(cond.p_x1_given_y0.value(), epsilon);
    const double q = clamp_open(p_x1eq0_given_x2.value(), epsilon);
    const double raw = (target_rate / (1.0 - target_rate)) * (q / (1.0 - q));
    return Probability(std::clamp(raw, 0.0, 1.0));
}

Probability score_missing_x1(Probability p_x1eq1_given_x2, Probability posterior_y1_given_x1eq1_x2) {
    return Probability(posterior_y1_given_x1eq1_x2.value() * p_x1eq1_given_x2.value());
}

SurrogateModel::SurrogateModel(ClassConditionalX1 conditionals, X1Predictor predictor, Mode mode,
                               double clamp_epsilon)
    : cond_(conditionals), predictor_(std::move(predictor)), mode_(mode), epsilon_(clamp_epsilon) {
    if (!(epsilon_ > 0.0 && epsilon_ <= kMaxClampEpsilon)) {
        throw DomainError("clamp epsilon must lie in (0, 1e-3]");
    }
    if (!predictor_) {
        throw DomainError("surrogate model needs a predictor");
    }
    if (mode_ == Mode::HundredPercentRecall) {
        cond_.p_x1_given_y1 = Probability(1.0);
        if (1.0 - cond_.p_x1_given_y0.value() < epsilon_) {
            throw DegenerateConditionals("P(x1=0|y=0) below clamp epsilon");
        }
    } else {
        require_distinct(cond_, epsilon_);
    }
}

Probability SurrogateModel::p_x1_given_x2(const FeatureVector& x2) const {
    const double raw = predictor_(x2);
    if (std::isnan(raw)) {
        throw DomainError("predictor returned NaN");
    }
    return Probability(clamp_open(raw, epsilon_));
}

Probability SurrogateModel::posterior_y0(X1 observed, const FeatureVector& x2) const {
    const Probability p = p_x1_given_x2(x2);
    if (mode_ == Mode::General) {
        return posterior_general(p, cond_, observed, epsilon_);
    }
    if (observed == X1::Zero) {
        return Probability(1.0);
    }
    return score_special(p.complement(), cond_, epsilon_);
}

Probability SurrogateModel::posterior_y1_given_target(const FeatureVector& x2) const {
    return posterior_y0(X1::One, x2).complement();
}

Probability SurrogateModel::posterior_y1_x1_missing(const FeatureVector& x2) const {
    if (mode_ != Mode::HundredPercentRecall) {
        throw DomainError("missing-x1 scoring requires the 100%-recall mode");
    }
    return score_missing_x1(p_x1_given_x2(x2), posterior_y1_given_target(x2));
}

std::string_view to_string(Objective objective) noexcept {
    switch (objective) {
        case Objective::F1:
            return "f1";
        case Objective::Accuracy:
            return "accuracy";
    }
    return "f1";
}

Objective objective_from_string(std::string_view name) {
    if (name == "f1" || name == "F1") return Objective::F1;
    if (name == "accuracy" || name == "Accuracy") return Objective::Accuracy;
    throw DomainError("unknown threshold objective '" + std::string(name) + "'");
}

namespace {

double objective_value(Objective objective, std::size_t tp, std::size_t fp, std::size_t fn, std::size_t tn) {
    if (objective == Objective::Accuracy) {
        return static_cast<double>(tp + tn) / static_cast<double>(tp + fp + fn + tn);
    }
    if (tp == 0) return 0.0;
    return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace

Threshold select_threshold(std::span<const LabeledScore> scores, Objective objective) {
    std::size_t positives = 0;
    for (const auto& s : scores) {
        if (std::isnan(s.score)) throw DomainError("NaN score");
        positives += s.positive ? 1 : 0;
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw InsufficientLabels("threshold selection needs both labels");
    }

    std::vector<LabeledScore> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const LabeledScore& a, const LabeledScore& b) { return a.score < b.score; });

    // Sweep candidates in increasing order. `below` counts items strictly
    // under the current candidate, i.e. those predicted negative.
    std::size_t below = 0;
    std::size_t pos_below = 0;
    Threshold best{0.0, objective, -1.0};
    auto consider = [&](double t) {
        while (below < sorted.size() && sorted[below].score < t) {
            pos_below += sorted[below].positive ? 1 : 0;
            ++below;
        }
        const std::size_t fn = pos_below;
        const std::size_t tn = below - pos_below;
        const std::size_t tp = positives - fn;
        const std::size_t fp = negatives - tn;
        const double value = objective_value(objective, tp, fp, fn, tn);
        if (value > best.objective_value) best = {t, objective, value};
    };

    consider(0.0);
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].score != sorted[i - 1].score) {
            const double mid = 0.5 * (sorted[i - 1].score + sorted[i].score);
            if (mid > 0.0 && mid < 1.0) consider(mid);
        }
    }
    consider(1.0);
    return best;
}

}  // namespace surrogate::core
