#pragma once

// Posterior reconstruction from a surrogate feature.
//
// With features split into a binary block x1 and a block x2 that are
// independent given the class y, the class posterior is a closed-form
// function of P(x1|x2), which can be learned from unlabeled data, and of
// P(x1|y), which only needs a handful of labels:
//
//   P(y=0|x1,x2) = P(x1|y=0)/P(x1|x2) * (P(x1|y=1) - P(x1|x2)) / (P(x1|y=1) - P(x1|y=0))
//
// When x1 never takes the value 0 on positives ("100% recall" surrogate) this
// collapses to a strictly increasing function of P(x1=0|x2):
//
//   P(y=0|x1=1,x2) = P(x1=1|y=0)/P(x1=0|y=0) * P(x1=0|x2) / (1 - P(x1=0|x2))

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

#include "surrogate/feature_vector.hpp"

namespace surrogate::core {

inline constexpr double kDefaultClampEpsilon = 1e-6;
inline constexpr double kMaxClampEpsilon = 1e-3;

// A real in [0,1]. Construction from anything else throws DomainError.
class Probability {
public:
    constexpr Probability() = default;
    explicit Probability(double value);

    constexpr double value() const noexcept { return value_; }
    Probability complement() const { return Probability(1.0 - value_); }

    friend constexpr auto operator<=>(Probability, Probability) = default;

private:
    double value_ = 0.0;
};

enum class X1 : std::uint8_t { Zero = 0, One = 1 };

// P(x1=1|y=0) and P(x1=1|y=1).
struct ClassConditionalX1 {
    Probability p_x1_given_y0;
    Probability p_x1_given_y1;

    // The same conditionals expressed for the event x1=0.
    ClassConditionalX1 flipped() const;

    double separation() const noexcept;

    friend bool operator==(const ClassConditionalX1&, const ClassConditionalX1&) = default;
};

// Throws DegenerateConditionals when |P(x1|y=1) - P(x1|y=0)| < epsilon.
void require_distinct(const ClassConditionalX1& cond, double epsilon = kDefaultClampEpsilon);

double clamp_open(double p, double epsilon) noexcept;

// Exact closed forms with no clamping or clipping. `p_x1_given_x2` and the
// stored conditionals describe the event x1=1; the functions flip internally
// when `observed` is X1::Zero. Results may leave [0,1] for inputs that are not
// jointly consistent.
double posterior_y0_unclamped(double p_x1_given_x2, const ClassConditionalX1& cond, X1 observed);
double posterior_y1_unclamped(double p_x1_given_x2, const ClassConditionalX1& cond, X1 observed);
double score_special_unclamped(double p_x1eq0_given_x2, const ClassConditionalX1& cond);

// P(y=0 | x1=observed, x2) from P(x1=1|x2) and P(x1=1|y). Inputs are clamped
// to [eps, 1-eps] before division and the result clipped to [0,1].
// Throws DomainError unless 0 < p_x1_given_x2 < 1, and DegenerateConditionals
// when the class conditionals are closer than eps.
Probability posterior_general(Probability p_x1_given_x2, const ClassConditionalX1& cond, X1 observed,
                              double epsilon = kDefaultClampEpsilon);

// P(y=0 | x1=1, x2) under the 100%-recall assumption, as a function of
// P(x1=0|x2). Only cond.p_x1_given_y0 is read.
Probability score_special(Probability p_x1eq0_given_x2, const ClassConditionalX1& cond,
                          double epsilon = kDefaultClampEpsilon);

// P(y=1|x2) = P(y=1|x1=1,x2) * P(x1=1|x2), valid when P(x1=0,y=1) = 0.
Probability score_missing_x1(Probability p_x1eq1_given_x2, Probability posterior_y1_given_x1eq1_x2);

enum class Mode { General, HundredPercentRecall };

// Returns P(x1=1|x2) for a feature vector.
using X1Predictor = std::function<double(const FeatureVector&)>;

// Everything needed to score: conditionals, a fitted P(x1=1|x2) predictor and
// the clamping policy. Immutable after construction.
class SurrogateModel {
public:
    SurrogateModel(ClassConditionalX1 conditionals, X1Predictor predictor, Mode mode,
                   double clamp_epsilon = kDefaultClampEpsilon);

    const ClassConditionalX1& conditionals() const noexcept { return cond_; }
    Mode mode() const noexcept { return mode_; }
    double clamp_epsilon() const noexcept { return epsilon_; }

    // Predictor output clamped to [eps, 1-eps].
    Probability p_x1_given_x2(const FeatureVector& x2) const;

    // P(y=0 | x1, x2). In HundredPercentRecall mode x1=0 yields 1.
    Probability posterior_y0(X1 observed, const FeatureVector& x2) const;

    // P(y=1 | x1=1, x2).
    Probability posterior_y1_given_target(const FeatureVector& x2) const;

    // P(y=1 | x2) with x1 unobserved. Requires HundredPercentRecall.
    Probability posterior_y1_x1_missing(const FeatureVector& x2) const;

private:
    ClassConditionalX1 cond_;
    X1Predictor predictor_;
    Mode mode_;
    double epsilon_;
};

enum class Objective { F1, Accuracy };

std::string_view to_string(Objective objective) noexcept;
Objective objective_from_string(std::string_view name);

struct LabeledScore {
    double score;
    bool positive;
};

struct Threshold {
    double value;
    Objective objective;
    double objective_value;
};

// Threshold maximizing `objective` for the rule "positive iff score >= t".
// Candidates are 0, 1 and the midpoints between consecutive distinct scores;
// ties resolve to the smallest threshold. Throws InsufficientLabels unless
// both labels occur.
Threshold select_threshold(std::span<const LabeledScore> scores, Objective objective = Objective::F1);

}  // namespace surrogate::core
