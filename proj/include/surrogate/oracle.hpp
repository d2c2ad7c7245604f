#pragma once

// Exact probability computations over small discrete joints P(x1, x2, y)
// with x1, y binary and x2 in {0..K-1}. Used as ground truth for every
// surrogate formula.

#include <array>
#include <cstddef>
#include <vector>

#include <json.hpp>

#include "surrogate/core_math.hpp"

namespace surrogate::oracle {

using core::ClassConditionalX1;
using core::Probability;

inline constexpr double kSumTolerance = 1e-12;

// Full joint table, flat row-major over (x1, x2, y).
class DiscreteJoint {
public:
    // Throws InvalidSimplex when an entry is negative/non-finite or the
    // entries do not sum to 1 within kSumTolerance.
    DiscreteJoint(std::size_t x2_cardinality, std::vector<double> table);

    std::size_t x2_cardinality() const noexcept { return k_; }
    const std::vector<double>& table() const noexcept { return table_; }

    double at(int x1, std::size_t x2, int y) const { return table_[index(x1, x2, y)]; }

    static std::size_t index(int x1, std::size_t x2, int y, std::size_t k) {
        return (static_cast<std::size_t>(x1) * k + x2) * 2 + static_cast<std::size_t>(y);
    }

    double marginal_x2(std::size_t x2) const;
    double marginal_x1_x2(int x1, std::size_t x2) const;
    double marginal_y(int y) const;
    double marginal_x1_y(int x1, int y) const;

    friend bool operator==(const DiscreteJoint&, const DiscreteJoint&) = default;

private:
    std::size_t index(int x1, std::size_t x2, int y) const { return index(x1, x2, y, k_); }

    std::size_t k_;
    std::vector<double> table_;
};

// Parameters of a joint in which x1 and x2 are independent given y.
struct CIJointSpec {
    double p_y0;                              // P(y=0)
    std::array<double, 2> p_x1_given_y;       // P(x1=1|y=0), P(x1=1|y=1)
    std::array<std::vector<double>, 2> p_x2_given_y;  // each a simplex over K cells
};

// table[x1,x2,y] = P(y) P(x1|y) P(x2|y). Throws InvalidSimplex.
DiscreteJoint joint_from_ci_spec(const CIJointSpec& spec);

// Exact P(x1=1 | x2). Throws ZeroMarginal when P(x2)=0.
Probability cond_x1_given_x2(const DiscreteJoint& joint, std::size_t x2);

// Exact P(y=0 | x1, x2). Throws ZeroMarginal when P(x1,x2)=0.
Probability cond_y_given_x1_x2(const DiscreteJoint& joint, int x1, std::size_t x2);

// Exact P(y=1 | x2). Throws ZeroMarginal.
Probability cond_y1_given_x2(const DiscreteJoint& joint, std::size_t x2);

// Exact P(x1=1|y=0), P(x1=1|y=1). Throws ZeroMarginal when a class is absent.
// The result is not checked for distinctness; see core::require_distinct.
ClassConditionalX1 cond_x1_given_y(const DiscreteJoint& joint);

// Largest |P(x1,x2|y) - P(x1|y)P(x2|y)| over all cells.
double ci_violation(const DiscreteJoint& joint);

// Accuracy of predicting argmax_y P(y|x1,x2) in every cell.
double bayes_accuracy(const DiscreteJoint& joint);

// Accuracy of an arbitrary cell-wise decision rule, decide(x1, x2) -> y.
template <typename Decide>
double decision_accuracy(const DiscreteJoint& joint, Decide&& decide) {
    double acc = 0.0;
    for (int x1 = 0; x1 < 2; ++x1) {
        for (std::size_t x2 = 0; x2 < joint.x2_cardinality(); ++x2) {
            const int y = decide(x1, x2) ? 1 : 0;
            acc += joint.at(x1, x2, y);
        }
    }
    return acc;
}

void to_json(nlohmann::json& j, const DiscreteJoint& joint);
DiscreteJoint joint_from_json(const nlohmann::json& j);

}  // namespace surrogate::oracle
