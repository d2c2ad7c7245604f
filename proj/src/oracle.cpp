#include "surrogate/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <json.hpp>

#include "surrogate/errors.hpp"

namespace surrogate::oracle {

namespace {

void check_simplex(const std::vector<double>& v, const char* what) {
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0) || !std::isfinite(x)) {
            throw InvalidSimplex(std::string(what) + " has a negative or non-finite entry");
        }
        sum += x;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        throw InvalidSimplex(std::string(what) + " sums to " + std::to_string(sum));
    }
}

void check_unit(double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidSimplex(std::string(what) + " outside [0,1]");
}

}  // namespace

DiscreteJoint::DiscreteJoint(std::size_t x2_cardinality, std::vector<double> table)
    : k_(x2_cardinality), table_(std::move(table)) {
    if (k_ == 0) throw InvalidSimplex("x2 cardinality must be positive");
    if (table_.size() != 4 * k_) {
        throw InvalidSimplex("table has " + std::to_string(table_.size()) + " entries, expected " +
                             std::to_string(4 * k_));
    }
    check_simplex(table_, "joint table");
}

double DiscreteJoint::marginal_x2(std::size_t x2) const {
    return marginal_x1_x2(0, x2) + marginal_x1_x2(1, x2);
}

double DiscreteJoint::marginal_x1_x2(int x1, std::size_t x2) const {
    return at(x1, x2, 0) + at(x1, x2, 1);
}

double DiscreteJoint::marginal_y(int y) const {
    return marginal_x1_y(0, y) + marginal_x1_y(1, y);
}

double DiscreteJoint::marginal_x1_y(int x1, int y) const {
    double s = 0.0;
    for (std::size_t x2 = 0; x2 < k_; ++x2) s += at(x1, x2, y);
    return s;
}

DiscreteJoint joint_from_ci_spec(const CIJointSpec& spec) {
    check_unit(spec.p_y0, "P(y=0)");
    check_unit(spec.p_x1_given_y[0], "P(x1=1|y=0)");
    check_unit(spec.p_x1_given_y[1], "P(x1=1|y=1)");
    const std::size_t k = spec.p_x2_given_y[0].size();
    if (k == 0 || spec.p_x2_given_y[1].size() != k) {
        throw InvalidSimplex("P(x2|y) vectors must share a positive length");
    }
    check_simplex(spec.p_x2_given_y[0], "P(x2|y=0)");
    check_simplex(spec.p_x2_given_y[1], "P(x2|y=1)");

    const std::array<double, 2> p_y{spec.p_y0, 1.0 - spec.p_y0};
    std::vector<double> table(4 * k);
    for (int x1 = 0; x1 < 2; ++x1) {
        for (std::size_t x2 = 0; x2 < k; ++x2) {
            for (int y = 0; y < 2; ++y) {
                const double px1 = x1 == 1 ? spec.p_x1_given_y[y] : 1.0 - spec.p_x1_given_y[y];
                table[DiscreteJoint::index(x1, x2, y, k)] = p_y[y] * px1 * spec.p_x2_given_y[y][x2];
            }
        }
    }
    // Rounding can leave the sum a few ulps off; renormalize so the invariant
    // holds bit-tight.
    double sum = 0.0;
    for (double v : table) sum += v;
    for (double& v : table) v /= sum;
    return DiscreteJoint(k, std::move(table));
}

Probability cond_x1_given_x2(const DiscreteJoint& joint, std::size_t x2) {
    const double px2 = joint.marginal_x2(x2);
    if (!(px2 > 0.0)) throw ZeroMarginal("P(x2=" + std::to_string(x2) + ") is zero");
    return Probability(std::min(1.0, joint.marginal_x1_x2(1, x2) / px2));
}

Probability cond_y_given_x1_x2(const DiscreteJoint& joint, int x1, std::size_t x2) {
    const double denom = joint.marginal_x1_x2(x1, x2);
    if (!(denom > 0.0)) {
        throw ZeroMarginal("P(x1=" + std::to_string(x1) + ", x2=" + std::to_string(x2) + ") is zero");
    }
    return Probability(std::min(1.0, joint.at(x1, x2, 0) / denom));
}

Probability cond_y1_given_x2(const DiscreteJoint& joint, std::size_t x2) {
    const double px2 = joint.marginal_x2(x2);
    if (!(px2 > 0.0)) throw ZeroMarginal("P(x2=" + std::to_string(x2) + ") is zero");
    return Probability(std::min(1.0, (joint.at(0, x2, 1) + joint.at(1, x2, 1)) / px2));
}

ClassConditionalX1 cond_x1_given_y(const DiscreteJoint& joint) {
    const double py0 = joint.marginal_y(0);
    const double py1 = joint.marginal_y(1);
    if (!(py0 > 0.0) || !(py1 > 0.0)) throw ZeroMarginal("a class has zero probability");
    return {Probability(std::min(1.0, joint.marginal_x1_y(1, 0) / py0)),
            Probability(std::min(1.0, joint.marginal_x1_y(1, 1) / py1))};
}

double ci_violation(const DiscreteJoint& joint) {
    double worst = 0.0;
    for (int y = 0; y < 2; ++y) {
        const double py = joint.marginal_y(y);
        if (!(py > 0.0)) continue;
        for (int x1 = 0; x1 < 2; ++x1) {
            const double px1 = joint.marginal_x1_y(x1, y) / py;
            for (std::size_t x2 = 0; x2 < joint.x2_cardinality(); ++x2) {
                const double px2 = (joint.at(0, x2, y) + joint.at(1, x2, y)) / py;
                const double both = joint.at(x1, x2, y) / py;
                worst = std::max(worst, std::abs(both - px1 * px2));
            }
        }
    }
    return worst;
}

double bayes_accuracy(const DiscreteJoint& joint) {
    double acc = 0.0;
    for (int x1 = 0; x1 < 2; ++x1) {
        for (std::size_t x2 = 0; x2 < joint.x2_cardinality(); ++x2) {
            acc += std::max(joint.at(x1, x2, 0), joint.at(x1, x2, 1));
        }
    }
    return acc;
}

void to_json(nlohmann::json& j, const DiscreteJoint& joint) {
    j = nlohmann::json{{"dims", {2, joint.x2_cardinality(), 2}},
                       {"order", "x1,x2,y"},
                       {"table", joint.table()}};
}

DiscreteJoint joint_from_json(const nlohmann::json& j) {
    try {
        const auto dims = j.at("dims").get<std::vector<std::size_t>>();
        if (dims.size() != 3 || dims[0] != 2 || dims[2] != 2) {
            throw InvalidSimplex("dims must be [2, K, 2]");
        }
        return DiscreteJoint(dims[1], j.at("table").get<std::vector<double>>());
    } catch (const nlohmann::json::exception& e) {
        throw InvalidSimplex(std::string("malformed joint document: ") + e.what());
    }
}

}  // namespace surrogate::oracle
