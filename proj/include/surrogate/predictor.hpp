#pragma once

// Base learners for P(x1=1 | x2): full-batch logistic regression with mean
// imputation, and an add-one smoothed histogram over a scalar x2.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "surrogate/core_math.hpp"
#include "surrogate/feature_vector.hpp"

namespace surrogate::predictor {

struct TrainConfig {
    double learning_rate = 0.1;
    double l2_penalty = 1e-4;
    int max_epochs = 5000;
    double tolerance = 1e-7;
    std::uint64_t seed = 0;

    // Throws DomainError on out-of-range fields.
    void validate() const;
};

struct LabeledFeatures {
    FeatureVector x;
    bool label = false;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<double> feature_means;
    std::size_t trained_on = 0;
    int epochs_run = 0;
    bool converged = false;
    TrainConfig config;

    std::size_t dimension() const noexcept { return weights.size(); }
};

// Dense imputed design matrix (row-major) with 0/1 targets.
struct Design {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> x;
    std::vector<double> y;

    std::span<const double> row(std::size_t i) const { return {x.data() + i * cols, cols}; }
};

// Per-feature mean over non-missing entries; 0 for a feature never observed.
std::vector<double> feature_means(std::span<const LabeledFeatures> data);

Design make_design(std::span<const LabeledFeatures> data, std::span<const double> means);

// Mean negative log-likelihood plus (l2/2)*|w|^2; the bias is not penalized.
double logistic_loss(const Design& design, std::span<const double> weights, double bias, double l2_penalty);

struct Gradient {
    std::vector<double> weights;
    double bias = 0.0;

    double max_abs() const noexcept;
};

Gradient logistic_gradient(const Design& design, std::span<const double> weights, double bias,
                           double l2_penalty);

// Optional per-epoch record of the training objective.
struct FitTrace {
    std::vector<double> loss;
};

// Full-batch gradient descent from zero weights. Stops when the gradient
// max-norm drops below cfg.tolerance or after cfg.max_epochs.
// Throws EmptyData, SingleClassData, DimensionMismatch, NonFiniteLoss.
LogisticModel fit_logistic(std::span<const LabeledFeatures> data, const TrainConfig& cfg = {},
                           FitTrace* trace = nullptr);

// sigmoid(w . x_imputed + b). Throws DimensionMismatch.
core::Probability predict_proba(const LogisticModel& model, const FeatureVector& x);

struct ScalarSample {
    double x2 = 0.0;
    bool x1 = false;
};

class HistogramModel {
public:
    HistogramModel(double lo, double hi, std::vector<std::size_t> ones, std::vector<std::size_t> counts);

    std::size_t bins() const noexcept { return counts_.size(); }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    const std::vector<std::size_t>& ones() const noexcept { return ones_; }
    const std::vector<std::size_t>& counts() const noexcept { return counts_; }

    // Bin index; values outside [lo, hi) land in the edge bins.
    std::size_t bin_of(double x2) const;

    // (ones + 1) / (count + 2) for the bin.
    core::Probability estimate_bin(std::size_t bin) const;
    core::Probability estimate(double x2) const;

    // Same smoothing over every sample, for inputs whose x2 is missing.
    core::Probability pooled_estimate() const;

private:
    double lo_;
    double hi_;
    std::vector<std::size_t> ones_;
    std::vector<std::size_t> counts_;
};

// Throws EmptyData when `data` is empty, DomainError for bins < 2, an empty
// range or non-finite x2.
HistogramModel fit_histogram(std::span<const ScalarSample> data, std::size_t bins, double lo, double hi);

// Adapters so either model can back a core::SurrogateModel. The histogram
// reads the first feature and falls back to the pooled estimate when it is
// missing.
core::X1Predictor as_predictor(LogisticModel model);
core::X1Predictor as_predictor(HistogramModel model);

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);
void to_json(nlohmann::json& j, const LogisticModel& model);
LogisticModel logistic_from_json(const nlohmann::json& j);
void to_json(nlohmann::json& j, const HistogramModel& model);
HistogramModel histogram_from_json(const nlohmann::json& j);

}  // namespace surrogate::predictor
