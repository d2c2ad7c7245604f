#include "surrogate/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>

#include "surrogate/errors.hpp"

namespace surrogate::predictor {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
    if (z > 0.0) return z + std::log1p(std::exp(-z));
    return std::log1p(std::exp(z));
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw DomainError("learning_rate must be > 0");
    if (!(l2_penalty >= 0.0) || !std::isfinite(l2_penalty)) throw DomainError("l2_penalty must be >= 0");
    if (max_epochs < 1) throw DomainError("max_epochs must be >= 1");
    if (!(tolerance > 0.0)) throw DomainError("tolerance must be > 0");
}

std::vector<double> feature_means(std::span<const LabeledFeatures> data) {
    if (data.empty()) return {};
    const std::size_t d = data.front().x.size();
    std::vector<double> sum(d, 0.0);
    std::vector<std::size_t> seen(d, 0);
    for (const auto& ex : data) {
        if (ex.x.size() != d) throw DimensionMismatch("training rows differ in dimension");
        for (std::size_t j = 0; j < d; ++j) {
            if (!ex.x.missing(j)) {
                sum[j] += ex.x[j];
                ++seen[j];
            }
        }
    }
    for (std::size_t j = 0; j < d; ++j) sum[j] = seen[j] ? sum[j] / static_cast<double>(seen[j]) : 0.0;
    return sum;
}

Design make_design(std::span<const LabeledFeatures> data, std::span<const double> means) {
    Design design;
    design.rows = data.size();
    design.cols = means.size();
    design.x.reserve(design.rows * design.cols);
    design.y.reserve(design.rows);
    for (const auto& ex : data) {
        const auto row = ex.x.imputed(means);
        design.x.insert(design.x.end(), row.begin(), row.end());
        design.y.push_back(ex.label ? 1.0 : 0.0);
    }
    return design;
}

double logistic_loss(const Design& design, std::span<const double> weights, double bias, double l2_penalty) {
    double nll = 0.0;
    for (std::size_t i = 0; i < design.rows; ++i) {
        const double z = dot(design.row(i), weights) + bias;
        nll += softplus(z) - design.y[i] * z;
    }
    nll /= static_cast<double>(design.rows);
    return nll + 0.5 * l2_penalty * dot(weights, weights);
}

double Gradient::max_abs() const noexcept {
    double m = std::abs(bias);
    for (double g : weights) m = std::max(m, std::abs(g));
    return m;
}

Gradient logistic_gradient(const Design& design, std::span<const double> weights, double bias,
                           double l2_penalty) {
    Gradient g;
    g.weights.assign(design.cols, 0.0);
    for (std::size_t i = 0; i < design.rows; ++i) {
        const auto row = design.row(i);
        const double residual = sigmoid(dot(row, weights) + bias) - design.y[i];
        for (std::size_t j = 0; j < design.cols; ++j) g.weights[j] += residual * row[j];
        g.bias += residual;
    }
    const double n = static_cast<double>(design.rows);
    for (std::size_t j = 0; j < design.cols; ++j) g.weights[j] = g.weights[j] / n + l2_penalty * weights[j];
    g.bias /= n;
    return g;
}

LogisticModel fit_logistic(std::span<const LabeledFeatures> data, const TrainConfig& cfg, FitTrace* trace) {
    cfg.validate();
    if (data.empty()) throw EmptyData("no training examples");
    const auto positives = std::count_if(data.begin(), data.end(), [](const auto& ex) { return ex.label; });
    if (positives == 0 || static_cast<std::size_t>(positives) == data.size()) {
        throw SingleClassData("training labels contain a single class");
    }

    LogisticModel model;
    model.config = cfg;
    model.trained_on = data.size();
    model.feature_means = feature_means(data);
    model.weights.assign(model.feature_means.size(), 0.0);
    const Design design = make_design(data, model.feature_means);

    if (trace) trace->loss.clear();
    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        const double loss = logistic_loss(design, model.weights, model.bias, cfg.l2_penalty);
        if (!std::isfinite(loss)) {
            throw NonFiniteLoss("loss diverged at epoch " + std::to_string(epoch) +
                                "; reduce the learning rate");
        }
        if (trace) trace->loss.push_back(loss);
        const Gradient g = logistic_gradient(design, model.weights, model.bias, cfg.l2_penalty);
        if (g.max_abs() < cfg.tolerance) {
            model.converged = true;
            break;
        }
        for (std::size_t j = 0; j < model.weights.size(); ++j) model.weights[j] -= cfg.learning_rate * g.weights[j];
        model.bias -= cfg.learning_rate * g.bias;
        model.epochs_run = epoch + 1;
    }
    for (double w : model.weights) {
        if (!std::isfinite(w)) throw NonFiniteLoss("weights diverged");
    }
    return model;
}

core::Probability predict_proba(const LogisticModel& model, const FeatureVector& x) {
    if (x.size() != model.dimension()) {
        throw DimensionMismatch("model expects " + std::to_string(model.dimension()) + " features, got " +
                                std::to_string(x.size()));
    }
    const auto row = x.imputed(model.feature_means);
    // sigmoid rounds to exactly 0 or 1 for large |z|; keep the output open
    const double p = sigmoid(dot(row, model.weights) + model.bias);
    return core::Probability(std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0)));
}

HistogramModel::HistogramModel(double lo, double hi, std::vector<std::size_t> ones, std::vector<std::size_t> counts)
    : lo_(lo), hi_(hi), ones_(std::move(ones)), counts_(std::move(counts)) {
    if (counts_.size() < 2 || ones_.size() != counts_.size()) throw DomainError("histogram needs >= 2 bins");
    if (!(hi_ > lo_) || !std::isfinite(lo_) || !std::isfinite(hi_)) throw DomainError("histogram range is empty");
    for (std::size_t b = 0; b < counts_.size(); ++b) {
        if (ones_[b] > counts_[b]) throw DomainError("bin has more ones than samples");
    }
}

std::size_t HistogramModel::bin_of(double x2) const {
    if (std::isnan(x2)) throw DomainError("NaN x2");
    if (x2 < lo_) return 0;
    const double pos = (x2 - lo_) / (hi_ - lo_) * static_cast<double>(bins());
    if (!(pos < static_cast<double>(bins()))) return bins() - 1;
    return std::min(static_cast<std::size_t>(pos), bins() - 1);
}

core::Probability HistogramModel::estimate_bin(std::size_t bin) const {
    return core::Probability((static_cast<double>(ones_.at(bin)) + 1.0) / (static_cast<double>(counts_.at(bin)) + 2.0));
}

core::Probability HistogramModel::estimate(double x2) const {
    return estimate_bin(bin_of(x2));
}

core::Probability HistogramModel::pooled_estimate() const {
    std::size_t ones = 0;
    std::size_t total = 0;
    for (std::size_t b = 0; b < bins(); ++b) {
        ones += ones_[b];
        total += counts_[b];
    }
    return core::Probability((static_cast<double>(ones) + 1.0) / (static_cast<double>(total) + 2.0));
}

HistogramModel fit_histogram(std::span<const ScalarSample> data, std::size_t bins, double lo, double hi) {
    if (data.empty()) throw EmptyData("no samples for histogram");
    if (bins < 2) throw DomainError("histogram needs >= 2 bins");
    // Construct empty first so the range is validated once.
    HistogramModel empty(lo, hi, std::vector<std::size_t>(bins, 0), std::vector<std::size_t>(bins, 0));
    std::vector<std::size_t> ones(bins, 0);
    std::vector<std::size_t> counts(bins, 0);
    for (const auto& s : data) {
        if (!std::isfinite(s.x2)) throw DomainError("non-finite x2");
        const std::size_t b = empty.bin_of(s.x2);
        ++counts[b];
        if (s.x1) ++ones[b];
    }
    return HistogramModel(lo, hi, std::move(ones), std::move(counts));
}

core::X1Predictor as_predictor(LogisticModel model) {
    auto shared = std::make_shared<const LogisticModel>(std::move(model));
    return [shared](const FeatureVector& x) { return predict_proba(*shared, x).value(); };
}

core::X1Predictor as_predictor(HistogramModel model) {
    auto shared = std::make_shared<const HistogramModel>(std::move(model));
    return [shared](const FeatureVector& x) {
        if (x.size() == 0 || x.missing(0)) return shared->pooled_estimate().value();
        return shared->estimate(x[0]).value();
    };
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
    j = nlohmann::json{{"learning_rate", cfg.learning_rate},
                       {"l2_penalty", cfg.l2_penalty},
                       {"max_epochs", cfg.max_epochs},
                       {"tolerance", cfg.tolerance},
                       {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.l2_penalty = j.value("l2_penalty", cfg.l2_penalty);
    cfg.max_epochs = j.value("max_epochs", cfg.max_epochs);
    cfg.tolerance = j.value("tolerance", cfg.tolerance);
    cfg.seed = j.value("seed", cfg.seed);
}

void to_json(nlohmann::json& j, const LogisticModel& model) {
    j = nlohmann::json{{"type", "logistic"},
                       {"weights", model.weights},
                       {"bias", model.bias},
                       {"feature_means", model.feature_means},
                       {"trained_on", model.trained_on},
                       {"epochs_run", model.epochs_run},
                       {"converged", model.converged},
                       {"config", model.config}};
}

LogisticModel logistic_from_json(const nlohmann::json& j) {
    try {
        if (j.at("type") != "logistic") throw DomainError("not a logistic model document");
        LogisticModel m;
        m.weights = j.at("weights").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.feature_means = j.at("feature_means").get<std::vector<double>>();
        m.trained_on = j.value("trained_on", std::size_t{0});
        m.epochs_run = j.value("epochs_run", 0);
        m.converged = j.value("converged", false);
        if (j.contains("config")) m.config = j.at("config").get<TrainConfig>();
        if (m.weights.size() != m.feature_means.size()) {
            throw DimensionMismatch("weights and feature_means differ in length");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed logistic model: ") + e.what());
    }
}

void to_json(nlohmann::json& j, const HistogramModel& model) {
    j = nlohmann::json{{"type", "histogram"},
                       {"lo", model.lo()},
                       {"hi", model.hi()},
                       {"ones", model.ones()},
                       {"counts", model.counts()}};
}

HistogramModel histogram_from_json(const nlohmann::json& j) {
    try {
        if (j.at("type") != "histogram") throw DomainError("not a histogram model document");
        return HistogramModel(j.at("lo").get<double>(), j.at("hi").get<double>(),
                              j.at("ones").get<std::vector<std::size_t>>(),
                              j.at("counts").get<std::vector<std::size_t>>());
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("malformed histogram model: ") + e.what());
    }
}

}  // namespace surrogate::predictor
