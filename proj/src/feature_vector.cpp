#include "surrogate/feature_vector.hpp"

#include <cmath>
#include <string>

#include "surrogate/errors.hpp"

namespace surrogate {

namespace {

void check_finite(const std::vector<double>& values, const std::vector<bool>& missing) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!missing[i] && !std::isfinite(values[i])) {
            throw DomainError("feature " + std::to_string(i) + " is not finite");
        }
    }
}

}  // namespace

FeatureVector::FeatureVector(std::vector<double> values)
    : values_(std::move(values)), missing_(values_.size(), false) {
    check_finite(values_, missing_);
}

FeatureVector::FeatureVector(std::vector<double> values, std::vector<bool> missing)
    : values_(std::move(values)), missing_(std::move(missing)) {
    if (values_.size() != missing_.size()) {
        throw DimensionMismatch("values and missing mask differ in length");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (missing_[i]) values_[i] = 0.0;
    }
    check_finite(values_, missing_);
}

FeatureVector FeatureVector::from_optional(std::span<const std::optional<double>> values) {
    std::vector<double> v(values.size(), 0.0);
    std::vector<bool> m(values.size(), false);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) {
            v[i] = *values[i];
        } else {
            m[i] = true;
        }
    }
    return FeatureVector(std::move(v), std::move(m));
}

FeatureVector FeatureVector::all_missing(std::size_t dim) {
    return FeatureVector(std::vector<double>(dim, 0.0), std::vector<bool>(dim, true));
}

std::optional<double> FeatureVector::get(std::size_t i) const {
    if (missing_[i]) return std::nullopt;
    return values_[i];
}

std::vector<double> FeatureVector::imputed(std::span<const double> fill) const {
    if (fill.size() != values_.size()) {
        throw DimensionMismatch("imputation vector has " + std::to_string(fill.size()) +
                                " entries, features have " + std::to_string(values_.size()));
    }
    std::vector<double> out = values_;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (missing_[i]) out[i] = fill[i];
    }
    return out;
}

FeatureVector FeatureVector::concat(const FeatureVector& other) const {
    std::vector<double> v = values_;
    std::vector<bool> m = missing_;
    v.insert(v.end(), other.values_.begin(), other.values_.end());
    m.insert(m.end(), other.missing_.begin(), other.missing_.end());
    return FeatureVector(std::move(v), std::move(m));
}

}  // namespace surrogate
