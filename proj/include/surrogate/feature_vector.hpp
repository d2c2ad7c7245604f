#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace surrogate {

// Real-valued features with a parallel missing mask. Missing slots keep a
// value of 0.0 so the vector stays dense.
class FeatureVector {
public:
    FeatureVector() = default;

    // Every entry present.
    explicit FeatureVector(std::vector<double> values);

    FeatureVector(std::vector<double> values, std::vector<bool> missing);

    // Build from optionals; nullopt becomes a missing slot.
    static FeatureVector from_optional(std::span<const std::optional<double>> values);

    // All entries missing.
    static FeatureVector all_missing(std::size_t dim);

    std::size_t size() const noexcept { return values_.size(); }
    bool missing(std::size_t i) const { return missing_[i]; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::optional<double> get(std::size_t i) const;

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<bool>& missing_mask() const noexcept { return missing_; }

    // Copy with missing entries replaced by `fill[i]`.
    std::vector<double> imputed(std::span<const double> fill) const;

    FeatureVector concat(const FeatureVector& other) const;

    friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

private:
    std::vector<double> values_;
    std::vector<bool> missing_;
};

}  // namespace surrogate
