#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "surrogate/core_math.hpp"
#include "surrogate/linkage.hpp"
#include "surrogate/records.hpp"

namespace surrogate::eval {

struct PrecisionRecall {
    std::optional<double> precision;  // none when nothing was emitted
    double recall = 0.0;
    std::size_t correct = 0;
    std::size_t emitted = 0;
    std::size_t matchable = 0;

    std::optional<double> f1() const;
};

// Evaluated over the update ids present in `decisions`. Unmatchable updates
// (no master id in truth) never count as correct, but an emitted match for
// one counts against precision. Throws DomainError when truth lacks an id.
PrecisionRecall compute_pr(std::span<const linkage::MatchDecision> decisions, std::span<const TruthEntry> truth);

struct SweepPoint {
    double threshold = 0.0;
    std::optional<double> precision;
    double recall = 0.0;

    friend bool operator==(const SweepPoint&, const SweepPoint&) = default;
};

// Precision/recall of "positive iff score >= t" at `grid` evenly spaced
// thresholds from 0 to 1. Throws DomainError for grid < 2.
std::vector<SweepPoint> threshold_sweep(std::span<const core::LabeledScore> scored, std::size_t grid);

struct EvalReport {
    std::string experiment;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> threshold;
    std::vector<SweepPoint> sweep;
    std::map<std::string, double> metrics;
    std::map<std::string, bool> checks;
    nlohmann::json config_echo;
    std::uint64_t seed = 0;

    bool all_checks_pass() const;
};

void to_json(nlohmann::json& j, const SweepPoint& p);
void to_json(nlohmann::json& j, const EvalReport& report);

// Deterministic serialization used for golden comparisons.
std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace surrogate::eval
