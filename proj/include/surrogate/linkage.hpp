#pragma once

// Two-database record linkage with graduation-year equality as the surrogate
// label x1: blocking on last name, pairwise similarity features, surrogate
// scoring, and per-block argmax decisions. A supervised logistic matcher is
// provided as the labeled baseline.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "surrogate/core_math.hpp"
#include "surrogate/feature_vector.hpp"
#include "surrogate/predictor.hpp"
#include "surrogate/records.hpp"

namespace surrogate::linkage {

std::size_t levenshtein(std::string_view a, std::string_view b);

// 1 - levenshtein / max(|a|, |b|); two empty strings are identical.
double edit_similarity(std::string_view a, std::string_view b);

// Order of the similarity block x2.
enum PairFeature : std::size_t {
    kFirstNameSimilarity = 0,
    kMiddleInitialEqual,
    kStreetSimilarity,
    kPhoneEqual,
    kSpecialtyEqual,
    kPairFeatureCount,
};

struct PairFeatures {
    std::optional<core::X1> x1;  // graduation-year equality, absent if either year is
    FeatureVector x2;
};

PairFeatures extract_features(const LinkageRecord& update, const LinkageRecord& candidate);

// Master records grouped by exact last name.
class MasterIndex {
public:
    explicit MasterIndex(std::span<const LinkageRecord> master);

    // Positions (into the master span) of records sharing the update's last
    // name, in master order.
    std::span<const std::size_t> block(const LinkageRecord& update) const;

    const LinkageRecord& record(std::size_t pos) const { return master_[pos]; }

private:
    std::span<const LinkageRecord> master_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_last_;
};

// All master records whose last name equals the update's.
std::vector<LinkageRecord> block(const LinkageRecord& update, std::span<const LinkageRecord> master);

// x1=0 -> 0; x1=1 -> P(y=1|x1=1,x2); x1 missing -> P(y=1|x1=1,x2) P(x1=1|x2).
// The model must be in HundredPercentRecall mode.
core::Probability score_pair(const PairFeatures& features, const core::SurrogateModel& model);

// Probability that two distinct physicians share a graduation year, from the
// year frequencies: sum over years of p_year^2. Throws InsufficientData when
// fewer than two records carry a year.
core::Probability estimate_p_x1_given_y0(std::span<const LinkageRecord> master);

struct MatchDecision {
    RecordId update_id = 0;
    std::optional<RecordId> master_id;
    double score = 0.0;

    friend bool operator==(const MatchDecision&, const MatchDecision&) = default;
};

struct ScoredCandidate {
    RecordId master_id = 0;
    double score = 0.0;
};

struct ScoredBlock {
    RecordId update_id = 0;
    std::vector<ScoredCandidate> candidates;

    // Highest score, smallest master id on ties; nullptr for an empty block.
    const ScoredCandidate* best() const;
};

struct MatcherConfig {
    predictor::TrainConfig train;
    double clamp_epsilon = core::kDefaultClampEpsilon;
    // When unset, the threshold is selected on the labeled split.
    std::optional<double> fixed_threshold;
    double labeled_fraction = 0.2;
    core::Objective objective = core::Objective::F1;
    std::uint64_t split_seed = 7;
};

struct MatchResult {
    std::vector<MatchDecision> decisions;  // one per update record, in update order
    std::vector<ScoredBlock> blocks;
    double threshold = 0.5;
    std::vector<RecordId> labeled_ids;
    // Surrogate matcher only.
    std::optional<double> p_x1_given_y0;
    std::optional<predictor::LogisticModel> model;
};

// Deterministic selection of round(fraction * n) update ids with truth labels.
std::vector<RecordId> labeled_split(std::span<const TruthEntry> truth, double fraction, std::uint64_t seed);

// Per block: the best candidate if its score reaches `threshold`, else none.
std::vector<MatchDecision> decide(std::span<const ScoredBlock> blocks, double threshold);

// Threshold on best-candidate scores maximizing the objective over the given
// labeled updates, where "positive" means the best candidate is the true
// match. Falls back to 0 (1) when every labeled best candidate is right
// (wrong).
double select_block_threshold(std::span<const ScoredBlock> blocks, std::span<const TruthEntry> truth,
                              std::span<const RecordId> labeled_ids, core::Objective objective);

// Surrogate matcher: fits P(x1|x2) on every candidate pair with a known x1,
// estimates P(x1=1|y=0) from master year counts, scores, and decides per
// block. Uses truth only for threshold selection on the labeled split.
MatchResult run_matcher(const LinkageCorpus& corpus, const MatcherConfig& cfg);

// Supervised logistic matcher on (x1, x2) trained on the pairs of the labeled
// split. Throws SingleClassData when those pairs hold a single label.
MatchResult run_supervised_baseline(const LinkageCorpus& corpus, double labeled_fraction, const MatcherConfig& cfg);

void write_decisions_csv(std::ostream& out, std::span<const MatchDecision> decisions);
std::vector<MatchDecision> read_decisions_csv(std::istream& in);

void to_json(nlohmann::json& j, const MatcherConfig& cfg);
void from_json(const nlohmann::json& j, MatcherConfig& cfg);

}  // namespace surrogate::linkage
