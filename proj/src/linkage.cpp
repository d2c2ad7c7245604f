#include "surrogate/linkage.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "surrogate/errors.hpp"
#include "surrogate/rng.hpp"

namespace surrogate::linkage {

std::size_t levenshtein(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

double edit_similarity(std::string_view a, std::string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

namespace {

template <typename T, typename F>
std::optional<double> compare(const std::optional<T>& a, const std::optional<T>& b, F&& f) {
    if (!a || !b) return std::nullopt;
    return f(*a, *b);
}

double equal(const auto& a, const auto& b) { return a == b ? 1.0 : 0.0; }

}  // namespace

PairFeatures extract_features(const LinkageRecord& update, const LinkageRecord& candidate) {
    PairFeatures f;
    if (update.grad_year && candidate.grad_year) {
        f.x1 = *update.grad_year == *candidate.grad_year ? core::X1::One : core::X1::Zero;
    }
    auto sim = [](const std::string& a, const std::string& b) { return edit_similarity(a, b); };
    auto eq = [](const auto& a, const auto& b) { return equal(a, b); };
    const std::optional<double> x2[kPairFeatureCount] = {
        compare(update.first, candidate.first, sim),
        compare(update.middle_initial, candidate.middle_initial, eq),
        compare(update.street, candidate.street, sim),
        compare(update.phone, candidate.phone, eq),
        compare(update.specialty, candidate.specialty, eq),
    };
    f.x2 = FeatureVector::from_optional(x2);
    return f;
}

MasterIndex::MasterIndex(std::span<const LinkageRecord> master) : master_(master) {
    for (std::size_t i = 0; i < master.size(); ++i) {
        if (master[i].last.empty()) throw InvalidSpec("master record without last name");
        by_last_[master[i].last].push_back(i);
    }
}

std::span<const std::size_t> MasterIndex::block(const LinkageRecord& update) const {
    const auto it = by_last_.find(update.last);
    if (it == by_last_.end()) return {};
    return it->second;
}

std::vector<LinkageRecord> block(const LinkageRecord& update, std::span<const LinkageRecord> master) {
    std::vector<LinkageRecord> out;
    for (const auto& m : master) {
        if (m.last == update.last) out.push_back(m);
    }
    return out;
}

core::Probability score_pair(const PairFeatures& features, const core::SurrogateModel& model) {
    if (model.mode() != core::Mode::HundredPercentRecall) {
        throw DomainError("linkage scoring needs a 100%-recall surrogate model");
    }
    if (!features.x1) return model.posterior_y1_x1_missing(features.x2);
    if (*features.x1 == core::X1::Zero) return core::Probability(0.0);
    return model.posterior_y1_given_target(features.x2);
}

core::Probability estimate_p_x1_given_y0(std::span<const LinkageRecord> master) {
    std::map<int, std::size_t> counts;
    std::size_t total = 0;
    for (const auto& r : master) {
        if (r.grad_year) {
            ++counts[*r.grad_year];
            ++total;
        }
    }
    if (total < 2) throw InsufficientData("need at least two graduation years");
    double collision = 0.0;
    for (const auto& [year, c] : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        collision += p * p;
    }
    return core::Probability(std::min(1.0, collision));
}

const ScoredCandidate* ScoredBlock::best() const {
    const ScoredCandidate* top = nullptr;
    for (const auto& c : candidates) {
        if (!top || c.score > top->score || (c.score == top->score && c.master_id < top->master_id)) top = &c;
    }
    return top;
}

std::vector<RecordId> labeled_split(std::span<const TruthEntry> truth, double fraction, std::uint64_t seed) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw DomainError("labeled fraction must lie in [0,1]");
    std::vector<RecordId> ids;
    ids.reserve(truth.size());
    for (const auto& t : truth) ids.push_back(t.update_id);
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i) std::swap(ids[i - 1], ids[rng.below(i)]);
    ids.resize(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ids.size()))));
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::vector<MatchDecision> decide(std::span<const ScoredBlock> blocks, double threshold) {
    std::vector<MatchDecision> out;
    out.reserve(blocks.size());
    for (const auto& b : blocks) {
        MatchDecision d{b.update_id, std::nullopt, 0.0};
        if (const auto* top = b.best()) {
            d.score = top->score;
            if (top->score >= threshold) d.master_id = top->master_id;
        }
        out.push_back(d);
    }
    return out;
}

double select_block_threshold(std::span<const ScoredBlock> blocks, std::span<const TruthEntry> truth,
                              std::span<const RecordId> labeled_ids, core::Objective objective) {
    std::unordered_map<RecordId, std::optional<RecordId>> answer;
    for (const auto& t : truth) answer[t.update_id] = t.master_id;
    const std::unordered_set<RecordId> labeled(labeled_ids.begin(), labeled_ids.end());

    std::vector<core::LabeledScore> scores;
    for (const auto& b : blocks) {
        if (!labeled.contains(b.update_id)) continue;
        const auto* top = b.best();
        if (!top) continue;
        const auto it = answer.find(b.update_id);
        const bool right = it != answer.end() && it->second && *it->second == top->master_id;
        scores.push_back({top->score, right});
    }
    const bool any_pos = std::any_of(scores.begin(), scores.end(), [](const auto& s) { return s.positive; });
    const bool any_neg = std::any_of(scores.begin(), scores.end(), [](const auto& s) { return !s.positive; });
    if (!any_neg) return 0.0;
    if (!any_pos) return 1.0;
    return core::select_threshold(scores, objective).value;
}

namespace {

struct PairTable {
    struct Pair {
        std::size_t block;
        RecordId master_id;
        PairFeatures features;
    };
    std::vector<ScoredBlock> blocks;
    std::vector<Pair> pairs;
};

PairTable build_pairs(const LinkageCorpus& corpus) {
    const MasterIndex index(corpus.master);
    PairTable table;
    table.blocks.reserve(corpus.update.size());
    for (const auto& u : corpus.update) {
        const std::size_t b = table.blocks.size();
        table.blocks.push_back({u.id, {}});
        for (std::size_t pos : index.block(u)) {
            const auto& m = index.record(pos);
            table.pairs.push_back({b, m.id, extract_features(u, m)});
        }
    }
    return table;
}

void assign_scores(PairTable& table, const std::vector<double>& scores) {
    for (std::size_t i = 0; i < table.pairs.size(); ++i) {
        const auto& p = table.pairs[i];
        table.blocks[p.block].candidates.push_back({p.master_id, scores[i]});
    }
}

void finish(MatchResult& result, const LinkageCorpus& corpus, const MatcherConfig& cfg) {
    if (cfg.fixed_threshold) {
        result.threshold = *cfg.fixed_threshold;
    } else {
        result.threshold = select_block_threshold(result.blocks, corpus.truth, result.labeled_ids, cfg.objective);
    }
    result.decisions = decide(result.blocks, result.threshold);
}

}  // namespace

MatchResult run_matcher(const LinkageCorpus& corpus, const MatcherConfig& cfg) {
    PairTable table = build_pairs(corpus);

    std::vector<predictor::LabeledFeatures> unlabeled;
    for (const auto& p : table.pairs) {
        if (p.features.x1) unlabeled.push_back({p.features.x2, *p.features.x1 == core::X1::One});
    }
    auto model = predictor::fit_logistic(unlabeled, cfg.train);
    const core::Probability background = estimate_p_x1_given_y0(corpus.master);
    const core::SurrogateModel surrogate({background, core::Probability(1.0)}, predictor::as_predictor(model),
                                         core::Mode::HundredPercentRecall, cfg.clamp_epsilon);

    std::vector<double> scores;
    scores.reserve(table.pairs.size());
    for (const auto& p : table.pairs) scores.push_back(score_pair(p.features, surrogate).value());
    assign_scores(table, scores);

    MatchResult result;
    result.blocks = std::move(table.blocks);
    result.labeled_ids = labeled_split(corpus.truth, cfg.labeled_fraction, cfg.split_seed);
    result.p_x1_given_y0 = background.value();
    result.model = std::move(model);
    finish(result, corpus, cfg);
    return result;
}

namespace {

FeatureVector supervised_features(const PairFeatures& f) {
    FeatureVector x1 = f.x1 ? FeatureVector(std::vector<double>{*f.x1 == core::X1::One ? 1.0 : 0.0})
                            : FeatureVector::all_missing(1);
    return x1.concat(f.x2);
}

}  // namespace

MatchResult run_supervised_baseline(const LinkageCorpus& corpus, double labeled_fraction, const MatcherConfig& cfg) {
    PairTable table = build_pairs(corpus);
    MatchResult result;
    result.labeled_ids = labeled_split(corpus.truth, labeled_fraction, cfg.split_seed);

    std::unordered_map<RecordId, std::optional<RecordId>> answer;
    for (const auto& t : corpus.truth) answer[t.update_id] = t.master_id;
    const std::unordered_set<RecordId> labeled(result.labeled_ids.begin(), result.labeled_ids.end());

    std::vector<predictor::LabeledFeatures> train;
    for (const auto& p : table.pairs) {
        const RecordId uid = table.blocks[p.block].update_id;
        if (!labeled.contains(uid)) continue;
        const auto it = answer.find(uid);
        const bool match = it != answer.end() && it->second && *it->second == p.master_id;
        train.push_back({supervised_features(p.features), match});
    }
    auto model = predictor::fit_logistic(train, cfg.train);

    std::vector<double> scores;
    scores.reserve(table.pairs.size());
    for (const auto& p : table.pairs) scores.push_back(predictor::predict_proba(model, supervised_features(p.features)).value());
    assign_scores(table, scores);

    result.blocks = std::move(table.blocks);
    result.model = std::move(model);
    finish(result, corpus, cfg);
    return result;
}

void write_decisions_csv(std::ostream& out, std::span<const MatchDecision> decisions) {
    out << "update_id,master_id,score\n";
    char buf[48];
    for (const auto& d : decisions) {
        out << d.update_id << ',';
        if (d.master_id) out << *d.master_id;
        std::snprintf(buf, sizeof buf, ",%.17g\n", d.score);
        out << buf;
    }
}

std::vector<MatchDecision> read_decisions_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty decisions CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "update_id,master_id,score") throw IoError("decisions CSV header must be 'update_id,master_id,score'");
    std::vector<MatchDecision> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = csv::split_line(line);
        if (f.size() != 3) throw IoError("decision rows need 3 fields");
        MatchDecision d;
        try {
            d.update_id = std::stoll(f[0]);
            if (!f[1].empty()) d.master_id = std::stoll(f[1]);
            d.score = std::stod(f[2]);
        } catch (const std::exception&) {
            throw IoError("unparseable decision row '" + line + "'");
        }
        out.push_back(d);
    }
    return out;
}

void to_json(nlohmann::json& j, const MatcherConfig& cfg) {
    j = nlohmann::json{{"train", cfg.train},
                       {"clamp_epsilon", cfg.clamp_epsilon},
                       {"fixed_threshold", cfg.fixed_threshold ? nlohmann::json(*cfg.fixed_threshold) : nlohmann::json()},
                       {"labeled_fraction", cfg.labeled_fraction},
                       {"objective", core::to_string(cfg.objective)},
                       {"split_seed", cfg.split_seed}};
}

void from_json(const nlohmann::json& j, MatcherConfig& cfg) {
    if (j.contains("train")) cfg.train = j.at("train").get<predictor::TrainConfig>();
    cfg.clamp_epsilon = j.value("clamp_epsilon", cfg.clamp_epsilon);
    if (j.contains("fixed_threshold") && !j.at("fixed_threshold").is_null()) {
        cfg.fixed_threshold = j.at("fixed_threshold").get<double>();
    }
    cfg.labeled_fraction = j.value("labeled_fraction", cfg.labeled_fraction);
    if (j.contains("objective")) cfg.objective = core::objective_from_string(j.at("objective").get<std::string>());
    cfg.split_seed = j.value("split_seed", cfg.split_seed);
}

}  // namespace surrogate::linkage
