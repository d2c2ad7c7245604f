#include "surrogate/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <unordered_map>

#include "surrogate/errors.hpp"

namespace surrogate::eval {

std::optional<double> PrecisionRecall::f1() const {
    if (!precision || *precision + recall == 0.0) return std::nullopt;
    return 2.0 * *precision * recall / (*precision + recall);
}

PrecisionRecall compute_pr(std::span<const linkage::MatchDecision> decisions, std::span<const TruthEntry> truth) {
    std::unordered_map<RecordId, std::optional<RecordId>> answer;
    for (const auto& t : truth) answer[t.update_id] = t.master_id;

    PrecisionRecall pr;
    for (const auto& d : decisions) {
        const auto it = answer.find(d.update_id);
        if (it == answer.end()) throw DomainError("no truth entry for update " + std::to_string(d.update_id));
        const auto& expected = it->second;
        if (expected) ++pr.matchable;
        if (d.master_id) {
            ++pr.emitted;
            if (expected && *expected == *d.master_id) ++pr.correct;
        }
    }
    if (pr.emitted > 0) pr.precision = static_cast<double>(pr.correct) / static_cast<double>(pr.emitted);
    pr.recall = pr.matchable ? static_cast<double>(pr.correct) / static_cast<double>(pr.matchable) : 0.0;
    return pr;
}

std::vector<SweepPoint> threshold_sweep(std::span<const core::LabeledScore> scored, std::size_t grid) {
    if (grid < 2) throw DomainError("sweep grid needs at least 2 points");
    std::vector<core::LabeledScore> sorted(scored.begin(), scored.end());
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) { return a.score < b.score; });
    std::size_t total_pos = 0;
    for (const auto& s : sorted) total_pos += s.positive ? 1 : 0;

    std::vector<SweepPoint> out;
    out.reserve(grid);
    std::size_t below = 0;
    std::size_t pos_below = 0;
    for (std::size_t i = 0; i < grid; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(grid - 1);
        while (below < sorted.size() && sorted[below].score < t) {
            pos_below += sorted[below].positive ? 1 : 0;
            ++below;
        }
        const std::size_t emitted = sorted.size() - below;
        const std::size_t tp = total_pos - pos_below;
        SweepPoint p;
        p.threshold = t;
        if (emitted > 0) p.precision = static_cast<double>(tp) / static_cast<double>(emitted);
        p.recall = total_pos ? static_cast<double>(tp) / static_cast<double>(total_pos) : 0.0;
        out.push_back(p);
    }
    return out;
}

bool EvalReport::all_checks_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& kv) { return kv.second; });
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
    return v ? nlohmann::json(*v) : nlohmann::json();
}

std::string fmt(const std::optional<double>& v, const char* pattern = "%.4f") {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, *v);
    return buf;
}

}  // namespace

void to_json(nlohmann::json& j, const SweepPoint& p) {
    j = nlohmann::json{{"threshold", p.threshold}, {"precision", optional_number(p.precision)}, {"recall", p.recall}};
}

void to_json(nlohmann::json& j, const EvalReport& r) {
    j = nlohmann::json{{"experiment", r.experiment},
                       {"precision", optional_number(r.precision)},
                       {"recall", optional_number(r.recall)},
                       {"f1", optional_number(r.f1)},
                       {"threshold", optional_number(r.threshold)},
                       {"sweep", r.sweep},
                       {"metrics", r.metrics},
                       {"checks", r.checks},
                       {"config_echo", r.config_echo},
                       {"seed", r.seed}};
}

std::string report_json(const EvalReport& report) {
    return nlohmann::json(report).dump(2) + "\n";
}

std::string report_table(const EvalReport& r) {
    std::ostringstream out;
    out << "experiment: " << r.experiment << "\nseed:       " << r.seed << "\n\n";
    out << "precision  recall     f1         threshold\n";
    char line[128];
    std::snprintf(line, sizeof line, "%-10s %-10s %-10s %-10s\n", fmt(r.precision).c_str(), fmt(r.recall).c_str(),
                  fmt(r.f1).c_str(), fmt(r.threshold).c_str());
    out << line;
    if (!r.metrics.empty()) {
        out << "\nmetric                              value\n";
        for (const auto& [name, value] : r.metrics) {
            std::snprintf(line, sizeof line, "%-35s %.6g\n", name.c_str(), value);
            out << line;
        }
    }
    if (!r.checks.empty()) {
        out << "\ncheck                               result\n";
        for (const auto& [name, ok] : r.checks) {
            std::snprintf(line, sizeof line, "%-35s %s\n", name.c_str(), ok ? "pass" : "FAIL");
            out << line;
        }
    }
    if (!r.sweep.empty()) {
        out << "\nthreshold  precision  recall\n";
        for (const auto& p : r.sweep) {
            std::snprintf(line, sizeof line, "%-10.3f %-10s %.4f\n", p.threshold, fmt(p.precision).c_str(), p.recall);
            out << line;
        }
    }
    return out.str();
}

}  // namespace surrogate::eval
