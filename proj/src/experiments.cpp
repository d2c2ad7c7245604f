#include "surrogate/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "surrogate/errors.hpp"
#include "surrogate/linkage.hpp"
#include "surrogate/oracle.hpp"
#include "surrogate/predictor.hpp"
#include "surrogate/rng.hpp"

namespace surrogate::experiments {

using nlohmann::json;

namespace {

bool known_experiment(std::string_view name) {
    return std::find(kExperimentNames.begin(), kExperimentNames.end(), name) != kExperimentNames.end();
}

json example_defaults() {
    const ExampleParams p;
    return json{{"n", p.n},
                {"labeled_n", p.labeled_n},
                {"test_n", p.test_n},
                {"bins", p.bins},
                {"lo", p.lo},
                {"hi", p.hi},
                {"accuracy_tolerance", p.accuracy_tolerance},
                {"densities", datagen::Densities{}}};
}

json fuzz_defaults() {
    const FuzzParams p;
    return json{{"trials", p.trials},
                {"k_min", p.k_min},
                {"k_max", p.k_max},
                {"min_margin", p.min_margin},
                {"recall_trials", p.recall_trials},
                {"missing_trials", p.missing_trials},
                {"rank_pairs", p.rank_pairs},
                {"tolerance_general", p.tolerance_general},
                {"tolerance_special", p.tolerance_special}};
}

constexpr std::array<std::string_view, 10> kTopLevelKeys = {
    "experiment", "seed", "out_dir", "sweep_grid", "example", "fuzz", "corpus", "matcher", "baseline", "checks"};

}  // namespace

json default_config(std::string_view experiment) {
    if (!known_experiment(experiment)) throw ConfigError("unknown experiment '" + std::string(experiment) + "'");
    json cfg{{"experiment", experiment}, {"seed", 7}, {"out_dir", "out"}, {"sweep_grid", 21}};
    if (experiment == "example1-posterior" || experiment == "example2-scoring") {
        cfg["example"] = example_defaults();
    } else if (experiment == "ci-oracle-fuzz") {
        cfg["fuzz"] = fuzz_defaults();
    } else {
        json corpus = datagen::LinkageCorpusSpec{};
        corpus.erase("seed");
        json matcher = linkage::MatcherConfig{};
        matcher.erase("split_seed");
        cfg["corpus"] = corpus;
        cfg["matcher"] = matcher;
        cfg["checks"] = json{{"min_precision", 0.9}, {"min_recall", 0.9}};
        if (experiment == "linkage-baseline-comparison") cfg["baseline"] = json{{"labeled_fraction", 0.2}};
    }
    return cfg;
}

json resolve_config(const json& user) {
    if (!user.is_object()) throw ConfigError("configuration must be a JSON object");
    if (!user.contains("experiment") || !user.at("experiment").is_string()) {
        throw ConfigError("configuration needs an \"experiment\" name");
    }
    for (const auto& [key, value] : user.items()) {
        if (std::find(kTopLevelKeys.begin(), kTopLevelKeys.end(), key) == kTopLevelKeys.end()) {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }
    json resolved = default_config(user.at("experiment").get<std::string>());
    for (const auto& [key, value] : user.items()) {
        if (resolved.contains(key) && resolved[key].is_object()) {
            if (!value.is_object()) throw ConfigError("'" + key + "' must be an object");
            resolved[key].merge_patch(value);
        } else if (resolved.contains(key)) {
            resolved[key] = value;
        }
    }
    if (!resolved["seed"].is_number_unsigned() && !resolved["seed"].is_number_integer()) {
        throw ConfigError("seed must be an integer");
    }
    if (!resolved["out_dir"].is_string()) throw ConfigError("out_dir must be a string");
    return resolved;
}

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
    }
}

eval::EvalReport run_example(const datagen::ExampleSpec& spec, const ExampleParams& params, std::uint64_t seed) {
    if (params.labeled_n == 0 || params.labeled_n > params.n) throw ConfigError("labeled_n must lie in [1, n]");
    const auto samples = datagen::sample_example(spec, params.n, seed);

    // P(x1=1|y) by counting on the labeled prefix.
    std::array<std::array<std::size_t, 2>, 2> counts{};  // [y][x1]
    for (std::size_t i = 0; i < params.labeled_n; ++i) ++counts[samples[i].y][samples[i].x1];
    for (int y = 0; y < 2; ++y) {
        if (counts[y][0] + counts[y][1] == 0) throw InsufficientLabels("labeled sample lacks class " + std::to_string(y));
    }
    auto rate = [&](int y) {
        return static_cast<double>(counts[y][1]) / static_cast<double>(counts[y][0] + counts[y][1]);
    };
    const core::ClassConditionalX1 cond{core::Probability(rate(0)), core::Probability(rate(1))};

    // P(x1|x2) from every draw, labels ignored.
    std::vector<predictor::ScalarSample> unlabeled;
    unlabeled.reserve(samples.size());
    for (const auto& s : samples) unlabeled.push_back({s.x2, s.x1 == 1});
    auto hist = predictor::fit_histogram(unlabeled, params.bins, params.lo, params.hi);

    const auto mode = spec.hundred_percent_recall() ? core::Mode::HundredPercentRecall : core::Mode::General;
    const core::SurrogateModel model(cond, predictor::as_predictor(hist), mode);
    const auto joint = datagen::discretize_example(spec, params.bins, params.lo, params.hi);

    const double width = (params.hi - params.lo) / static_cast<double>(params.bins);
    auto center = [&](std::size_t bin) {
        return FeatureVector(std::vector<double>{params.lo + (static_cast<double>(bin) + 0.5) * width});
    };
    auto x1_of = [](int x1) { return x1 == 1 ? core::X1::One : core::X1::Zero; };

    const double bayes = oracle::bayes_accuracy(joint);
    const double surrogate = oracle::decision_accuracy(joint, [&](int x1, std::size_t bin) {
        return model.posterior_y0(x1_of(x1), center(bin)).value() < 0.5;
    });
    double max_err = 0.0;
    for (int x1 = 0; x1 < 2; ++x1) {
        for (std::size_t b = 0; b < params.bins; ++b) {
            if (joint.marginal_x1_x2(x1, b) < 1e-3) continue;
            const double exact = oracle::cond_y_given_x1_x2(joint, x1, b).value();
            max_err = std::max(max_err, std::abs(model.posterior_y0(x1_of(x1), center(b)).value() - exact));
        }
    }

    const auto test = datagen::sample_example(spec, params.test_n, derive_seed(seed, 1));
    std::vector<core::LabeledScore> scored;
    scored.reserve(test.size());
    std::size_t right = 0, tp = 0, fp = 0, fn = 0;
    for (const auto& s : test) {
        const double p1 = model.posterior_y0(x1_of(s.x1), FeatureVector(std::vector<double>{s.x2})).complement().value();
        const bool predicted = p1 > 0.5;
        const bool actual = s.y == 1;
        right += predicted == actual ? 1 : 0;
        tp += predicted && actual ? 1 : 0;
        fp += predicted && !actual ? 1 : 0;
        fn += !predicted && actual ? 1 : 0;
        scored.push_back({p1, actual});
    }

    eval::EvalReport report;
    report.seed = seed;
    report.threshold = 0.5;
    if (tp + fp > 0) report.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    report.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    if (report.precision && *report.precision + *report.recall > 0.0) {
        report.f1 = 2.0 * *report.precision * *report.recall / (*report.precision + *report.recall);
    }
    report.sweep = eval::threshold_sweep(scored, params.sweep_grid);
    report.metrics = {{"bayes_accuracy", bayes},
                      {"surrogate_accuracy", surrogate},
                      {"accuracy_gap", bayes - surrogate},
                      {"empirical_accuracy", static_cast<double>(right) / static_cast<double>(test.size())},
                      {"p_x1_given_y0_estimate", cond.p_x1_given_y0.value()},
                      {"p_x1_given_y1_estimate", cond.p_x1_given_y1.value()},
                      {"max_abs_posterior_error", max_err}};
    report.checks = {{"accuracy_within_tolerance", bayes - surrogate <= params.accuracy_tolerance}};
    return report;
}

eval::EvalReport run_fuzz(const FuzzParams& p, std::uint64_t seed) {
    if (p.k_min < 2 || p.k_max < p.k_min) throw ConfigError("fuzz needs 2 <= k_min <= k_max");
    Rng rng(seed);
    auto pick_k = [&] { return p.k_min + static_cast<std::size_t>(rng.below(p.k_max - p.k_min + 1)); };
    auto x1_of = [](int x1) { return x1 == 1 ? core::X1::One : core::X1::Zero; };

    double err_general = 0.0;
    double err_normalization = 0.0;
    for (std::size_t t = 0; t < p.trials; ++t) {
        const auto joint = oracle::joint_from_ci_spec(datagen::random_ci_joint(pick_k(), derive_seed(seed, 3 * t), p.min_margin));
        const auto cond = oracle::cond_x1_given_y(joint);
        for (std::size_t x2 = 0; x2 < joint.x2_cardinality(); ++x2) {
            const auto px1 = oracle::cond_x1_given_x2(joint, x2);
            for (int x1 = 0; x1 < 2; ++x1) {
                const double exact = oracle::cond_y_given_x1_x2(joint, x1, x2).value();
                err_general = std::max(err_general, std::abs(core::posterior_general(px1, cond, x1_of(x1)).value() - exact));
                const double sum = core::posterior_y0_unclamped(px1.value(), cond, x1_of(x1)) +
                                   core::posterior_y1_unclamped(px1.value(), cond, x1_of(x1));
                err_normalization = std::max(err_normalization, std::abs(sum - 1.0));
            }
        }
    }

    double err_special = 0.0;
    for (std::size_t t = 0; t < p.recall_trials; ++t) {
        const auto joint =
            oracle::joint_from_ci_spec(datagen::random_recall_joint(pick_k(), derive_seed(seed, 3 * t + 1), p.min_margin));
        const auto cond = oracle::cond_x1_given_y(joint);
        for (std::size_t x2 = 0; x2 < joint.x2_cardinality(); ++x2) {
            const double px1 = oracle::cond_x1_given_x2(joint, x2).value();
            err_special = std::max(err_special, std::abs(core::score_special_unclamped(1.0 - px1, cond) -
                                                         core::posterior_y0_unclamped(px1, cond, core::X1::One)));
        }
    }

    double err_missing = 0.0;
    for (std::size_t t = 0; t < p.missing_trials; ++t) {
        const auto joint =
            oracle::joint_from_ci_spec(datagen::random_recall_joint(pick_k(), derive_seed(seed, 3 * t + 2), p.min_margin));
        const auto cond = oracle::cond_x1_given_y(joint);
        for (std::size_t x2 = 0; x2 < joint.x2_cardinality(); ++x2) {
            const auto px1 = oracle::cond_x1_given_x2(joint, x2);
            const core::Probability target_posterior(1.0 - core::score_special_unclamped(1.0 - px1.value(), cond));
            const double chained = core::score_missing_x1(px1, target_posterior).value();
            err_missing = std::max(err_missing, std::abs(chained - oracle::cond_y1_given_x2(joint, x2).value()));
        }
    }

    std::size_t rank_violations = 0;
    const double eps = core::kDefaultClampEpsilon;
    for (std::size_t t = 0; t < p.rank_pairs; ++t) {
        const core::ClassConditionalX1 cond{core::Probability(rng.uniform() * (1.0 - 2 * eps)), core::Probability(1.0)};
        double a = eps + rng.uniform() * (1.0 - 2 * eps);
        double b = eps + rng.uniform() * (1.0 - 2 * eps);
        if (a == b) continue;
        if (a > b) std::swap(a, b);
        if (!(core::score_special_unclamped(a, cond) < core::score_special_unclamped(b, cond))) ++rank_violations;
    }

    eval::EvalReport report;
    report.seed = seed;
    report.metrics = {{"max_err_general", err_general},
                      {"max_err_normalization", err_normalization},
                      {"max_err_special", err_special},
                      {"max_err_missing_x1", err_missing},
                      {"rank_violations", static_cast<double>(rank_violations)},
                      {"trials", static_cast<double>(p.trials)},
                      {"recall_trials", static_cast<double>(p.recall_trials)},
                      {"missing_trials", static_cast<double>(p.missing_trials)},
                      {"rank_pairs", static_cast<double>(p.rank_pairs)}};
    report.checks = {{"general_identity", err_general <= p.tolerance_general},
                     {"normalization", err_normalization <= p.tolerance_general},
                     {"special_consistency", err_special <= p.tolerance_special},
                     {"missing_x1_identity", err_missing <= p.tolerance_special},
                     {"monotonicity", rank_violations == 0}};
    return report;
}

namespace {

std::vector<linkage::MatchDecision> restrict_to(const std::vector<linkage::MatchDecision>& all,
                                                const std::unordered_set<RecordId>& excluded) {
    std::vector<linkage::MatchDecision> out;
    for (const auto& d : all) {
        if (!excluded.contains(d.update_id)) out.push_back(d);
    }
    return out;
}

std::vector<core::LabeledScore> best_scores(const std::vector<linkage::ScoredBlock>& blocks,
                                           const std::vector<TruthEntry>& truth,
                                           const std::unordered_set<RecordId>& excluded) {
    std::unordered_map<RecordId, std::optional<RecordId>> answer;
    for (const auto& t : truth) answer[t.update_id] = t.master_id;
    std::vector<core::LabeledScore> out;
    for (const auto& b : blocks) {
        if (excluded.contains(b.update_id)) continue;
        const auto* top = b.best();
        if (!top) continue;
        const auto& expected = answer.at(b.update_id);
        out.push_back({top->score, expected && *expected == top->master_id});
    }
    return out;
}

double blocking_recall(const LinkageCorpus& corpus) {
    const linkage::MasterIndex index(corpus.master);
    std::unordered_map<RecordId, const LinkageRecord*> updates;
    for (const auto& u : corpus.update) updates[u.id] = &u;
    std::size_t matchable = 0, found = 0;
    for (const auto& t : corpus.truth) {
        if (!t.master_id) continue;
        ++matchable;
        for (std::size_t pos : index.block(*updates.at(t.update_id))) {
            if (index.record(pos).id == *t.master_id) {
                ++found;
                break;
            }
        }
    }
    return matchable ? static_cast<double>(found) / static_cast<double>(matchable) : 1.0;
}

void fill_pr(eval::EvalReport& report, const eval::PrecisionRecall& pr) {
    report.precision = pr.precision;
    report.recall = pr.recall;
    report.f1 = pr.f1();
}

eval::EvalReport run_linkage(const json& cfg, std::uint64_t seed, bool with_baseline) {
    auto spec = cfg.at("corpus").get<datagen::LinkageCorpusSpec>();
    spec.seed = seed;
    auto mcfg = cfg.at("matcher").get<linkage::MatcherConfig>();
    mcfg.split_seed = seed;
    const std::size_t grid = cfg.at("sweep_grid").get<std::size_t>();
    const double min_precision = cfg.at("checks").at("min_precision").get<double>();
    const double min_recall = cfg.at("checks").at("min_recall").get<double>();

    const auto corpus = datagen::gen_linkage_corpus(spec);
    const auto surrogate = linkage::run_matcher(corpus, mcfg);

    std::unordered_set<RecordId> excluded(surrogate.labeled_ids.begin(), surrogate.labeled_ids.end());
    std::optional<linkage::MatchResult> baseline;
    if (with_baseline) {
        const double fraction = cfg.at("baseline").at("labeled_fraction").get<double>();
        baseline = linkage::run_supervised_baseline(corpus, fraction, mcfg);
        excluded.insert(baseline->labeled_ids.begin(), baseline->labeled_ids.end());
    }
    if (excluded.size() == corpus.update.size()) excluded.clear();

    const auto pr = eval::compute_pr(restrict_to(surrogate.decisions, excluded), corpus.truth);

    eval::EvalReport report;
    report.seed = seed;
    report.threshold = surrogate.threshold;
    fill_pr(report, pr);
    report.sweep = eval::threshold_sweep(best_scores(surrogate.blocks, corpus.truth, excluded), grid);

    std::size_t pairs = 0;
    for (const auto& b : surrogate.blocks) pairs += b.candidates.size();
    report.metrics = {{"p_x1_given_y0", *surrogate.p_x1_given_y0},
                      {"blocking_recall", blocking_recall(corpus)},
                      {"candidate_pairs", static_cast<double>(pairs)},
                      {"evaluated_updates", static_cast<double>(corpus.update.size() - excluded.size())},
                      {"correct", static_cast<double>(pr.correct)},
                      {"emitted", static_cast<double>(pr.emitted)},
                      {"matchable", static_cast<double>(pr.matchable)}};
    report.checks = {{"precision_at_least_min", pr.precision && *pr.precision >= min_precision},
                     {"recall_at_least_min", pr.recall >= min_recall}};

    if (baseline) {
        const auto bpr = eval::compute_pr(restrict_to(baseline->decisions, excluded), corpus.truth);
        report.metrics["baseline_precision"] = bpr.precision.value_or(0.0);
        report.metrics["baseline_recall"] = bpr.recall;
        report.metrics["baseline_f1"] = bpr.f1().value_or(0.0);
        report.metrics["baseline_threshold"] = baseline->threshold;
        report.checks["surrogate_recall_at_least_baseline"] = pr.recall >= bpr.recall;
    }
    return report;
}

template <typename T>
T get_or_config_error(const json& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad '") + key + "': " + e.what());
    }
}

}  // namespace

eval::EvalReport run_experiment(const json& resolved) {
    const auto name = get_or_config_error<std::string>(resolved, "experiment");
    const auto seed = get_or_config_error<std::uint64_t>(resolved, "seed");
    const auto grid = get_or_config_error<std::size_t>(resolved, "sweep_grid");

    eval::EvalReport report;
    try {
        if (name == "example1-posterior" || name == "example2-scoring") {
            const auto& e = resolved.at("example");
            ExampleParams params;
            params.n = e.at("n").get<std::size_t>();
            params.labeled_n = e.at("labeled_n").get<std::size_t>();
            params.test_n = e.at("test_n").get<std::size_t>();
            params.bins = e.at("bins").get<std::size_t>();
            params.lo = e.at("lo").get<double>();
            params.hi = e.at("hi").get<double>();
            params.accuracy_tolerance = e.at("accuracy_tolerance").get<double>();
            params.sweep_grid = grid;
            auto spec = name == "example1-posterior" ? datagen::ExampleSpec::example1() : datagen::ExampleSpec::example2();
            spec.densities = e.at("densities").get<datagen::Densities>();
            report = run_example(spec, params, seed);
        } else if (name == "ci-oracle-fuzz") {
            const auto& f = resolved.at("fuzz");
            FuzzParams params;
            params.trials = f.at("trials").get<std::size_t>();
            params.k_min = f.at("k_min").get<std::size_t>();
            params.k_max = f.at("k_max").get<std::size_t>();
            params.min_margin = f.at("min_margin").get<double>();
            params.recall_trials = f.at("recall_trials").get<std::size_t>();
            params.missing_trials = f.at("missing_trials").get<std::size_t>();
            params.rank_pairs = f.at("rank_pairs").get<std::size_t>();
            params.tolerance_general = f.at("tolerance_general").get<double>();
            params.tolerance_special = f.at("tolerance_special").get<double>();
            report = run_fuzz(params, seed);
        } else {
            report = run_linkage(resolved, seed, name == "linkage-baseline-comparison");
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid configuration value: ") + e.what());
    }
    report.experiment = name;
    report.config_echo = resolved;
    report.config_echo.erase("out_dir");
    return report;
}

void write_report(const eval::EvalReport& report, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    std::ofstream js(out_dir / "report.json", std::ios::binary);
    std::ofstream txt(out_dir / "report.txt", std::ios::binary);
    if (!js || !txt) throw IoError("cannot write report into " + out_dir.string());
    js << eval::report_json(report);
    txt << eval::report_table(report);
    if (!js || !txt) throw IoError("failed writing report into " + out_dir.string());
}

eval::EvalReport run_experiment(const std::filesystem::path& config_path,
                                const std::optional<std::filesystem::path>& out_dir_override,
                                const std::optional<std::uint64_t>& seed_override) {
    json user = load_config(config_path);
    if (seed_override && user.is_object()) user["seed"] = *seed_override;
    if (out_dir_override && user.is_object()) user["out_dir"] = out_dir_override->string();
    const json resolved = resolve_config(user);
    auto report = run_experiment(resolved);
    write_report(report, resolved.at("out_dir").get<std::string>());
    return report;
}

}  // namespace surrogate::experiments
