// Command-line front end.
//
// Exit codes: 0 success, 1 configuration/usage error, 2 invariant or
// acceptance failure, 3 I/O error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "surrogate/core_math.hpp"
#include "surrogate/datagen.hpp"
#include "surrogate/errors.hpp"
#include "surrogate/eval.hpp"
#include "surrogate/experiments.hpp"
#include "surrogate/linkage.hpp"
#include "surrogate/oracle.hpp"
#include "surrogate/predictor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace surrogate;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitIo = 3;

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> config;
    std::string out_dir = ".";
};

std::uint64_t seed_or(const Globals& g, std::uint64_t fallback) { return g.seed.value_or(fallback); }

json config_block(const Globals& g, const char* key) {
    if (!g.config) return json::object();
    const json cfg = experiments::load_config(*g.config);
    return cfg.contains(key) ? cfg.at(key) : json::object();
}

fs::path out_path(const Globals& g, const std::string& name) {
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec) throw IoError("cannot create " + g.out_dir + ": " + ec.message());
    return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    return in;
}

int report_outcome(const eval::EvalReport& report) {
    std::cout << eval::report_table(report);
    if (!report.all_checks_pass()) {
        std::cerr << "error: experiment '" << report.experiment << "' failed one or more checks\n";
        return kExitInvariant;
    }
    return kExitOk;
}

core::X1Predictor load_predictor(const fs::path& path) {
    auto in = open_in(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError(path.string() + " is not valid JSON");
    }
    const auto type = doc.value("type", std::string());
    if (type == "logistic") return predictor::as_predictor(predictor::logistic_from_json(doc));
    if (type == "histogram") return predictor::as_predictor(predictor::histogram_from_json(doc));
    throw ConfigError("unknown model type '" + type + "' in " + path.string());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Surrogate-label posterior reconstruction toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--config", g.config, "JSON configuration file");
    app.add_option("--out-dir", g.out_dir, "Directory for generated files")->capture_default_str();

    // gen
    auto* gen = app.add_subcommand("gen", "Generate synthetic data");
    gen->require_subcommand(1);
    auto* gen_example = gen->add_subcommand("example", "Sample a worked example to samples.csv");
    int which = 1;
    std::size_t n = 10000;
    gen_example->add_option("--which", which, "1 or 2")->check(CLI::IsMember({1, 2}))->capture_default_str();
    gen_example->add_option("-n,--count", n, "Number of draws")->capture_default_str();

    auto* gen_corpus = gen->add_subcommand("corpus", "Generate master.csv, update.csv and truth.csv");
    std::optional<std::size_t> n_master, n_update;
    std::optional<double> match_fraction;
    gen_corpus->add_option("--n-master", n_master);
    gen_corpus->add_option("--n-update", n_update);
    gen_corpus->add_option("--match-fraction", match_fraction);

    auto* gen_joint = gen->add_subcommand("joint", "Random class-conditionally independent joint to joint.json");
    std::size_t k = 8;
    double min_margin = 0.05;
    bool recall_joint = false;
    gen_joint->add_option("--k", k, "x2 cardinality")->capture_default_str();
    gen_joint->add_option("--min-margin", min_margin)->capture_default_str();
    gen_joint->add_flag("--recall", recall_joint, "Force P(x1=0, y=1) = 0");

    // fit
    auto* fit = app.add_subcommand("fit", "Fit a P(x1|x2) predictor on a samples CSV");
    std::string fit_input, model_kind = "histogram", model_output = "model.json";
    std::size_t bins = 64;
    double lo = -6.0, hi = 6.0;
    fit->add_option("--input", fit_input, "Samples CSV (x1,x2,y)")->required();
    fit->add_option("--model", model_kind)->check(CLI::IsMember({"logistic", "histogram"}))->capture_default_str();
    fit->add_option("--bins", bins)->capture_default_str();
    fit->add_option("--lo", lo)->capture_default_str();
    fit->add_option("--hi", hi)->capture_default_str();
    fit->add_option("--output", model_output, "File name inside --out-dir")->capture_default_str();

    // score
    auto* score = app.add_subcommand("score", "Score samples with a fitted predictor");
    std::string score_model, score_input, mode_name = "general";
    double p_x1_y0 = 0.0;
    std::optional<double> p_x1_y1;
    score->add_option("--model", score_model, "Model JSON")->required();
    score->add_option("--input", score_input, "Samples CSV (x1,x2,y)")->required();
    score->add_option("--p-x1-y0", p_x1_y0, "P(x1=1|y=0)")->required();
    score->add_option("--p-x1-y1", p_x1_y1, "P(x1=1|y=1); ignored in recall mode");
    score->add_option("--mode", mode_name)->check(CLI::IsMember({"general", "recall"}))->capture_default_str();

    // link
    auto* link = app.add_subcommand("link", "Run the surrogate matcher on a corpus directory");
    std::string corpus_dir;
    std::optional<double> fixed_threshold;
    link->add_option("--corpus-dir", corpus_dir, "Directory with master.csv, update.csv, truth.csv")->required();
    link->add_option("--threshold", fixed_threshold, "Fixed decision threshold");

    // eval
    auto* evalc = app.add_subcommand("eval", "Precision and recall of a decisions CSV");
    std::string decisions_path, truth_path;
    evalc->add_option("--decisions", decisions_path)->required();
    evalc->add_option("--truth", truth_path)->required();

    // fuzz
    auto* fuzz = app.add_subcommand("fuzz", "Check the closed forms against the exact oracle");
    std::optional<std::size_t> fuzz_trials;
    fuzz->add_option("--trials", fuzz_trials);

    // demo / run
    auto* demo = app.add_subcommand("demo", "Run both worked examples end to end");
    auto* run = app.add_subcommand("run", "Run the experiment named in --config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen_example->parsed()) {
            const auto spec = which == 1 ? datagen::ExampleSpec::example1() : datagen::ExampleSpec::example2();
            const auto samples = datagen::sample_example(spec, n, seed_or(g, 7));
            auto out = open_out(out_path(g, "samples.csv"));
            datagen::write_samples_csv(out, samples);
        } else if (gen_corpus->parsed()) {
            auto spec = config_block(g, "corpus").get<datagen::LinkageCorpusSpec>();
            if (n_master) spec.n_master = *n_master;
            if (n_update) spec.n_update = *n_update;
            if (match_fraction) spec.match_fraction = *match_fraction;
            spec.seed = seed_or(g, spec.seed);
            save_corpus(g.out_dir, datagen::gen_linkage_corpus(spec));
        } else if (gen_joint->parsed()) {
            const auto spec = recall_joint ? datagen::random_recall_joint(k, seed_or(g, 7), min_margin)
                                           : datagen::random_ci_joint(k, seed_or(g, 7), min_margin);
            auto out = open_out(out_path(g, "joint.json"));
            out << json(oracle::joint_from_ci_spec(spec)).dump(2) << '\n';
        } else if (fit->parsed()) {
            auto in = open_in(fit_input);
            const auto samples = datagen::read_samples_csv(in);
            json doc;
            if (model_kind == "histogram") {
                std::vector<predictor::ScalarSample> data;
                for (const auto& s : samples) data.push_back({s.x2, s.x1 == 1});
                doc = predictor::fit_histogram(data, bins, lo, hi);
            } else {
                auto cfg = config_block(g, "matcher").value("train", json::object()).get<predictor::TrainConfig>();
                std::vector<predictor::LabeledFeatures> data;
                for (const auto& s : samples) data.push_back({FeatureVector(std::vector<double>{s.x2}), s.x1 == 1});
                doc = predictor::fit_logistic(data, cfg);
            }
            auto out = open_out(out_path(g, model_output));
            out << doc.dump(2) << '\n';
        } else if (score->parsed()) {
            const auto mode = mode_name == "recall" ? core::Mode::HundredPercentRecall : core::Mode::General;
            if (mode == core::Mode::General && !p_x1_y1) throw ConfigError("--p-x1-y1 is required in general mode");
            const core::SurrogateModel model({core::Probability(p_x1_y0), core::Probability(p_x1_y1.value_or(1.0))},
                                             load_predictor(score_model), mode);
            auto in = open_in(score_input);
            const auto samples = datagen::read_samples_csv(in);
            auto out = open_out(out_path(g, "scores.csv"));
            out << "x1,x2,y,posterior_y1\n";
            char buf[96];
            for (const auto& s : samples) {
                const auto x1 = s.x1 == 1 ? core::X1::One : core::X1::Zero;
                const double p1 = model.posterior_y0(x1, FeatureVector(std::vector<double>{s.x2})).complement().value();
                std::snprintf(buf, sizeof buf, "%d,%.17g,%d,%.17g\n", s.x1, s.x2, s.y, p1);
                out << buf;
            }
        } else if (link->parsed()) {
            const auto corpus = load_corpus(corpus_dir);
            auto cfg = config_block(g, "matcher").get<linkage::MatcherConfig>();
            cfg.split_seed = seed_or(g, cfg.split_seed);
            if (fixed_threshold) cfg.fixed_threshold = *fixed_threshold;
            if (!cfg.fixed_threshold && corpus.truth.empty()) {
                throw ConfigError("no truth.csv for threshold selection; pass --threshold");
            }
            const auto result = linkage::run_matcher(corpus, cfg);
            auto out = open_out(out_path(g, "decisions.csv"));
            linkage::write_decisions_csv(out, result.decisions);

            eval::EvalReport report;
            report.experiment = "link";
            report.seed = cfg.split_seed;
            report.threshold = result.threshold;
            report.metrics["p_x1_given_y0"] = *result.p_x1_given_y0;
            report.config_echo = json{{"matcher", cfg}, {"corpus_dir", corpus_dir}};
            if (!corpus.truth.empty()) {
                const std::unordered_set<RecordId> labeled(result.labeled_ids.begin(), result.labeled_ids.end());
                std::vector<linkage::MatchDecision> held_out;
                for (const auto& d : result.decisions) {
                    if (!labeled.contains(d.update_id) || labeled.size() == result.decisions.size()) held_out.push_back(d);
                }
                const auto pr = eval::compute_pr(held_out, corpus.truth);
                report.precision = pr.precision;
                report.recall = pr.recall;
                report.f1 = pr.f1();
            }
            auto rep = open_out(out_path(g, "report.json"));
            rep << eval::report_json(report);
            std::cout << eval::report_table(report);
        } else if (evalc->parsed()) {
            auto din = open_in(decisions_path);
            auto tin = open_in(truth_path);
            const auto decisions = linkage::read_decisions_csv(din);
            const auto truth = read_truth_csv(tin);
            const auto pr = eval::compute_pr(decisions, truth);
            const json doc{{"precision", pr.precision ? json(*pr.precision) : json()},
                           {"recall", pr.recall},
                           {"f1", pr.f1() ? json(*pr.f1()) : json()},
                           {"correct", pr.correct},
                           {"emitted", pr.emitted},
                           {"matchable", pr.matchable}};
            auto out = open_out(out_path(g, "eval.json"));
            out << doc.dump(2) << '\n';
            std::cout << doc.dump(2) << '\n';
        } else if (fuzz->parsed()) {
            json user{{"experiment", "ci-oracle-fuzz"}, {"seed", seed_or(g, 7)}, {"out_dir", g.out_dir}};
            if (fuzz_trials) {
                user["fuzz"] = json{{"trials", *fuzz_trials}, {"recall_trials", *fuzz_trials},
                                    {"missing_trials", *fuzz_trials}};
            }
            const auto report = experiments::run_experiment(experiments::resolve_config(user));
            experiments::write_report(report, g.out_dir);
            return report_outcome(report);
        } else if (demo->parsed()) {
            int code = kExitOk;
            for (const char* name : {"example1-posterior", "example2-scoring"}) {
                const json user{{"experiment", name}, {"seed", seed_or(g, 7)}};
                const auto report = experiments::run_experiment(experiments::resolve_config(user));
                experiments::write_report(report, fs::path(g.out_dir) / name);
                if (report_outcome(report) != kExitOk) code = kExitInvariant;
                std::cout << '\n';
            }
            return code;
        } else if (run->parsed()) {
            if (!g.config) throw ConfigError("run needs --config");
            std::optional<fs::path> out_override;
            if (app.get_option("--out-dir")->count() > 0) out_override = g.out_dir;
            const auto report = experiments::run_experiment(fs::path(*g.config), out_override, g.seed);
            return report_outcome(report);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitIo;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: bad configuration value: " << e.what() << '\n';
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvariant;
    }
    return kExitOk;
}
