#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "surrogate/errors.hpp"
#include "surrogate/experiments.hpp"

using namespace surrogate;
using namespace surrogate::experiments;
using nlohmann::json;

namespace {

std::filesystem::path scratch(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "surrogate_experiments_test" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

json small_linkage(const char* name) {
    return {{"experiment", name},
            {"corpus", {{"n_master", 1500}, {"n_update", 150}, {"name_pool_size", 250}}}};
}

}  // namespace

TEST_CASE("every named experiment has defaults") {
    for (const auto name : kExperimentNames) {
        const auto cfg = default_config(name);
        CHECK(cfg.at("experiment") == std::string(name));
        CHECK(cfg.at("seed") == 7);
        CHECK(resolve_config(json{{"experiment", std::string(name)}}) == cfg);
    }
    CHECK_THROWS_AS(default_config("nope"), ConfigError);
}

TEST_CASE("config resolution errors") {
    CHECK_THROWS_AS(resolve_config(json::array()), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"seed", 1}}), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"experiment", "nope"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"experiment", "ci-oracle-fuzz"}, {"typo", 1}}), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"experiment", "ci-oracle-fuzz"}, {"seed", "x"}}), ConfigError);
    CHECK_THROWS_AS(resolve_config(json{{"experiment", "ci-oracle-fuzz"}, {"fuzz", 3}}), ConfigError);
    CHECK_THROWS_AS(run_experiment(resolve_config(json{{"experiment", "ci-oracle-fuzz"},
                                                       {"fuzz", {{"trials", "many"}}}})),
                    ConfigError);
}

TEST_CASE("config files") {
    const auto dir = scratch("files");
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
    std::ofstream(dir / "bad.json") << "{ not json";
    CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
}

TEST_CASE("user blocks merge over defaults") {
    const auto cfg = resolve_config(json{{"experiment", "linkage-synthetic"}, {"corpus", {{"n_update", 42}}}});
    CHECK(cfg.at("corpus").at("n_update") == 42);
    CHECK(cfg.at("corpus").at("n_master") == 10000);
    CHECK(cfg.at("matcher").at("labeled_fraction") == 0.2);
}

TEST_CASE("fuzz experiment passes its checks") {
    const auto report = run_experiment(resolve_config(
        json{{"experiment", "ci-oracle-fuzz"},
             {"fuzz", {{"trials", 100}, {"recall_trials", 100}, {"missing_trials", 50}, {"rank_pairs", 1000}}}}));
    CHECK(report.all_checks_pass());
    CHECK(report.checks.size() == 5);
    CHECK(report.metrics.at("max_err_general") < 1e-10);
}

TEST_CASE("example experiment at reduced size") {
    const auto cfg = resolve_config(
        json{{"experiment", "example2-scoring"}, {"example", {{"n", 200000}, {"test_n", 20000}}}});
    const auto a = run_experiment(cfg);
    const auto b = run_experiment(cfg);
    CHECK(eval::report_json(a) == eval::report_json(b));
    CHECK(a.all_checks_pass());
    CHECK(a.metrics.at("p_x1_given_y1_estimate") == 1.0);
    CHECK(a.sweep.size() == 21);
    CHECK_FALSE(a.config_echo.contains("out_dir"));
}

TEST_CASE("linkage experiments run end to end and are reproducible") {
    const auto a = run_experiment(resolve_config(small_linkage("linkage-baseline-comparison")));
    const auto b = run_experiment(resolve_config(small_linkage("linkage-baseline-comparison")));
    CHECK(eval::report_json(a) == eval::report_json(b));
    CHECK(a.metrics.count("baseline_recall") == 1);
    CHECK(a.checks.count("surrogate_recall_at_least_baseline") == 1);
    CHECK(a.precision.has_value());

    auto other_seed = small_linkage("linkage-synthetic");
    other_seed["seed"] = 8;
    const auto c = run_experiment(resolve_config(other_seed));
    CHECK(c.seed == 8);
    CHECK(c.config_echo.at("seed") == 8);
    CHECK(c.metrics.count("baseline_recall") == 0);
}

TEST_CASE("file-driven run writes both report forms") {
    const auto dir = scratch("run");
    std::ofstream(dir / "cfg.json") << json{{"experiment", "ci-oracle-fuzz"},
                                            {"fuzz", {{"trials", 20}, {"recall_trials", 20}, {"missing_trials", 20},
                                                      {"rank_pairs", 100}}}}
                                           .dump();
    const auto report = run_experiment(dir / "cfg.json", dir / "out", std::uint64_t{11});
    CHECK(report.seed == 11);
    CHECK(std::filesystem::exists(dir / "out" / "report.json"));
    CHECK(std::filesystem::exists(dir / "out" / "report.txt"));
    std::ifstream in(dir / "out" / "report.json");
    CHECK(json::parse(in).at("seed") == 11);
}
