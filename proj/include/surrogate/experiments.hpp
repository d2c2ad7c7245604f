#pragma once

// Named end-to-end experiments driven by a single JSON configuration:
//
//   example1-posterior          general posterior on the first worked example
//   example2-scoring            100%-recall score on the second worked example
//   ci-oracle-fuzz              closed forms vs exact oracle on random joints
//   linkage-synthetic           surrogate matcher on a synthetic corpus
//   linkage-baseline-comparison surrogate vs supervised logistic matcher
//
// A configuration holds "experiment", "seed", "out_dir", "sweep_grid" and
// per-module blocks ("example", "fuzz", "corpus", "matcher", "baseline",
// "checks"). Every omitted field takes its default; the resolved document is
// echoed into the report.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

#include <json.hpp>

#include "surrogate/datagen.hpp"
#include "surrogate/eval.hpp"

namespace surrogate::experiments {

inline constexpr std::array<std::string_view, 5> kExperimentNames = {
    "example1-posterior", "example2-scoring", "ci-oracle-fuzz", "linkage-synthetic", "linkage-baseline-comparison"};

// Full defaults for one experiment. Throws ConfigError for an unknown name.
nlohmann::json default_config(std::string_view experiment);

// Defaults merged with `user`. Throws ConfigError on unknown keys, a missing
// or unknown experiment name, or ill-typed values.
nlohmann::json resolve_config(const nlohmann::json& user);

// Throws ConfigError when the file is missing or not JSON.
nlohmann::json load_config(const std::filesystem::path& path);

eval::EvalReport run_experiment(const nlohmann::json& resolved);

// Loads, resolves and runs, then writes report.json and report.txt into the
// configured out_dir (or `out_dir_override`). Throws IoError on write failure.
eval::EvalReport run_experiment(const std::filesystem::path& config_path,
                                const std::optional<std::filesystem::path>& out_dir_override = std::nullopt,
                                const std::optional<std::uint64_t>& seed_override = std::nullopt);

void write_report(const eval::EvalReport& report, const std::filesystem::path& out_dir);

struct ExampleParams {
    std::size_t n = 1000000;
    std::size_t labeled_n = 1000;
    std::size_t test_n = 100000;
    std::size_t bins = 64;
    double lo = -6.0;
    double hi = 6.0;
    double accuracy_tolerance = 0.01;
    std::size_t sweep_grid = 21;
};

// Samples the example, fits the histogram predictor on every draw, estimates
// P(x1|y) by counting over the first labeled_n draws, and compares the
// thresholded surrogate posterior to the Bayes rule of the discretized joint.
eval::EvalReport run_example(const datagen::ExampleSpec& spec, const ExampleParams& params, std::uint64_t seed);

struct FuzzParams {
    std::size_t trials = 1000;
    std::size_t k_min = 2;
    std::size_t k_max = 16;
    double min_margin = 0.05;
    std::size_t recall_trials = 1000;
    std::size_t missing_trials = 500;
    std::size_t rank_pairs = 100000;
    double tolerance_general = 1e-10;
    double tolerance_special = 1e-12;
};

eval::EvalReport run_fuzz(const FuzzParams& params, std::uint64_t seed);

}  // namespace surrogate::experiments
