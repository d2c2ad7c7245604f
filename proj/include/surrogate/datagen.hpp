#pragma once

// Seeded synthetic data: the two worked example distributions (binary x1,
// scalar x2 with a Gaussian class-0 and Laplace class-1 density), random
// class-conditionally independent joints, and a two-database physician
// corpus for record linkage.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "surrogate/oracle.hpp"
#include "surrogate/records.hpp"

namespace surrogate::datagen {

struct Densities {
    double gaussian_mean = -1.0;  // x2 | y=0
    double gaussian_std = 1.0;
    double laplace_location = 1.0;  // x2 | y=1
    double laplace_scale = 1.0;
};

// Joint P(x1, y) in the order (x1=0,y=0), (x1=0,y=1), (x1=1,y=0), (x1=1,y=1),
// plus the class-conditional densities of x2.
struct ExampleSpec {
    std::array<double, 4> joint_x1_y{};
    Densities densities;

    static ExampleSpec example1();
    // 100%-recall variant: P(x1=0, y=1) = 0.
    static ExampleSpec example2();

    double joint(int x1, int y) const { return joint_x1_y[static_cast<std::size_t>(2 * x1 + y)]; }
    bool hundred_percent_recall() const { return joint(0, 1) == 0.0; }

    // Throws InvalidSpec.
    void validate() const;
};

struct ExampleSample {
    int x1 = 0;
    double x2 = 0.0;
    int y = 0;

    friend bool operator==(const ExampleSample&, const ExampleSample&) = default;
};

// i.i.d. draws: (x1, y) from the table, then x2 from the y-conditional density.
std::vector<ExampleSample> sample_example(const ExampleSpec& spec, std::size_t n, std::uint64_t seed);

// Exact discretization onto `bins` equal-width cells over [lo, hi); the tail
// mass below lo / above hi is folded into the edge cells, matching how the
// histogram estimator bins out-of-range values.
oracle::DiscreteJoint discretize_example(const ExampleSpec& spec, std::size_t bins, double lo, double hi);

void write_samples_csv(std::ostream& out, const std::vector<ExampleSample>& samples);
std::vector<ExampleSample> read_samples_csv(std::istream& in);

// P(y), P(x1|y) uniform on [0,1], P(x2|y) uniform on the K-simplex; resampled
// until |P(x1=1|y=0) - P(x1=1|y=1)| >= min_margin. Throws InvalidSpec for
// K < 2 or when `max_tries` draws all miss the margin.
oracle::CIJointSpec random_ci_joint(std::size_t k, std::uint64_t seed, double min_margin,
                                    std::size_t max_tries = 100000);

// Same, with P(x1=1|y=1) = 1 so that P(x1=0, y=1) = 0.
oracle::CIJointSpec random_recall_joint(std::size_t k, std::uint64_t seed, double min_margin,
                                        std::size_t max_tries = 100000);

// Per-field corruption rates applied to true-match update records, plus the
// rate at which master fields are simply absent.
struct FieldNoise {
    double first_typo = 0.15;
    double middle_missing = 0.2;
    double middle_changed = 0.05;
    double street_changed = 0.3;
    double street_typo = 0.2;
    double street_missing = 0.05;
    double phone_changed = 0.3;
    double phone_missing = 0.15;
    double specialty_changed = 0.25;
    double specialty_missing = 0.1;
    double grad_year_missing = 0.1;
    double master_missing = 0.05;

    static FieldNoise none();
};

struct LinkageCorpusSpec {
    std::size_t n_master = 10000;
    std::size_t n_update = 500;
    double match_fraction = 0.9;
    int year_min = 1950;
    int year_max = 2010;
    std::size_t name_pool_size = 1000;
    std::size_t first_name_pool_size = 300;
    // Share of master records created as a relative of an earlier record:
    // same last name, street and phone, independent everything else.
    double household_fraction = 0.1;
    FieldNoise field_noise;
    std::uint64_t seed = 7;

    // Throws InvalidSpec.
    void validate() const;
};

// Every true-match update copies a master record, keeps its last name and
// graduation year (the year may only go missing) and corrupts the remaining
// fields per field_noise. Other updates are fresh records whose last name is
// drawn from the same pool.
LinkageCorpus gen_linkage_corpus(const LinkageCorpusSpec& spec);

void to_json(nlohmann::json& j, const Densities& d);
void from_json(const nlohmann::json& j, Densities& d);
void to_json(nlohmann::json& j, const FieldNoise& n);
void from_json(const nlohmann::json& j, FieldNoise& n);
void to_json(nlohmann::json& j, const LinkageCorpusSpec& s);
void from_json(const nlohmann::json& j, LinkageCorpusSpec& s);
void to_json(nlohmann::json& j, const oracle::CIJointSpec& s);

}  // namespace surrogate::datagen
