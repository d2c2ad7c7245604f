#include "surrogate/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <string>

#include "surrogate/errors.hpp"
#include "surrogate/rng.hpp"

namespace surrogate::datagen {

ExampleSpec ExampleSpec::example1() {
    return ExampleSpec{{0.3, 0.1, 0.2, 0.4}, Densities{}};
}

ExampleSpec ExampleSpec::example2() {
    return ExampleSpec{{0.3, 0.0, 0.2, 0.5}, Densities{}};
}

void ExampleSpec::validate() const {
    double sum = 0.0;
    for (double p : joint_x1_y) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec("joint entries must lie in [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw InvalidSpec("joint P(x1,y) sums to " + std::to_string(sum));
    if (!(joint(0, 0) + joint(1, 0) > 0.0) || !(joint(0, 1) + joint(1, 1) > 0.0)) {
        throw InvalidSpec("both classes need positive mass");
    }
    if (!(densities.gaussian_std > 0.0) || !(densities.laplace_scale > 0.0)) {
        throw InvalidSpec("density scales must be positive");
    }
}

std::vector<ExampleSample> sample_example(const ExampleSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    if (n == 0) throw InvalidSpec("sample size must be >= 1");
    Rng rng(seed);
    std::vector<ExampleSample> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t cell = rng.categorical(spec.joint_x1_y);
        ExampleSample s;
        s.x1 = static_cast<int>(cell / 2);
        s.y = static_cast<int>(cell % 2);
        const auto& d = spec.densities;
        s.x2 = s.y == 0 ? rng.normal(d.gaussian_mean, d.gaussian_std) : rng.laplace(d.laplace_location, d.laplace_scale);
        out.push_back(s);
    }
    return out;
}

namespace {

double gaussian_cdf(double x, double mean, double std) {
    return 0.5 * std::erfc(-(x - mean) / (std * std::numbers::sqrt2));
}

double laplace_cdf(double x, double loc, double scale) {
    if (x < loc) return 0.5 * std::exp((x - loc) / scale);
    return 1.0 - 0.5 * std::exp(-(x - loc) / scale);
}

template <typename Cdf>
std::vector<double> bin_masses(Cdf cdf, std::size_t bins, double lo, double hi) {
    std::vector<double> mass(bins);
    double prev = 0.0;
    for (std::size_t i = 0; i < bins; ++i) {
        const double edge = lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(bins);
        const double cur = i + 1 == bins ? 1.0 : cdf(edge);
        mass[i] = std::max(0.0, cur - prev);
        prev = cur;
    }
    double sum = 0.0;
    for (double m : mass) sum += m;
    for (double& m : mass) m /= sum;
    return mass;
}

}  // namespace

oracle::DiscreteJoint discretize_example(const ExampleSpec& spec, std::size_t bins, double lo, double hi) {
    spec.validate();
    if (bins < 2 || !(hi > lo)) throw InvalidSpec("discretization needs >= 2 bins over a nonempty range");
    const auto& d = spec.densities;
    oracle::CIJointSpec ci;
    ci.p_y0 = spec.joint(0, 0) + spec.joint(1, 0);
    ci.p_x1_given_y = {spec.joint(1, 0) / ci.p_y0, spec.joint(1, 1) / (1.0 - ci.p_y0)};
    ci.p_x2_given_y[0] = bin_masses([&](double x) { return gaussian_cdf(x, d.gaussian_mean, d.gaussian_std); }, bins,
                                    lo, hi);
    ci.p_x2_given_y[1] = bin_masses([&](double x) { return laplace_cdf(x, d.laplace_location, d.laplace_scale); },
                                    bins, lo, hi);
    return oracle::joint_from_ci_spec(ci);
}

void write_samples_csv(std::ostream& out, const std::vector<ExampleSample>& samples) {
    out << "x1,x2,y\n";
    char buf[64];
    for (const auto& s : samples) {
        std::snprintf(buf, sizeof buf, "%d,%.17g,%d\n", s.x1, s.x2, s.y);
        out << buf;
    }
}

std::vector<ExampleSample> read_samples_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty sample CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x1,x2,y") throw IoError("sample CSV header must be 'x1,x2,y'");
    std::vector<ExampleSample> out;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = csv::split_line(line);
        if (f.size() != 3) throw IoError("sample rows need 3 fields");
        ExampleSample s;
        try {
            s.x1 = std::stoi(f[0]);
            s.x2 = std::stod(f[1]);
            s.y = std::stoi(f[2]);
        } catch (const std::exception&) {
            throw IoError("unparseable sample row '" + line + "'");
        }
        if ((s.x1 != 0 && s.x1 != 1) || (s.y != 0 && s.y != 1)) throw IoError("x1 and y must be 0 or 1");
        out.push_back(s);
    }
    return out;
}

namespace {

std::vector<double> uniform_simplex(Rng& rng, std::size_t k) {
    std::vector<double> v(k);
    double sum = 0.0;
    for (auto& x : v) {
        x = rng.exponential();
        sum += x;
    }
    for (auto& x : v) x /= sum;
    return v;
}

}  // namespace

oracle::CIJointSpec random_ci_joint(std::size_t k, std::uint64_t seed, double min_margin, std::size_t max_tries) {
    if (k < 2) throw InvalidSpec("K must be >= 2");
    if (!(min_margin >= 0.0 && min_margin < 1.0)) throw InvalidSpec("min_margin must lie in [0,1)");
    Rng rng(seed);
    oracle::CIJointSpec spec;
    spec.p_y0 = rng.uniform_open();
    spec.p_x2_given_y[0] = uniform_simplex(rng, k);
    spec.p_x2_given_y[1] = uniform_simplex(rng, k);
    for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
        spec.p_x1_given_y = {rng.uniform_open(), rng.uniform_open()};
        if (std::abs(spec.p_x1_given_y[0] - spec.p_x1_given_y[1]) >= min_margin) return spec;
    }
    throw InvalidSpec("no joint met the margin after " + std::to_string(max_tries) + " draws");
}

oracle::CIJointSpec random_recall_joint(std::size_t k, std::uint64_t seed, double min_margin, std::size_t max_tries) {
    if (k < 2) throw InvalidSpec("K must be >= 2");
    if (!(min_margin >= 0.0 && min_margin < 1.0)) throw InvalidSpec("min_margin must lie in [0,1)");
    Rng rng(seed);
    oracle::CIJointSpec spec;
    spec.p_y0 = rng.uniform_open();
    spec.p_x2_given_y[0] = uniform_simplex(rng, k);
    spec.p_x2_given_y[1] = uniform_simplex(rng, k);
    for (std::size_t attempt = 0; attempt < max_tries; ++attempt) {
        spec.p_x1_given_y = {rng.uniform_open(), 1.0};
        if (1.0 - spec.p_x1_given_y[0] >= min_margin) return spec;
    }
    throw InvalidSpec("no joint met the margin after " + std::to_string(max_tries) + " draws");
}

FieldNoise FieldNoise::none() {
    FieldNoise n;
    n.first_typo = n.middle_missing = n.middle_changed = 0.0;
    n.street_changed = n.street_typo = n.street_missing = 0.0;
    n.phone_changed = n.phone_missing = 0.0;
    n.specialty_changed = n.specialty_missing = 0.0;
    n.grad_year_missing = n.master_missing = 0.0;
    return n;
}

void LinkageCorpusSpec::validate() const {
    if (n_master == 0 || n_update == 0) throw InvalidSpec("record counts must be positive");
    if (name_pool_size == 0 || first_name_pool_size == 0) throw InvalidSpec("name pools must be nonempty");
    if (year_max < year_min) throw InvalidSpec("year range is empty");
    auto unit = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidSpec(std::string(what) + " must lie in [0,1]");
    };
    unit(match_fraction, "match_fraction");
    unit(household_fraction, "household_fraction");
    const auto& f = field_noise;
    for (double p : {f.first_typo, f.middle_missing, f.middle_changed, f.street_changed, f.street_typo, f.street_missing,
                     f.phone_changed, f.phone_missing, f.specialty_changed, f.specialty_missing, f.grad_year_missing,
                     f.master_missing}) {
        unit(p, "field_noise rate");
    }
    if (match_fraction > 0.0 && n_update > n_master) {
        throw InvalidSpec("matched updates need distinct master records; n_update exceeds n_master");
    }
}

namespace {

constexpr std::array<const char*, 32> kSyllables = {
    "an", "ber", "cal", "dor", "el", "fen", "gar", "hol", "is", "jan", "kel", "lin", "mar", "nor", "os", "per",
    "quin", "ros", "sal", "tor", "ul", "van", "wes", "xan", "yor", "zel", "ba", "co", "di", "fu", "ga", "ho"};

constexpr std::array<const char*, 6> kStreetSuffixes = {"St", "Ave", "Rd", "Blvd", "Dr", "Ln"};

constexpr std::array<const char*, 24> kSpecialties = {
    "Anesthesiology", "Cardiology",    "Dermatology",      "Emergency Medicine", "Endocrinology", "Family Medicine",
    "Gastroenterology", "Geriatrics",  "Hematology",       "Infectious Disease", "Internal Medicine", "Nephrology",
    "Neurology",       "Obstetrics",   "Oncology",         "Ophthalmology",      "Orthopedics",   "Otolaryngology",
    "Pathology",       "Pediatrics",   "Psychiatry",       "Pulmonology",        "Radiology",     "Urology"};

std::string capitalize(std::string s) {
    if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s;
}

std::vector<std::string> make_name_pool(Rng& rng, std::size_t size, std::size_t min_syllables) {
    std::set<std::string> seen;
    std::vector<std::string> pool;
    pool.reserve(size);
    while (pool.size() < size) {
        const std::size_t parts = min_syllables + rng.below(2);
        std::string name;
        for (std::size_t i = 0; i < parts; ++i) name += kSyllables[rng.below(kSyllables.size())];
        name = capitalize(name);
        if (seen.insert(name).second) pool.push_back(name);
    }
    return pool;
}

std::string random_phone(Rng& rng) {
    std::string p;
    p += static_cast<char>('2' + rng.below(8));
    for (int i = 0; i < 9; ++i) p += static_cast<char>('0' + rng.below(10));
    return p;
}

char random_letter(Rng& rng) { return static_cast<char>('A' + rng.below(26)); }

// One random character edit: substitution, insertion, deletion or
// transposition of neighbours.
std::string typo(std::string s, Rng& rng) {
    const char letter = static_cast<char>('a' + rng.below(26));
    const std::uint64_t op = s.size() < 2 ? rng.below(2) : rng.below(4);
    switch (op) {
        case 0: {
            if (s.empty()) return std::string(1, letter);
            const std::size_t i = rng.below(s.size());
            s[i] = s[i] == letter ? static_cast<char>('a' + (letter - 'a' + 1) % 26) : letter;
            return s;
        }
        case 1:
            s.insert(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size() + 1)), letter);
            return s;
        case 2:
            s.erase(s.begin() + static_cast<std::ptrdiff_t>(rng.below(s.size())));
            return s;
        default: {
            const std::size_t i = rng.below(s.size() - 1);
            if (s[i] == s[i + 1]) {
                s.erase(s.begin() + static_cast<std::ptrdiff_t>(i));
            } else {
                std::swap(s[i], s[i + 1]);
            }
            return s;
        }
    }
}

class PersonFactory {
public:
    PersonFactory(const LinkageCorpusSpec& spec, Rng& rng) : spec_(spec), rng_(rng) {
        last_names_ = make_name_pool(rng_, spec.name_pool_size, 2);
        first_names_ = make_name_pool(rng_, spec.first_name_pool_size, 1);
        street_names_ = make_name_pool(rng_, 200, 1);
        last_weights_.resize(last_names_.size());
        for (std::size_t i = 0; i < last_weights_.size(); ++i) {
            last_weights_[i] = 1.0 / (1.0 + static_cast<double>(i) / 50.0);
        }
        const double center = 0.5 * (spec.year_min + spec.year_max) + 5.0;
        const double width = std::max(1.0, (spec.year_max - spec.year_min) / 4.0);
        for (int y = spec.year_min; y <= spec.year_max; ++y) {
            const double z = (y - center) / width;
            year_weights_.push_back(std::exp(-0.5 * z * z) + 0.15);
        }
    }

    std::string last_name() { return last_names_[rng_.categorical(last_weights_)]; }
    std::string first_name() { return first_names_[rng_.below(first_names_.size())]; }
    std::string street() {
        return std::to_string(1 + rng_.below(9999)) + " " + street_names_[rng_.below(street_names_.size())] + " " +
               kStreetSuffixes[rng_.below(kStreetSuffixes.size())];
    }
    std::string specialty() { return kSpecialties[rng_.below(kSpecialties.size())]; }
    int year() { return spec_.year_min + static_cast<int>(rng_.categorical(year_weights_)); }

    LinkageRecord person(RecordId id) {
        LinkageRecord r;
        r.id = id;
        r.first = first_name();
        r.last = last_name();
        r.middle_initial = random_letter(rng_);
        r.street = street();
        r.phone = random_phone(rng_);
        r.specialty = specialty();
        r.grad_year = year();
        return r;
    }

    // Fields that a database may simply not hold.
    void drop_fields(LinkageRecord& r, double rate) {
        if (rng_.bernoulli(rate)) r.middle_initial.reset();
        if (rng_.bernoulli(rate)) r.street.reset();
        if (rng_.bernoulli(rate)) r.phone.reset();
        if (rng_.bernoulli(rate)) r.specialty.reset();
        if (rng_.bernoulli(rate)) r.grad_year.reset();
    }

    void corrupt(LinkageRecord& r) {
        const auto& n = spec_.field_noise;
        if (r.first && rng_.bernoulli(n.first_typo)) r.first = capitalize(typo(*r.first, rng_));
        if (rng_.bernoulli(n.middle_missing)) {
            r.middle_initial.reset();
        } else if (r.middle_initial && rng_.bernoulli(n.middle_changed)) {
            char c = random_letter(rng_);
            if (c == *r.middle_initial) c = c == 'Z' ? 'A' : static_cast<char>(c + 1);
            r.middle_initial = c;
        }
        if (rng_.bernoulli(n.street_missing)) {
            r.street.reset();
        } else if (rng_.bernoulli(n.street_changed)) {
            r.street = street();
        } else if (r.street && rng_.bernoulli(n.street_typo)) {
            r.street = typo(*r.street, rng_);
        }
        if (rng_.bernoulli(n.phone_missing)) {
            r.phone.reset();
        } else if (rng_.bernoulli(n.phone_changed)) {
            r.phone = random_phone(rng_);
        }
        if (rng_.bernoulli(n.specialty_missing)) {
            r.specialty.reset();
        } else if (rng_.bernoulli(n.specialty_changed)) {
            r.specialty = specialty();
        }
        // Graduation year is never altered on a true match; it can only be absent.
        if (rng_.bernoulli(n.grad_year_missing)) r.grad_year.reset();
    }

private:
    const LinkageCorpusSpec& spec_;
    Rng& rng_;
    std::vector<std::string> last_names_;
    std::vector<std::string> first_names_;
    std::vector<std::string> street_names_;
    std::vector<double> last_weights_;
    std::vector<double> year_weights_;
};

}  // namespace

LinkageCorpus gen_linkage_corpus(const LinkageCorpusSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    PersonFactory factory(spec, rng);
    LinkageCorpus corpus;

    corpus.master.reserve(spec.n_master);
    for (std::size_t i = 0; i < spec.n_master; ++i) {
        LinkageRecord r = factory.person(static_cast<RecordId>(i));
        if (i > 0 && rng.bernoulli(spec.household_fraction)) {
            const auto& relative = corpus.master[rng.below(i)];
            r.last = relative.last;
            r.street = relative.street;
            r.phone = relative.phone;
        }
        factory.drop_fields(r, spec.field_noise.master_missing);
        corpus.master.push_back(std::move(r));
    }

    std::set<std::size_t> used;
    corpus.update.reserve(spec.n_update);
    corpus.truth.reserve(spec.n_update);
    for (std::size_t u = 0; u < spec.n_update; ++u) {
        const auto id = static_cast<RecordId>(u);
        if (rng.bernoulli(spec.match_fraction)) {
            std::size_t m;
            do {
                m = rng.below(spec.n_master);
            } while (!used.insert(m).second);
            LinkageRecord r = corpus.master[m];
            r.id = id;
            factory.corrupt(r);
            corpus.update.push_back(std::move(r));
            corpus.truth.push_back({id, corpus.master[m].id});
        } else {
            LinkageRecord r = factory.person(id);
            factory.drop_fields(r, spec.field_noise.master_missing);
            corpus.update.push_back(std::move(r));
            corpus.truth.push_back({id, std::nullopt});
        }
    }
    return corpus;
}

void to_json(nlohmann::json& j, const Densities& d) {
    j = nlohmann::json{{"gaussian_mean", d.gaussian_mean},
                       {"gaussian_std", d.gaussian_std},
                       {"laplace_location", d.laplace_location},
                       {"laplace_scale", d.laplace_scale}};
}

void from_json(const nlohmann::json& j, Densities& d) {
    d.gaussian_mean = j.value("gaussian_mean", d.gaussian_mean);
    d.gaussian_std = j.value("gaussian_std", d.gaussian_std);
    d.laplace_location = j.value("laplace_location", d.laplace_location);
    d.laplace_scale = j.value("laplace_scale", d.laplace_scale);
}

#define SURROGATE_NOISE_FIELDS(X)                                                                           \
    X(first_typo) X(middle_missing) X(middle_changed) X(street_changed) X(street_typo) X(street_missing)     \
        X(phone_changed) X(phone_missing) X(specialty_changed) X(specialty_missing) X(grad_year_missing)    \
            X(master_missing)

void to_json(nlohmann::json& j, const FieldNoise& n) {
    j = nlohmann::json::object();
#define X(field) j[#field] = n.field;
    SURROGATE_NOISE_FIELDS(X)
#undef X
}

void from_json(const nlohmann::json& j, FieldNoise& n) {
#define X(field) n.field = j.value(#field, n.field);
    SURROGATE_NOISE_FIELDS(X)
#undef X
}

#undef SURROGATE_NOISE_FIELDS

void to_json(nlohmann::json& j, const LinkageCorpusSpec& s) {
    j = nlohmann::json{{"n_master", s.n_master},
                       {"n_update", s.n_update},
                       {"match_fraction", s.match_fraction},
                       {"year_range", {s.year_min, s.year_max}},
                       {"name_pool_size", s.name_pool_size},
                       {"first_name_pool_size", s.first_name_pool_size},
                       {"household_fraction", s.household_fraction},
                       {"field_noise", s.field_noise},
                       {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, LinkageCorpusSpec& s) {
    s.n_master = j.value("n_master", s.n_master);
    s.n_update = j.value("n_update", s.n_update);
    s.match_fraction = j.value("match_fraction", s.match_fraction);
    if (j.contains("year_range")) {
        const auto range = j.at("year_range").get<std::vector<int>>();
        if (range.size() != 2) throw InvalidSpec("year_range must be [min, max]");
        s.year_min = range[0];
        s.year_max = range[1];
    }
    s.name_pool_size = j.value("name_pool_size", s.name_pool_size);
    s.first_name_pool_size = j.value("first_name_pool_size", s.first_name_pool_size);
    s.household_fraction = j.value("household_fraction", s.household_fraction);
    if (j.contains("field_noise")) from_json(j.at("field_noise"), s.field_noise);
    s.seed = j.value("seed", s.seed);
}

void to_json(nlohmann::json& j, const oracle::CIJointSpec& s) {
    j = nlohmann::json{{"p_y0", s.p_y0},
                       {"p_x1_given_y", s.p_x1_given_y},
                       {"p_x2_given_y", {s.p_x2_given_y[0], s.p_x2_given_y[1]}}};
}

}  // namespace surrogate::datagen
