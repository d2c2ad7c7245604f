#include "surrogate/records.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include "surrogate/errors.hpp"

namespace surrogate {

namespace csv {

std::string escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw IoError("unterminated quote in CSV line");
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace csv

namespace {

constexpr const char* kRecordHeader = "id,first,last,middle_initial,street,phone,specialty,grad_year";
constexpr const char* kTruthHeader = "update_id,master_id";

std::string opt(const std::optional<std::string>& s) { return s ? csv::escape(*s) : std::string(); }

template <typename Int>
Int parse_int(const std::string& s, const char* what) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw IoError(std::string("bad ") + what + " '" + s + "'");
    }
    return v;
}

std::optional<std::string> opt_field(std::string s) {
    if (s.empty()) return std::nullopt;
    return s;
}

void expect_header(std::istream& in, const char* header) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty CSV input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) throw IoError("unexpected CSV header '" + line + "'");
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<LinkageRecord>& records) {
    out << kRecordHeader << '\n';
    for (const auto& r : records) {
        out << r.id << ',' << opt(r.first) << ',' << csv::escape(r.last) << ',';
        if (r.middle_initial) out << *r.middle_initial;
        out << ',' << opt(r.street) << ',' << opt(r.phone) << ',' << opt(r.specialty) << ',';
        if (r.grad_year) out << *r.grad_year;
        out << '\n';
    }
}

std::vector<LinkageRecord> read_records_csv(std::istream& in) {
    expect_header(in, kRecordHeader);
    std::vector<LinkageRecord> records;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = csv::split_line(line);
        if (f.size() != 8) {
            throw IoError("line " + std::to_string(lineno) + ": expected 8 fields, got " + std::to_string(f.size()));
        }
        LinkageRecord r;
        r.id = parse_int<RecordId>(f[0], "id");
        r.first = opt_field(std::move(f[1]));
        r.last = std::move(f[2]);
        if (r.last.empty()) throw IoError("line " + std::to_string(lineno) + ": last name is required");
        if (f[3].size() > 1) throw IoError("line " + std::to_string(lineno) + ": middle initial is one character");
        if (!f[3].empty()) r.middle_initial = f[3][0];
        r.street = opt_field(std::move(f[4]));
        r.phone = opt_field(std::move(f[5]));
        r.specialty = opt_field(std::move(f[6]));
        if (!f[7].empty()) r.grad_year = parse_int<int>(f[7], "grad_year");
        records.push_back(std::move(r));
    }
    return records;
}

void write_truth_csv(std::ostream& out, const std::vector<TruthEntry>& truth) {
    out << kTruthHeader << '\n';
    for (const auto& t : truth) {
        out << t.update_id << ',';
        if (t.master_id) out << *t.master_id;
        out << '\n';
    }
}

std::vector<TruthEntry> read_truth_csv(std::istream& in) {
    expect_header(in, kTruthHeader);
    std::vector<TruthEntry> truth;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = csv::split_line(line);
        if (f.size() != 2) throw IoError("truth rows need 2 fields");
        TruthEntry t;
        t.update_id = parse_int<RecordId>(f[0], "update_id");
        if (!f[1].empty()) t.master_id = parse_int<RecordId>(f[1], "master_id");
        truth.push_back(t);
    }
    return truth;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

std::ifstream open_in(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot read " + p.string());
    return in;
}

}  // namespace

void save_corpus(const std::filesystem::path& dir, const LinkageCorpus& corpus) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    auto m = open_out(dir / "master.csv");
    write_records_csv(m, corpus.master);
    auto u = open_out(dir / "update.csv");
    write_records_csv(u, corpus.update);
    auto t = open_out(dir / "truth.csv");
    write_truth_csv(t, corpus.truth);
}

LinkageCorpus load_corpus(const std::filesystem::path& dir) {
    LinkageCorpus corpus;
    auto m = open_in(dir / "master.csv");
    corpus.master = read_records_csv(m);
    auto u = open_in(dir / "update.csv");
    corpus.update = read_records_csv(u);
    if (std::filesystem::exists(dir / "truth.csv")) {
        auto t = open_in(dir / "truth.csv");
        corpus.truth = read_truth_csv(t);
    }
    return corpus;
}

}  // namespace surrogate
