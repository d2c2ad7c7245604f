#pragma once

// Entity records for the two-database linkage setting and their CSV forms.
//
// Record CSV header: id,first,last,middle_initial,street,phone,specialty,grad_year
// Truth CSV header:  update_id,master_id   (empty master_id = unmatchable)
// An empty field means the value is missing.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace surrogate {

using RecordId = std::int64_t;

struct LinkageRecord {
    RecordId id = 0;
    std::optional<std::string> first;
    std::string last;
    std::optional<char> middle_initial;
    std::optional<std::string> street;
    std::optional<std::string> phone;
    std::optional<std::string> specialty;
    std::optional<int> grad_year;

    friend bool operator==(const LinkageRecord&, const LinkageRecord&) = default;
};

struct TruthEntry {
    RecordId update_id = 0;
    std::optional<RecordId> master_id;

    friend bool operator==(const TruthEntry&, const TruthEntry&) = default;
};

struct LinkageCorpus {
    std::vector<LinkageRecord> master;
    std::vector<LinkageRecord> update;
    std::vector<TruthEntry> truth;
};

void write_records_csv(std::ostream& out, const std::vector<LinkageRecord>& records);
std::vector<LinkageRecord> read_records_csv(std::istream& in);

void write_truth_csv(std::ostream& out, const std::vector<TruthEntry>& truth);
std::vector<TruthEntry> read_truth_csv(std::istream& in);

// master.csv, update.csv and truth.csv inside `dir`. Throws IoError.
void save_corpus(const std::filesystem::path& dir, const LinkageCorpus& corpus);
LinkageCorpus load_corpus(const std::filesystem::path& dir);

// Minimal RFC 4180 helpers shared by the CSV readers and writers.
namespace csv {
std::string escape(const std::string& field);
// Splits one line; quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_line(const std::string& line);
}  // namespace csv

}  // namespace surrogate
