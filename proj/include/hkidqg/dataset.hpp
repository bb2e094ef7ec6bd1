#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hkidqg {

constexpr int kDatasetSchemaVersion = 1;

struct DatasetRecord {
    std::string combination_id;
    std::string diagram_path;  // as written in the file
    std::string subject;
    std::string course;
    std::string concept_text;
    std::string target;
    std::string question;
    std::vector<std::string> element_list;

    bool operator==(const DatasetRecord&) const = default;
};

nlohmann::json record_to_json(const DatasetRecord& r);

struct LoadIssue {
    std::size_t line = 0;  // 1-based
    std::string reason;
    bool fatal = true;  // false: record kept, reported as a warning
};

struct ValidationReport {
    std::string path;
    std::size_t lines = 0;
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    std::vector<LoadIssue> issues;

    bool clean() const noexcept { return rejected == 0; }
};

nlohmann::json validation_to_json(const ValidationReport& r);

struct LoadOptions {
    int schema_version = kDatasetSchemaVersion;
    bool strict = false;        // any rejected line fails the whole load
    bool check_images = true;   // missing diagram: warning, or rejection under strict
};

struct LoadResult {
    std::vector<DatasetRecord> records;
    ValidationReport report;
    std::string base_dir;  // directory of the JSONL file
};

/// Reads one JSON object per line. Blank lines are skipped. Invalid lines are
/// rejected with their line number and reason. A schema_version other than
/// the requested one raises FormatError; under strict, any rejection raises
/// ValidationError.
LoadResult load_dataset(const std::string& path, const LoadOptions& opts = {});

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

/// Resolves a record's diagram path against the dataset directory.
std::string resolve_diagram_path(const std::string& base_dir, const std::string& diagram_path);

enum class Split { train, val, test };
const char* split_name(Split s);

struct SplitOptions {
    std::uint64_t seed = 0;
    double train = 0.7;
    double val = 0.1;
    // Subjects with fewer diagrams are pooled into one stratum.
    std::size_t min_stratum = 10;
    // Explicit diagram -> split assignments that take precedence over hashing.
    std::map<std::string, Split> overrides;
};

/// Diagram-keyed assignment. Diagrams are grouped by subject, ordered by a
/// seeded hash of their id, and the first 70% / next 10% / rest go to
/// train / val / test, so all records of one diagram share a split.
std::vector<Split> split_records(const std::vector<DatasetRecord>& records,
                                 const SplitOptions& opts);

std::map<std::string, Split> load_split_overrides(const std::string& path);

struct CountRow {
    std::string name;
    std::size_t questions = 0;     // unique questions
    std::size_t diagrams = 0;      // unique diagrams
    std::size_t combinations = 0;  // records
};

struct PartitionStats {
    std::size_t diagrams = 0;
    std::size_t questions = 0;
    std::size_t combinations = 0;
};

struct CorpusStats {
    PartitionStats total;
    std::size_t subjects = 0;
    std::size_t courses = 0;
    std::size_t concepts = 0;
    double mean_question_words = 0.0;
    std::size_t min_question_words = 0;
    std::size_t max_question_words = 0;
    // Sorted by combinations descending, then name.
    std::vector<CountRow> per_concept;
    std::optional<std::map<std::string, PartitionStats>> per_split;
    std::vector<std::string> notes;
};

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records,
                         const std::vector<Split>* splits = nullptr);

nlohmann::json stats_to_json(const CorpusStats& s);
std::string stats_to_text(const CorpusStats& s);

}  // namespace hkidqg
