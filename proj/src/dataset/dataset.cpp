#include "hkidqg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hkidqg/error.hpp"
#include "hkidqg/hash.hpp"
#include "hkidqg/io.hpp"
#include "hkidqg/metrics.hpp"

namespace hkidqg {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kMinQuestionWords = 4;
constexpr std::size_t kMaxQuestionWords = 50;

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

// Returns the rejection reason, or an empty string if the record is valid.
std::string parse_record(const json& j, DatasetRecord& r) {
    if (!j.is_object()) return "line is not a JSON object";
    static const char* kRequired[] = {"combination_id", "diagram_path", "subject", "course",
                                      "concept",        "target",       "question"};
    std::string* slots[] = {&r.combination_id, &r.diagram_path, &r.subject, &r.course,
                            &r.concept_text,        &r.target,       &r.question};
    for (std::size_t i = 0; i < std::size(kRequired); ++i) {
        const char* name = kRequired[i];
        if (!j.contains(name)) return std::string("missing field: ") + name;
        if (!j[name].is_string()) return std::string("field is not a string: ") + name;
        *slots[i] = j[name].get<std::string>();
        if (blank(*slots[i])) return std::string("empty field: ") + name;
    }
    if (j.contains("element_list")) {
        const json& e = j["element_list"];
        if (!e.is_array()) return "field is not a list: element_list";
        for (const auto& x : e) {
            if (!x.is_string()) return "element_list entries must be strings";
            r.element_list.push_back(x.get<std::string>());
        }
    }
    return {};
}

std::uint64_t diagram_hash(const std::string& id, std::uint64_t seed) {
    return mix64(fnv1a(id) ^ mix64(seed));
}

}  // namespace

json record_to_json(const DatasetRecord& r) {
    return {{"schema_version", kDatasetSchemaVersion},
            {"combination_id", r.combination_id},
            {"diagram_path", r.diagram_path},
            {"subject", r.subject},
            {"course", r.course},
            {"concept", r.concept_text},
            {"target", r.target},
            {"question", r.question},
            {"element_list", r.element_list}};
}

json validation_to_json(const ValidationReport& r) {
    json issues = json::array();
    for (const auto& i : r.issues)
        issues.push_back({{"line", i.line}, {"reason", i.reason}, {"severity", i.fatal ? "error" : "warning"}});
    return {{"path", r.path},
            {"lines", r.lines},
            {"accepted", r.accepted},
            {"rejected", r.rejected},
            {"issues", issues}};
}

std::string resolve_diagram_path(const std::string& base_dir, const std::string& diagram_path) {
    const fs::path p(diagram_path);
    if (p.is_absolute() || base_dir.empty()) return p.string();
    return (fs::path(base_dir) / p).string();
}

LoadResult load_dataset(const std::string& path, const LoadOptions& opts) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read dataset: " + path);
    LoadResult res;
    res.report.path = path;
    res.base_dir = fs::path(path).parent_path().string();
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        ++res.report.lines;
        auto reject = [&](std::string reason) {
            res.report.issues.push_back({lineno, std::move(reason), true});
            ++res.report.rejected;
        };
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            reject("invalid JSON");
            continue;
        }
        if (j.is_object() && j.contains("schema_version")) {
            const json& v = j["schema_version"];
            if (!v.is_number_integer() || v.get<int>() != opts.schema_version) {
                throw FormatError(path + ":" + std::to_string(lineno) + ": schema_version " +
                                  v.dump() + " does not match expected " +
                                  std::to_string(opts.schema_version));
            }
        }
        DatasetRecord r;
        if (std::string why = parse_record(j, r); !why.empty()) {
            reject(std::move(why));
            continue;
        }
        if (!ids.insert(r.combination_id).second) {
            reject("duplicate combination_id: " + r.combination_id);
            continue;
        }
        if (opts.check_images && !fs::exists(resolve_diagram_path(res.base_dir, r.diagram_path))) {
            if (opts.strict) {
                reject("diagram not found: " + r.diagram_path);
                continue;
            }
            res.report.issues.push_back({lineno, "diagram not found: " + r.diagram_path, false});
        }
        const std::size_t words = tokenize_eval(r.question).size();
        if (words < kMinQuestionWords || words > kMaxQuestionWords) {
            res.report.issues.push_back(
                {lineno, "question has " + std::to_string(words) + " words (expected 4..50)", false});
        }
        ++res.report.accepted;
        res.records.push_back(std::move(r));
    }
    if (opts.strict && res.report.rejected > 0) {
        const LoadIssue* first = nullptr;
        for (const auto& i : res.report.issues)
            if (i.fatal) {
                first = &i;
                break;
            }
        throw ValidationError(path + ": " + std::to_string(res.report.rejected) +
                              " invalid line(s); first at line " + std::to_string(first->line) +
                              ": " + first->reason);
    }
    return res;
}

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
    std::string out;
    for (const auto& r : records) out += record_to_json(r).dump() + "\n";
    write_file_atomic(path, out);
}

const char* split_name(Split s) {
    switch (s) {
        case Split::train: return "train";
        case Split::val: return "val";
        case Split::test: return "test";
    }
    return "?";
}

std::map<std::string, Split> load_split_overrides(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::parse_error& e) {
        throw FormatError("split file is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw FormatError("split file must map diagram ids to split names");
    std::map<std::string, Split> out;
    for (const auto& [diagram, v] : j.items()) {
        const std::string s = v.is_string() ? v.get<std::string>() : "";
        if (s == "train") out[diagram] = Split::train;
        else if (s == "val") out[diagram] = Split::val;
        else if (s == "test") out[diagram] = Split::test;
        else throw FormatError("unknown split for " + diagram + ": " + v.dump());
    }
    return out;
}

std::vector<Split> split_records(const std::vector<DatasetRecord>& records,
                                 const SplitOptions& opts) {
    if (opts.train < 0 || opts.val < 0 || opts.train + opts.val > 1.0)
        throw ConfigError("split proportions must be non-negative and sum to at most 1");
    // Each diagram belongs to the subject most of its records carry.
    std::map<std::string, std::map<std::string, std::size_t>> subject_votes;
    for (const auto& r : records) ++subject_votes[r.diagram_path][r.subject];
    std::map<std::string, std::vector<std::string>> strata;
    for (const auto& [diagram, votes] : subject_votes) {
        const auto best = std::max_element(votes.begin(), votes.end(), [](const auto& a, const auto& b) {
            return a.second < b.second;
        });
        strata[best->first].push_back(diagram);
    }
    std::vector<std::string> pooled;
    for (auto it = strata.begin(); it != strata.end();) {
        if (it->second.size() < opts.min_stratum) {
            pooled.insert(pooled.end(), it->second.begin(), it->second.end());
            it = strata.erase(it);
        } else {
            ++it;
        }
    }
    if (!pooled.empty()) strata["\x01pooled"] = std::move(pooled);

    std::unordered_map<std::string, Split> assign;
    for (auto& [_, diagrams] : strata) {
        std::sort(diagrams.begin(), diagrams.end(), [&](const std::string& a, const std::string& b) {
            const auto ha = diagram_hash(a, opts.seed), hb = diagram_hash(b, opts.seed);
            return ha != hb ? ha < hb : a < b;
        });
        const auto n = static_cast<double>(diagrams.size());
        const auto n_train = static_cast<std::size_t>(std::llround(opts.train * n));
        const auto n_val = static_cast<std::size_t>(std::llround((opts.train + opts.val) * n)) - n_train;
        for (std::size_t i = 0; i < diagrams.size(); ++i) {
            assign[diagrams[i]] = i < n_train ? Split::train
                                  : i < n_train + n_val ? Split::val
                                                        : Split::test;
        }
    }
    for (const auto& [diagram, s] : opts.overrides)
        if (assign.contains(diagram)) assign[diagram] = s;

    std::vector<Split> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(assign.at(r.diagram_path));
    return out;
}

namespace {

PartitionStats partition(const std::vector<const DatasetRecord*>& rs) {
    std::unordered_set<std::string> diagrams, questions;
    for (const auto* r : rs) {
        diagrams.insert(r->diagram_path);
        questions.insert(r->question);
    }
    return {diagrams.size(), questions.size(), rs.size()};
}

}  // namespace

CorpusStats corpus_stats(const std::vector<DatasetRecord>& records, const std::vector<Split>* splits) {
    if (records.empty()) throw ValidationError("stats: no records");
    if (splits != nullptr && splits->size() != records.size())
        throw ValidationError("stats: split assignment does not match record count");
    CorpusStats s;
    std::vector<const DatasetRecord*> all;
    for (const auto& r : records) all.push_back(&r);
    s.total = partition(all);

    std::set<std::string> subjects, courses;
    std::map<std::string, std::vector<const DatasetRecord*>> by_concept;
    // Word statistics over unique questions.
    std::map<std::string, std::size_t> question_words;
    for (const auto& r : records) {
        subjects.insert(r.subject);
        courses.insert(r.course);
        by_concept[r.concept_text].push_back(&r);
        if (!question_words.contains(r.question))
            question_words[r.question] = tokenize_eval(r.question).size();
    }
    s.subjects = subjects.size();
    s.courses = courses.size();
    s.concepts = by_concept.size();

    std::size_t total_words = 0;
    s.min_question_words = question_words.begin()->second;
    for (const auto& [_, w] : question_words) {
        total_words += w;
        s.min_question_words = std::min(s.min_question_words, w);
        s.max_question_words = std::max(s.max_question_words, w);
    }
    s.mean_question_words = static_cast<double>(total_words) / static_cast<double>(question_words.size());

    for (const auto& [name, rs] : by_concept) {
        const PartitionStats p = partition(rs);
        s.per_concept.push_back({name, p.questions, p.diagrams, p.combinations});
    }
    std::sort(s.per_concept.begin(), s.per_concept.end(), [](const CountRow& a, const CountRow& b) {
        return a.combinations != b.combinations ? a.combinations > b.combinations : a.name < b.name;
    });

    if (splits != nullptr) {
        std::map<std::string, std::vector<const DatasetRecord*>> parts;
        for (std::size_t i = 0; i < records.size(); ++i) parts[split_name((*splits)[i])].push_back(&records[i]);
        std::map<std::string, PartitionStats> ps;
        for (const char* name : {"train", "val", "test"}) ps[name] = partition(parts[name]);
        s.per_split = std::move(ps);
    }

    // The published release is reported with two different totals.
    if (s.total.diagrams == 8372 && s.total.questions == 19475 && s.total.combinations == 44472) {
        s.notes.push_back("totals match the published statistics table (8,372 / 19,475 / 44,472)");
    } else if (s.total.questions == 19077 && s.total.combinations == 44074) {
        s.notes.push_back(
            "totals match the alternative published figures (19,077 questions / 44,074 "
            "combinations), not the statistics table (19,475 / 44,472); the release's own "
            "documentation disagrees on these numbers");
    }
    return s;
}

json stats_to_json(const CorpusStats& s) {
    json concepts = json::array();
    for (const auto& c : s.per_concept) {
        concepts.push_back({{"concept", c.name},
                            {"questions", c.questions},
                            {"diagrams", c.diagrams},
                            {"combinations", c.combinations}});
    }
    json j = {{"schema_version", kDatasetSchemaVersion},
              {"total_unique_diagrams", s.total.diagrams},
              {"total_unique_questions", s.total.questions},
              {"total_combinations", s.total.combinations},
              {"total_subjects", s.subjects},
              {"total_courses", s.courses},
              {"total_concepts", s.concepts},
              {"mean_question_words", s.mean_question_words},
              {"min_question_words", s.min_question_words},
              {"max_question_words", s.max_question_words},
              {"per_concept", concepts},
              {"notes", s.notes}};
    if (s.per_split) {
        json sp = json::object();
        for (const auto& [name, p] : *s.per_split)
            sp[name] = {{"unique_diagrams", p.diagrams}, {"unique_questions", p.questions}, {"combinations", p.combinations}};
        j["splits"] = sp;
    }
    return j;
}

std::string stats_to_text(const CorpusStats& s) {
    std::ostringstream os;
    auto row = [&](const std::string& name, auto value) {
        os << std::left << std::setw(28) << name << std::right << std::setw(10) << value << '\n';
    };
    row("Statistic", "Number");
    row("Total unique diagrams", s.total.diagrams);
    row("Total unique questions", s.total.questions);
    row("Total combinations", s.total.combinations);
    row("Total Subject", s.subjects);
    row("Total Course", s.courses);
    row("Total Concept", s.concepts);
    if (s.per_split) {
        for (const char* name : {"train", "val", "test"}) {
            std::string label = name;
            label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
            const PartitionStats& p = s.per_split->at(name);
            row(label + " unique diagrams", p.diagrams);
            row(label + " unique questions", p.questions);
            row(label + " combinations", p.combinations);
        }
    }
    std::ostringstream mean;
    mean << std::fixed << std::setprecision(2) << s.mean_question_words;
    row("Mean question words", mean.str());
    os << "\nConcepts by combinations (long tail):\n";
    for (const auto& c : s.per_concept)
        os << "  " << std::left << std::setw(40) << c.name << std::right << std::setw(8)
           << c.combinations << std::setw(8) << c.questions << std::setw(8) << c.diagrams << '\n';
    for (const auto& n : s.notes) os << "note: " << n << '\n';
    return os.str();
}

}  // namespace hkidqg
