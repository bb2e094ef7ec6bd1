#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace hkidqg {

using Tokens = std::vector<std::string>;

/// Evaluation tokenizer reproducing the COCO caption toolkit's preprocessing
/// (Stanford PTBTokenizer with -lowerCase, then its punctuation filter):
///   - output is lowercased; brackets become -lrb- -rrb- -lsb- -rsb- -lcb- -rcb-;
///   - clitics split off: n't 's 're 've 'll 'd 'm, plus cannot, gonna, 'tis...;
///   - numbers keep internal . , : and a leading sign (3.5, 1,000, 10:30, +3);
///   - '-' and '/' between alphanumerics stay inside the token (well-known, km/h);
///   - acronyms, initials and common abbreviations keep their period (u.s., a., mr.),
///     except an initial followed by a capitalized word;
///   - . , ; : ' " ` - -- ... and single ? ! are dropped; other symbols
///     ($ % # & + = * ^ ~ | \) are tokens of their own;
///   - bytes >= 0x80 are word characters; curly quotes count as ASCII quotes.
Tokens tokenize_eval(std::string_view s);

std::string join_tokens(const Tokens& t);

struct BleuScores {
    std::array<double, 4> corpus{};
    std::vector<std::array<double, 4>> per_record;
};

/// Corpus BLEU-1..max_n with the "closest reference length" brevity penalty
/// and the toolkit's 1e-15 / 1e-9 guards (no other smoothing). per_record
/// uses the same guards, which only matter for zero counts.
BleuScores bleu(const std::vector<Tokens>& candidates,
                const std::vector<std::vector<Tokens>>& references, int max_n = 4);

/// LCS-based F-measure with beta = 1.2, using the best precision and best
/// recall over references.
double rouge_l(const Tokens& candidate, const std::vector<Tokens>& references);

struct CiderScores {
    double corpus = 0.0;
    std::vector<double> per_record;
};

/// CIDEr-D: tf-idf n-gram vectors (n = 1..4, idf over the reference corpus),
/// clipped cosine, Gaussian length penalty (sigma 6), x10. Mirrors the
/// toolkit, including its use of the bigram count as the length term.
CiderScores cider_d(const std::vector<Tokens>& candidates,
                    const std::vector<std::vector<Tokens>>& references);

/// Exact-match METEOR: unigram alignment, F_mean with alpha 0.9 and a
/// fragmentation penalty 0.5 * (chunks / matches)^3. Max over references.
double meteor_lite(const Tokens& candidate, const std::vector<Tokens>& references);

/// Distinct elements of `elements` occurring in `question` as a contiguous
/// token sequence, after both go through tokenize_eval.
std::size_t dehn_hits(std::string_view question, const std::vector<std::string>& elements);

/// Mean hit count per question. Throws ValidationError on empty input or
/// mismatched lengths.
double dehn(const std::vector<std::string>& questions,
            const std::vector<std::vector<std::string>>& element_lists);

struct EvalPair {
    std::string id;
    std::string candidate;
    std::vector<std::string> references;
    std::vector<std::string> elements;
};

struct RecordScores {
    std::string id;
    std::array<double, 4> bleu{};
    double rouge_l = 0.0;
    double meteor_lite = 0.0;
    double cider_d = 0.0;
    std::size_t dehn_hits = 0;
};

constexpr int kReportSchemaVersion = 1;

struct MetricReport {
    std::size_t records = 0;
    std::array<double, 4> bleu{};
    double rouge_l = 0.0;
    double meteor_lite = 0.0;
    double cider_d = 0.0;
    double dehn = 0.0;
    std::vector<RecordScores> per_record;
    // Filled by callers that know about pipeline failures.
    std::size_t total_records = 0;
    std::vector<std::string> failed_ids;
};

MetricReport evaluate_run(const std::vector<EvalPair>& pairs);

nlohmann::json report_to_json(const MetricReport& r);
std::string report_to_text(const MetricReport& r);

}  // namespace hkidqg
