#include "hkidqg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "hkidqg/error.hpp"

namespace hkidqg {

namespace {

using NgramCounts = std::unordered_map<std::string, int>;

// Key is the n-gram joined by 0x1f; the order n is recoverable from the
// number of separators.
std::array<NgramCounts, 4> count_ngrams(const Tokens& t, int max_n) {
    std::array<NgramCounts, 4> out;
    for (int k = 1; k <= max_n; ++k) {
        for (std::size_t i = 0; i + static_cast<std::size_t>(k) <= t.size(); ++i) {
            std::string key = t[i];
            for (int j = 1; j < k; ++j) {
                key += '\x1f';
                key += t[i + static_cast<std::size_t>(j)];
            }
            ++out[static_cast<std::size_t>(k - 1)][key];
        }
    }
    return out;
}

// Order-independent mean: values are summed in sorted order.
double stable_mean(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

constexpr double kTiny = 1e-15;
constexpr double kSmall = 1e-9;

}  // namespace

BleuScores bleu(const std::vector<Tokens>& candidates,
                const std::vector<std::vector<Tokens>>& references, int max_n) {
    if (max_n < 1 || max_n > 4) throw ConfigError("BLEU order must be in [1, 4]");
    if (candidates.size() != references.size())
        throw ValidationError("bleu: candidate and reference counts differ");
    const auto n = static_cast<std::size_t>(max_n);
    BleuScores out;
    std::array<double, 4> total_guess{}, total_correct{};
    double total_test = 0.0, total_ref = 0.0;
    for (std::size_t r = 0; r < candidates.size(); ++r) {
        const Tokens& cand = candidates[r];
        const auto& refs = references[r];
        if (refs.empty()) throw ValidationError("bleu: record " + std::to_string(r) + " has no references");
        std::array<NgramCounts, 4> max_ref;
        std::size_t closest = refs.front().size();
        const auto test_len = cand.size();
        auto dist = [&](std::size_t l) { return l > test_len ? l - test_len : test_len - l; };
        for (const Tokens& ref : refs) {
            if (dist(ref.size()) < dist(closest) ||
                (dist(ref.size()) == dist(closest) && ref.size() < closest))
                closest = ref.size();
            const auto counts = count_ngrams(ref, max_n);
            for (std::size_t k = 0; k < n; ++k)
                for (const auto& [g, c] : counts[k]) max_ref[k][g] = std::max(max_ref[k][g], c);
        }
        const auto cand_counts = count_ngrams(cand, max_n);
        std::array<double, 4> guess{}, correct{};
        for (std::size_t k = 0; k < n; ++k) {
            guess[k] = test_len >= k + 1 ? static_cast<double>(test_len - k) : 0.0;
            for (const auto& [g, c] : cand_counts[k]) {
                const auto it = max_ref[k].find(g);
                if (it != max_ref[k].end()) correct[k] += std::min(c, it->second);
            }
            total_guess[k] += guess[k];
            total_correct[k] += correct[k];
        }
        total_test += static_cast<double>(test_len);
        total_ref += static_cast<double>(closest);

        std::array<double, 4> rec{};
        double prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            prod *= (correct[k] + kTiny) / (guess[k] + kSmall);
            rec[k] = std::pow(prod, 1.0 / static_cast<double>(k + 1));
        }
        const double ratio = (static_cast<double>(test_len) + kTiny) / (static_cast<double>(closest) + kSmall);
        if (ratio < 1.0)
            for (std::size_t k = 0; k < n; ++k) rec[k] *= std::exp(1.0 - 1.0 / ratio);
        out.per_record.push_back(rec);
    }
    double prod = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        prod *= (total_correct[k] + kTiny) / (total_guess[k] + kSmall);
        out.corpus[k] = std::pow(prod, 1.0 / static_cast<double>(k + 1));
    }
    const double ratio = (total_test + kTiny) / (total_ref + kSmall);
    if (ratio < 1.0)
        for (std::size_t k = 0; k < n; ++k) out.corpus[k] *= std::exp(1.0 - 1.0 / ratio);
    return out;
}

double rouge_l(const Tokens& candidate, const std::vector<Tokens>& references) {
    constexpr double kBeta = 1.2;
    if (references.empty()) throw ValidationError("rouge_l: no references");
    if (candidate.empty()) return 0.0;
    double prec_max = 0.0, rec_max = 0.0;
    for (const Tokens& ref : references) {
        if (ref.empty()) continue;
        const auto lcs = static_cast<double>(lcs_length(ref, candidate));
        prec_max = std::max(prec_max, lcs / static_cast<double>(candidate.size()));
        rec_max = std::max(rec_max, lcs / static_cast<double>(ref.size()));
    }
    if (prec_max == 0.0 || rec_max == 0.0) return 0.0;
    return (1.0 + kBeta * kBeta) * prec_max * rec_max / (rec_max + kBeta * kBeta * prec_max);
}

CiderScores cider_d(const std::vector<Tokens>& candidates,
                    const std::vector<std::vector<Tokens>>& references) {
    constexpr int kN = 4;
    constexpr double kSigma = 6.0;
    if (candidates.size() != references.size())
        throw ValidationError("cider_d: candidate and reference counts differ");
    CiderScores out;
    if (candidates.empty()) return out;

    std::vector<std::vector<std::array<NgramCounts, 4>>> ref_counts(references.size());
    std::unordered_map<std::string, double> doc_freq;
    for (std::size_t r = 0; r < references.size(); ++r) {
        std::unordered_set<std::string> seen;
        for (const Tokens& ref : references[r]) {
            ref_counts[r].push_back(count_ngrams(ref, kN));
            for (const auto& order : ref_counts[r].back())
                for (const auto& [g, c] : order) seen.insert(g);
        }
        for (const auto& g : seen) doc_freq[g] += 1.0;
    }
    const double ref_len = std::log(static_cast<double>(references.size()));

    struct TfIdf {
        std::array<std::unordered_map<std::string, double>, 4> vec;
        std::array<double, 4> norm{};
        double length = 0.0;
    };
    auto to_vec = [&](const std::array<NgramCounts, 4>& counts) {
        TfIdf t;
        for (std::size_t k = 0; k < kN; ++k) {
            for (const auto& [g, tf] : counts[k]) {
                const auto it = doc_freq.find(g);
                const double df = std::log(std::max(1.0, it == doc_freq.end() ? 0.0 : it->second));
                const double w = static_cast<double>(tf) * (ref_len - df);
                t.vec[k][g] = w;
                t.norm[k] += w * w;
                if (k == 1) t.length += tf;
            }
            t.norm[k] = std::sqrt(t.norm[k]);
        }
        return t;
    };

    for (std::size_t r = 0; r < candidates.size(); ++r) {
        const TfIdf hyp = to_vec(count_ngrams(candidates[r], kN));
        std::array<double, 4> score{};
        for (const auto& rc : ref_counts[r]) {
            const TfIdf ref = to_vec(rc);
            const double delta = hyp.length - ref.length;
            for (std::size_t k = 0; k < kN; ++k) {
                double val = 0.0;
                for (const auto& [g, wh] : hyp.vec[k]) {
                    const auto it = ref.vec[k].find(g);
                    if (it != ref.vec[k].end()) val += std::min(wh, it->second) * it->second;
                }
                if (hyp.norm[k] != 0.0 && ref.norm[k] != 0.0) val /= hyp.norm[k] * ref.norm[k];
                val *= std::exp(-(delta * delta) / (2.0 * kSigma * kSigma));
                score[k] += val;
            }
        }
        double avg = (score[0] + score[1] + score[2] + score[3]) / kN;
        avg /= static_cast<double>(ref_counts[r].size());
        out.per_record.push_back(avg * 10.0);
    }
    out.corpus = stable_mean(out.per_record);
    return out;
}

double meteor_lite(const Tokens& candidate, const std::vector<Tokens>& references) {
    constexpr double kAlpha = 0.9, kGamma = 0.5, kTheta = 3.0;
    if (references.empty()) throw ValidationError("meteor_lite: no references");
    double best = 0.0;
    for (const Tokens& ref : references) {
        if (candidate.empty() || ref.empty()) continue;
        // Greedy exact alignment that prefers extending the current chunk.
        std::vector<bool> used(ref.size(), false);
        std::vector<std::pair<std::size_t, std::size_t>> matches;  // (cand pos, ref pos)
        std::size_t last_ref = ref.size();
        bool have_last = false;
        for (std::size_t i = 0; i < candidate.size(); ++i) {
            std::size_t pick = ref.size();
            if (have_last && last_ref + 1 < ref.size() && !used[last_ref + 1] &&
                ref[last_ref + 1] == candidate[i])
                pick = last_ref + 1;
            for (std::size_t j = 0; pick == ref.size() && j < ref.size(); ++j)
                if (!used[j] && ref[j] == candidate[i]) pick = j;
            if (pick == ref.size()) {
                have_last = false;
                continue;
            }
            used[pick] = true;
            matches.emplace_back(i, pick);
            last_ref = pick;
            have_last = true;
        }
        if (matches.empty()) continue;
        std::size_t chunks = 1;
        for (std::size_t k = 1; k < matches.size(); ++k)
            if (matches[k].first != matches[k - 1].first + 1 ||
                matches[k].second != matches[k - 1].second + 1)
                ++chunks;
        const auto m = static_cast<double>(matches.size());
        const double p = m / static_cast<double>(candidate.size());
        const double r = m / static_cast<double>(ref.size());
        const double f_mean = p * r / (kAlpha * p + (1.0 - kAlpha) * r);
        const double penalty = kGamma * std::pow(static_cast<double>(chunks) / m, kTheta);
        best = std::max(best, f_mean * (1.0 - penalty));
    }
    return best;
}

std::size_t dehn_hits(std::string_view question, const std::vector<std::string>& elements) {
    const Tokens q = tokenize_eval(question);
    std::set<Tokens> distinct;
    for (const auto& e : elements) {
        Tokens t = tokenize_eval(e);
        if (!t.empty()) distinct.insert(std::move(t));
    }
    std::size_t hits = 0;
    for (const Tokens& e : distinct) {
        if (e.size() > q.size()) continue;
        for (std::size_t i = 0; i + e.size() <= q.size(); ++i) {
            if (std::equal(e.begin(), e.end(), q.begin() + static_cast<std::ptrdiff_t>(i))) {
                ++hits;
                break;
            }
        }
    }
    return hits;
}

double dehn(const std::vector<std::string>& questions,
            const std::vector<std::vector<std::string>>& element_lists) {
    if (questions.empty()) throw ValidationError("dehn: no questions");
    if (questions.size() != element_lists.size())
        throw ValidationError("dehn: " + std::to_string(questions.size()) + " questions but " +
                              std::to_string(element_lists.size()) + " element lists");
    std::size_t total = 0;
    for (std::size_t i = 0; i < questions.size(); ++i) total += dehn_hits(questions[i], element_lists[i]);
    return static_cast<double>(total) / static_cast<double>(questions.size());
}

MetricReport evaluate_run(const std::vector<EvalPair>& pairs) {
    if (pairs.empty()) throw ValidationError("evaluate_run: no records");
    std::vector<Tokens> cands;
    std::vector<std::vector<Tokens>> refs;
    cands.reserve(pairs.size());
    refs.reserve(pairs.size());
    for (const EvalPair& p : pairs) {
        if (p.references.empty())
            throw ValidationError("record " + p.id + ": at least one reference is required");
        cands.push_back(tokenize_eval(p.candidate));
        std::vector<Tokens> rs;
        for (const auto& r : p.references) rs.push_back(tokenize_eval(r));
        refs.push_back(std::move(rs));
    }
    const BleuScores b = bleu(cands, refs);
    const CiderScores c = cider_d(cands, refs);

    MetricReport rep;
    rep.records = pairs.size();
    rep.total_records = pairs.size();
    rep.bleu = b.corpus;
    rep.cider_d = c.corpus;
    std::vector<double> rouge, meteor, hits;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        RecordScores rs;
        rs.id = pairs[i].id;
        rs.bleu = b.per_record[i];
        rs.rouge_l = rouge_l(cands[i], refs[i]);
        rs.meteor_lite = meteor_lite(cands[i], refs[i]);
        rs.cider_d = c.per_record[i];
        rs.dehn_hits = dehn_hits(pairs[i].candidate, pairs[i].elements);
        rouge.push_back(rs.rouge_l);
        meteor.push_back(rs.meteor_lite);
        hits.push_back(static_cast<double>(rs.dehn_hits));
        rep.per_record.push_back(std::move(rs));
    }
    rep.rouge_l = stable_mean(rouge);
    rep.meteor_lite = stable_mean(meteor);
    rep.dehn = stable_mean(hits);
    return rep;
}

nlohmann::json report_to_json(const MetricReport& r) {
    using nlohmann::json;
    json metrics = {{"BLEU-1", r.bleu[0]}, {"BLEU-2", r.bleu[1]}, {"BLEU-3", r.bleu[2]},
                    {"BLEU-4", r.bleu[3]}, {"METEOR-lite", r.meteor_lite}, {"CIDEr-D", r.cider_d},
                    {"ROUGE-L", r.rouge_l}, {"DEHN", r.dehn}};
    json per = json::array();
    for (const auto& rs : r.per_record) {
        per.push_back({{"id", rs.id},
                       {"bleu", rs.bleu},
                       {"rouge_l", rs.rouge_l},
                       {"meteor_lite", rs.meteor_lite},
                       {"cider_d", rs.cider_d},
                       {"dehn_hits", rs.dehn_hits}});
    }
    return {{"schema_version", kReportSchemaVersion},
            {"metrics", metrics},
            {"coverage",
             {{"generated", r.records}, {"total", r.total_records}, {"failed_ids", r.failed_ids}}},
            {"notes",
             {"METEOR-lite uses exact unigram matches only (no stem/synonym modules); "
              "not comparable with toolkit METEOR.",
              "Bert-Score is not computed without a remote embedding backend."}},
            {"per_record", per}};
}

std::string report_to_text(const MetricReport& r) {
    std::ostringstream os;
    const std::array<std::pair<const char*, double>, 8> cols{{{"BLEU-1", r.bleu[0]},
                                                             {"BLEU-2", r.bleu[1]},
                                                             {"BLEU-3", r.bleu[2]},
                                                             {"BLEU-4", r.bleu[3]},
                                                             {"METEOR-lite", r.meteor_lite},
                                                             {"CIDEr-D", r.cider_d},
                                                             {"ROUGE-L", r.rouge_l},
                                                             {"DEHN", r.dehn}}};
    for (const auto& [name, _] : cols) os << std::setw(12) << name;
    os << '\n';
    os << std::fixed;
    for (const auto& [name, v] : cols) {
        // Scores in [0,1] are shown as percentages, like the published tables.
        const bool pct = std::string_view(name) != "CIDEr-D" && std::string_view(name) != "DEHN";
        os << std::setw(12) << std::setprecision(2) << (pct ? 100.0 * v : v);
    }
    os << '\n';
    os << "coverage: " << r.records << " / " << r.total_records << " records generated\n";
    if (!r.failed_ids.empty()) {
        os << "failed:";
        for (const auto& id : r.failed_ids) os << ' ' << id;
        os << '\n';
    }
    return os.str();
}

}  // namespace hkidqg
