#include "hkidqg/knowsel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "hkidqg/error.hpp"

namespace hkidqg {

namespace {

bool blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; });
}

}  // namespace

std::string build_knowsel_prompt(const std::string& target, const std::string& concept_text) {
    if (blank(target)) throw ValidationError("target text must be non-empty");
    if (blank(concept_text)) throw ValidationError("concept text must be non-empty");
    return "Given the target text " + target + ", identify key knowledge related to the concept " +
           concept_text;
}

KnowledgeSet embed_knowledge(std::vector<KnowledgeSentence> sentences, const TextEncoder& enc) {
    KnowledgeSet ks;
    ks.embeddings = Matrix(sentences.size(), enc.dim());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        const Vector v = enc.encode_pooled(sentences[i].text);
        if (v.size() != enc.dim()) throw ShapeError("sentence embedding width mismatch");
        std::copy(v.begin(), v.end(), ks.embeddings.row(i).begin());
    }
    ks.sentences = std::move(sentences);
    return ks;
}

Matrix attention_matrix(const Matrix& h_k, const Matrix& h_tc) {
    if (h_k.cols() != h_tc.cols()) {
        throw ShapeError("attention_matrix: knowledge " + h_k.shape_str() + " vs prompt " +
                         h_tc.shape_str());
    }
    if (h_tc.rows() == 0) throw ShapeError("attention_matrix: empty prompt encoding");
    if (h_k.rows() == 0) return Matrix(0, h_tc.rows());
    Matrix raw = matmul_transposed(h_k, h_tc);
    raw = scale(raw, 1.0 / std::sqrt(static_cast<double>(h_k.cols())));
    return softmax_axis(raw, Axis::cols);
}

std::vector<double> sentence_scores(const Matrix& attention) {
    std::vector<double> s(attention.rows(), 0.0);
    if (attention.cols() == 0) return s;
    for (std::size_t i = 0; i < attention.rows(); ++i) {
        double acc = 0.0;
        for (double a : attention.row(i)) acc += a;
        s[i] = acc / static_cast<double>(attention.cols());
    }
    return s;
}

SelectedKnowledge select_top_m(const Matrix& attention, const KnowledgeSet& ks, int m) {
    if (m < 0) throw ConfigError("m must be non-negative");
    if (attention.rows() != ks.sentences.size()) {
        throw ShapeError("select_top_m: attention has " + std::to_string(attention.rows()) +
                         " rows for " + std::to_string(ks.sentences.size()) + " sentences");
    }
    const std::vector<double> score = sentence_scores(attention);
    std::vector<std::size_t> order(score.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    const std::size_t keep = std::min(order.size(), static_cast<std::size_t>(m));
    SelectedKnowledge out;
    out.reserve(keep);
    for (std::size_t k = 0; k < keep; ++k) {
        const std::size_t i = order[k];
        out.push_back({i, ks.sentences[i].layer, ks.sentences[i].text, score[i]});
    }
    return out;
}

}  // namespace hkidqg
