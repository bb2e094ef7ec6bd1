#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hkidqg/backends.hpp"
#include "hkidqg/matrix.hpp"

namespace hkidqg {

struct KnowledgeSentence {
    int layer = 1;
    std::string text;
};

/// Candidate knowledge with one pooled embedding row per sentence.
struct KnowledgeSet {
    std::vector<KnowledgeSentence> sentences;
    Matrix embeddings;  // sentences.size() x d_k
};

struct ScoredSentence {
    std::size_t index = 0;  // position in the source KnowledgeSet
    int layer = 1;
    std::string text;
    double score = 0.0;
};

using SelectedKnowledge = std::vector<ScoredSentence>;

constexpr int kMaxSelected = 8;

std::string build_knowsel_prompt(const std::string& target, const std::string& concept_text);

KnowledgeSet embed_knowledge(std::vector<KnowledgeSentence> sentences, const TextEncoder& enc);

/// A = softmax(H_K H_tc^T / sqrt(d_k)) normalized over the sentence axis, so
/// each column (prompt token) is a distribution over sentences. Returns an
/// S x T matrix; a 0 x T matrix when there are no sentences.
Matrix attention_matrix(const Matrix& h_k, const Matrix& h_tc);

/// Mean attention mass each sentence receives across prompt tokens.
std::vector<double> sentence_scores(const Matrix& attention);

/// Keeps the m highest-scoring sentences in descending order; equal scores
/// keep their original order.
SelectedKnowledge select_top_m(const Matrix& attention, const KnowledgeSet& ks, int m);

}  // namespace hkidqg
