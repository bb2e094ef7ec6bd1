#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hkidqg/knowsel.hpp"
#include "hkidqg/rng.hpp"
#include "oracles.hpp"

using namespace hkidqg;

namespace {

KnowledgeSet make_set(const Matrix& emb) {
    KnowledgeSet ks;
    ks.embeddings = emb;
    for (std::size_t i = 0; i < emb.rows(); ++i)
        ks.sentences.push_back({static_cast<int>(i % 3) + 1, "s" + std::to_string(i)});
    return ks;
}

// Attention whose column means are exactly the given scores: one prompt
// token, and the scores already form a distribution.
Matrix attention_with_scores(const std::vector<double>& s) {
    Matrix a(s.size(), 1);
    for (std::size_t i = 0; i < s.size(); ++i) a(i, 0) = s[i];
    return a;
}

}  // namespace

TEST_CASE("knowledge selection prompt") {
    CHECK(build_knowsel_prompt("heart", "Circulation") ==
          "Given the target text heart, identify key knowledge related to the concept Circulation");
    CHECK(build_knowsel_prompt("sea star", "Food web") ==
          "Given the target text sea star, identify key knowledge related to the concept Food web");
    CHECK_THROWS_AS(build_knowsel_prompt("", "x"), ValidationError);
    CHECK_THROWS_AS(build_knowsel_prompt("  ", "x"), ValidationError);
    CHECK_THROWS_AS(build_knowsel_prompt("x", "\t"), ValidationError);
}

TEST_CASE("attention over sentences") {
    Rng rng(11);
    SUBCASE("one sentence takes all mass") {
        const Matrix a = attention_matrix(gaussian_init(1, 4, rng, 0, 1), gaussian_init(5, 4, rng, 0, 1));
        CHECK(a.rows() == 1);
        for (double x : a.values()) CHECK(x == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("identical sentences split evenly") {
        const Matrix row = gaussian_init(1, 4, rng, 0, 1);
        const Matrix hk = Matrix::from_rows({row.values(), row.values()});
        const Matrix a = attention_matrix(hk, gaussian_init(3, 4, rng, 0, 1));
        for (double x : a.values()) CHECK(x == doctest::Approx(0.5).epsilon(1e-15));
    }
    SUBCASE("matches the reference on a 3 x 4 case") {
        const Matrix hk = gaussian_init(3, 6, rng, 0, 1), htc = gaussian_init(4, 6, rng, 0, 1);
        Matrix raw = oracle::matmul(hk, oracle::transpose(htc));
        for (double& x : raw.data()) x /= std::sqrt(6.0);
        const Matrix want = oracle::softmax_cols(raw);
        const Matrix got = attention_matrix(hk, htc);
        REQUIRE(got.rows() == 3);
        REQUIRE(got.cols() == 4);
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.values()[i] - want.values()[i]) < 1e-12);
    }
    SUBCASE("empty knowledge and bad shapes") {
        CHECK(attention_matrix(Matrix(0, 4), gaussian_init(3, 4, rng)).rows() == 0);
        CHECK_THROWS_AS(attention_matrix(Matrix(2, 3), Matrix(2, 4)), ShapeError);
        CHECK_THROWS_AS(attention_matrix(Matrix(2, 4), Matrix(0, 4)), ShapeError);
    }
}

TEST_CASE("top-m selection examples") {
    const KnowledgeSet ks = make_set(Matrix(4, 2));
    const Matrix a = attention_with_scores({0.4, 0.1, 0.3, 0.2});
    const auto top2 = select_top_m(a, ks, 2);
    REQUIRE(top2.size() == 2);
    CHECK(top2[0].index == 0);
    CHECK(top2[1].index == 2);
    CHECK(top2[0].text == "s0");
    CHECK(top2[1].layer == 3);
    CHECK(top2[0].score == doctest::Approx(0.4));
    CHECK(select_top_m(a, ks, 0).empty());
    CHECK(select_top_m(a, ks, 9).size() == 4);
    CHECK_THROWS_AS(select_top_m(a, ks, -1), ConfigError);
    CHECK_THROWS_AS(select_top_m(attention_with_scores({1.0}), ks, 1), ShapeError);

    // Ties keep the original order.
    const auto tied = select_top_m(attention_with_scores({0.25, 0.25, 0.25, 0.25}), ks, 3);
    CHECK(tied[0].index == 0);
    CHECK(tied[1].index == 1);
    CHECK(tied[2].index == 2);
}

TEST_CASE("attention and selection properties") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t s = 1 + rng.uniform_int(0, 9), t = 1 + rng.uniform_int(0, 7),
                          d = 1 + rng.uniform_int(0, 7);
        const Matrix hk = gaussian_init(s, d, rng, 0, 1), htc = gaussian_init(t, d, rng, 0, 1);
        const Matrix a = attention_matrix(hk, htc);
        for (std::size_t c = 0; c < t; ++c) {
            double col = 0;
            for (std::size_t r = 0; r < s; ++r) {
                CHECK(a(r, c) >= 0.0);
                col += a(r, c);
            }
            CHECK(col == doctest::Approx(1.0).epsilon(1e-12));
        }
        const auto scores = sentence_scores(a);
        CHECK(std::accumulate(scores.begin(), scores.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));

        const KnowledgeSet ks = make_set(hk);
        for (int m = 0; m < static_cast<int>(s); ++m) {
            const auto small = select_top_m(a, ks, m), big = select_top_m(a, ks, m + 1);
            CHECK(small.size() == static_cast<std::size_t>(m));
            for (std::size_t k = 0; k < small.size(); ++k) CHECK(small[k].index == big[k].index);
            for (std::size_t k = 1; k < big.size(); ++k) CHECK(big[k - 1].score >= big[k].score);
        }

        // Permuting sentences permutes the scores.
        std::vector<std::size_t> perm(s);
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = s; i > 1; --i) std::swap(perm[i - 1], perm[rng.uniform_int(0, i - 1)]);
        Matrix hk_p(s, d);
        for (std::size_t i = 0; i < s; ++i)
            std::copy(hk.row(perm[i]).begin(), hk.row(perm[i]).end(), hk_p.row(i).begin());
        const auto scores_p = sentence_scores(attention_matrix(hk_p, htc));
        for (std::size_t i = 0; i < s; ++i) CHECK(std::abs(scores_p[i] - scores[perm[i]]) < 1e-12);
    }
}
