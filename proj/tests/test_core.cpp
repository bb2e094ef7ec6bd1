#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hkidqg/error.hpp"
#include "hkidqg/hash.hpp"
#include "hkidqg/image.hpp"
#include "hkidqg/io.hpp"
#include "hkidqg/kernels.hpp"
#include "hkidqg/matrix.hpp"
#include "hkidqg/rng.hpp"
#include "oracles.hpp"

using namespace hkidqg;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double sd = 1.0) {
    return gaussian_init(r, c, rng, 0.0, sd);
}

void require_close(const Matrix& a, const Matrix& b, double tol) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) <= tol);
}

}  // namespace

TEST_CASE("matmul hand cases") {
    const Matrix m{{1, 2}, {3, 4}};
    CHECK(matmul(Matrix::identity(2), m) == m);
    CHECK(matmul(m, Matrix{{1}, {1}}) == Matrix{{3}, {7}});
}

TEST_CASE("matmul matches triple loop") {
    Rng rng(11);
    const Matrix a = random_matrix(5, 7, rng), b = random_matrix(7, 3, rng);
    require_close(matmul(a, b), oracle::matmul(a, b), 1e-12);
    require_close(matmul_transposed(a, transpose(b)), oracle::matmul(a, b), 1e-12);
}

TEST_CASE("matmul shape error names both shapes") {
    try {
        matmul(Matrix(2, 3), Matrix(4, 5));
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("(2 x 3)") != std::string::npos);
        CHECK(msg.find("(4 x 5)") != std::string::npos);
    }
}

TEST_CASE("matmul is associative") {
    Rng rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto n = rng.uniform_int(1, 6), k = rng.uniform_int(1, 6), m = rng.uniform_int(1, 6),
                   p = rng.uniform_int(1, 6);
        const Matrix a = random_matrix(n, k, rng), b = random_matrix(k, m, rng), c = random_matrix(m, p, rng);
        require_close(matmul(matmul(a, b), c), matmul(a, matmul(b, c)), 1e-9);
    }
}

TEST_CASE("softmax examples") {
    const Matrix s = softmax_axis(Matrix{{0, 0}}, Axis::rows);
    CHECK(s(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(s(0, 1) == doctest::Approx(0.5).epsilon(1e-15));

    const Matrix big = softmax_axis(Matrix{{1000, 0}}, Axis::rows);
    CHECK(big.all_finite());
    CHECK(big(0, 0) == doctest::Approx(1.0));
    CHECK(big(0, 1) < 1e-300);

    const Matrix r = softmax_axis(Matrix{{1, 2, 3}}, Axis::rows);
    const auto ref = oracle::softmax({1, 2, 3});
    for (int j = 0; j < 3; ++j) CHECK(std::abs(r(0, j) - ref[j]) <= 1e-12);

    CHECK_THROWS_AS(softmax_axis(Matrix(), Axis::rows), ShapeError);
}

TEST_CASE("softmax sums to one along either axis") {
    Rng rng(13);
    for (int t = 0; t < 100; ++t) {
        const Matrix m = random_matrix(rng.uniform_int(1, 7), rng.uniform_int(1, 7), rng, 5.0);
        const Matrix r = softmax_axis(m, Axis::rows), c = softmax_axis(m, Axis::cols);
        require_close(r, oracle::softmax_rows(m), 1e-12);
        require_close(c, oracle::softmax_cols(m), 1e-12);
        for (std::size_t i = 0; i < m.rows(); ++i) {
            double s = 0;
            for (std::size_t j = 0; j < m.cols(); ++j) s += r(i, j);
            CHECK(std::abs(s - 1.0) <= 1e-6);
        }
        for (std::size_t j = 0; j < m.cols(); ++j) {
            double s = 0;
            for (std::size_t i = 0; i < m.rows(); ++i) {
                s += c(i, j);
                CHECK(c(i, j) > 0.0);
            }
            CHECK(std::abs(s - 1.0) <= 1e-6);
        }
    }
}

TEST_CASE("cosine similarity") {
    const std::vector<double> e1{1, 0}, e2{0, 1};
    CHECK(cosine_sim(e1, e1) == 1.0);
    CHECK(cosine_sim(e1, e2) == 0.0);
    const std::vector<double> u{1, 2, 3}, v{4, 5, 6};
    CHECK(cosine_sim(u, v) == doctest::Approx(32.0 / (std::sqrt(14.0) * std::sqrt(77.0))).epsilon(1e-14));
    const std::vector<double> z{0, 0, 0};
    CHECK(cosine_sim(z, v) == 0.0);
    CHECK(cosine_sim(u, z) == 0.0);

    Rng rng(14);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> a(5), b(5);
        for (auto& x : a) x = rng.normal();
        for (auto& x : b) x = rng.normal();
        const double c = cosine_sim(a, b);
        CHECK(c >= -1.0);
        CHECK(c <= 1.0);
        CHECK(std::abs(c - cosine_sim(b, a)) <= 1e-15);
        CHECK(std::abs(c - oracle::cosine(a, b)) <= 1e-12);
        const double alpha = 0.01 + 100 * rng.uniform();
        std::vector<double> sa = a;
        for (auto& x : sa) x *= alpha;
        CHECK(std::abs(cosine_sim(sa, b) - c) <= 1e-12);
    }
}

TEST_CASE("elementwise helpers and mean_rows") {
    const Matrix a{{1, -2}, {3, 0.5}};
    CHECK(add(a, a) == scale(a, 2.0));
    CHECK(hadamard(a, a) == Matrix{{1, 4}, {9, 0.25}});
    CHECK(tanh(Matrix{{0}})(0, 0) == 0.0);
    CHECK(mean_rows(a) == Vector{2, -0.75});
    CHECK(mean_rows(Matrix(0, 3)) == Vector{0, 0, 0});
    CHECK_THROWS_AS(add(a, Matrix(1, 2)), ShapeError);
    CHECK(vec_matmul(std::vector<double>{1, 1}, a) == Vector{4, -1.5});
}

TEST_CASE("matrix construction checks") {
    CHECK_THROWS_AS(Matrix(2, 2, std::vector<double>{1, 2, 3}), ShapeError);
    CHECK_THROWS_AS(Matrix::from_rows({{1, 2}, {3}}), ShapeError);
    Matrix m(1, 2);
    m(0, 1) = std::nan("");
    CHECK_FALSE(m.all_finite());
}

TEST_CASE("gaussian_init statistics") {
    Rng rng(2024);
    const Matrix m = gaussian_init(1000, 1000, rng);
    long double s = 0, s2 = 0;
    for (double x : m.values()) s += x;
    const long double mean = s / m.size();
    for (double x : m.values()) s2 += (x - mean) * (x - mean);
    const double sd = static_cast<double>(std::sqrt(s2 / (m.size() - 1)));
    CHECK(std::abs(static_cast<double>(mean)) <= 3 * 0.02 / 1000);
    CHECK(std::abs(sd - 0.02) <= 1e-4);
    CHECK_THROWS_AS(gaussian_init(0, 3, rng), ConfigError);
}

TEST_CASE("rng determinism") {
    Rng a(5), b(5), c(6);
    CHECK(gaussian_init(4, 4, a) == gaussian_init(4, 4, b));
    Rng d(5);
    CHECK_FALSE(gaussian_init(4, 4, c) == gaussian_init(4, 4, d));
    // mt19937_64's 10000th output for the default seed is fixed by the standard.
    Rng e(5489);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) x = e.next_u64();
    CHECK(x == 9981545732273789042ULL);
    Rng f(1);
    for (int i = 0; i < 1000; ++i) {
        const double u = f.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        const auto k = f.uniform_int(3, 7);
        CHECK(k >= 3);
        CHECK(k <= 7);
    }
}

TEST_CASE("fnv1a known vectors") {
    CHECK(fnv1a(std::string_view("")) == 0xcbf29ce484222325ULL);
    CHECK(fnv1a(std::string_view("a")) == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a(std::string_view("foobar")) == 0x85944171f73967e8ULL);
    CHECK(hex8(0x1234abcd5678ULL).size() == 8);
}

TEST_CASE("kernel variants agree") {
    const auto& s = kernels::scalar_table();
    const auto* v = kernels::avx2_table();
    if (v == nullptr || !kernels::cpu_has_avx2_fma()) {
        MESSAGE("AVX2 kernels unavailable; only the scalar path is exercised");
        return;
    }
    Rng rng(15);
    for (std::size_t n : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 64u, 67u, 1000u}) {
        std::vector<double> a(n), b(n), g(n), y1(n), y2(n), o1(n), o2(n);
        for (std::size_t i = 0; i < n; ++i) {
            a[i] = rng.normal(0, 3);
            b[i] = rng.normal(0, 3);
            g[i] = std::tanh(rng.normal());
            y1[i] = y2[i] = rng.normal();
        }
        double mag = 0;
        for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
        CHECK(std::abs(s.dot(a.data(), b.data(), n) - v->dot(a.data(), b.data(), n)) <= 1e-13 * (mag + 1));
        double asum = 0;
        for (double x : a) asum += std::abs(x);
        CHECK(std::abs(s.sum(a.data(), n) - v->sum(a.data(), n)) <= 1e-13 * (asum + 1));
        CHECK(s.max(a.data(), n) == v->max(a.data(), n));
        s.axpy(0.7, a.data(), y1.data(), n);
        v->axpy(0.7, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14 * (std::abs(y1[i]) + 1));
        s.scale(1.3, y1.data(), n);
        v->scale(1.3, y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-14 * (std::abs(y1[i]) + 1));
        s.gated_add(a.data(), g.data(), b.data(), o1.data(), n);
        v->gated_add(a.data(), g.data(), b.data(), o2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(o1[i] - o2[i]) <= 1e-14 * (std::abs(o1[i]) + 1));
        // A closed gate leaves the base untouched on both paths.
        std::vector<double> zero(n, 0.0);
        v->gated_add(a.data(), zero.data(), b.data(), o2.data(), n);
        CHECK(o2 == a);
    }
    CHECK(s.dot(nullptr, nullptr, 0) == 0.0);
    CHECK(v->sum(nullptr, 0) == 0.0);
}

TEST_CASE("active kernel table honours the override") {
    const auto& k = kernels::active();
    const char* env = std::getenv("HKIDQG_KERNELS");
    if (env != nullptr && std::string_view(env) == "scalar") CHECK(k.name == kernels::scalar_table().name);
    CHECK(!k.name.empty());
}

TEST_CASE("diagram validation and png round trip") {
    CHECK_THROWS_AS(Diagram("x", 0, 4), ValidationError);
    CHECK_THROWS_AS(Diagram("x", 2, 2, std::vector<std::uint8_t>(5)), ValidationError);
    Rng rng(16);
    Diagram d("d", 7, 9);
    for (std::size_t r = 0; r < 7; ++r)
        for (std::size_t c = 0; c < 9; ++c)
            d.set(r, c, {static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                         static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                         static_cast<std::uint8_t>(rng.uniform_int(0, 255))});
    const auto png = encode_png(d);
    CHECK(decode_png(png) == d);
    const auto dir = std::filesystem::temp_directory_path() / "hkidqg_core_test";
    std::filesystem::create_directories(dir);
    save_png(d, (dir / "d.png").string());
    CHECK(load_diagram((dir / "d.png").string()) == d);
    CHECK_THROWS_AS(load_diagram((dir / "missing.png").string()), IoError);
    CHECK_THROWS_AS(decode_png(std::vector<std::uint8_t>{1, 2, 3}), FormatError);
}

TEST_CASE("atomic write leaves no temporary file") {
    const auto dir = std::filesystem::temp_directory_path() / "hkidqg_core_test";
    std::filesystem::create_directories(dir);
    const auto p = (dir / "out.txt").string();
    write_file_atomic(p, "first");
    write_file_atomic(p, "second");
    CHECK(read_file(p) == "second");
    CHECK_FALSE(std::filesystem::exists(p + ".tmp"));
    CHECK_THROWS_AS(read_file((dir / "nope.txt").string()), IoError);
}
