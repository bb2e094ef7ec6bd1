#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <numbers>

#include "hkidqg/checkpoint.hpp"
#include "hkidqg/demo.hpp"
#include "hkidqg/fusion.hpp"
#include "hkidqg/gradcheck.hpp"
#include "hkidqg/optim.hpp"
#include "hkidqg/train.hpp"
#include "oracles.hpp"

using namespace hkidqg;

namespace {

double max_abs_diff(const Matrix& a, const Matrix& b) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

double weighted_sum(const Matrix& r, const Matrix& f) {
    long double s = 0;
    for (std::size_t i = 0; i < f.size(); ++i) s += static_cast<long double>(r.values()[i]) * f.values()[i];
    return static_cast<double>(s);
}

FusionParams random_params(std::size_t dv, std::size_t dk, Rng& rng, double sd = 0.5) {
    return FusionParams::init(dv, dk, rng, sd);
}

}  // namespace

TEST_CASE("question generation prompt") {
    const SelectedKnowledge k{{0, 1, "The heart pumps blood.", 0.6}, {3, 2, "Veins return blood.", 0.3}};
    CHECK(build_qg_prompt("heart", "Circulation", k) ==
          "Generate the question including Target: heart to assess Concept: Circulation with the "
          "knowledge: The heart pumps blood. Veins return blood.");
    CHECK(build_qg_prompt("heart", "Circulation", {}) ==
          "Generate the question including Target: heart to assess Concept: Circulation with the knowledge: ");
}

TEST_CASE("visual projection and attention") {
    Rng rng(21);
    const Matrix x = gaussian_init(3, 4, rng, 0, 1);
    CHECK(project_visual(x, {"I", Matrix::identity(4)}) == x);
    CHECK(project_visual(x, {"Z", Matrix(4, 5)}) == Matrix(3, 5));
    CHECK_THROWS_AS(project_visual(x, {"W", Matrix(5, 5)}), ShapeError);

    const Matrix ht = gaussian_init(4, 5, rng, 0, 1);
    SUBCASE("a single visual row is attended fully") {
        const Matrix hv = gaussian_init(1, 5, rng, 0, 1);
        const auto r = cross_modal_attention(ht, hv);
        for (double w : r.weights.values()) CHECK(w == 1.0);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 5; ++j) CHECK(r.attended(i, j) == doctest::Approx(hv(0, j)).epsilon(1e-15));
    }
    SUBCASE("identical visual rows share weight") {
        const Matrix row = gaussian_init(1, 5, rng, 0, 1);
        const auto r = cross_modal_attention(ht, Matrix::from_rows({row.values(), row.values(), row.values()}));
        for (double w : r.weights.values()) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-15));
    }
    SUBCASE("rows are distributions") {
        const auto r = cross_modal_attention(ht, gaussian_init(3, 5, rng, 0, 3));
        for (std::size_t i = 0; i < 4; ++i) {
            double s = 0;
            for (double w : r.weights.row(i)) s += w;
            CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(cross_modal_attention(ht, Matrix(2, 4)), ShapeError);
    CHECK_THROWS_AS(cross_modal_attention(ht, Matrix(0, 5)), ShapeError);
}

TEST_CASE("fusion forward matches the reference formulas") {
    Rng rng(22);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t t = 1 + rng.uniform_int(0, 6), n = 1 + rng.uniform_int(0, 4),
                          dv = 1 + rng.uniform_int(0, 6), dk = 1 + rng.uniform_int(0, 8);
        const FusionParams p = random_params(dv, dk, rng);
        const Matrix x = gaussian_init(n, dv, rng, 0, 1), ht = gaussian_init(t, dk, rng, 0, 1);
        const FusionTrace tr = fusion_forward(p, x, ht);
        const Matrix want = oracle::fusion(x, ht, p.w_h.weights, p.w_t.weights, p.w_v.weights);
        CHECK(max_abs_diff(tr.h_fuse, want) < 1e-12);
        // The gate is bounded, so each entry moves by at most |A|.
        for (std::size_t i = 0; i < tr.h_fuse.size(); ++i) {
            CHECK(std::abs(tr.gate.values()[i]) < 1.0 + 1e-15);
            CHECK(std::abs(tr.h_fuse.values()[i] - ht.values()[i]) <= std::abs(tr.h_v_attn.values()[i]) + 1e-15);
        }
    }
}

TEST_CASE("a closed gate passes the text through unchanged") {
    Rng rng(23);
    FusionParams p = random_params(3, 4, rng);
    p.w_t.weights = Matrix(4, 4);
    p.w_v.weights = Matrix(4, 4);
    const Matrix ht = gaussian_init(5, 4, rng, 0, 1);
    CHECK(fusion_forward(p, gaussian_init(2, 3, rng, 0, 1), ht).h_fuse == ht);
}

TEST_CASE("fusion gradients agree with central differences") {
    Rng rng(24);
    const double h = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t t = 1 + rng.uniform_int(0, 4), n = 1 + rng.uniform_int(0, 3),
                          dv = 1 + rng.uniform_int(0, 5), dk = 1 + rng.uniform_int(0, 7);
        FusionParams p = random_params(dv, dk, rng);
        const Matrix x = gaussian_init(n, dv, rng, 0, 1);
        Matrix ht = gaussian_init(t, dk, rng, 0, 1);
        const Matrix r = gaussian_init(t, dk, rng, 0, 1);
        const FusionGrads g = fusion_backward(fusion_forward(p, x, ht), p, r);

        auto loss = [&] {
            return weighted_sum(r, oracle::fusion(x, ht, p.w_h.weights, p.w_t.weights, p.w_v.weights));
        };
        auto check = [&](Matrix& param, const Matrix& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double keep = param.data()[i];
                param.data()[i] = keep + h;
                const double up = loss();
                param.data()[i] = keep - h;
                const double down = loss();
                param.data()[i] = keep;
                const double num = (up - down) / (2 * h);
                const double a = grad.values()[i];
                CHECK(std::abs(a - num) <= 1e-6 + 1e-5 * std::max(std::abs(a), std::abs(num)));
            }
        };
        check(p.w_h.weights, g.w_h);
        check(p.w_t.weights, g.w_t);
        check(p.w_v.weights, g.w_v);
        check(ht, g.h_t);
    }
}

TEST_CASE("fusion backward edge cases") {
    Rng rng(25);
    FusionParams p = random_params(3, 4, rng);
    const Matrix x = gaussian_init(2, 3, rng, 0, 1), ht = gaussian_init(3, 4, rng, 0, 1);
    const FusionTrace tr = fusion_forward(p, x, ht);
    const FusionGrads zero = fusion_backward(tr, p, Matrix(3, 4));
    CHECK(zero.w_h == Matrix(3, 4));
    CHECK(zero.w_t == Matrix(4, 4));
    CHECK(zero.w_v == Matrix(4, 4));
    CHECK(zero.h_t == Matrix(3, 4));
    CHECK_THROWS_AS(fusion_backward(tr, p, Matrix(2, 4)), ShapeError);
    ++p.version;
    CHECK_THROWS_AS(fusion_backward(tr, p, Matrix(3, 4, 1.0)), ContractViolation);
}

TEST_CASE("gradcheck harness passes") {
    const auto rows = gradcheck_fusion({});
    CHECK(rows.size() == 50);
    for (const auto& r : rows) CHECK(r.pass);
    CHECK(gradcheck_table(rows).find("trial") != std::string::npos);
}

TEST_CASE("dropout masks") {
    Rng rng(26);
    CHECK(sample_dropout(5, 0.0, rng).text_rows.empty());
    const auto m = sample_dropout(1000, 0.25, rng);
    REQUIRE(m.text_rows.size() == 1000);
    int dropped = 0;
    for (double f : m.text_rows) {
        CHECK((f == 0.0 || f == doctest::Approx(1 / 0.75)));
        dropped += f == 0.0;
    }
    CHECK(dropped > 200);
    CHECK(dropped < 300);
    CHECK_THROWS_AS(sample_dropout(3, 1.0, rng), ConfigError);
}

TEST_CASE("learning-rate schedule") {
    const Schedule s{10, 2, 20};
    CHECK(lr_schedule(0, s, 1.0) == 0.0);
    CHECK(lr_schedule(10, s, 1.0) == doctest::Approx(0.5));
    CHECK(lr_schedule(20, s, 1.0) == doctest::Approx(1.0));
    CHECK(lr_schedule(110, s, 1.0) == doctest::Approx(0.5));
    CHECK(lr_schedule(200, s, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(lr_schedule(10'000, s, 1.0) == lr_schedule(200, s, 1.0));
    const double after = lr_schedule(65, s, 2.0);
    CHECK(after == doctest::Approx(2.0 * 0.5 * (1 + std::cos(std::numbers::pi * 45.0 / 180.0))));
    for (std::size_t k = 0; k < 200; ++k) {
        const double a = lr_schedule(k, s, 1.0), b = lr_schedule(k + 1, s, 1.0);
        CHECK(std::abs(a - b) <= 0.1 + 1e-12);
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
    }
    CHECK_THROWS_AS(lr_schedule(0, {0, 2, 20}, 1.0), ConfigError);
    CHECK_THROWS_AS(lr_schedule(0, {1, 5, 5}, 1.0), ConfigError);
}

TEST_CASE("AdamW matches the reference update") {
    Rng rng(27);
    Matrix p = gaussian_init(3, 4, rng, 0, 1);
    std::vector<double> ref = p.values();
    oracle::AdamRef adam;
    Moments mom;
    for (int k = 0; k < 10; ++k) {
        const Matrix g = gaussian_init(3, 4, rng, 0, 1);
        const double lr = 1e-2 * (k + 1);
        adamw_update(p, g, mom, lr, {});
        adam.step(ref, g.values(), lr);
        for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(p.values()[i] - ref[i]) < 1e-10);
    }
    CHECK(mom.t == 10);

    // With a zero gradient only the decoupled decay moves the weights.
    Matrix q(1, 2, 3.0);
    Moments fresh;
    adamw_update(q, Matrix(1, 2), fresh, 0.1, {});
    CHECK(q(0, 0) == doctest::Approx(3.0 * (1 - 0.1 * 0.01)).epsilon(1e-15));
}

TEST_CASE("optimizer step over parameter groups") {
    Matrix w(2, 2, 1.0), g(2, 2, 0.5);
    OptimizerState st;
    const Schedule s{1, 0, 10};
    std::vector<ParamSlot> slots{{"w", "default", &w, &g}};
    CHECK(adamw_step(slots, st, s));
    CHECK(st.step == 1);
    CHECK(w(0, 0) < 1.0);

    const Matrix before = w;
    Matrix bad(2, 2, 0.5);
    bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
    std::vector<ParamSlot> bad_slots{{"w", "default", &w, &bad}};
    CHECK_FALSE(adamw_step(bad_slots, st, s));
    CHECK(w == before);
    CHECK(st.step == 1);
    CHECK(st.rejected_steps == 1);

    std::vector<ParamSlot> unknown{{"w", "nope", &w, &g}};
    CHECK_THROWS_AS(adamw_step(unknown, st, s), ConfigError);
}

TEST_CASE("checkpoint round trip") {
    Rng rng(28);
    Checkpoint ck;
    ck.seed = 99;
    ck.params = random_params(5, 3, rng);
    ck.params.version = 17;
    ck.optimizer.step = 17;
    ck.optimizer.moments["W_h"] = {gaussian_init(5, 3, rng), gaussian_init(5, 3, rng), 17};
    ck.config = {{"layers", 3}};
    const auto dir = std::filesystem::temp_directory_path() / "hkidqg_ckpt_test";
    std::filesystem::create_directories(dir);
    const std::string path = (dir / "model.json").string();
    save_checkpoint(path, ck);
    const Checkpoint back = load_checkpoint(path);
    CHECK(back.seed == 99);
    CHECK(back.params.w_h.weights == ck.params.w_h.weights);
    CHECK(back.params.w_t.weights == ck.params.w_t.weights);
    CHECK(back.params.w_v.weights == ck.params.w_v.weights);
    CHECK(back.params.version == 17);
    CHECK(back.optimizer.step == 17);
    CHECK(back.optimizer.moments.at("W_h").v == ck.optimizer.moments.at("W_h").v);
    CHECK(back.config == ck.config);
    CHECK_THROWS_AS(load_checkpoint((dir / "missing.json").string()), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("surrogate training") {
    const DemoFixture fx = make_demo_fixture(7);
    PipelineConfig cfg = demo_config(7);
    const Backends b = memoize_backends(make_backends(cfg));
    const DiagramSource src = memory_diagram_source(fx.diagrams);

    cfg.epochs = 0;
    const TrainResult none = toy_train(fx.records, cfg, b, src);
    CHECK(none.params.w_h.weights == initial_params(cfg).w_h.weights);
    CHECK(none.epoch_losses.size() == 1);

    cfg.epochs = 3;
    const TrainResult a = toy_train(fx.records, cfg, b, src);
    const TrainResult again = toy_train(fx.records, cfg, b, src);
    CHECK(a.epoch_losses.size() == 4);
    CHECK(a.epoch_losses == again.epoch_losses);
    CHECK(a.params.w_v.weights == again.params.w_v.weights);
    CHECK(a.epoch_losses.back() < a.epoch_losses.front());
    CHECK(a.params.version == a.optimizer.step);

    CHECK_THROWS_AS(toy_train({}, cfg, b, src), ConfigError);

    // Surrogate gradient against central differences.
    Rng rng(29);
    const Matrix f = gaussian_init(3, 4, rng, 0, 1);
    const Vector q{0.1, -0.2, 0.3, 0.0};
    const Matrix g = surrogate_grad(f, q);
    Matrix probe = f;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double keep = probe.data()[i];
        probe.data()[i] = keep + 1e-6;
        const double up = surrogate_loss(probe, q);
        probe.data()[i] = keep - 1e-6;
        const double down = surrogate_loss(probe, q);
        probe.data()[i] = keep;
        CHECK(g.values()[i] == doctest::Approx((up - down) / 2e-6).epsilon(1e-6));
    }
}
