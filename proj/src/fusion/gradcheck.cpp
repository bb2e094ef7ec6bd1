#include "hkidqg/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "hkidqg/fusion.hpp"
#include "hkidqg/rng.hpp"

namespace hkidqg {

namespace {

double weighted_sum(const Matrix& r, const Matrix& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += r.values()[i] * f.values()[i];
    return s;
}

double max_rel(const Matrix& analytic, Matrix& x, const std::function<double()>& loss,
               const GradCheckOptions& o) {
    double worst = 0.0;
    auto xs = x.data();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double keep = xs[i];
        xs[i] = keep + o.step;
        const double up = loss();
        xs[i] = keep - o.step;
        const double down = loss();
        xs[i] = keep;
        const double num = (up - down) / (2.0 * o.step);
        const double a = analytic.values()[i];
        const double den = std::max({std::abs(a), std::abs(num), o.floor});
        worst = std::max(worst, std::abs(a - num) / den);
    }
    return worst;
}

}  // namespace

std::vector<GradCheckRow> gradcheck_fusion(const GradCheckOptions& o) {
    Rng rng(o.seed);
    std::vector<GradCheckRow> rows;
    for (int k = 0; k < o.trials; ++k) {
        GradCheckRow row;
        row.trial = k;
        row.t = rng.uniform_int(1, 5);
        row.n = rng.uniform_int(1, 4);
        row.d_k = rng.uniform_int(1, 8);
        row.d_v = rng.uniform_int(1, 6);
        FusionParams p = FusionParams::init(row.d_v, row.d_k, rng, 0.5);
        Matrix x = gaussian_init(row.n, row.d_v, rng, 0.0, 1.0);
        Matrix h = gaussian_init(row.t, row.d_k, rng, 0.0, 1.0);
        const Matrix r = gaussian_init(row.t, row.d_k, rng, 0.0, 1.0);

        const FusionTrace tr = fusion_forward(p, x, h);
        const FusionGrads g = fusion_backward(tr, p, r);
        auto loss = [&] { return weighted_sum(r, fusion_forward(p, x, h).h_fuse); };
        row.w_h = max_rel(g.w_h, p.w_h.weights, loss, o);
        row.w_t = max_rel(g.w_t, p.w_t.weights, loss, o);
        row.w_v = max_rel(g.w_v, p.w_v.weights, loss, o);
        row.h_t = max_rel(g.h_t, h, loss, o);
        row.pass = std::max({row.w_h, row.w_t, row.w_v, row.h_t}) <= o.tolerance;
        rows.push_back(row);
    }
    return rows;
}

std::string gradcheck_table(const std::vector<GradCheckRow>& rows) {
    std::string s = "trial  T  n  d_v  d_k      W_h        W_t        W_v        H_t     result\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%5d %2zu %2zu %4zu %4zu  %.3e  %.3e  %.3e  %.3e  %s\n", r.trial,
                      r.t, r.n, r.d_v, r.d_k, r.w_h, r.w_t, r.w_v, r.h_t, r.pass ? "pass" : "FAIL");
        s += buf;
    }
    return s;
}

}  // namespace hkidqg
