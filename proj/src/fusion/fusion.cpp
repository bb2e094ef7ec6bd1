#include "hkidqg/fusion.hpp"

#include <cmath>

#include "hkidqg/error.hpp"
#include "hkidqg/kernels.hpp"

namespace hkidqg {

namespace {

void scale_rows(Matrix& m, const std::vector<double>& factors) {
    if (factors.empty()) return;
    if (factors.size() != m.rows()) throw ShapeError("dropout mask length does not match rows");
    const auto& k = kernels::active();
    for (std::size_t r = 0; r < m.rows(); ++r) k.scale(factors[r], m.row(r).data(), m.cols());
}

void require_square(const LinearMap& w, std::size_t d) {
    if (w.in_dim() != d || w.out_dim() != d) {
        throw ShapeError(w.name + " must be " + std::to_string(d) + " x " + std::to_string(d) +
                         ", got " + w.weights.shape_str());
    }
}

}  // namespace

FusionParams FusionParams::init(std::size_t image_dim, std::size_t text_dim, Rng& rng,
                                double stddev) {
    FusionParams p;
    p.w_h = {"W_h", gaussian_init(image_dim, text_dim, rng, 0.0, stddev)};
    p.w_t = {"W_t", gaussian_init(text_dim, text_dim, rng, 0.0, stddev)};
    p.w_v = {"W_v", gaussian_init(text_dim, text_dim, rng, 0.0, stddev)};
    return p;
}

void FusionParams::validate() const {
    const std::size_t d = text_dim();
    require_square(w_t, d);
    require_square(w_v, d);
    if (!w_h.weights.all_finite() || !w_t.weights.all_finite() || !w_v.weights.all_finite())
        throw ValidationError("fusion parameters contain non-finite values");
}

std::string build_qg_prompt(const std::string& target, const std::string& concept_text,
                            const SelectedKnowledge& knowledge) {
    std::string joined;
    for (std::size_t i = 0; i < knowledge.size(); ++i) {
        if (i) joined += ' ';
        joined += knowledge[i].text;
    }
    return "Generate the question including Target: " + target + " to assess Concept: " +
           concept_text + " with the knowledge: " + joined;
}

Matrix project_visual(const Matrix& patch_embs, const LinearMap& w_h) {
    if (patch_embs.cols() != w_h.in_dim()) {
        throw ShapeError("project_visual: patch embeddings " + patch_embs.shape_str() +
                         " do not match " + w_h.name + " " + w_h.weights.shape_str());
    }
    return matmul(patch_embs, w_h.weights);
}

AttentionResult cross_modal_attention(const Matrix& h_t, const Matrix& h_v) {
    if (h_t.cols() != h_v.cols()) {
        throw ShapeError("cross_modal_attention: text " + h_t.shape_str() + " vs visual " +
                         h_v.shape_str());
    }
    if (h_t.rows() == 0 || h_v.rows() == 0) {
        throw ShapeError("cross_modal_attention: needs at least one text and one visual row");
    }
    Matrix scores = scale(matmul_transposed(h_t, h_v), 1.0 / std::sqrt(static_cast<double>(h_t.cols())));
    Matrix weights = softmax_axis(scores, Axis::rows);
    Matrix attended = matmul(weights, h_v);
    return {std::move(weights), std::move(attended)};
}

GateResult gated_fusion(const Matrix& h_t, const Matrix& h_attn, const LinearMap& w_t,
                        const LinearMap& w_v) {
    check_same_shape(h_t, h_attn, "gated_fusion");
    require_square(w_t, h_t.cols());
    require_square(w_v, h_t.cols());
    GateResult g;
    g.lambda = add(matmul(h_t, w_t.weights), matmul(h_attn, w_v.weights));
    g.gate = tanh(g.lambda);
    g.fused = Matrix(h_t.rows(), h_t.cols());
    kernels::active().gated_add(h_t.data().data(), g.gate.data().data(), h_attn.data().data(),
                                g.fused.data().data(), g.fused.size());
    return g;
}

DropoutMasks sample_dropout(std::size_t text_rows, double p, Rng& rng) {
    DropoutMasks masks;
    if (p <= 0.0) return masks;
    if (p >= 1.0) throw ConfigError("dropout probability must be < 1");
    const double keep = 1.0 / (1.0 - p);
    masks.text_rows.resize(text_rows);
    masks.attended_rows.resize(text_rows);
    for (double& f : masks.text_rows) f = rng.uniform() < p ? 0.0 : keep;
    for (double& f : masks.attended_rows) f = rng.uniform() < p ? 0.0 : keep;
    return masks;
}

FusionTrace fusion_forward(const FusionParams& params, const Matrix& patch_embs,
                           const Matrix& h_t, const DropoutMasks& masks) {
    if (h_t.cols() != params.text_dim()) {
        throw ShapeError("fusion_forward: text encoding " + h_t.shape_str() +
                         " does not match hidden width " + std::to_string(params.text_dim()));
    }
    FusionTrace tr;
    tr.params_version = params.version;
    tr.masks = masks;
    tr.patch_embs = patch_embs;
    tr.h_t = h_t;
    scale_rows(tr.h_t, masks.text_rows);
    tr.h_v = project_visual(patch_embs, params.w_h);
    AttentionResult att = cross_modal_attention(tr.h_t, tr.h_v);
    tr.attn_weights = std::move(att.weights);
    tr.h_v_attn = std::move(att.attended);
    scale_rows(tr.h_v_attn, masks.attended_rows);
    GateResult g = gated_fusion(tr.h_t, tr.h_v_attn, params.w_t, params.w_v);
    tr.lambda = std::move(g.lambda);
    tr.gate = std::move(g.gate);
    tr.h_fuse = std::move(g.fused);
    return tr;
}

FusionGrads fusion_backward(const FusionTrace& trace, const FusionParams& params,
                            const Matrix& d_fuse) {
    if (trace.params_version != params.version) {
        throw ContractViolation("fusion_backward: trace recorded at parameter version " +
                                std::to_string(trace.params_version) + ", parameters are at " +
                                std::to_string(params.version));
    }
    check_same_shape(d_fuse, trace.h_fuse, "fusion_backward");
    const std::size_t d = trace.h_t.cols();
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));

    // Gate: F = H_t + G * A, G = tanh(Lambda), Lambda = H_t W_t + A W_v.
    Matrix d_lambda(d_fuse.rows(), d);
    for (std::size_t i = 0; i < d_fuse.size(); ++i) {
        const double g = trace.gate.data()[i];
        d_lambda.data()[i] = d_fuse.data()[i] * trace.h_v_attn.data()[i] * (1.0 - g * g);
    }
    Matrix d_attn = add(hadamard(d_fuse, trace.gate), matmul_transposed(d_lambda, params.w_v.weights));
    Matrix d_ht = add(d_fuse, matmul_transposed(d_lambda, params.w_t.weights));

    FusionGrads g;
    g.w_t = matmul(transpose(trace.h_t), d_lambda);
    g.w_v = matmul(transpose(trace.h_v_attn), d_lambda);

    scale_rows(d_attn, trace.masks.attended_rows);

    // Attention: A = P H_v, P = softmax_rows(S), S = H_t H_v^T / sqrt(d).
    const Matrix& p = trace.attn_weights;
    Matrix d_p = matmul_transposed(d_attn, trace.h_v);
    Matrix d_hv = matmul(transpose(p), d_attn);
    Matrix d_s(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double inner = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) inner += d_p(i, j) * p(i, j);
        for (std::size_t j = 0; j < p.cols(); ++j) d_s(i, j) = p(i, j) * (d_p(i, j) - inner);
    }
    d_ht = add(d_ht, scale(matmul(d_s, trace.h_v), inv_sqrt_d));
    d_hv = add(d_hv, scale(matmul(transpose(d_s), trace.h_t), inv_sqrt_d));

    g.w_h = matmul(transpose(trace.patch_embs), d_hv);
    scale_rows(d_ht, trace.masks.text_rows);
    g.h_t = std::move(d_ht);
    return g;
}

}  // namespace hkidqg
