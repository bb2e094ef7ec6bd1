#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hkidqg/knowsel.hpp"
#include "hkidqg/matrix.hpp"
#include "hkidqg/rng.hpp"

namespace hkidqg {

/// A learnable projection applied to row vectors: y = x * weights, with
/// weights of shape (in_dim, out_dim).
struct LinearMap {
    std::string name;
    Matrix weights;

    std::size_t in_dim() const noexcept { return weights.rows(); }
    std::size_t out_dim() const noexcept { return weights.cols(); }
};

/// W_h maps pooled image embeddings (d_v) into the text space (d_k); it is
/// shared between patch scoring and visual projection. W_t and W_v are the
/// d_k x d_k gate maps.
struct FusionParams {
    LinearMap w_h;
    LinearMap w_t;
    LinearMap w_v;
    // Bumped by every optimizer update; traces remember the version they saw.
    std::uint64_t version = 0;

    static FusionParams init(std::size_t image_dim, std::size_t text_dim, Rng& rng,
                             double stddev = 0.02);
    std::size_t image_dim() const noexcept { return w_h.in_dim(); }
    std::size_t text_dim() const noexcept { return w_h.out_dim(); }
    void validate() const;
};

std::string build_qg_prompt(const std::string& target, const std::string& concept_text,
                            const SelectedKnowledge& knowledge);

Matrix project_visual(const Matrix& patch_embs, const LinearMap& w_h);

struct AttentionResult {
    Matrix weights;  // T x n, rows sum to 1
    Matrix attended;  // T x d_k
};

/// softmax(H_t H_v^T / sqrt(d_k)) over the visual axis, times H_v.
AttentionResult cross_modal_attention(const Matrix& h_t, const Matrix& h_v);

struct GateResult {
    Matrix lambda;
    Matrix gate;  // tanh(lambda)
    Matrix fused;
};

/// lambda = H_t W_t + H_attn W_v; fused = H_t + tanh(lambda) (elementwise) H_attn.
GateResult gated_fusion(const Matrix& h_t, const Matrix& h_attn, const LinearMap& w_t,
                        const LinearMap& w_v);

/// Optional row dropout. Each entry scales one row (0 or 1/(1-p)); an empty
/// vector means no dropout for that tensor.
struct DropoutMasks {
    std::vector<double> text_rows;
    std::vector<double> attended_rows;
};

DropoutMasks sample_dropout(std::size_t text_rows, double p, Rng& rng);

struct FusionTrace {
    Matrix patch_embs;  // n x d_v
    Matrix h_t;         // T x d_k, after dropout
    Matrix h_v;         // n x d_k
    Matrix attn_weights;
    Matrix h_v_attn;    // after dropout
    Matrix lambda;
    Matrix gate;
    Matrix h_fuse;
    DropoutMasks masks;
    std::uint64_t params_version = 0;
};

FusionTrace fusion_forward(const FusionParams& params, const Matrix& patch_embs,
                           const Matrix& h_t, const DropoutMasks& masks = {});

struct FusionGrads {
    Matrix w_h;
    Matrix w_t;
    Matrix w_v;
    Matrix h_t;
};

/// Gradients of a scalar loss given dL/dH_fuse, through the gate, tanh,
/// attention softmax and visual projection. Throws ContractViolation if the
/// parameters changed since the trace was recorded.
FusionGrads fusion_backward(const FusionTrace& trace, const FusionParams& params,
                            const Matrix& d_fuse);

}  // namespace hkidqg
