#pragma once

#include <cstddef>
#include <vector>

#include "hkidqg/image.hpp"
#include "hkidqg/matrix.hpp"

namespace hkidqg {

struct Rect {
    std::size_t row_start = 0;
    std::size_t row_end = 0;  // exclusive
    std::size_t col_start = 0;
    std::size_t col_end = 0;  // exclusive

    std::size_t height() const noexcept { return row_end - row_start; }
    std::size_t width() const noexcept { return col_end - col_start; }
    bool operator==(const Rect&) const = default;
};

/// One cell of the pyramid. layer, row and col are 1-based: layer l is an
/// l x l grid and (row, col) index into it.
struct PatchRef {
    int layer = 1;
    int row = 1;
    int col = 1;
    Rect rect;

    bool operator==(const PatchRef&) const = default;
};

struct PatchPyramid {
    std::size_t height = 0;
    std::size_t width = 0;
    int layers = 0;
    std::vector<PatchRef> patches;  // layer-major, then row-major

    // Offset of layer l's first patch in `patches`.
    static std::size_t layer_offset(int layer) noexcept;
    std::span<const PatchRef> layer(int l) const;
};

struct SelectedPatch {
    PatchRef patch;
    double score = 0.0;
};

using SelectedPatches = std::vector<SelectedPatch>;  // one entry per layer, l = 1..n

constexpr int kMaxLayers = 8;

/// Patch count of an n-layer pyramid: 1 + 4 + ... + n^2.
std::size_t pyramid_size(int layers) noexcept;

/// Layer l cell (i, j) spans rows [floor((i-1)H/l), floor(iH/l)) and columns
/// [floor((j-1)W/l), floor(jW/l)), so each layer tiles the image exactly.
PatchPyramid decompose(std::size_t height, std::size_t width, int layers);

Diagram crop(const Diagram& d, const PatchRef& ref);

/// Scores of every patch in one layer: cos(f W_h, e_t) + cos(f W_h, e_c),
/// where each row of `patch_embs` is one pooled patch embedding f.
std::vector<double> score_layer(const Matrix& patch_embs, const Matrix& w_h,
                                std::span<const double> e_t, std::span<const double> e_c);

/// Scores for all layers; `layer_embs[l-1]` holds layer l's l^2 patch rows.
std::vector<std::vector<double>> score_patches(const std::vector<Matrix>& layer_embs,
                                               const Matrix& w_h, std::span<const double> e_t,
                                               std::span<const double> e_c);

/// Scores closer than this are treated as tied.
constexpr double kTieEpsilon = 1e-12;

/// Per layer, the maximal-score patch. Equal scores (within kTieEpsilon)
/// resolve to the first cell in row-major order.
SelectedPatches select_patches(const PatchPyramid& pyramid,
                               const std::vector<std::vector<double>>& scores);

}  // namespace hkidqg
