#include "hkidqg/pyramid.hpp"

#include <string>

#include "hkidqg/error.hpp"

namespace hkidqg {

std::size_t pyramid_size(int layers) noexcept {
    std::size_t n = 0;
    for (int l = 1; l <= layers; ++l) n += static_cast<std::size_t>(l) * l;
    return n;
}

std::size_t PatchPyramid::layer_offset(int layer) noexcept { return pyramid_size(layer - 1); }

std::span<const PatchRef> PatchPyramid::layer(int l) const {
    if (l < 1 || l > layers) throw ContractViolation("layer index out of range");
    return std::span<const PatchRef>(patches).subspan(layer_offset(l),
                                                      static_cast<std::size_t>(l) * l);
}

PatchPyramid decompose(std::size_t height, std::size_t width, int layers) {
    if (layers < 1 || layers > kMaxLayers) {
        throw ConfigError("pyramid layer count must be in [1, " + std::to_string(kMaxLayers) +
                          "], got " + std::to_string(layers));
    }
    const auto n = static_cast<std::size_t>(layers);
    if (height < n || width < n) {
        throw ConfigError("image " + std::to_string(height) + "x" + std::to_string(width) +
                          " is too small for a " + std::to_string(layers) + "-layer pyramid");
    }
    PatchPyramid p;
    p.height = height;
    p.width = width;
    p.layers = layers;
    p.patches.reserve(pyramid_size(layers));
    for (std::size_t l = 1; l <= n; ++l) {
        for (std::size_t i = 1; i <= l; ++i) {
            for (std::size_t j = 1; j <= l; ++j) {
                PatchRef ref;
                ref.layer = static_cast<int>(l);
                ref.row = static_cast<int>(i);
                ref.col = static_cast<int>(j);
                ref.rect = Rect{(i - 1) * height / l, i * height / l, (j - 1) * width / l,
                                j * width / l};
                p.patches.push_back(ref);
            }
        }
    }
    return p;
}

Diagram crop(const Diagram& d, const PatchRef& ref) {
    const Rect& r = ref.rect;
    if (r.row_start >= r.row_end || r.col_start >= r.col_end || r.row_end > d.height() ||
        r.col_end > d.width()) {
        throw ContractViolation("crop rect out of bounds for " + std::to_string(d.height()) +
                                "x" + std::to_string(d.width()) + " diagram");
    }
    std::vector<std::uint8_t> out;
    out.reserve(r.height() * r.width() * 3);
    const auto src = d.bytes();
    for (std::size_t row = r.row_start; row < r.row_end; ++row) {
        const auto begin = src.begin() + static_cast<std::ptrdiff_t>(3 * (row * d.width() + r.col_start));
        out.insert(out.end(), begin, begin + static_cast<std::ptrdiff_t>(3 * r.width()));
    }
    return Diagram(d.id() + "#" + std::to_string(ref.layer) + "," + std::to_string(ref.row) + "," +
                       std::to_string(ref.col),
                   r.height(), r.width(), std::move(out));
}

std::vector<double> score_layer(const Matrix& patch_embs, const Matrix& w_h,
                                std::span<const double> e_t, std::span<const double> e_c) {
    if (patch_embs.cols() != w_h.rows()) {
        throw ShapeError("score_patches: patch embeddings " + patch_embs.shape_str() +
                         " do not match W_h " + w_h.shape_str());
    }
    if (e_t.size() != w_h.cols() || e_c.size() != w_h.cols()) {
        throw ShapeError("score_patches: constraint embeddings must have width " +
                         std::to_string(w_h.cols()));
    }
    const Matrix projected = matmul(patch_embs, w_h);
    std::vector<double> scores(projected.rows());
    for (std::size_t p = 0; p < projected.rows(); ++p)
        scores[p] = cosine_sim(projected.row(p), e_t) + cosine_sim(projected.row(p), e_c);
    return scores;
}

std::vector<std::vector<double>> score_patches(const std::vector<Matrix>& layer_embs,
                                               const Matrix& w_h, std::span<const double> e_t,
                                               std::span<const double> e_c) {
    std::vector<std::vector<double>> out;
    out.reserve(layer_embs.size());
    for (const Matrix& m : layer_embs) out.push_back(score_layer(m, w_h, e_t, e_c));
    return out;
}

SelectedPatches select_patches(const PatchPyramid& pyramid,
                               const std::vector<std::vector<double>>& scores) {
    if (scores.size() != static_cast<std::size_t>(pyramid.layers)) {
        throw ShapeError("select_patches: expected scores for " +
                         std::to_string(pyramid.layers) + " layers, got " +
                         std::to_string(scores.size()));
    }
    SelectedPatches out;
    out.reserve(scores.size());
    for (int l = 1; l <= pyramid.layers; ++l) {
        const auto& s = scores[static_cast<std::size_t>(l - 1)];
        const auto cells = pyramid.layer(l);
        if (s.size() != cells.size()) {
            throw ShapeError("select_patches: layer " + std::to_string(l) + " has " +
                             std::to_string(cells.size()) + " patches but " +
                             std::to_string(s.size()) + " scores");
        }
        // Mathematically tied cells can differ in the last bits after the
        // projection, so scores within kTieEpsilon count as equal.
        std::size_t best = 0;
        for (std::size_t k = 1; k < s.size(); ++k)
            if (s[k] > s[best] + kTieEpsilon) best = k;
        out.push_back({cells[best], s[best]});
    }
    return out;
}

}  // namespace hkidqg
