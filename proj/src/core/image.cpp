#include "hkidqg/image.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "hkidqg/error.hpp"

namespace hkidqg {

Diagram::Diagram(std::string id, std::size_t height, std::size_t width, Rgb fill)
    : id_(std::move(id)), height_(height), width_(width), rgb_(height * width * 3) {
    if (height == 0 || width == 0) throw ValidationError("diagram dimensions must be positive");
    for (std::size_t i = 0; i < height * width; ++i) {
        rgb_[3 * i] = fill[0];
        rgb_[3 * i + 1] = fill[1];
        rgb_[3 * i + 2] = fill[2];
    }
}

Diagram::Diagram(std::string id, std::size_t height, std::size_t width,
                 std::vector<std::uint8_t> rgb)
    : id_(std::move(id)), height_(height), width_(width), rgb_(std::move(rgb)) {
    if (height == 0 || width == 0) throw ValidationError("diagram dimensions must be positive");
    if (rgb_.size() != height * width * 3) {
        throw ValidationError("diagram pixel buffer does not match " + std::to_string(height) +
                              "x" + std::to_string(width));
    }
}

Rgb Diagram::at(std::size_t r, std::size_t c) const noexcept {
    const std::size_t o = 3 * (r * width_ + c);
    return {rgb_[o], rgb_[o + 1], rgb_[o + 2]};
}

void Diagram::set(std::size_t r, std::size_t c, Rgb px) noexcept {
    const std::size_t o = 3 * (r * width_ + c);
    rgb_[o] = px[0];
    rgb_[o + 1] = px[1];
    rgb_[o + 2] = px[2];
}

namespace {

Diagram from_mat(const cv::Mat& bgr, std::string id) {
    std::vector<std::uint8_t> rgb(static_cast<std::size_t>(bgr.rows) * bgr.cols * 3);
    std::size_t o = 0;
    for (int r = 0; r < bgr.rows; ++r) {
        const auto* row = bgr.ptr<cv::Vec3b>(r);
        for (int c = 0; c < bgr.cols; ++c) {
            rgb[o++] = row[c][2];
            rgb[o++] = row[c][1];
            rgb[o++] = row[c][0];
        }
    }
    return Diagram(std::move(id), static_cast<std::size_t>(bgr.rows),
                   static_cast<std::size_t>(bgr.cols), std::move(rgb));
}

cv::Mat to_mat(const Diagram& d) {
    cv::Mat m(static_cast<int>(d.height()), static_cast<int>(d.width()), CV_8UC3);
    for (std::size_t r = 0; r < d.height(); ++r) {
        auto* row = m.ptr<cv::Vec3b>(static_cast<int>(r));
        for (std::size_t c = 0; c < d.width(); ++c) {
            const Rgb px = d.at(r, c);
            row[c] = cv::Vec3b(px[2], px[1], px[0]);
        }
    }
    return m;
}

}  // namespace

Diagram load_diagram(const std::string& path) {
    cv::Mat m = cv::imread(path, cv::IMREAD_COLOR);
    if (m.empty()) throw IoError("cannot read image: " + path);
    return from_mat(m, path);
}

void save_png(const Diagram& d, const std::string& path) {
    if (!cv::imwrite(path, to_mat(d))) throw IoError("cannot write image: " + path);
}

std::vector<std::uint8_t> encode_png(const Diagram& d) {
    std::vector<std::uint8_t> buf;
    if (!cv::imencode(".png", to_mat(d), buf)) throw IoError("PNG encoding failed");
    return buf;
}

Diagram decode_png(std::span<const std::uint8_t> png, std::string id) {
    const cv::Mat raw(1, static_cast<int>(png.size()), CV_8UC1,
                      const_cast<std::uint8_t*>(png.data()));
    cv::Mat m = cv::imdecode(raw, cv::IMREAD_COLOR);
    if (m.empty()) throw FormatError("PNG decoding failed");
    return from_mat(m, std::move(id));
}

}  // namespace hkidqg
