#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hkidqg {

using Rgb = std::array<std::uint8_t, 3>;

/// An RGB raster with interleaved 8-bit channels, row-major.
class Diagram {
public:
    Diagram() = default;
    Diagram(std::string id, std::size_t height, std::size_t width, Rgb fill = {0, 0, 0});
    Diagram(std::string id, std::size_t height, std::size_t width, std::vector<std::uint8_t> rgb);

    const std::string& id() const noexcept { return id_; }
    std::size_t height() const noexcept { return height_; }
    std::size_t width() const noexcept { return width_; }

    Rgb at(std::size_t r, std::size_t c) const noexcept;
    void set(std::size_t r, std::size_t c, Rgb px) noexcept;

    std::span<const std::uint8_t> bytes() const noexcept { return rgb_; }

    bool operator==(const Diagram& o) const {
        return height_ == o.height_ && width_ == o.width_ && rgb_ == o.rgb_;
    }

private:
    std::string id_;
    std::size_t height_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint8_t> rgb_;
};

// Image files go through OpenCV (PNG, JPEG, BMP, PPM...).
Diagram load_diagram(const std::string& path);
void save_png(const Diagram& d, const std::string& path);
std::vector<std::uint8_t> encode_png(const Diagram& d);
Diagram decode_png(std::span<const std::uint8_t> png, std::string id = {});

}  // namespace hkidqg
