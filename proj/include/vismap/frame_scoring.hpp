#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace vismap {

/// 8-bit grayscale image, row-major.
class GrayImage {
  public:
    GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

    std::size_t width() const noexcept { return width_; }
    std::size_t height() const noexcept { return height_; }
    std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
    const std::vector<std::uint8_t>& pixels() const noexcept { return pixels_; }

  private:
    std::size_t width_;
    std::size_t height_;
    std::vector<std::uint8_t> pixels_;
};

/// Mean over non-overlapping patch x patch tiles of the tile's 256-bin
/// intensity histogram entropy, in bits divided by 8. Partial tiles at the
/// right and bottom edges are ignored. Result lies in [0,1].
double local_entropy_score(const GrayImage& img, std::size_t patch);

/// score + score * b_mem * memorability. b_mem is signed: negative values make
/// memorable frames look more confident (smaller distance).
double biased_confidence(double score, double memorability, double b_mem);

/// Binary (P5) or ASCII (P2) PGM with maxval <= 255.
GrayImage load_pgm(const std::filesystem::path& file);
void write_pgm(const GrayImage& img, const std::filesystem::path& file);

} // namespace vismap
