#include "vismap/frame_scoring.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "vismap/error.hpp"

namespace vismap {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    if (width_ == 0 || height_ == 0) {
        throw ConfigError("image dimensions must be >= 1");
    }
    if (pixels_.size() != width_ * height_) {
        throw ConfigError("image has " + std::to_string(pixels_.size()) + " pixels, expected " +
                          std::to_string(width_) + " x " + std::to_string(height_));
    }
}

double local_entropy_score(const GrayImage& img, std::size_t patch) {
    if (patch == 0) {
        throw ConfigError("entropy patch size must be >= 1");
    }
    if (patch > img.width() || patch > img.height()) {
        throw ConfigError("entropy patch " + std::to_string(patch) + " larger than image " +
                          std::to_string(img.width()) + " x " + std::to_string(img.height()));
    }
    const std::size_t tiles_x = img.width() / patch;
    const std::size_t tiles_y = img.height() / patch;
    const double samples = static_cast<double>(patch * patch);

    double total = 0.0;
    std::array<std::uint32_t, 256> hist{};
    for (std::size_t ty = 0; ty < tiles_y; ++ty) {
        for (std::size_t tx = 0; tx < tiles_x; ++tx) {
            hist.fill(0);
            for (std::size_t y = ty * patch; y < (ty + 1) * patch; ++y) {
                for (std::size_t x = tx * patch; x < (tx + 1) * patch; ++x) {
                    ++hist[img.at(x, y)];
                }
            }
            double h = 0.0;
            for (std::uint32_t c : hist) {
                if (c == 0) continue;
                const double p = c / samples;
                h -= p * std::log2(p);
            }
            total += h / 8.0;
        }
    }
    return total / static_cast<double>(tiles_x * tiles_y);
}

double biased_confidence(double score, double memorability, double b_mem) {
    return score + score * b_mem * memorability;
}

namespace {

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string next_token(std::istream& in) {
    std::string tok;
    char c;
    while (in.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(in, ignored);
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
        } else {
            tok.push_back(c);
        }
    }
    return tok;
}

} // namespace

GrayImage load_pgm(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + file.string());
    }
    const std::string magic = next_token(in);
    if (magic != "P5" && magic != "P2") {
        throw Error(file.string() + ": not a PGM file");
    }
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(next_token(in));
        h = std::stoul(next_token(in));
        maxval = std::stoul(next_token(in));
    } catch (const std::exception&) {
        throw Error(file.string() + ": malformed PGM header");
    }
    if (maxval == 0 || maxval > 255) {
        throw Error(file.string() + ": only 8-bit PGM is supported");
    }
    std::vector<std::uint8_t> px(w * h);
    if (magic == "P5") {
        if (!in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()))) {
            throw Error(file.string() + ": truncated pixel data");
        }
    } else {
        for (auto& p : px) {
            unsigned v;
            if (!(in >> v) || v > maxval) throw Error(file.string() + ": bad ASCII pixel");
            p = static_cast<std::uint8_t>(v);
        }
    }
    if (maxval != 255) {
        for (auto& p : px) p = static_cast<std::uint8_t>((p * 255u + maxval / 2) / maxval);
    }
    return GrayImage(w, h, std::move(px));
}

void write_pgm(const GrayImage& img, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels().data()),
              static_cast<std::streamsize>(img.pixels().size()));
    if (!out) {
        throw Error("cannot write " + file.string());
    }
}

} // namespace vismap
