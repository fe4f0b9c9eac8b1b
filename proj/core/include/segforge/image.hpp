#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace segforge {

/// H x W x 3 float image, interleaved row-major. Values are in [0,1] before
/// normalization and unconstrained after.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> data; // height*width*3

    static Image filled(int height, int width, double value);
    double at(int y, int x, int c) const { return data[static_cast<size_t>((y * width + x) * 3 + c)]; }
    double& at(int y, int x, int c) { return data[static_cast<size_t>((y * width + x) * 3 + c)]; }
    int64_t pixel_count() const { return static_cast<int64_t>(height) * width; }
};

/// 2-D grid of class indices; 0 is the background/unlabeled class.
struct ClassMask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> values; // height*width

    static ClassMask filled(int height, int width, uint8_t value);
    uint8_t at(int y, int x) const { return values[static_cast<size_t>(y * width + x)]; }
    uint8_t& at(int y, int x) { return values[static_cast<size_t>(y * width + x)]; }
    int64_t pixel_count() const { return static_cast<int64_t>(height) * width; }
    uint8_t max_value() const;
};

/// Paired image and mask with a stable identifier (drives seed derivation).
struct ImageSample {
    Image image;
    ClassMask mask;
    std::string id;
};

} // namespace segforge
